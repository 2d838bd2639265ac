//! Goursat problem on the strip 0 ≤ u ≤ h, 0 ≤ v ≤ v*.
//!
//! The solution is the fixed point of an integral-equation iteration: given
//! (α, β), the t-equation ∂²t/∂u∂v + Kν − Lμ = 0 is solved for μ = ∂t/∂u and
//! ν = ∂t/∂v through its exponential integrating-factor form, t and r follow
//! by v-integration, and the characteristic equations are integrated to give
//! the next (α, β). Quadrature is composite trapezoid throughout.

mod estimate;
mod marching;

pub use estimate::{estimate_strip_width, BoundFlag, StripWidthEstimate};
pub use marching::marching_oracle;

use ndarray::{Array2, ArrayViewMut1, Axis};
use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::CharacteristicData;
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::numerics::derivative_2nd_into;
use crate::state::{CharState, Geometry, PointCoefficients};

/// Number of intervals in u and v.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
        }
    }
}

/// Fields on the characteristic grid; index (i, j) is (uᵢ, vⱼ).
#[derive(Debug, Clone)]
pub struct GoursatGrid {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub alpha: Array2<f64>,
    pub beta: Array2<f64>,
    pub t: Array2<f64>,
    pub r: Array2<f64>,
    pub mu: Array2<f64>,
    pub nu: Array2<f64>,
    /// μ > 0 and ν > 0 at the node.
    pub valid: Array2<bool>,
}

impl GoursatGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.u.len(), self.v.len())
    }

    pub fn du(&self) -> f64 {
        spacing(&self.u)
    }

    pub fn dv(&self) -> f64 {
        spacing(&self.v)
    }

    /// Named fields in a fixed order, for output.
    pub fn fields(&self) -> [(&'static str, &Array2<f64>); 6] {
        [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("t", &self.t),
            ("r", &self.r),
            ("mu", &self.mu),
            ("nu", &self.nu),
        ]
    }
}

pub(crate) fn spacing(x: &[f64]) -> f64 {
    if x.len() < 2 {
        0.0
    } else {
        (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64
    }
}

/// Data along one boundary line of a sub-rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl Line {
    fn from_data(cd: &CharacteristicData, range: std::ops::Range<usize>) -> Line {
        Line {
            alpha: cd.alpha[range.clone()].to_vec(),
            beta: cd.beta[range.clone()].to_vec(),
            t: cd.t[range.clone()].to_vec(),
            r: cd.r[range.clone()].to_vec(),
            mu: cd.mu[range.clone()].to_vec(),
            nu: cd.nu[range].to_vec(),
        }
    }

    /// Row j of a solved grid.
    pub fn grid_row(g: &GoursatGrid, j: usize) -> Line {
        let take = |a: &Array2<f64>| a.column(j).to_vec();
        Line {
            alpha: take(&g.alpha),
            beta: take(&g.beta),
            t: take(&g.t),
            r: take(&g.r),
            mu: take(&g.mu),
            nu: take(&g.nu),
        }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// Boundary of a sub-rectangle: the bottom row v = v₀ (indexed by u) and the
/// left column u = 0 (indexed by v). Both include the corner.
#[derive(Debug, Clone)]
pub struct Boundary {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub bottom: Line,
    pub left: Line,
}

impl Boundary {
    /// The corner rectangle spanned by the first `spec.nu + 1` samples of C⁻
    /// and `spec.nv + 1` samples of C⁺.
    pub fn corner(cp: &CharacteristicData, cm: &CharacteristicData, spec: GridSpec) -> Result<Boundary> {
        if spec.nu < 1 || spec.nv < 1 {
            return Err(Error::InvalidData(format!("grid needs at least one interval per direction, got {spec:?}")));
        }
        if cm.len() < spec.nu + 1 {
            return Err(Error::InvalidData(format!(
                "C- data has {} samples, the grid needs {}",
                cm.len(),
                spec.nu + 1
            )));
        }
        if cp.len() < spec.nv + 1 {
            return Err(Error::InvalidData(format!(
                "C+ data has {} samples, the grid needs {}",
                cp.len(),
                spec.nv + 1
            )));
        }
        Ok(Boundary {
            u: cm.param[..=spec.nu].to_vec(),
            v: cp.param[..=spec.nv].to_vec(),
            bottom: Line::from_data(cm, 0..spec.nu + 1),
            left: Line::from_data(cp, 0..spec.nv + 1),
        })
    }

    fn check(&self) -> Result<()> {
        if self.u.len() < 2 || self.v.len() < 2 {
            return Err(Error::InvalidData("boundary lines need at least two nodes".into()));
        }
        if self.bottom.len() != self.u.len() || self.left.len() != self.v.len() {
            return Err(Error::InvalidData("boundary line lengths do not match the grid".into()));
        }
        Ok(())
    }
}

/// Successive-difference norms of one iteration, each scaled by 1 + sup|field|.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct IterationNorms {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_u: f64,
    pub beta_v: f64,
    pub mu: f64,
    pub nu: f64,
    /// max over α, β, μ, ν — the stopping quantity.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapCheck {
    pub sup_nu: f64,
    pub sup_alpha: f64,
    pub sup_beta: f64,
    pub sup_delta: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Names of the violated inequalities.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace {
    pub norms: Vec<IterationNorms>,
    pub iterations: usize,
    pub converged: bool,
    /// Strict bootstrap inequalities on the segment, when bounds were supplied.
    pub bootstrap: Option<BootstrapCheck>,
}

impl IterationTrace {
    pub fn totals(&self) -> Vec<f64> {
        self.norms.iter().map(|n| n.total).collect()
    }
}

/// Geometry derived from one (α, β) iterate.
struct Derived {
    mu: Array2<f64>,
    nu: Array2<f64>,
    t: Array2<f64>,
    r: Array2<f64>,
    f: Array2<f64>,
}

/// Apply `f` to each row (fixed i) in parallel; the first error in row order wins.
fn par_rows<F>(a: &mut Array2<f64>, f: F) -> Result<()>
where
    F: Fn(usize, ArrayViewMut1<f64>) -> Result<()> + Sync,
{
    let results: Vec<Result<()>> = a
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(i, row)| f(i, row))
        .collect();
    results.into_iter().collect()
}

/// Same as [`par_rows`] for columns (fixed j).

pub(crate) fn diff_u(a: &Array2<f64>, du: f64) -> Array2<f64> {
    let mut out = Array2::zeros(a.raw_dim());
    let n = a.nrows();
    out.axis_iter_mut(Axis(1))
        .into_par_iter()
        .zip(a.axis_iter(Axis(1)))
        .for_each(|(mut o, col)| {
            let mut buf = vec![0.0; n];
            derivative_2nd_into(col.iter().copied(), n, du, &mut buf);
            o.assign(&ndarray::ArrayView1::from(&buf));
        });
    out
}

pub(crate) fn diff_v(a: &Array2<f64>, dv: f64) -> Array2<f64> {
    let mut out = Array2::zeros(a.raw_dim());
    let n = a.ncols();
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(a.axis_iter(Axis(0)))
        .for_each(|(mut o, row)| {
            let mut buf = vec![0.0; n];
            derivative_2nd_into(row.iter().copied(), n, dv, &mut buf);
            o.assign(&ndarray::ArrayView1::from(&buf));
        });
    out
}

/// out(u, v) = bottom(u) + [left(v) − left(v₀)] + ∫ (g(u, v′) − g(0, v′)) dv′.
///
/// Since left(v) − left(v₀) is the exact v-integral of g along u = 0, this is
/// the plain v-integral of g from the bottom row; subtracting the boundary
/// integrand keeps the interior consistent with the (more accurate) boundary
/// data, so u-differences near u = 0 carry no quadrature mismatch.
fn integrate_v(bottom: &[f64], left: &[f64], g: &Array2<f64>, dv: f64) -> Array2<f64> {
    let (n0, n1) = g.dim();
    let mut out = Array2::zeros((n0, n1));
    out.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        let mut acc = 0.0;
        row[0] = bottom[i];
        for j in 1..n1 {
            let prev = g[[i, j - 1]] - g[[0, j - 1]];
            let cur = g[[i, j]] - g[[0, j]];
            acc += 0.5 * dv * (prev + cur);
            row[j] = bottom[i] + (left[j] - left[0]) + acc;
        }
    });
    pin(&mut out, bottom, left);
    out
}

/// The u-direction counterpart of [`integrate_v`], anchored on the left column.
fn integrate_u(bottom: &[f64], left: &[f64], g: &Array2<f64>, du: f64) -> Array2<f64> {
    let (n0, n1) = g.dim();
    let mut out = Array2::zeros((n0, n1));
    out.axis_iter_mut(Axis(1)).into_par_iter().enumerate().for_each(|(j, mut col)| {
        let mut acc = 0.0;
        col[0] = left[j];
        for i in 1..n0 {
            let prev = g[[i - 1, j]] - g[[i - 1, 0]];
            let cur = g[[i, j]] - g[[i, 0]];
            acc += 0.5 * du * (prev + cur);
            col[i] = left[j] + (bottom[i] - bottom[0]) + acc;
        }
    });
    pin(&mut out, bottom, left);
    out
}

fn derive(
    alpha: &Array2<f64>,
    beta: &Array2<f64>,
    b: &Boundary,
    eos: &EosModel,
    geom: Geometry,
) -> Result<Derived> {
    let (n0, n1) = alpha.dim();
    let du = spacing(&b.u);
    let dv = spacing(&b.v);

    // η, η′ per node
    let mut eta = Array2::zeros((n0, n1));
    let mut slope = Array2::zeros((n0, n1));
    {
        let results: Vec<Result<()>> = eta
            .axis_iter_mut(Axis(0))
            .into_par_iter()
            .zip(slope.axis_iter_mut(Axis(0)))
            .enumerate()
            .map(|(i, (mut e, mut s))| {
                for j in 0..n1 {
                    let chi = alpha[[i, j]] + beta[[i, j]];
                    let (x, y) = eos.eta_and_slope(chi).map_err(|err| err.at_node(i, j))?;
                    e[j] = x;
                    s[j] = y;
                }
                Ok(())
            })
            .collect();
        results.into_iter().collect::<Result<()>>()?;
    }

    // K = ∂c₊/∂u / (c₊−c₋), L = ∂c₋/∂v / (c₊−c₋)
    let (au, bu) = (diff_u(alpha, du), diff_u(beta, du));
    let (av, bv) = (diff_v(alpha, dv), diff_v(beta, dv));
    let mut k = Array2::zeros((n0, n1));
    let mut l = Array2::zeros((n0, n1));
    ndarray::Zip::from(&mut k)
        .and(&eta)
        .and(&slope)
        .and(&au)
        .and(&bu)
        .par_for_each(|k, &e, &s, &au, &bu| *k = ((0.5 + s) * au + (s - 0.5) * bu) / (2.0 * e));
    ndarray::Zip::from(&mut l)
        .and(&eta)
        .and(&slope)
        .and(&av)
        .and(&bv)
        .par_for_each(|l, &e, &s, &av, &bv| *l = ((0.5 - s) * av - (0.5 + s) * bv) / (2.0 * e));

    let (mu, nu) = solve_mu_nu(&k, &l, b, du, dv);

    // t and r by v-integration from the bottom row
    let t = integrate_v(&b.bottom.t, &b.left.t, &nu, dv);
    let nu_cp = ndarray::Zip::from(&nu)
        .and(alpha)
        .and(beta)
        .and(&eta)
        .par_map_collect(|&n, &a, &b, &e| n * (0.5 * (a - b) + e));
    let r = integrate_v(&b.bottom.r, &b.left.r, &nu_cp, dv);

    let mut f = Array2::zeros((n0, n1));
    par_rows(&mut f, |i, mut row| {
        for j in 0..n1 {
            let radius = r[[i, j]];
            if !(radius > 0.0) {
                return Err(Error::NonPositiveRadius {
                    r: radius,
                    param: b.v[j],
                }
                .at_node(i, j));
            }
            let c = CharState::new(alpha[[i, j]], beta[[i, j]]);
            row[j] = PointCoefficients::from_eta(c, radius, eta[[i, j]], slope[[i, j]], geom).f;
        }
        Ok(())
    })?;
    Ok(Derived { mu, nu, t, r, f })
}

pub(crate) fn pin(a: &mut Array2<f64>, bottom: &[f64], left: &[f64]) {
    a.column_mut(0).assign(&ndarray::ArrayView1::from(bottom));
    a.row_mut(0).assign(&ndarray::ArrayView1::from(left));
}

/// Discrete form of the integrating-factor equations for μ (along v) and ν
/// (along u). Each node couples to itself only through the trapezoid end
/// weights, which leaves a 2×2 linear solve; nodes are visited row by row.
fn solve_mu_nu(k: &Array2<f64>, l: &Array2<f64>, b: &Boundary, du: f64, dv: f64) -> (Array2<f64>, Array2<f64>) {
    let (n0, n1) = k.dim();
    let mut mu = Array2::zeros((n0, n1));
    let mut nu = Array2::zeros((n0, n1));
    pin(&mut mu, &b.bottom.mu, &b.left.mu);
    pin(&mut nu, &b.bottom.nu, &b.left.nu);
    let a = 0.5 * dv;
    let c = 0.5 * du;
    // per-column state of the u-integrals: exponent and running integral
    let mut kappa = vec![0.0; n1];
    let mut col_int = vec![0.0; n1];
    for i in 1..n0 {
        let mut lambda = 0.0;
        let mut row_int = 0.0;
        let mut x_prev = k[[i, 0]] * nu[[i, 0]];
        for j in 1..n1 {
            let dl = a * (l[[i, j - 1]] + l[[i, j]]);
            lambda += dl;
            let row_carry = dl.exp() * (row_int + a * x_prev);
            let p = lambda.exp() * mu[[i, 0]] - row_carry;

            let dk = c * (k[[i - 1, j]] + k[[i, j]]);
            kappa[j] += dk;
            let y_prev = l[[i - 1, j]] * mu[[i - 1, j]];
            let col_carry = (-dk).exp() * (col_int[j] + c * y_prev);
            let q = (-kappa[j]).exp() * nu[[0, j]] + col_carry;

            let (kk, ll) = (k[[i, j]], l[[i, j]]);
            let m = (p - a * kk * q) / (1.0 + a * c * kk * ll);
            let n = q + c * ll * m;
            mu[[i, j]] = m;
            nu[[i, j]] = n;
            row_int = row_carry + a * kk * n;
            col_int[j] = col_carry + c * ll * m;
            x_prev = kk * n;
        }
    }
    (mu, nu)
}

fn update(d: &Derived, b: &Boundary) -> Result<(Array2<f64>, Array2<f64>)> {
    let du = spacing(&b.u);
    let dv = spacing(&b.v);
    let nu_f = ndarray::Zip::from(&d.nu).and(&d.f).par_map_collect(|&n, &f| n * f);
    let mu_f = ndarray::Zip::from(&d.mu).and(&d.f).par_map_collect(|&m, &f| m * f);
    let alpha = integrate_v(&b.bottom.alpha, &b.left.alpha, &nu_f, dv);
    let beta = integrate_u(&b.bottom.beta, &b.left.beta, &mu_f, du);
    Ok((alpha, beta))
}

fn scaled_diff(new: &Array2<f64>, old: &Array2<f64>) -> f64 {
    let scale = 1.0 + new.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let d = ndarray::Zip::from(new)
        .and(old)
        .fold(0.0f64, |m, a, b| m.max((a - b).abs()));
    d / scale
}

/// Picard iteration on a general sub-rectangle. On success the returned grid
/// is the last (α, β) iterate together with the μ, ν, t, r it induces.
pub fn picard(
    b: &Boundary,
    eos: &EosModel,
    geom: Geometry,
    opts: SolverOptions,
) -> Result<(GoursatGrid, IterationTrace)> {
    b.check()?;
    let (n0, n1) = (b.u.len(), b.v.len());
    let du = spacing(&b.u);
    let dv = spacing(&b.v);
    // additive first guess: matches both boundary lines exactly
    let blend = |bottom: &[f64], left: &[f64]| {
        let mut a = Array2::from_shape_fn((n0, n1), |(i, j)| bottom[i] + (left[j] - left[0]));
        pin(&mut a, bottom, left);
        a
    };
    let mut alpha = blend(&b.bottom.alpha, &b.left.alpha);
    let mut beta = blend(&b.bottom.beta, &b.left.beta);
    let mut mu_prev = blend(&b.bottom.mu, &b.left.mu);
    let mut nu_prev = blend(&b.bottom.nu, &b.left.nu);
    let mut au_prev = diff_u(&alpha, du);
    let mut bv_prev = diff_v(&beta, dv);

    let mut trace = IterationTrace {
        norms: Vec::new(),
        iterations: 0,
        converged: false,
        bootstrap: None,
    };
    for _ in 0..opts.max_iter {
        let d = derive(&alpha, &beta, b, eos, geom)?;
        let (a_new, b_new) = update(&d, b)?;
        let au = diff_u(&a_new, du);
        let bv = diff_v(&b_new, dv);
        let mut n = IterationNorms {
            alpha: scaled_diff(&a_new, &alpha),
            beta: scaled_diff(&b_new, &beta),
            alpha_u: scaled_diff(&au, &au_prev),
            beta_v: scaled_diff(&bv, &bv_prev),
            mu: scaled_diff(&d.mu, &mu_prev),
            nu: scaled_diff(&d.nu, &nu_prev),
            total: 0.0,
        };
        n.total = n.alpha.max(n.beta).max(n.mu).max(n.nu);
        if !n.total.is_finite() {
            return Err(Error::NoConvergence {
                max_iter: opts.max_iter,
                last_norm: n.total,
                history: trace.totals(),
            });
        }
        trace.norms.push(n);
        trace.iterations += 1;
        alpha = a_new;
        beta = b_new;
        au_prev = au;
        bv_prev = bv;
        mu_prev = d.mu;
        nu_prev = d.nu;
        if n.total < opts.tol {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        return Err(Error::NoConvergence {
            max_iter: opts.max_iter,
            last_norm: trace.norms.last().map_or(f64::NAN, |n| n.total),
            history: trace.totals(),
        });
    }
    let d = derive(&alpha, &beta, b, eos, geom)?;
    let valid = ndarray::Zip::from(&d.mu).and(&d.nu).map_collect(|&m, &n| m > 0.0 && n > 0.0);
    let grid = GoursatGrid {
        u: b.u.clone(),
        v: b.v.clone(),
        alpha,
        beta,
        t: d.t,
        r: d.r,
        mu: d.mu,
        nu: d.nu,
        valid,
    };
    Ok((grid, trace))
}

/// Picard iteration on the corner rectangle [0, nu·Δu] × [0, nv·Δv], where the
/// spacings are those of the C⁻ and C⁺ samples.
pub fn picard_corner(
    cp: &CharacteristicData,
    cm: &CharacteristicData,
    spec: GridSpec,
    eos: &EosModel,
    geom: Geometry,
    opts: SolverOptions,
) -> Result<(GoursatGrid, IterationTrace)> {
    let b = Boundary::corner(cp, cm, spec)?;
    picard(&b, eos, geom, opts)
}

/// Segment boundaries (as v-indices) splitting `nv` intervals into `segments` parts.
pub fn segment_breaks(nv: usize, segments: usize) -> Vec<usize> {
    let s = segments.clamp(1, nv.max(1));
    (0..=s).map(|k| (k * nv + s / 2) / s).collect::<Vec<_>>()
}

/// Default segment count: ⌈v*/ε_rec⌉, limited so every segment keeps at least
/// two v-intervals.
pub fn default_segments(v_star: f64, eps_rec: f64, nv: usize) -> usize {
    let cap = (nv / 2).max(1);
    if !(eps_rec > 0.0) || !eps_rec.is_finite() {
        return 1;
    }
    ((v_star / eps_rec).ceil() as usize).clamp(1, cap)
}

/// Solve on the full strip by successive corner problems: segment k uses the
/// top row of segment k−1 as its bottom boundary and the matching slice of
/// the C⁺ data as its left boundary.
pub fn extend_strip(
    cp: &CharacteristicData,
    cm: &CharacteristicData,
    spec: GridSpec,
    eos: &EosModel,
    geom: Geometry,
    segments: usize,
    opts: SolverOptions,
    bounds: Option<&StripWidthEstimate>,
) -> Result<(GoursatGrid, Vec<IterationTrace>)> {
    if segments < 1 {
        return Err(Error::InvalidData("segments must be at least 1".into()));
    }
    let full = Boundary::corner(cp, cm, spec)?;
    let breaks = segment_breaks(spec.nv, segments);
    let n0 = spec.nu + 1;
    let n1 = spec.nv + 1;
    let mut out = GoursatGrid {
        u: full.u.clone(),
        v: full.v.clone(),
        alpha: Array2::zeros((n0, n1)),
        beta: Array2::zeros((n0, n1)),
        t: Array2::zeros((n0, n1)),
        r: Array2::zeros((n0, n1)),
        mu: Array2::zeros((n0, n1)),
        nu: Array2::zeros((n0, n1)),
        valid: Array2::from_elem((n0, n1), false),
    };
    let mut traces = Vec::new();
    let mut bottom = full.bottom.clone();
    for (s, w) in breaks.windows(2).enumerate() {
        let (j0, j1) = (w[0], w[1]);
        let sub = |x: &Vec<f64>| x[j0..=j1].to_vec();
        let b = Boundary {
            u: full.u.clone(),
            v: full.v[j0..=j1].to_vec(),
            bottom: bottom.clone(),
            left: Line {
                alpha: sub(&full.left.alpha),
                beta: sub(&full.left.beta),
                t: sub(&full.left.t),
                r: sub(&full.left.r),
                mu: sub(&full.left.mu),
                nu: sub(&full.left.nu),
            },
        };
        let (g, mut tr) = picard(&b, eos, geom, opts).map_err(|e| e.in_segment(s))?;
        if let Some(est) = bounds {
            tr.bootstrap = Some(bootstrap_check(&g, est));
        }
        for (dst, src) in [
            (&mut out.alpha, &g.alpha),
            (&mut out.beta, &g.beta),
            (&mut out.t, &g.t),
            (&mut out.r, &g.r),
            (&mut out.mu, &g.mu),
            (&mut out.nu, &g.nu),
        ] {
            dst.slice_mut(ndarray::s![.., j0..=j1]).assign(src);
        }
        out.valid.slice_mut(ndarray::s![.., j0..=j1]).assign(&g.valid);
        bottom = Line::grid_row(&g, j1 - j0);
        traces.push(tr);
    }
    Ok((out, traces))
}

/// The strict inequalities |ν| < l, |α| < A, |β| < B, |δ| < D,
/// ½r_m < r < 3/2·r_M over one grid.
pub fn bootstrap_check(g: &GoursatGrid, est: &StripWidthEstimate) -> BootstrapCheck {
    let sup = |a: &Array2<f64>| a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let delta = diff_v(&g.beta, g.dv());
    let r_min = g.r.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = g.r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut c = BootstrapCheck {
        sup_nu: sup(&g.nu),
        sup_alpha: sup(&g.alpha),
        sup_beta: sup(&g.beta),
        sup_delta: sup(&delta),
        r_min,
        r_max,
        violations: Vec::new(),
    };
    // a bound of zero is attained by identically vanishing fields (static data)
    let below = |x: f64, bound: f64| x < bound || (bound == 0.0 && x == 0.0);
    let checks = [
        ("|nu| < l", below(c.sup_nu, est.l)),
        ("|alpha| < A", below(c.sup_alpha, est.a)),
        ("|beta| < B", below(c.sup_beta, est.b)),
        ("|delta| < D", below(c.sup_delta, est.d)),
        ("r > r_m/2", r_min > 0.5 * est.r_m),
        ("r < 3 r_M/2", r_max < 1.5 * est.r_big_m),
    ];
    c.violations = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.to_string()).collect();
    c
}
