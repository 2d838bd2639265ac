//! From characteristic coordinates to the physical t-r plane.
//!
//! The map (u, v) ↦ (t, r) has Jacobian determinant t_u r_v − t_v r_u, which by
//! the hodograph relations r_u = c₋ t_u, r_v = c₊ t_v equals 2μνη. Where it
//! vanishes the characteristic solution no longer describes a t-r solution.

use ndarray::{Array2, Axis, Zip};
use rayon::prelude::*;
use serde::Serialize;

use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::goursat::{diff_u, diff_v, GoursatGrid};
use crate::state::{from_invariants, CharState, Geometry};

#[derive(Debug, Clone)]
pub struct JacobianField {
    /// 2μνη at each node.
    pub det_analytic: Array2<f64>,
    /// Determinant of the finite-difference Jacobian of (t, r).
    pub det_discrete: Array2<f64>,
}

impl JacobianField {
    pub fn sup_difference(&self) -> f64 {
        Zip::from(&self.det_analytic)
            .and(&self.det_discrete)
            .fold(0.0f64, |m, a, d| m.max((a - d).abs()))
    }
}

fn eta_field(g: &GoursatGrid, eos: &EosModel) -> Result<Array2<f64>> {
    let mut eta = Array2::zeros(g.alpha.raw_dim());
    let rows: Vec<Result<()>> = eta
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(i, mut row)| {
            for j in 0..row.len() {
                let chi = g.alpha[[i, j]] + g.beta[[i, j]];
                row[j] = eos.eta_and_slope(chi).map_err(|e| e.at_node(i, j))?.0;
            }
            Ok(())
        })
        .collect();
    rows.into_iter().collect::<Result<()>>()?;
    Ok(eta)
}

pub fn jacobian_field(g: &GoursatGrid, eos: &EosModel) -> Result<JacobianField> {
    let eta = eta_field(g, eos)?;
    let det_analytic = Zip::from(&g.mu)
        .and(&g.nu)
        .and(&eta)
        .par_map_collect(|&m, &n, &e| 2.0 * m * n * e);
    let (du, dv) = (g.du(), g.dv());
    let (t_u, t_v) = (diff_u(&g.t, du), diff_v(&g.t, dv));
    let (r_u, r_v) = (diff_u(&g.r, du), diff_v(&g.r, dv));
    let det_discrete = Zip::from(&t_u)
        .and(&t_v)
        .and(&r_u)
        .and(&r_v)
        .par_map_collect(|&tu, &tv, &ru, &rv| tu * rv - tv * ru);
    Ok(JacobianField {
        det_analytic,
        det_discrete,
    })
}

/// A node is valid when μ > 0 and ν > 0 there and at every node (i′, j′) with
/// i′ ≤ i, j′ ≤ j: a degenerate node invalidates the quadrant it precedes.
pub fn validity_mask(g: &GoursatGrid) -> Array2<bool> {
    let (n0, n1) = g.shape();
    let mut mask = Array2::from_elem((n0, n1), false);
    for i in 0..n0 {
        for j in 0..n1 {
            let own = g.mu[[i, j]] > 0.0 && g.nu[[i, j]] > 0.0;
            let below = i == 0 || mask[[i - 1, j]];
            let left = j == 0 || mask[[i, j - 1]];
            mask[[i, j]] = own && below && left;
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub rho: f64,
    pub w: f64,
    pub p: f64,
    pub valid: bool,
}

/// Regular raster of cell-centre points over the bounding box of the valid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RasterSpec {
    pub nt: usize,
    pub nr: usize,
}

#[derive(Debug, Clone)]
pub struct Raster {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    /// Indexed (t index, r index); NaN outside the covered region.
    pub rho: Array2<f64>,
    pub w: Array2<f64>,
    pub p: Array2<f64>,
    pub valid: Array2<bool>,
}

#[derive(Debug, Clone)]
pub struct PhysicalField {
    /// One sample per grid node, row-major in (i, j).
    pub samples: Vec<Sample>,
    pub shape: (usize, usize),
    pub raster: Option<Raster>,
}

impl PhysicalField {
    pub fn valid_samples(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.valid)
    }
}

/// Primitive variables at each node. Invalid nodes whose state is outside the
/// equation-of-state range carry NaN.
pub fn to_physical(
    g: &GoursatGrid,
    eos: &EosModel,
    mask: &Array2<bool>,
    raster: Option<RasterSpec>,
) -> Result<PhysicalField> {
    let (n0, n1) = g.shape();
    if mask.dim() != (n0, n1) {
        return Err(Error::InvalidData("mask shape does not match the grid".into()));
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyDomain);
    }
    let rows: Vec<Result<Vec<Sample>>> = (0..n0)
        .into_par_iter()
        .map(|i| {
            (0..n1)
                .map(|j| {
                    let valid = mask[[i, j]];
                    let c = CharState::new(g.alpha[[i, j]], g.beta[[i, j]]);
                    let (rho, w, p) = match from_invariants(c, eos).and_then(|s| Ok((s.rho, s.w, eos.pressure(s.rho)?))) {
                        Ok(v) => v,
                        Err(e) if valid => return Err(e.at_node(i, j)),
                        Err(_) => (f64::NAN, f64::NAN, f64::NAN),
                    };
                    Ok(Sample {
                        t: g.t[[i, j]],
                        r: g.r[[i, j]],
                        rho,
                        w,
                        p,
                        valid,
                    })
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(n0 * n1);
    for row in rows {
        samples.extend(row?);
    }
    let raster = match raster {
        Some(spec) => Some(resample(&samples, (n0, n1), eos, spec)?),
        None => None,
    };
    Ok(PhysicalField {
        samples,
        shape: (n0, n1),
        raster,
    })
}

type Pt = (f64, f64);

/// Winding number of the closed polygon `q` around `p`; non-zero means inside.
fn winding(q: &[Pt; 4], p: Pt) -> i32 {
    let mut wn = 0;
    for k in 0..4 {
        let (a, b) = (q[k], q[(k + 1) % 4]);
        let cross = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
        if a.1 <= p.1 {
            if b.1 > p.1 && cross > 0.0 {
                wn += 1;
            }
        } else if b.1 <= p.1 && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Local coordinates (s, τ) ∈ [0,1]² of `p` in the bilinear quad
/// q = [P₀₀, P₁₀, P₁₁, P₀₁], by Newton iteration.
fn invert_bilinear(q: &[Pt; 4], p: Pt) -> Option<(f64, f64)> {
    let (mut s, mut tau) = (0.5, 0.5);
    for _ in 0..30 {
        let x = |k: usize| (q[k].0, q[k].1);
        let (p00, p10, p11, p01) = (x(0), x(1), x(2), x(3));
        let map = |s: f64, t: f64, c: fn(Pt) -> f64| {
            (1.0 - s) * (1.0 - t) * c(p00) + s * (1.0 - t) * c(p10) + s * t * c(p11) + (1.0 - s) * t * c(p01)
        };
        let fx = map(s, tau, |v| v.0) - p.0;
        let fy = map(s, tau, |v| v.1) - p.1;
        let ds = |c: fn(Pt) -> f64| (1.0 - tau) * (c(p10) - c(p00)) + tau * (c(p11) - c(p01));
        let dt = |c: fn(Pt) -> f64| (1.0 - s) * (c(p01) - c(p00)) + s * (c(p11) - c(p10));
        let (a, b, c, d) = (ds(|v| v.0), dt(|v| v.0), ds(|v| v.1), dt(|v| v.1));
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let step_s = (d * fx - b * fy) / det;
        let step_t = (a * fy - c * fx) / det;
        s -= step_s;
        tau -= step_t;
        if step_s.abs().max(step_t.abs()) < 1e-14 {
            break;
        }
    }
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    s.is_finite().then(|| (clamp(s), clamp(tau)))
}

fn resample(samples: &[Sample], (n0, n1): (usize, usize), eos: &EosModel, spec: RasterSpec) -> Result<Raster> {
    if spec.nt < 1 || spec.nr < 1 {
        return Err(Error::InvalidData(format!("raster needs at least one cell per direction, got {spec:?}")));
    }
    let at = |i: usize, j: usize| &samples[i * n1 + j];
    let valid = samples.iter().filter(|s| s.valid);
    let (mut t_lo, mut t_hi, mut r_lo, mut r_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in valid {
        t_lo = t_lo.min(s.t);
        t_hi = t_hi.max(s.t);
        r_lo = r_lo.min(s.r);
        r_hi = r_hi.max(s.r);
    }
    let dt = (t_hi - t_lo) / spec.nt as f64;
    let dr = (r_hi - r_lo) / spec.nr as f64;
    let t: Vec<f64> = (0..spec.nt).map(|k| t_lo + (k as f64 + 0.5) * dt).collect();
    let r: Vec<f64> = (0..spec.nr).map(|k| r_lo + (k as f64 + 0.5) * dr).collect();

    // bucket every fully valid quad by the raster points inside its bounding box
    let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::new(); spec.nt * spec.nr];
    let index_range = |lo: f64, hi: f64, origin: f64, step: f64, n: usize| {
        if step <= 0.0 {
            return 0..n;
        }
        let a = ((lo - origin) / step - 0.5).ceil().max(0.0) as usize;
        let b = (((hi - origin) / step - 0.5).floor() + 1.0).clamp(0.0, n as f64) as usize;
        a.min(n)..b
    };
    for i in 0..n0.saturating_sub(1) {
        for j in 0..n1.saturating_sub(1) {
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if !corners.iter().all(|s| s.valid) {
                continue;
            }
            let (qt_lo, qt_hi) = corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.t), b.max(s.t)));
            let (qr_lo, qr_hi) = corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.r), b.max(s.r)));
            for kt in index_range(qt_lo, qt_hi, t_lo, dt, spec.nt) {
                for kr in index_range(qr_lo, qr_hi, r_lo, dr, spec.nr) {
                    buckets[kt * spec.nr + kr].push((i, j));
                }
            }
        }
    }

    let cells: Vec<Result<(f64, f64, f64, bool)>> = (0..spec.nt * spec.nr)
        .into_par_iter()
        .map(|k| {
            let p = (t[k / spec.nr], r[k % spec.nr]);
            for &(i, j) in &buckets[k] {
                let c = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
                let q = [(c[0].t, c[0].r), (c[1].t, c[1].r), (c[2].t, c[2].r), (c[3].t, c[3].r)];
                if winding(&q, p) == 0 {
                    continue;
                }
                let Some((s, tau)) = invert_bilinear(&q, p) else {
                    continue;
                };
                let wts = [(1.0 - s) * (1.0 - tau), s * (1.0 - tau), s * tau, (1.0 - s) * tau];
                let rho: f64 = (0..4).map(|m| wts[m] * c[m].rho).sum();
                let w: f64 = (0..4).map(|m| wts[m] * c[m].w).sum();
                return Ok((rho, w, eos.pressure(rho)?, true));
            }
            Ok((f64::NAN, f64::NAN, f64::NAN, false))
        })
        .collect();
    let mut out = Raster {
        rho: Array2::from_elem((spec.nt, spec.nr), f64::NAN),
        w: Array2::from_elem((spec.nt, spec.nr), f64::NAN),
        p: Array2::from_elem((spec.nt, spec.nr), f64::NAN),
        valid: Array2::from_elem((spec.nt, spec.nr), false),
        t,
        r,
    };
    for (k, cell) in cells.into_iter().enumerate() {
        let (rho, w, p, ok) = cell?;
        let idx = (k / spec.nr, k % spec.nr);
        out.rho[idx] = rho;
        out.w[idx] = w;
        out.p[idx] = p;
        out.valid[idx] = ok;
    }
    Ok(out)
}

/// Sup and RMS of the continuity and momentum residuals
///   ρ_t + (ρw)_r + 2ρw/r,   w_t + w w_r + η²ρ_r/ρ
/// at valid nodes whose difference stencil touches only valid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerResiduals {
    pub continuity_sup: f64,
    pub continuity_rms: f64,
    pub momentum_sup: f64,
    pub momentum_rms: f64,
    pub nodes: usize,
}

/// t- and r-derivatives by the chain rule through the inverse of ∂(t, r)/∂(u, v).
pub fn euler_residuals(g: &GoursatGrid, eos: &EosModel, geom: Geometry, mask: &Array2<bool>) -> Result<EulerResiduals> {
    let (n0, n1) = g.shape();
    let mut rho = Array2::zeros((n0, n1));
    let mut w = Array2::zeros((n0, n1));
    let mut eta = Array2::zeros((n0, n1));
    for ((i, j), &ok) in mask.indexed_iter() {
        let c = CharState::new(g.alpha[[i, j]], g.beta[[i, j]]);
        match from_invariants(c, eos) {
            Ok(s) => {
                rho[[i, j]] = s.rho;
                w[[i, j]] = s.w;
                eta[[i, j]] = eos.eta_and_slope(c.chi_dagger())?.0;
            }
            Err(e) if ok => return Err(e.at_node(i, j)),
            Err(_) => {}
        }
    }
    let (du, dv) = (g.du(), g.dv());
    let d = |a: &Array2<f64>| (diff_u(a, du), diff_v(a, dv));
    let (t_u, t_v) = d(&g.t);
    let (r_u, r_v) = d(&g.r);
    let (rho_u, rho_v) = d(&rho);
    let (w_u, w_v) = d(&w);

    let stencil_ok = |i: usize, j: usize| {
        let near = |a: usize, n: usize| {
            if a == 0 {
                0..=2.min(n - 1)
            } else if a == n - 1 {
                a.saturating_sub(2)..=a
            } else {
                a - 1..=a + 1
            }
        };
        near(i, n0).all(|ii| mask[[ii, j]]) && near(j, n1).all(|jj| mask[[i, jj]])
    };
    let mut out = EulerResiduals {
        continuity_sup: 0.0,
        continuity_rms: 0.0,
        momentum_sup: 0.0,
        momentum_rms: 0.0,
        nodes: 0,
    };
    for i in 0..n0 {
        for j in 0..n1 {
            if !stencil_ok(i, j) {
                continue;
            }
            let jac = t_u[[i, j]] * r_v[[i, j]] - t_v[[i, j]] * r_u[[i, j]];
            let dt = |fu: f64, fv: f64| (fu * r_v[[i, j]] - fv * r_u[[i, j]]) / jac;
            let dr = |fu: f64, fv: f64| (fv * t_u[[i, j]] - fu * t_v[[i, j]]) / jac;
            let (p, q, e, r) = (rho[[i, j]], w[[i, j]], eta[[i, j]], g.r[[i, j]]);
            let rho_t = dt(rho_u[[i, j]], rho_v[[i, j]]);
            let rho_r = dr(rho_u[[i, j]], rho_v[[i, j]]);
            let w_t = dt(w_u[[i, j]], w_v[[i, j]]);
            let w_r = dr(w_u[[i, j]], w_v[[i, j]]);
            let source = match geom {
                Geometry::Spherical => 2.0 * p * q / r,
                Geometry::Plane => 0.0,
            };
            let cont = rho_t + q * rho_r + p * w_r + source;
            let mom = w_t + q * w_r + e * e * rho_r / p;
            out.continuity_sup = out.continuity_sup.max(cont.abs());
            out.momentum_sup = out.momentum_sup.max(mom.abs());
            out.continuity_rms += cont * cont;
            out.momentum_rms += mom * mom;
            out.nodes += 1;
        }
    }
    if out.nodes > 0 {
        out.continuity_rms = (out.continuity_rms / out.nodes as f64).sqrt();
        out.momentum_rms = (out.momentum_rms / out.nodes as f64).sqrt();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goursat::tests::data;
    use crate::goursat::{picard_corner, GridSpec, SolverOptions};

    fn gas() -> EosModel {
        EosModel::polytropic(2.0, 0.5, 0.0, (1e-8, 1e8)).unwrap()
    }

    fn solve(beta: impl Fn(f64) -> f64, alpha: impl Fn(f64) -> f64, spec: GridSpec, geom: Geometry) -> GoursatGrid {
        let (cp, cm) = data(beta, alpha, 0.25, 1.0, spec, geom);
        picard_corner(&cp, &cm, spec, &gas(), geom, SolverOptions::default()).unwrap().0
    }

    #[test]
    fn static_determinant_is_two() {
        let g = solve(|_| 2.0, |_| 2.0, GridSpec { nu: 8, nv: 16 }, Geometry::Spherical);
        let j = jacobian_field(&g, &gas()).unwrap();
        for (&a, &d) in j.det_analytic.iter().zip(&j.det_discrete) {
            assert!((a - 2.0).abs() < 1e-12 && (d - 2.0).abs() < 1e-10, "{a} {d}");
        }
    }

    #[test]
    fn determinant_gap_is_second_order() {
        let gap = |n: usize| {
            let g = solve(|v| 2.0 + 0.1 * v.sin(), |u| 2.0 + 0.1 * u, GridSpec { nu: n, nv: 4 * n }, Geometry::Spherical);
            jacobian_field(&g, &gas()).unwrap().sup_difference()
        };
        let d: Vec<f64> = [4, 8, 16].into_iter().map(gap).collect();
        let ratio = d[1] / d[2];
        assert!((3.0..5.0).contains(&ratio), "{d:?}");
    }

    fn with_mu(mu: Array2<f64>) -> GoursatGrid {
        let (n0, n1) = mu.dim();
        let z = Array2::zeros((n0, n1));
        GoursatGrid {
            u: (0..n0).map(|i| i as f64).collect(),
            v: (0..n1).map(|j| j as f64).collect(),
            alpha: z.clone(),
            beta: z.clone(),
            t: z.clone(),
            r: z,
            nu: Array2::ones((n0, n1)),
            valid: Array2::from_elem((n0, n1), true),
            mu,
        }
    }

    #[test]
    fn a_degenerate_node_removes_its_quadrant() {
        let mut mu = Array2::ones((6, 7));
        mu[[2, 3]] = 0.0;
        let m = validity_mask(&with_mu(mu));
        for ((i, j), &ok) in m.indexed_iter() {
            assert_eq!(ok, !(i >= 2 && j >= 3), "({i}, {j})");
        }
        assert!(validity_mask(&with_mu(Array2::ones((3, 3)))).iter().all(|&x| x));
    }

    #[test]
    fn static_field_is_at_rest() {
        let g = solve(|_| 2.0, |_| 2.0, GridSpec { nu: 8, nv: 16 }, Geometry::Spherical);
        let mask = validity_mask(&g);
        let f = to_physical(&g, &gas(), &mask, Some(RasterSpec { nt: 12, nr: 10 })).unwrap();
        for (k, s) in f.samples.iter().enumerate() {
            let (i, j) = (k / 17, k % 17);
            assert!(s.valid);
            assert!((s.rho - 1.0).abs() < 1e-12 && s.w.abs() < 1e-14 && (s.p - 0.5).abs() < 1e-12);
            assert!((s.t - (g.u[i] + g.v[j])).abs() < 1e-12 && (s.r - (1.0 + g.v[j] - g.u[i])).abs() < 1e-12);
        }
        let r = f.raster.unwrap();
        // the image is a parallelogram covering 0.5 / 1.25² of the bounding box
        let covered = r.valid.iter().filter(|&&v| v).count() as f64 / 120.0;
        assert!((covered - 0.32).abs() < 0.06, "{covered}");
        for (&rho, &ok) in r.rho.iter().zip(&r.valid) {
            if ok {
                assert!((rho - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_mask_is_an_error() {
        let g = solve(|_| 2.0, |_| 2.0, GridSpec { nu: 2, nv: 2 }, Geometry::Spherical);
        let mask = Array2::from_elem(g.shape(), false);
        assert!(matches!(to_physical(&g, &gas(), &mask, None), Err(Error::EmptyDomain)));
    }

    #[test]
    fn plane_data_at_rest_stay_at_rest() {
        let g = solve(|_| 2.0, |_| 2.0, GridSpec { nu: 4, nv: 8 }, Geometry::Plane);
        let f = to_physical(&g, &gas(), &validity_mask(&g), None).unwrap();
        assert!(f.samples.iter().all(|s| s.w == 0.0));
    }

    #[test]
    fn raster_interpolates_linear_fields_exactly() {
        // a sheared but affine mesh: bilinear resampling of an affine field is exact
        let (n0, n1) = (5, 6);
        let samples: Vec<Sample> = (0..n0 * n1)
            .map(|k| {
                let (i, j) = ((k / n1) as f64, (k % n1) as f64);
                let (t, r) = (i + j, 2.0 + 0.5 * j - 0.3 * i);
                Sample {
                    t,
                    r,
                    rho: 1.0 + 0.1 * t + 0.05 * r,
                    w: 0.2 * t - 0.1 * r,
                    p: 0.0,
                    valid: true,
                }
            })
            .collect();
        let ras = resample(&samples, (n0, n1), &gas(), RasterSpec { nt: 9, nr: 7 }).unwrap();
        let mut seen = 0;
        for ((a, b), &ok) in ras.valid.indexed_iter() {
            if ok {
                seen += 1;
                let (t, r) = (ras.t[a], ras.r[b]);
                assert!((ras.rho[[a, b]] - (1.0 + 0.1 * t + 0.05 * r)).abs() < 1e-12);
                assert!((ras.w[[a, b]] - (0.2 * t - 0.1 * r)).abs() < 1e-12);
            }
        }
        assert!(seen > 10);
    }

    #[test]
    fn euler_residuals_shrink_under_refinement() {
        let res = |n: usize| {
            let g = solve(|v| 2.0 + 0.1 * v.sin(), |u| 2.0 + 0.1 * u, GridSpec { nu: n, nv: 4 * n }, Geometry::Spherical);
            euler_residuals(&g, &gas(), Geometry::Spherical, &validity_mask(&g)).unwrap()
        };
        let (a, b) = (res(8), res(16));
        assert!(b.nodes > a.nodes);
        assert!(a.continuity_sup / b.continuity_sup > 2.0, "{a:?} {b:?}");
        assert!(a.momentum_sup / b.momentum_sup > 2.0, "{a:?} {b:?}");
    }
}
