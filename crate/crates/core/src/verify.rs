//! Residuals, a-priori bounds, refinement studies and contraction monitoring.

use std::collections::BTreeMap;

use ndarray::{Array2, Zip};
use serde::Serialize;

use crate::constraints::CharacteristicData;
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::goursat::{bootstrap_check, diff_u, diff_v, BootstrapCheck, GoursatGrid, IterationTrace, StripWidthEstimate};
use crate::numerics::cumulative_trapezoid;
use crate::state::{CharState, Geometry, PointCoefficients};

/// Norms below this are reported as exact rather than fitted.
pub const EXACT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub sup: f64,
    /// Root mean square over the nodes.
    pub l2: f64,
    /// Node of the largest magnitude.
    pub at: (usize, usize),
    /// Expected decay order in the grid spacing; 0 means the residual should vanish.
    pub order: f64,
    pub threshold: Option<f64>,
    pub pass: Option<bool>,
}

impl Residual {
    fn from_field(name: &str, a: &Array2<f64>, order: f64) -> Residual {
        let mut sup = 0.0f64;
        let mut at = (0, 0);
        let mut sq = 0.0;
        for (idx, &x) in a.indexed_iter() {
            if x.abs() > sup || x.is_nan() {
                sup = if x.is_nan() { f64::NAN } else { x.abs() };
                at = idx;
            }
            sq += x * x;
        }
        Residual {
            name: name.into(),
            sup,
            l2: (sq / a.len().max(1) as f64).sqrt(),
            at,
            order,
            threshold: None,
            pass: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub du: f64,
    pub dv: f64,
    pub residuals: Vec<Residual>,
}

impl ResidualReport {
    pub fn spacing(&self) -> f64 {
        self.du.max(self.dv)
    }

    pub fn get(&self, name: &str) -> Option<&Residual> {
        self.residuals.iter().find(|r| r.name == name)
    }

    /// Set thresholds C·Δ^order + floor and evaluate them.
    pub fn apply_thresholds(&mut self, c: f64, floor: f64) -> bool {
        let d = self.spacing();
        let mut ok = true;
        for r in &mut self.residuals {
            let th = c * d.powf(r.order) * if r.order == 0.0 { 0.0 } else { 1.0 } + floor;
            let pass = r.sup <= th;
            r.threshold = Some(th);
            r.pass = Some(pass);
            ok &= pass;
        }
        ok
    }
}

/// Residuals at every node, with centered differences in the interior and
/// one-sided second-order differences on the edges:
///
/// * `char_alpha`, `char_beta` — α_v − νF, β_u − μF
/// * `hodograph_plus`, `hodograph_minus` — r_v − c₊t_v, r_u − c₋t_u
/// * `t_mixed` — t_uv + Kν − Lμ
/// * `t_route` — t against its u-integral from the C⁺ data
/// * `r_route` — r against its u-integral r(0,v) + ∫μc₋ du
/// * `mu_definition`, `nu_definition` — μ − t_u, ν − t_v
/// * `boundary` — grid boundary against the characteristic data (must vanish)
pub fn residual_suite(
    g: &GoursatGrid,
    cp: &CharacteristicData,
    cm: &CharacteristicData,
    eos: &EosModel,
    geom: Geometry,
) -> Result<ResidualReport> {
    let (n0, n1) = g.shape();
    if cm.len() < n0 || cp.len() < n1 {
        return Err(Error::InvalidData("characteristic data shorter than the grid".into()));
    }
    let (du, dv) = (g.du(), g.dv());
    let mut f = Array2::zeros((n0, n1));
    let mut cplus = Array2::zeros((n0, n1));
    let mut cminus = Array2::zeros((n0, n1));
    let mut grad = Vec::with_capacity(n0 * n1);
    for i in 0..n0 {
        for j in 0..n1 {
            let c = CharState::new(g.alpha[[i, j]], g.beta[[i, j]]);
            let p = PointCoefficients::at(c, g.r[[i, j]], geom, eos).map_err(|e| e.at_node(i, j))?;
            f[[i, j]] = p.f;
            cplus[[i, j]] = p.c_plus;
            cminus[[i, j]] = p.c_minus;
            grad.push((p.grad, p.c_plus - p.c_minus));
        }
    }
    let (a_u, a_v) = (diff_u(&g.alpha, du), diff_v(&g.alpha, dv));
    let (b_u, b_v) = (diff_u(&g.beta, du), diff_v(&g.beta, dv));
    let (t_u, t_v) = (diff_u(&g.t, du), diff_v(&g.t, dv));
    let (r_u, r_v) = (diff_u(&g.r, du), diff_v(&g.r, dv));
    let t_uv = diff_v(&t_u, dv);

    let char_alpha = Zip::from(&a_v).and(&g.nu).and(&f).map_collect(|&x, &n, &s| x - n * s);
    let char_beta = Zip::from(&b_u).and(&g.mu).and(&f).map_collect(|&x, &m, &s| x - m * s);
    let hod_plus = Zip::from(&r_v).and(&cplus).and(&t_v).map_collect(|&x, &c, &tv| x - c * tv);
    let hod_minus = Zip::from(&r_u).and(&cminus).and(&t_u).map_collect(|&x, &c, &tu| x - c * tu);
    let t_mixed = Array2::from_shape_fn((n0, n1), |(i, j)| {
        let (sg, dc) = grad[i * n1 + j];
        let k = (sg.cp_alpha * a_u[[i, j]] + sg.cp_beta * b_u[[i, j]]) / dc;
        let l = (sg.cm_alpha * a_v[[i, j]] + sg.cm_beta * b_v[[i, j]]) / dc;
        t_uv[[i, j]] + k * g.nu[[i, j]] - l * g.mu[[i, j]]
    });
    let mut t_route = Array2::zeros((n0, n1));
    let mut r_route = Array2::zeros((n0, n1));
    for j in 0..n1 {
        let mu: Vec<f64> = g.mu.column(j).to_vec();
        let mc: Vec<f64> = (0..n0).map(|i| g.mu[[i, j]] * cminus[[i, j]]).collect();
        let it = cumulative_trapezoid(&mu, du);
        let ir = cumulative_trapezoid(&mc, du);
        for i in 0..n0 {
            t_route[[i, j]] = g.t[[i, j]] - (g.t[[0, j]] + it[i]);
            r_route[[i, j]] = g.r[[i, j]] - (g.r[[0, j]] + ir[i]);
        }
    }
    let mu_def = &g.mu - &t_u;
    let nu_def = &g.nu - &t_v;
    let mut boundary = Array2::zeros((n0, n1));
    for ((name_a, a), (side_cm, side_cp)) in g.fields().into_iter().zip([
        (&cm.alpha, &cp.alpha),
        (&cm.beta, &cp.beta),
        (&cm.t, &cp.t),
        (&cm.r, &cp.r),
        (&cm.mu, &cp.mu),
        (&cm.nu, &cp.nu),
    ]) {
        let _ = name_a;
        for i in 0..n0 {
            let d: f64 = a[[i, 0]] - side_cm[i];
            boundary[[i, 0]] = f64::max(boundary[[i, 0]], d.abs());
        }
        for j in 0..n1 {
            let d: f64 = a[[0, j]] - side_cp[j];
            boundary[[0, j]] = f64::max(boundary[[0, j]], d.abs());
        }
    }
    let residuals = vec![
        Residual::from_field("char_alpha", &char_alpha, 2.0),
        Residual::from_field("char_beta", &char_beta, 2.0),
        Residual::from_field("hodograph_plus", &hod_plus, 2.0),
        Residual::from_field("hodograph_minus", &hod_minus, 2.0),
        Residual::from_field("t_mixed", &t_mixed, 2.0),
        Residual::from_field("t_route", &t_route, 2.0),
        Residual::from_field("r_route", &r_route, 2.0),
        Residual::from_field("mu_definition", &mu_def, 2.0),
        Residual::from_field("nu_definition", &nu_def, 2.0),
        Residual::from_field("boundary", &boundary, 0.0),
    ];
    Ok(ResidualReport { du, dv, residuals })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub attained: f64,
    /// bound − attained; negative means violated.
    pub margin: f64,
    pub ok: bool,
}

impl BoundCheck {
    fn new(name: &str, bound: f64, attained: f64) -> BoundCheck {
        let margin = bound - attained;
        BoundCheck {
            name: name.into(),
            bound,
            attained,
            margin,
            ok: margin >= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiBound {
    /// |χ(0)| + ∫₀^{v*} |β⁺′| dv − sup|χ|.
    pub global_margin: f64,
    /// min over v of |χ(0)| + ∫₀^{v} |β⁺′| dv − |χ(v)|.
    pub pointwise_margin: f64,
    pub at: f64,
    /// |χ(0)| − sup|χ|, the equality case for constant β⁺.
    pub constant_data_margin: f64,
}

/// |χ(v)| ≤ |χ(0)| + ∫₀^v |dβ/dv| along C⁺.
pub fn chi_bound(cp: &CharacteristicData) -> ChiBound {
    let chi: Vec<f64> = cp.alpha.iter().zip(&cp.beta).map(|(a, b)| a - b).collect();
    let slope: Vec<f64> = cp.delta.iter().map(|d| d.abs()).collect();
    let total = cumulative_trapezoid(&slope, cp.spacing);
    let chi0 = chi[0].abs();
    let sup = chi.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let (mut pointwise, mut at) = (f64::INFINITY, 0.0);
    for k in 0..chi.len() {
        let m = chi0 + total[k] - chi[k].abs();
        if m < pointwise {
            pointwise = m;
            at = cp.param[k];
        }
    }
    ChiBound {
        global_margin: chi0 + total[total.len() - 1] - sup,
        pointwise_margin: pointwise,
        at,
        constant_data_margin: chi0 - sup,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub chi: ChiBound,
    /// The hypotheses |ν| ≤ l, |α| ≤ A, |β| ≤ B, |δ| ≤ D, ½r_m ≤ r ≤ 3/2 r_M.
    pub hypotheses: Vec<BoundCheck>,
    /// |γ| ≤ G, |μ| ≤ M.
    pub first_order: Vec<BoundCheck>,
    pub bootstrap: BootstrapCheck,
    /// The hypothesis and first-order bounds are guaranteed only for strips of
    /// width at most the recommended h and segment length ε.
    pub within_recommended: bool,
}

impl BoundReport {
    pub fn all_ok(&self) -> bool {
        self.chi.pointwise_margin >= 0.0
            && self.hypotheses.iter().chain(&self.first_order).all(|c| c.ok)
            && self.bootstrap.violations.is_empty()
    }
}

pub fn bound_checks(
    cp: &CharacteristicData,
    _cm: &CharacteristicData,
    est: &StripWidthEstimate,
    g: &GoursatGrid,
) -> BoundReport {
    let sup = |a: &Array2<f64>| a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let delta = diff_v(&g.beta, g.dv());
    let gamma = diff_u(&g.alpha, g.du());
    let r_min = g.r.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = g.r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let hypotheses = vec![
        BoundCheck::new("|nu| <= l", est.l, sup(&g.nu)),
        BoundCheck::new("|alpha| <= A", est.a, sup(&g.alpha)),
        BoundCheck::new("|beta| <= B", est.b, sup(&g.beta)),
        BoundCheck::new("|delta| <= D", est.d, sup(&delta)),
        BoundCheck::new("r >= r_m/2", -0.5 * est.r_m, -r_min),
        BoundCheck::new("r <= 3 r_M/2", 1.5 * est.r_big_m, r_max),
    ];
    let first_order = vec![
        BoundCheck::new("|gamma| <= G", est.g, sup(&gamma)),
        BoundCheck::new("|mu| <= M", est.m, sup(&g.mu)),
    ];
    let width = g.u[g.u.len() - 1] - g.u[0];
    BoundReport {
        chi: chi_bound(cp),
        hypotheses,
        first_order,
        bootstrap: bootstrap_check(g, est),
        within_recommended: width <= est.h_rec * (1.0 + 1e-12),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyStatus {
    Pass,
    Fail,
    /// Every level is at roundoff; no order can be fitted.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyEntry {
    pub norms: Vec<f64>,
    /// log₂ of successive ratios.
    pub orders: Vec<f64>,
    /// Mean of the last two entries of `orders`.
    pub fitted: Option<f64>,
    pub target: f64,
    pub tolerance: f64,
    /// Targets marked as lower bounds pass at any order above target − tolerance.
    pub at_least: bool,
    pub status: StudyStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub spacings: Vec<f64>,
    pub entries: BTreeMap<String, StudyEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Target {
    pub order: f64,
    pub tolerance: f64,
    pub at_least: bool,
}

impl Target {
    pub fn exact(order: f64, tolerance: f64) -> Target {
        Target {
            order,
            tolerance,
            at_least: false,
        }
    }

    pub fn at_least(order: f64, tolerance: f64) -> Target {
        Target {
            order,
            tolerance,
            at_least: true,
        }
    }
}

impl ConvergenceStudy {
    /// Fit orders from per-level norms; levels are ordered coarse to fine with
    /// the spacing halving each time.
    pub fn fit(spacings: Vec<f64>, norms: BTreeMap<String, Vec<f64>>, targets: &BTreeMap<String, Target>) -> Result<ConvergenceStudy> {
        if spacings.len() < 3 {
            return Err(Error::InvalidData(format!("a convergence study needs at least 3 levels, got {}", spacings.len())));
        }
        let mut entries = BTreeMap::new();
        for (name, n) in norms {
            if n.len() != spacings.len() {
                return Err(Error::InvalidData(format!("{name}: {} norms for {} levels", n.len(), spacings.len())));
            }
            let target = targets.get(&name).copied().unwrap_or(Target::exact(2.0, 0.3));
            let orders: Vec<f64> = n.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
            let exact = n.iter().all(|&x| x.abs() < EXACT_FLOOR);
            let (fitted, status) = if exact {
                (None, StudyStatus::Exact)
            } else {
                let tail = &orders[orders.len().saturating_sub(2)..];
                let fit = tail.iter().sum::<f64>() / tail.len() as f64;
                let ok = if target.at_least {
                    fit >= target.order - target.tolerance
                } else {
                    (fit - target.order).abs() <= target.tolerance
                };
                (Some(fit), if ok && fit.is_finite() { StudyStatus::Pass } else { StudyStatus::Fail })
            };
            entries.insert(
                name,
                StudyEntry {
                    norms: n,
                    orders,
                    fitted,
                    target: target.order,
                    tolerance: target.tolerance,
                    at_least: target.at_least,
                    status,
                },
            );
        }
        Ok(ConvergenceStudy { spacings, entries })
    }

    pub fn passed(&self) -> bool {
        self.entries.values().all(|e| e.status != StudyStatus::Fail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub norms: Vec<f64>,
    /// norms[k+1] / norms[k].
    pub ratios: Vec<f64>,
    /// exp of the least-squares slope of ln(norm) against iteration, from
    /// iteration 2 on.
    pub geometric_rate: Option<f64>,
    /// Some ratio from iteration 2 on is ≥ 1.
    pub non_monotone: bool,
    pub max_ratio_from_second: Option<f64>,
    /// The iteration reached a zero difference within two steps.
    pub immediate: bool,
}

pub fn contraction_report(trace: &IterationTrace) -> Result<ContractionReport> {
    let norms = trace.totals();
    let immediate = norms.len() <= 2 && norms.last().is_some_and(|&n| n <= EXACT_FLOOR);
    if norms.len() < 3 && !immediate {
        return Err(Error::InsufficientIterations(norms.len()));
    }
    let ratios: Vec<f64> = norms.windows(2).map(|w| w[1] / w[0]).collect();
    // ratio k compares iteration k+2 with k+1; "from iteration 2" skips the first
    let tail: Vec<f64> = ratios.iter().skip(1).copied().filter(|r| r.is_finite()).collect();
    let max_ratio = tail.iter().copied().reduce(f64::max);
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &n)| n > 0.0)
        .map(|(k, &n)| (k as f64, n.ln()))
        .collect();
    let geometric_rate = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
        (num / den).exp()
    });
    Ok(ContractionReport {
        non_monotone: tail.iter().any(|&r| r >= 1.0),
        max_ratio_from_second: max_ratio,
        norms,
        ratios,
        geometric_rate,
        immediate,
    })
}
