//! End-to-end runs of a scenario: constraints → estimate → strip → t-r plane.

use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::{Array2, Zip};
use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::{solve_cminus, solve_cplus, CharacteristicData, FreeData, GuardHit};
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::goursat::{
    default_segments, estimate_strip_width, extend_strip, marching_oracle, GoursatGrid, GridSpec, IterationTrace,
    StripWidthEstimate,
};
use crate::hodograph::{euler_residuals, jacobian_field, to_physical, validity_mask, EulerResiduals, PhysicalField};
use crate::scenario::{Auto, Scenario};
use crate::state::Geometry;
use crate::verify::{
    bound_checks, contraction_report, residual_suite, BoundReport, ContractionReport, ConvergenceStudy,
    ResidualReport, Target,
};

/// Default sample count of the `constraints` command and of the estimate.
pub const DEFAULT_SAMPLES: usize = 257;

pub struct Context {
    pub eos: EosModel,
    pub geom: Geometry,
    /// χ† shift applied to the profiles.
    pub shift: f64,
}

impl Context {
    pub fn new(s: &Scenario) -> Result<Context> {
        let eos = s.eos()?;
        let shift = s.gauge_shift(&eos)?;
        Ok(Context {
            eos,
            geom: s.geometry(),
            shift,
        })
    }
}

/// Characteristic data with `nv` intervals on [0, v*] and `nu` intervals on [0, u_len].
pub fn sides(s: &Scenario, ctx: &Context, nv: usize, nu: usize, u_len: f64) -> Result<(CharacteristicData, CharacteristicData)> {
    let d = &s.data;
    let b = s.sample(&d.beta_plus, d.v_star, nv, ctx.shift)?;
    let a = s.sample(&d.alpha_minus, u_len, nu, ctx.shift)?;
    let (fp, fm) = FreeData::pair(b, d.v_star / nv as f64, a, u_len / nu as f64, d.r0)?;
    let cp = solve_cplus(&fp, &ctx.eos, ctx.geom)?;
    let cm = solve_cminus(&fm, &ctx.eos, ctx.geom, s.epsilon_guard())?;
    Ok((cp, cm))
}

pub struct ConstraintsRun {
    pub cp: CharacteristicData,
    pub cm: CharacteristicData,
}

impl ConstraintsRun {
    pub fn guard(&self) -> Option<GuardHit> {
        self.cm.guard
    }
}

pub fn run_constraints(s: &Scenario) -> Result<ConstraintsRun> {
    let ctx = Context::new(s)?;
    let n = s.data.n_samples.unwrap_or(DEFAULT_SAMPLES).max(2) - 1;
    let (cp, cm) = sides(s, &ctx, n, n, s.data.u_star)?;
    Ok(ConstraintsRun { cp, cm })
}

pub struct SolveRun {
    pub eos: EosModel,
    pub geom: Geometry,
    pub shift: f64,
    pub estimate: Option<StripWidthEstimate>,
    pub estimate_error: Option<String>,
    /// Strip depth actually solved.
    pub h: f64,
    pub spec: GridSpec,
    pub segments: usize,
    pub cp: CharacteristicData,
    pub cm: CharacteristicData,
    pub grid: GoursatGrid,
    pub traces: Vec<IterationTrace>,
    pub mask: Array2<bool>,
    pub physical: PhysicalField,
    pub residuals: ResidualReport,
    /// Set when the ε-guard cut C⁻ short of the requested strip depth.
    pub guard: Option<GuardHit>,
    pub requested_h: f64,
}

/// Parts of a solve that precede the Picard iteration.
pub struct Prepared {
    pub ctx: Context,
    pub estimate: Option<StripWidthEstimate>,
    pub estimate_error: Option<String>,
    pub requested_h: f64,
    pub h: f64,
    pub spec: GridSpec,
    pub segments: usize,
    pub cp: CharacteristicData,
    pub cm: CharacteristicData,
    pub guard: Option<GuardHit>,
}

pub fn prepare(s: &Scenario) -> Result<Prepared> {
    let ctx = Context::new(s)?;
    let n = s.data.n_samples.unwrap_or(DEFAULT_SAMPLES).max(2) - 1;
    let (ecp, ecm) = sides(s, &ctx, n, n, s.data.u_star)?;
    let (estimate, estimate_error) = match estimate_strip_width(&ecp, &ecm, &ctx.eos, ctx.geom, s.solver.l) {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let requested_h = match s.grid.h {
        None => s.data.u_star,
        Some(Auto::Value(h)) => h,
        Some(Auto::Named(_)) => match &estimate {
            Some(e) if e.h_rec > 0.0 => 0.5 * e.h_rec,
            _ => {
                return Err(Error::Config(format!(
                    "grid.h = \"auto\" needs a width estimate: {}",
                    estimate_error.as_deref().unwrap_or("recommended width is zero")
                )))
            }
        },
    };
    let mut spec = s.grid_spec();
    let (cp, mut cm) = sides(s, &ctx, spec.nv, spec.nu, requested_h)?;
    let mut guard = None;
    if cm.len() < spec.nu + 1 {
        // the ε-guard stopped C⁻ inside the strip: solve on the retained part
        guard = cm.guard;
        let kept = cm.len() - 1;
        if kept < 1 {
            return Err(Error::InvalidData("the epsilon guard leaves no C- interval to solve on".into()));
        }
        spec.nu = kept;
        cm = cm.truncated(kept + 1);
    }
    let h = cm.end_param();
    let segments = match s.solver.segments {
        Auto::Value(k) => k,
        Auto::Named(_) => match &estimate {
            Some(e) => default_segments(s.data.v_star, e.eps_rec, spec.nv),
            None => 1,
        },
    };
    Ok(Prepared {
        ctx,
        estimate,
        estimate_error,
        requested_h,
        h,
        spec,
        segments,
        cp,
        cm,
        guard,
    })
}

pub fn run_solve(s: &Scenario) -> Result<SolveRun> {
    let p = prepare(s)?;
    solve_prepared(s, p)
}

pub fn solve_prepared(s: &Scenario, p: Prepared) -> Result<SolveRun> {
    let Prepared {
        ctx,
        estimate,
        estimate_error,
        requested_h,
        h,
        spec,
        segments,
        cp,
        cm,
        guard,
    } = p;
    let (grid, traces) = extend_strip(
        &cp,
        &cm,
        spec,
        &ctx.eos,
        ctx.geom,
        segments,
        s.solver_options(),
        estimate.as_ref(),
    )?;
    let mask = validity_mask(&grid);
    let physical = to_physical(&grid, &ctx.eos, &mask, s.raster())?;
    let residuals = residual_suite(&grid, &cp, &cm, &ctx.eos, ctx.geom)?;
    Ok(SolveRun {
        eos: ctx.eos,
        geom: ctx.geom,
        shift: ctx.shift,
        estimate,
        estimate_error,
        h,
        spec,
        segments,
        cp,
        cm,
        grid,
        traces,
        mask,
        physical,
        residuals,
        guard,
        requested_h,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub residuals: Option<ResidualReport>,
    pub jacobian_gap: Option<f64>,
    pub jacobian_threshold: Option<f64>,
    pub euler: Option<EulerResiduals>,
    pub euler_threshold: Option<f64>,
    pub bounds: Option<BoundReport>,
    pub contraction: Vec<Option<ContractionReport>>,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

pub fn verify_run(s: &Scenario, run: &SolveRun) -> Result<VerifyReport> {
    let c = s.checks;
    let d = run.residuals.spacing();
    let mut checks = Vec::new();
    let mut out = VerifyReport {
        residuals: None,
        jacobian_gap: None,
        jacobian_threshold: None,
        euler: None,
        euler_threshold: None,
        bounds: None,
        contraction: Vec::new(),
        checks: Vec::new(),
        pass: true,
    };
    if c.residuals {
        let mut r = run.residuals.clone();
        let ok = r.apply_thresholds(c.threshold_c, c.threshold_floor);
        let worst = r
            .residuals
            .iter()
            .filter(|x| x.pass == Some(false))
            .map(|x| format!("{} = {:e} > {:e}", x.name, x.sup, x.threshold.unwrap_or(0.0)))
            .collect::<Vec<_>>();
        checks.push(CheckOutcome {
            name: "residuals".into(),
            pass: ok,
            detail: if ok { "all within C·Δ^order".into() } else { worst.join("; ") },
        });
        out.residuals = Some(r);
    }
    if c.jacobian {
        let j = jacobian_field(&run.grid, &run.eos)?;
        let gap = Zip::from(&j.det_analytic)
            .and(&j.det_discrete)
            .and(&run.mask)
            .fold(0.0f64, |m, a, b, &ok| if ok { m.max((a - b).abs()) } else { m });
        let positive = Zip::from(&j.det_analytic)
            .and(&run.mask)
            .fold(true, |acc, &a, &ok| acc && (!ok || a > 0.0));
        let th = c.threshold_c * d * d + c.threshold_floor;
        let ok = gap <= th && positive;
        checks.push(CheckOutcome {
            name: "jacobian".into(),
            pass: ok,
            detail: format!("sup |det - 2 mu nu eta| = {gap:e} (threshold {th:e}), positive on valid nodes: {positive}"),
        });
        out.jacobian_gap = Some(gap);
        out.jacobian_threshold = Some(th);
    }
    if c.euler {
        let e = euler_residuals(&run.grid, &run.eos, run.geom, &run.mask)?;
        let th = c.threshold_c * d + c.threshold_floor;
        let ok = e.continuity_sup <= th && e.momentum_sup <= th;
        checks.push(CheckOutcome {
            name: "euler".into(),
            pass: ok,
            detail: format!(
                "continuity {:e}, momentum {:e} over {} nodes (threshold {th:e})",
                e.continuity_sup, e.momentum_sup, e.nodes
            ),
        });
        out.euler = Some(e);
        out.euler_threshold = Some(th);
    }
    if c.bounds {
        if let Some(est) = &run.estimate {
            let b = bound_checks(&run.cp, &run.cm, est, &run.grid);
            let scale = 1.0 + run.cp.alpha.iter().zip(&run.cp.beta).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let tol = 10.0 * run.cp.spacing.powi(2) * scale;
            let chi_ok = b.chi.pointwise_margin >= -tol;
            // the box hypotheses are guaranteed only inside the recommended widths
            let box_ok = !b.within_recommended || b.all_ok();
            checks.push(CheckOutcome {
                name: "bounds".into(),
                pass: chi_ok && box_ok,
                detail: format!(
                    "chi margin {:e} (tolerance {tol:e}); within recommended width: {}; box violations: {:?}",
                    b.chi.pointwise_margin, b.within_recommended, b.bootstrap.violations
                ),
            });
            out.bounds = Some(b);
        } else {
            checks.push(CheckOutcome {
                name: "bounds".into(),
                pass: false,
                detail: format!("no width estimate: {}", run.estimate_error.as_deref().unwrap_or("unknown")),
            });
        }
    }
    if c.contraction {
        let within = run
            .estimate
            .as_ref()
            .is_some_and(|e| run.h <= e.h_rec * (1.0 + 1e-12));
        let mut ok = true;
        let mut notes = Vec::new();
        for (k, tr) in run.traces.iter().enumerate() {
            match contraction_report(tr) {
                Ok(r) => {
                    if r.non_monotone {
                        notes.push(format!("segment {k}: non-monotone tail"));
                        ok &= !within;
                    }
                    out.contraction.push(Some(r));
                }
                Err(e) => {
                    notes.push(format!("segment {k}: {e}"));
                    out.contraction.push(None);
                }
            }
            ok &= tr.converged;
        }
        checks.push(CheckOutcome {
            name: "contraction".into(),
            pass: ok,
            detail: if notes.is_empty() { "monotone".into() } else { notes.join("; ") },
        });
    }
    out.pass = checks.iter().all(|c| c.pass);
    out.checks = checks;
    Ok(out)
}

/// Norms of one refinement level of a convergence study.
#[derive(Debug, Clone)]
struct LevelNorms {
    spacing: f64,
    norms: BTreeMap<String, f64>,
}

fn sup_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    Zip::from(a).and(b).fold(0.0f64, |m, x, y| m.max((x - y).abs()))
}

/// sup over the coarse nodes of |coarse − fine| for field pairs of one side.
fn self_gap(coarse: &CharacteristicData, fine: &CharacteristicData, fields: [fn(&CharacteristicData) -> &Vec<f64>; 2]) -> f64 {
    let mut m = 0.0f64;
    for f in fields {
        let (c, w) = (f(coarse), f(fine));
        for k in 0..c.len().min(w.len().div_ceil(2)) {
            m = m.max((c[k] - w[2 * k]).abs());
        }
    }
    m
}

fn level(s: &Scenario, base: GridSpec, k: u32) -> Result<LevelNorms> {
    let mut sc = s.clone();
    sc.grid.nu = base.nu << k;
    sc.grid.nv = base.nv << k;
    let p = prepare(&sc)?;
    let (cp, cm) = (p.cp.clone(), p.cm.clone());
    let (fine_cp, fine_cm) = sides(&sc, &p.ctx, 2 * p.spec.nv, 2 * p.spec.nu, p.h)?;
    let eos = p.ctx.eos.clone();
    let geom = p.ctx.geom;
    let spec = p.spec;
    let run = solve_prepared(&sc, p)?;
    let mut norms = BTreeMap::new();
    norms.insert("constraints_cplus".into(), self_gap(&cp, &fine_cp, [|c| &c.alpha, |c| &c.r]));
    norms.insert("constraints_cminus".into(), self_gap(&cm, &fine_cm, [|c| &c.beta, |c| &c.r]));
    let m = marching_oracle(&cp, &cm, &eos, geom, spec)?;
    let gap = [
        sup_diff(&m.alpha, &run.grid.alpha),
        sup_diff(&m.beta, &run.grid.beta),
        sup_diff(&m.t, &run.grid.t),
        sup_diff(&m.r, &run.grid.r),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    norms.insert("picard_vs_marching".into(), gap);
    for r in &run.residuals.residuals {
        if r.name != "boundary" {
            norms.insert(format!("residual_{}", r.name), r.sup);
        }
    }
    let j = jacobian_field(&run.grid, &eos)?;
    norms.insert("jacobian".into(), j.sup_difference());
    let e = euler_residuals(&run.grid, &eos, geom, &run.mask)?;
    norms.insert("euler_continuity".into(), e.continuity_sup);
    norms.insert("euler_momentum".into(), e.momentum_sup);
    Ok(LevelNorms {
        spacing: run.residuals.spacing(),
        norms,
    })
}

/// Default targets: constraint ODEs 4, Picard fields and residuals 2, the
/// dual-solver gap at least 2, Euler residuals at least 1 (all ±0.3).
pub fn default_targets() -> BTreeMap<String, Target> {
    let mut t = BTreeMap::new();
    t.insert("constraints_cplus".into(), Target::exact(4.0, 0.3));
    t.insert("constraints_cminus".into(), Target::exact(4.0, 0.3));
    t.insert("picard_vs_marching".into(), Target::at_least(2.0, 0.3));
    t.insert("jacobian".into(), Target::exact(2.0, 0.3));
    t.insert("euler_continuity".into(), Target::at_least(1.0, 0.0));
    t.insert("euler_momentum".into(), Target::at_least(1.0, 0.0));
    t
}

/// The scenario at its own grid and `levels − 1` successive halvings; levels
/// run concurrently and are assembled coarse to fine.
pub fn convergence_study(s: &Scenario, levels: usize, targets: &BTreeMap<String, Target>) -> Result<ConvergenceStudy> {
    if levels < 3 {
        return Err(Error::InvalidData(format!("a convergence study needs at least 3 levels, got {levels}")));
    }
    let base = s.grid_spec();
    let runs: Vec<Result<LevelNorms>> = (0..levels as u32).into_par_iter().map(|k| level(s, base, k)).collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut norms: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &runs {
        for (k, v) in &r.norms {
            norms.entry(k.clone()).or_default().push(*v);
        }
    }
    let mut all = default_targets();
    all.extend(targets.iter().map(|(k, v)| (k.clone(), *v)));
    ConvergenceStudy::fit(runs.iter().map(|r| r.spacing).collect(), norms, &all)
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub solver: String,
    pub nu: usize,
    pub nv: usize,
    pub reps: usize,
    pub median_s: f64,
    pub min_s: f64,
    pub max_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub threads: usize,
    pub timings: Vec<Timing>,
    /// sup |Picard − marching| per grid.
    pub gaps: Vec<f64>,
}

fn stats(mut t: Vec<f64>) -> (f64, f64, f64) {
    t.sort_by(f64::total_cmp);
    let n = t.len();
    let median = if n % 2 == 1 { t[n / 2] } else { 0.5 * (t[n / 2 - 1] + t[n / 2]) };
    (median, t[0], t[n - 1])
}

/// Wall-clock timings of the Picard strip solve and the marching oracle at
/// the scenario grid and its first refinement.
pub fn run_bench(s: &Scenario, reps: usize) -> Result<BenchReport> {
    let reps = reps.max(1);
    let mut timings = Vec::new();
    let mut gaps = Vec::new();
    for k in 0..2u32 {
        let mut sc = s.clone();
        sc.grid.nu = s.grid.nu << k;
        sc.grid.nv = s.grid.nv << k;
        let p = prepare(&sc)?;
        let mut tp = Vec::with_capacity(reps);
        let mut tm = Vec::with_capacity(reps);
        let mut last = None;
        for _ in 0..reps {
            let t0 = Instant::now();
            let (g, _) = extend_strip(
                &p.cp,
                &p.cm,
                p.spec,
                &p.ctx.eos,
                p.ctx.geom,
                p.segments,
                sc.solver_options(),
                None,
            )?;
            tp.push(t0.elapsed().as_secs_f64());
            let t0 = Instant::now();
            let m = marching_oracle(&p.cp, &p.cm, &p.ctx.eos, p.ctx.geom, p.spec)?;
            tm.push(t0.elapsed().as_secs_f64());
            last = Some((g, m));
        }
        if let Some((g, m)) = last {
            gaps.push(sup_diff(&g.alpha, &m.alpha).max(sup_diff(&g.beta, &m.beta)).max(sup_diff(&g.t, &m.t)).max(sup_diff(&g.r, &m.r)));
        }
        for (name, t) in [("picard", tp), ("marching", tm)] {
            let (median_s, min_s, max_s) = stats(t);
            timings.push(Timing {
                solver: name.into(),
                nu: p.spec.nu,
                nv: p.spec.nv,
                reps,
                median_s,
                min_s,
                max_s,
            });
        }
    }
    Ok(BenchReport {
        threads: rayon::current_num_threads(),
        timings,
        gaps,
    })
}
