//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use charflow::constraints::{solve_cminus, solve_cplus, CharacteristicData, FreeData};
use charflow::eos::EosModel;
use charflow::goursat::{picard_corner, GridSpec, SolverOptions};
use charflow::hodograph::jacobian_field;
use charflow::pipeline::{convergence_study, run_solve};
use charflow::state::Geometry;
use charflow::verify::{chi_bound, contraction_report, ConvergenceStudy, Target};
use common::{scenario, set, INFLOW, SPHERICAL, STATIC};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn gas() -> EosModel {
    EosModel::polytropic(2.0, 0.5, 0.0, (1e-8, 1e8)).unwrap()
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sup_abs<'a>(x: impl IntoIterator<Item = &'a f64>) -> f64 {
    x.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn static_exactness() -> Outcome {
    let s = scenario(STATIC);
    let t0 = Instant::now();
    let run = run_solve(&s).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let g = &run.grid;
    let mut err = 0.0f64;
    for ((i, j), &t) in g.t.indexed_iter() {
        let (u, v) = (g.u[i], g.v[j]);
        err = err
            .max((t - (u + v)).abs())
            .max((g.r[[i, j]] - (1.0 + v - u)).abs())
            .max((g.alpha[[i, j]] - 2.0).abs())
            .max((g.beta[[i, j]] - 2.0).abs())
            .max((g.mu[[i, j]] - 1.0).abs())
            .max((g.nu[[i, j]] - 1.0).abs());
    }
    let shape = g.shape();
    check(
        err < 1e-12 && secs < 1.0 && shape == (65, 129),
        format!("sup error {err:.2e} (< 1e-12) on {}x{} nodes in {secs:.3} s (< 1 s)", shape.0, shape.1),
    )
}

fn smooth_profile(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 {
    let (a, k, p) = (rng.gen_range(-0.2..0.2), rng.gen_range(0.5..4.0), rng.gen_range(0.0..6.3));
    let (b, c) = (rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
    move |x: f64| 2.0 + a * (k * x + p).sin() + b * x + c * x * x
}

fn sides(
    beta: &dyn Fn(f64) -> f64,
    alpha: &dyn Fn(f64) -> f64,
    h: f64,
    v_star: f64,
    spec: GridSpec,
    geom: Geometry,
) -> (CharacteristicData, CharacteristicData) {
    let dv = v_star / spec.nv as f64;
    let du = h / spec.nu as f64;
    let b: Vec<f64> = (0..=spec.nv).map(|k| beta(k as f64 * dv)).collect();
    let a: Vec<f64> = (0..=spec.nu).map(|k| alpha(k as f64 * du)).collect();
    let (fp, fm) = FreeData::pair(b, dv, a, du, 1.0).unwrap();
    let e = gas();
    (solve_cplus(&fp, &e, geom).unwrap(), solve_cminus(&fm, &e, geom, 1e-3).unwrap())
}

fn plane_simple_waves() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let spec = GridSpec { nu: 16, nv: 64 };
    let (mut err, mut iters) = (0.0f64, 0usize);
    for _ in 0..8 {
        let (bp, am) = (smooth_profile(&mut rng), smooth_profile(&mut rng));
        let am0 = am(0.0);
        let bp0 = bp(0.0);
        // each profile must start at its own corner value; shift to share α₀, β₀ freely
        let beta = move |v: f64| bp(v) - bp0 + 2.0;
        let alpha = move |u: f64| am(u) - am0 + 2.1;
        let (cp, cm) = sides(&beta, &alpha, 0.25, 1.0, spec, Geometry::Plane);
        let (g, tr) = picard_corner(&cp, &cm, spec, &gas(), Geometry::Plane, SolverOptions::default()).map_err(|e| e.to_string())?;
        iters = iters.max(tr.iterations);
        for ((i, j), &a) in g.alpha.indexed_iter() {
            err = err.max((a - cm.alpha[i]).abs()).max((g.beta[[i, j]] - cp.beta[j]).abs());
        }
    }
    check(
        err < 1e-12 && iters <= 2,
        format!("8 random data sets: sup |alpha - alpha-(u)|, |beta - beta+(v)| = {err:.2e} (< 1e-12), at most {iters} iterations (<= 2)"),
    )
}

fn constraint_order() -> Outcome {
    let t0 = Instant::now();
    let e = gas();
    let solve = |n: usize| {
        let b: Vec<f64> = (0..=n).map(|k| 2.0 + 0.1 * (k as f64 / n as f64).sin()).collect();
        let a: Vec<f64> = (0..=n).map(|k| 2.0 + 0.1 * 0.5 * k as f64 / n as f64).collect();
        let (fp, fm) = FreeData::pair(b, 1.0 / n as f64, a, 0.5 / n as f64, 1.0).unwrap();
        (solve_cplus(&fp, &e, Geometry::Spherical).unwrap(), solve_cminus(&fm, &e, Geometry::Spherical, 1e-3).unwrap())
    };
    let levels: Vec<usize> = (0..6).map(|k| 20 << k).collect();
    let runs: Vec<_> = levels.iter().map(|&n| solve(n)).collect();
    let gap = |c: &[f64], f: &[f64]| (0..c.len()).fold(0.0f64, |m, k| m.max((c[k] - f[2 * k]).abs()));
    let mut norms = BTreeMap::new();
    for w in runs.windows(2) {
        let ((cp, cm), (fp, fm)) = (&w[0], &w[1]);
        norms.entry("C+".to_string()).or_insert_with(Vec::new).push(gap(&cp.alpha, &fp.alpha).max(gap(&cp.r, &fp.r)));
        norms.entry("C-".to_string()).or_insert_with(Vec::new).push(gap(&cm.beta, &fm.beta).max(gap(&cm.r, &fm.r)));
    }
    let mut targets = BTreeMap::new();
    targets.insert("C+".to_string(), Target::exact(4.0, 0.3));
    targets.insert("C-".to_string(), Target::exact(4.0, 0.3));
    let spacings: Vec<f64> = levels[..5].iter().map(|&n| 1.0 / n as f64).collect();
    let study = ConvergenceStudy::fit(spacings, norms, &targets).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let (p, m) = (study.entries["C+"].fitted.unwrap_or(f64::NAN), study.entries["C-"].fitted.unwrap_or(f64::NAN));
    check(
        study.passed() && secs < 1.0,
        format!("fitted orders C+ {p:.3}, C- {m:.3} (4.0 ± 0.3) over 4 halvings in {secs:.3} s (< 1 s)"),
    )
}

fn goursat_study() -> Result<(ConvergenceStudy, f64), String> {
    let t0 = Instant::now();
    let study = convergence_study(&scenario(SPHERICAL), 4, &BTreeMap::new()).map_err(|e| e.to_string())?;
    Ok((study, t0.elapsed().as_secs_f64()))
}

fn residual_order(study: &ConvergenceStudy, secs: f64) -> Outcome {
    let names = ["residual_char_alpha", "residual_char_beta", "residual_hodograph_plus", "residual_hodograph_minus"];
    let mut ok = secs < 30.0;
    let mut parts = Vec::new();
    for n in names {
        let f = study.entries[n].fitted.unwrap_or(f64::NAN);
        ok &= (f - 2.0).abs() <= 0.3;
        parts.push(format!("{} {f:.3}", n.trim_start_matches("residual_")));
    }
    check(ok, format!("fitted orders {} (2.0 ± 0.3) over 3 halvings in {secs:.2} s (< 30 s)", parts.join(", ")))
}

fn dual_solver(study: &ConvergenceStudy) -> Outcome {
    let e = &study.entries["picard_vs_marching"];
    let f = e.fitted.unwrap_or(f64::NAN);
    let decreasing = e.norms.windows(2).all(|w| w[1] < w[0]);
    check(
        f >= 1.7 && decreasing,
        format!("sup |Picard - marching| {:?}, fitted order {f:.3} (>= 1.7)", e.norms.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()),
    )
}

const CONTRACTION: &str = r#"
[eos]
kind = "polytropic"
gamma = 2.0
kappa = 0.5
rho_ref = 1.0
rho_min = 0.05
rho_max = 1e8

[data]
v_star = 1.0
u_star = 0.5
r0 = 1.0
gauge_rho_ref = 0.0
beta_plus = { kind = "sine", mean = 2.0, amplitude = 0.1 }
alpha_minus = { kind = "linear", value = 2.0, slope = 0.1 }

[grid]
nu = 8
nv = 64
h = "auto"

[solver]
l = 1.5
tol = 1e-12
"#;

fn contraction() -> Outcome {
    let s = scenario(CONTRACTION);
    let run = run_solve(&s).map_err(|e| e.to_string())?;
    let est = run.estimate.as_ref().ok_or("no estimate")?;
    let mut worst = 0.0f64;
    let mut ok = run.h <= 0.5 * est.h_rec * (1.0 + 1e-12);
    for tr in &run.traces {
        let r = contraction_report(tr).map_err(|e| e.to_string())?;
        // strictly decreasing from the second iteration on
        let tail = &r.ratios[1..];
        ok &= !tail.is_empty() && tail.iter().all(|&q| q < 0.9);
        worst = tail.iter().copied().fold(worst, f64::max);
    }
    check(
        ok,
        format!("h = {:.3e} <= h_rec/2 = {:.3e}: max ratio from iteration 2 is {worst:.3} (< 0.9)", run.h, 0.5 * est.h_rec),
    )
}

fn jacobian_identity() -> Outcome {
    let e = gas();
    let gap = |n: usize| {
        let spec = GridSpec { nu: n, nv: 4 * n };
        let (cp, cm) = sides(&|v| 2.0 + 0.1 * v.sin(), &|u| 2.0 + 0.1 * u, 0.25, 1.0, spec, Geometry::Spherical);
        let (g, _) = picard_corner(&cp, &cm, spec, &e, Geometry::Spherical, SolverOptions::default()).unwrap();
        jacobian_field(&g, &e).unwrap().sup_difference()
    };
    let d: Vec<f64> = [4, 8, 16, 32].into_iter().map(gap).collect();
    let ratios: Vec<f64> = d.windows(2).map(|w| w[0] / w[1]).collect();
    let spec = GridSpec { nu: 16, nv: 32 };
    let (cp, cm) = sides(&|_| 2.0, &|_| 2.0, 0.5, 1.0, spec, Geometry::Spherical);
    let (g, _) = picard_corner(&cp, &cm, spec, &e, Geometry::Spherical, SolverOptions::default()).unwrap();
    let j = jacobian_field(&g, &e).unwrap();
    let st = j.det_analytic.iter().chain(&j.det_discrete).fold(0.0f64, |m, x| m.max((x - 2.0).abs()));
    check(
        ratios.iter().all(|r| (r - 4.0).abs() <= 1.0) && st <= 1e-10,
        format!("gap ratios per halving {:?} (4 ± 1); static |det - 2| = {st:.1e} (<= 1e-10)", ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()),
    )
}

fn chi_bound_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let e = gas();
    let n = 128;
    let dv = 1.0 / n as f64;
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for _ in 0..10 {
        let p = smooth_profile(&mut rng);
        let p0 = p(0.0);
        let alpha0 = 2.0 + rng.gen_range(-0.3..0.3);
        let b: Vec<f64> = (0..=n).map(|k| p(k as f64 * dv) - p0 + 2.0).collect();
        let (fp, _) = FreeData::pair(b, dv, vec![alpha0, alpha0], 0.1, 1.0).unwrap();
        let cp = solve_cplus(&fp, &e, Geometry::Spherical).map_err(|e| e.to_string())?;
        let scale = 1.0 + sup_abs(&cp.alpha) + sup_abs(&cp.beta);
        let tol = 10.0 * dv * dv * scale;
        let c = chi_bound(&cp);
        ok &= c.pointwise_margin >= -tol;
        worst = worst.min(c.pointwise_margin / tol);
    }
    // constant β⁺ with χ(0) ≠ 0: |χ| decays from its initial value
    let (fp, _) = FreeData::pair(vec![2.0; n + 1], dv, vec![2.2, 2.2], 0.1, 1.0).unwrap();
    let cp = solve_cplus(&fp, &e, Geometry::Spherical).map_err(|e| e.to_string())?;
    let tol = 10.0 * dv * dv * (1.0 + sup_abs(&cp.alpha) + sup_abs(&cp.beta));
    let c = chi_bound(&cp);
    let eq = c.constant_data_margin.abs() <= tol && c.global_margin.abs() <= tol;
    check(
        ok && eq,
        format!(
            "10 random C+ data sets: min margin / tolerance = {worst:.3} (>= -1); constant data: |chi(0)| - sup|chi| = {:.1e} (|.| <= {tol:.1e})",
            c.constant_data_margin
        ),
    )
}

fn gauge_invariance() -> Outcome {
    let base = set(SPHERICAL, "r0", "1.0\ngauge_rho_ref = 0.0");
    let runs: Vec<_> = ["0.0", "1.0"]
        .iter()
        .map(|g| run_solve(&scenario(&set(&base, "rho_ref", g))).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let (a, b) = (&runs[0].physical.samples, &runs[1].physical.samples);
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        d = d.max((x.rho - y.rho).abs()).max((x.w - y.w).abs()).max((x.t - y.t).abs()).max((x.r - y.r).abs());
    }
    check(
        d < 1e-10 && a.len() == b.len() && runs[0].shift != runs[1].shift,
        format!("rho_ref 0 vs 1: sup difference of (rho, w, t, r) = {d:.2e} (< 1e-10) over {} nodes", a.len()),
    )
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_charflow"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("smooth.toml");
    std::fs::write(&cfg, set(SPHERICAL, "nv", "64")).map_err(|e| e.to_string())?;
    let mut outs = Vec::new();
    for t in ["1", "8"] {
        let out = dir.path().join(format!("t{t}"));
        let st = binary()
            .args(["solve", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--threads", t])
            .status()
            .map_err(|e| e.to_string())?;
        if !st.success() {
            return Err(format!("solve --threads {t} exited with {st}"));
        }
        outs.push(out);
    }
    let mut files: Vec<String> = std::fs::read_dir(&outs[0])
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.ends_with(".csv"))
        .collect();
    files.sort();
    let mut same = !files.is_empty();
    for f in &files {
        same &= std::fs::read(outs[0].join(f)).ok() == std::fs::read(outs[1].join(f)).ok();
    }
    check(same, format!("{} CSV files byte-identical between --threads 1 and --threads 8", files.len()))
}

fn epsilon_guard() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("inflow.toml");
    std::fs::write(&cfg, INFLOW).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let st = binary()
        .args(["constraints", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(out.join("manifest.json")).map_err(|e| e.to_string())?;
    let m: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let u_bar = m["u_bar"].as_f64().ok_or("manifest has no u_bar")?;
    let step = 1.0 / 256.0;
    check(
        st.code() == Some(2) && (u_bar - 0.9).abs() <= step,
        format!("exit code {:?} (2), u_bar = {u_bar} within one step ({step}) of 0.9", st.code()),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "static-solution exactness", static_exactness()),
        (2, "plane-mode simple waves", plane_simple_waves()),
        (3, "constraint ODE order", constraint_order()),
    ];
    match goursat_study() {
        Ok((study, secs)) => {
            results.push((4, "Goursat residual order", residual_order(&study, secs)));
            results.push((5, "dual-solver agreement", dual_solver(&study)));
        }
        Err(e) => {
            results.push((4, "Goursat residual order", Err(e.clone())));
            results.push((5, "dual-solver agreement", Err(e)));
        }
    }
    results.push((6, "contraction", contraction()));
    results.push((7, "Jacobian identity", jacobian_identity()));
    results.push((8, "a-priori chi bound", chi_bound_criterion()));
    results.push((9, "gauge invariance", gauge_invariance()));
    results.push((10, "determinism across threads", determinism()));
    results.push((11, "epsilon-guard behaviour", epsilon_guard()));
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(m) => println!("PASS  {n:>2} {name}: {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL  {n:>2} {name}: {m}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
