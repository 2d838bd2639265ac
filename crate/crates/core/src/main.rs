use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use charflow::constraints::GuardHit;
use charflow::error::{Error, Result};
use charflow::goursat::{GridSpec, IterationTrace, StripWidthEstimate};
use charflow::output;
use charflow::pipeline::{self, SolveRun, VerifyReport};
use charflow::scenario::Scenario;
use charflow::verify::{ConvergenceStudy, ResidualReport};

const EXIT_ERROR: u8 = 1;
const EXIT_GUARD: u8 = 2;
const EXIT_NO_CONVERGENCE: u8 = 3;

#[derive(Parser)]
#[command(name = "charflow", version, about = "Characteristic initial value solver for spherically symmetric barotropic flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding output.dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    threads: Option<usize>,
    /// Picard tolerance, overriding solver.tol
    #[arg(long)]
    tol: Option<f64>,
    /// Grid as NUxNV, overriding grid.nu and grid.nv
    #[arg(long, value_parser = parse_grid)]
    grid: Option<GridSpec>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the constraint ODEs on both characteristics
    Constraints(Common),
    /// Full pipeline: constraints, width estimate, strip solve, t-r map
    Solve(Common),
    /// Solve and run the residual, bound and contraction checks
    Verify(Common),
    /// Refinement study
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Time Picard against the marching oracle
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NUxNV, got {s:?}"))?;
    let nu = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let nv = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok(GridSpec { nu, nv })
}

fn load(c: &Common) -> Result<(Scenario, PathBuf)> {
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let mut s = Scenario::load(&c.config)?;
    if let Some(t) = c.tol {
        s.solver.tol = t;
    }
    if let Some(g) = c.grid {
        s.grid.nu = g.nu;
        s.grid.nv = g.nv;
    }
    if let Some(o) = &c.out {
        s.output.dir = o.clone();
    }
    s.validate()?;
    let dir = if s.output.dir.is_absolute() || c.out.is_some() {
        s.output.dir.clone()
    } else {
        s.base_dir.join(&s.output.dir)
    };
    output::ensure_dir(&dir)?;
    Ok((s, dir))
}

#[derive(Serialize)]
struct ConstraintsManifest<'a> {
    command: &'static str,
    scenario: &'a Scenario,
    samples: usize,
    guard: Option<GuardHit>,
    u_bar: Option<f64>,
    files: Vec<&'static str>,
    exit_code: u8,
}

fn cmd_constraints(c: &Common) -> Result<u8> {
    let (s, dir) = load(c)?;
    let run = pipeline::run_constraints(&s)?;
    output::write_characteristic(&dir, &[&run.cp, &run.cm])?;
    let code = if run.guard().is_some() { EXIT_GUARD } else { 0 };
    let m = ConstraintsManifest {
        command: "constraints",
        scenario: &s,
        samples: run.cp.len(),
        guard: run.guard(),
        u_bar: run.guard().map(|g| g.u_bar),
        files: vec!["characteristic.csv"],
        exit_code: code,
    };
    output::write_json(&dir.join("manifest.json"), &m)?;
    if let Some(g) = run.guard() {
        eprintln!("epsilon guard: C- truncated at u = {} (r = {} > {})", g.u_bar, g.r_at_u_bar, g.epsilon);
    }
    Ok(code)
}

#[derive(Serialize)]
struct SolveManifest<'a> {
    command: &'static str,
    scenario: &'a Scenario,
    rho_ref: f64,
    gauge_shift: f64,
    grid: GridSpec,
    requested_h: f64,
    h: f64,
    du: f64,
    dv: f64,
    segments: usize,
    guard: Option<GuardHit>,
    estimate: Option<&'a StripWidthEstimate>,
    estimate_error: Option<&'a str>,
    iterations: Vec<usize>,
    traces: &'a [IterationTrace],
    residuals: &'a ResidualReport,
    valid_nodes: usize,
    files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<&'a VerifyReport>,
    exit_code: u8,
}

fn solve_manifest<'a>(s: &'a Scenario, run: &'a SolveRun, files: Vec<String>, verify: Option<&'a VerifyReport>, command: &'static str, code: u8) -> SolveManifest<'a> {
    SolveManifest {
        command,
        scenario: s,
        rho_ref: run.eos.rho_ref(),
        gauge_shift: run.shift,
        grid: run.spec,
        requested_h: run.requested_h,
        h: run.h,
        du: run.grid.du(),
        dv: run.grid.dv(),
        segments: run.segments,
        guard: run.guard,
        estimate: run.estimate.as_ref(),
        estimate_error: run.estimate_error.as_deref(),
        iterations: run.traces.iter().map(|t| t.iterations).collect(),
        traces: &run.traces,
        residuals: &run.residuals,
        valid_nodes: run.mask.iter().filter(|&&v| v).count(),
        files,
        verify,
        exit_code: code,
    }
}

#[derive(Serialize)]
struct FailureManifest<'a> {
    command: &'static str,
    scenario: &'a Scenario,
    error: String,
    /// Successive-difference norms of the failing iteration.
    history: Vec<f64>,
    exit_code: u8,
}

fn solve_or_report(s: &Scenario, dir: &Path, command: &'static str) -> Result<std::result::Result<SolveRun, u8>> {
    match pipeline::run_solve(s) {
        Ok(r) => Ok(Ok(r)),
        Err(e) => match e.root() {
            Error::NoConvergence { history, .. } => {
                let m = FailureManifest {
                    command,
                    scenario: s,
                    error: e.to_string(),
                    history: history.clone(),
                    exit_code: EXIT_NO_CONVERGENCE,
                };
                output::write_json(&dir.join("manifest.json"), &m)?;
                eprintln!("error: {e}");
                Ok(Err(EXIT_NO_CONVERGENCE))
            }
            _ => Err(e),
        },
    }
}

fn finish_code(run: &SolveRun) -> u8 {
    if let Some(g) = run.guard {
        eprintln!(
            "epsilon guard: strip truncated to h = {} (requested {}, r = {} at u = {})",
            run.h, run.requested_h, g.r_at_u_bar, g.u_bar
        );
        EXIT_GUARD
    } else {
        0
    }
}

fn cmd_solve(c: &Common) -> Result<u8> {
    let (s, dir) = load(c)?;
    let run = match solve_or_report(&s, &dir, "solve")? {
        Ok(r) => r,
        Err(code) => return Ok(code),
    };
    output::write_characteristic(&dir, &[&run.cp, &run.cm])?;
    let mut files = vec!["characteristic.csv".to_string()];
    files.extend(output::write_solution(&dir, &run.grid, &run.physical, s.output.plot)?);
    let code = finish_code(&run);
    output::write_json(&dir.join("manifest.json"), &solve_manifest(&s, &run, files, None, "solve", code))?;
    Ok(code)
}

fn cmd_verify(c: &Common) -> Result<u8> {
    let (s, dir) = load(c)?;
    let run = match solve_or_report(&s, &dir, "verify")? {
        Ok(r) => r,
        Err(code) => return Ok(code),
    };
    let rep = pipeline::verify_run(&s, &run)?;
    output::write_json(&dir.join("report.json"), &rep)?;
    for ch in &rep.checks {
        println!("{:<12} {}  {}", ch.name, if ch.pass { "pass" } else { "FAIL" }, ch.detail);
    }
    let code = if !rep.pass { EXIT_ERROR } else { finish_code(&run) };
    output::write_json(
        &dir.join("manifest.json"),
        &solve_manifest(&s, &run, vec!["report.json".into()], Some(&rep), "verify", code),
    )?;
    Ok(code)
}

#[derive(Serialize)]
struct StudyManifest<'a> {
    command: &'static str,
    scenario: &'a Scenario,
    levels: usize,
    study: &'a ConvergenceStudy,
    pass: bool,
}

fn cmd_convergence(c: &Common, levels: usize) -> Result<u8> {
    let (s, dir) = load(c)?;
    let study = pipeline::convergence_study(&s, levels, &Default::default())?;
    for (name, e) in &study.entries {
        let fitted = e.fitted.map_or("-".to_string(), |f| format!("{f:.3}"));
        println!("{name:<28} order {fitted:>7} target {}{} ±{}  {:?}", if e.at_least { ">=" } else { "" }, e.target, e.tolerance, e.status);
    }
    let pass = study.passed();
    output::write_json(
        &dir.join("convergence.json"),
        &StudyManifest {
            command: "convergence",
            scenario: &s,
            levels,
            study: &study,
            pass,
        },
    )?;
    Ok(if pass { 0 } else { EXIT_ERROR })
}

fn cmd_bench(c: &Common, reps: usize) -> Result<u8> {
    let (s, dir) = load(c)?;
    let rep = pipeline::run_bench(&s, reps)?;
    for t in &rep.timings {
        println!("{:<9} {:>5}x{:<5} median {:.4e} s  min {:.4e} s", t.solver, t.nu, t.nv, t.median_s, t.min_s);
    }
    output::write_json(&dir.join("bench.json"), &rep)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Constraints(c) => cmd_constraints(c),
        Command::Solve(c) => cmd_solve(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Convergence { common, levels } => cmd_convergence(common, *levels),
        Command::Bench { common, reps } => cmd_bench(common, *reps),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
