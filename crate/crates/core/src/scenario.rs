//! Scenario files: a single TOML document with flat sections.
//!
//! ```toml
//! [eos]
//! kind = "polytropic"        # or "tabulated" with table_path
//! gamma = 2.0
//! kappa = 0.5
//! rho_ref = 0.0
//!
//! [geometry]
//! mode = "spherical"         # or "plane"
//!
//! [data]
//! v_star = 1.0
//! u_star = 0.5
//! r0 = 1.0
//! epsilon_guard = 1e-3
//! beta_plus = { kind = "sine", mean = 2.0, amplitude = 0.1 }
//! alpha_minus = { kind = "linear", value = 2.0, slope = 0.1 }
//!
//! [grid]
//! nu = 16
//! nv = 64
//! h = 0.25
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::eos::{EosModel, Table};
use crate::error::{Error, Result};
use crate::goursat::{GridSpec, SolverOptions};
use crate::hodograph::RasterSpec;
use crate::numerics::cubic_eval;
use crate::state::Geometry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub eos: EosSection,
    #[serde(default)]
    pub geometry: GeometrySection,
    pub data: DataSection,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub checks: ChecksSection,
    /// Directory of the scenario file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EosKindName {
    Polytropic,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EosSection {
    pub kind: EosKindName,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub rho_ref: Option<f64>,
    pub table_path: Option<PathBuf>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default)]
    pub mode: Geometry,
}

/// A free-data profile on [0, length].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// value + slope·x
    Linear {
        value: f64,
        slope: f64,
    },
    /// mean + amplitude·sin(frequency·x + phase)
    Sine {
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Uniform samples over [0, length], interpolated by local cubics.
    Samples {
        values: Vec<f64>,
    },
    /// One column of values (uniform over [0, length]) or two columns x,value
    /// with uniform x starting at 0.
    Csv {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub v_star: f64,
    pub u_star: f64,
    pub r0: f64,
    pub epsilon_guard: Option<f64>,
    /// Sample count for the `constraints` command (both characteristics).
    pub n_samples: Option<usize>,
    pub beta_plus: Profile,
    pub alpha_minus: Profile,
    /// Base density of the gauge in which the profiles are written; they are
    /// shifted into the equation of state's gauge. Defaults to `eos.rho_ref`.
    pub gauge_rho_ref: Option<f64>,
}

/// Either a number or the string "auto".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Auto<T> {
    Value(T),
    Named(AutoName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoName {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nu: usize,
    pub nv: usize,
    /// Strip depth in u; "auto" takes half the recommended width. Defaults to u_star.
    pub h: Option<Auto<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Strip segments in v; "auto" uses ⌈v*/ε_rec⌉.
    #[serde(default = "default_segments")]
    pub segments: Auto<usize>,
    #[serde(default = "default_l")]
    pub l: f64,
}

fn default_tol() -> f64 {
    SolverOptions::default().tol
}
fn default_max_iter() -> usize {
    SolverOptions::default().max_iter
}
fn default_segments() -> Auto<usize> {
    Auto::Value(1)
}
fn default_l() -> f64 {
    2.0
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            segments: default_segments(),
            l: default_l(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    pub raster_nt: Option<usize>,
    pub raster_nr: Option<usize>,
    #[serde(default = "yes")]
    pub plot: bool,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out(),
            raster_nt: None,
            raster_nr: None,
            plot: true,
        }
    }
}

/// Checks run by `verify`. Residual thresholds are C·Δ^order + floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(default = "yes")]
    pub residuals: bool,
    #[serde(default = "yes")]
    pub bounds: bool,
    #[serde(default = "yes")]
    pub contraction: bool,
    #[serde(default = "yes")]
    pub jacobian: bool,
    #[serde(default = "yes")]
    pub euler: bool,
    #[serde(default = "default_c")]
    pub threshold_c: f64,
    #[serde(default = "default_floor")]
    pub threshold_floor: f64,
}

fn default_c() -> f64 {
    10.0
}
fn default_floor() -> f64 {
    1e-11
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            residuals: true,
            bounds: true,
            contraction: true,
            jacobian: true,
            euler: true,
            threshold_c: default_c(),
            threshold_floor: default_floor(),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Scenario> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.base_dir = base_dir.to_path_buf();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Scenario::from_toml(&text, &base)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let d = &self.data;
        if !(d.v_star > 0.0 && d.u_star > 0.0) {
            return bad(format!("data.v_star and data.u_star must be positive, got {} and {}", d.v_star, d.u_star));
        }
        if !(d.r0 > 0.0) {
            return bad(format!("data.r0 must be positive, got {}", d.r0));
        }
        if let Some(e) = d.epsilon_guard {
            if !(e > 0.0 && e < d.r0) {
                return bad(format!("data.epsilon_guard must lie in (0, r0), got {e}"));
            }
        }
        if self.grid.nu < 1 || self.grid.nv < 1 {
            return bad(format!("grid.nu and grid.nv must be at least 1, got {} and {}", self.grid.nu, self.grid.nv));
        }
        if let Some(Auto::Value(h)) = self.grid.h {
            if !(h > 0.0 && h <= d.u_star) {
                return bad(format!("grid.h must lie in (0, u_star], got {h}"));
            }
        }
        if !(self.solver.l > 1.0) {
            return bad(format!("solver.l must exceed 1, got {}", self.solver.l));
        }
        if !(self.solver.tol > 0.0) {
            return bad(format!("solver.tol must be positive, got {}", self.solver.tol));
        }
        if let Auto::Value(0) = self.solver.segments {
            return bad("solver.segments must be at least 1".into());
        }
        match self.eos.kind {
            EosKindName::Polytropic => {
                if self.eos.gamma.is_none() || self.eos.kappa.is_none() {
                    return bad("polytropic eos needs gamma and kappa".into());
                }
            }
            EosKindName::Tabulated => match &self.eos.table_path {
                None => return bad("tabulated eos needs table_path".into()),
                Some(p) => {
                    let p = self.resolve(p);
                    if !p.exists() {
                        return bad(format!("eos table {} does not exist", p.display()));
                    }
                }
            },
        }
        for prof in [&d.beta_plus, &d.alpha_minus] {
            if let Profile::Csv { path } = prof {
                let p = self.resolve(path);
                if !p.exists() {
                    return bad(format!("data file {} does not exist", p.display()));
                }
            }
        }
        Ok(())
    }

    pub fn eos(&self) -> Result<EosModel> {
        let e = &self.eos;
        match e.kind {
            EosKindName::Polytropic => {
                let domain = (e.rho_min.unwrap_or(1e-8), e.rho_max.unwrap_or(1e8));
                EosModel::polytropic(e.gamma.unwrap_or(0.0), e.kappa.unwrap_or(0.0), e.rho_ref.unwrap_or(0.0), domain)
            }
            EosKindName::Tabulated => {
                let path = self.resolve(e.table_path.as_deref().unwrap_or(Path::new("")));
                let table = Table::from_csv(&path)?;
                let domain = match (e.rho_min, e.rho_max) {
                    (Some(a), Some(b)) => Some((a, b)),
                    (None, None) => None,
                    _ => return Err(Error::Config("give both eos.rho_min and eos.rho_max or neither".into())),
                };
                EosModel::tabulated(table, e.rho_ref, domain)
            }
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry.mode
    }

    pub fn epsilon_guard(&self) -> f64 {
        self.data.epsilon_guard.unwrap_or(1e-3 * self.data.r0)
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            nu: self.grid.nu,
            nv: self.grid.nv,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
        }
    }

    pub fn raster(&self) -> Option<RasterSpec> {
        match (self.output.raster_nt, self.output.raster_nr) {
            (Some(nt), Some(nr)) => Some(RasterSpec { nt, nr }),
            _ => None,
        }
    }

    /// χ† shift taking the profiles' gauge into the equation of state's gauge.
    pub fn gauge_shift(&self, eos: &EosModel) -> Result<f64> {
        match self.data.gauge_rho_ref {
            None => Ok(0.0),
            Some(rho) => eos.gauge_offset(rho),
        }
    }

    /// `n + 1` samples of a profile over [0, length], in the model gauge.
    pub fn sample(&self, prof: &Profile, length: f64, n: usize, shift: f64) -> Result<Vec<f64>> {
        let x = |k: usize| length * k as f64 / n as f64;
        let half = 0.5 * shift;
        let raw: Vec<f64> = match prof {
            Profile::Constant { value } => vec![*value; n + 1],
            Profile::Linear { value, slope } => (0..=n).map(|k| value + slope * x(k)).collect(),
            Profile::Sine {
                mean,
                amplitude,
                frequency,
                phase,
            } => (0..=n).map(|k| mean + amplitude * (frequency * x(k) + phase).sin()).collect(),
            Profile::Samples { values } => resample(values, length, n)?,
            Profile::Csv { path } => resample(&read_profile(&self.resolve(path), length)?, length, n)?,
        };
        Ok(raw.into_iter().map(|a| a + half).collect())
    }
}

fn resample(values: &[f64], length: f64, n: usize) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::Config("a sampled profile needs at least two values".into()));
    }
    if values.len() == n + 1 {
        return Ok(values.to_vec());
    }
    let h = length / (values.len() - 1) as f64;
    Ok((0..=n).map(|k| cubic_eval(values, h, length * k as f64 / n as f64)).collect())
}

fn read_profile(path: &Path, length: f64) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 1 => ys.push(v[0]),
            Some(v) if v.len() == 2 => {
                xs.push(v[0]);
                ys.push(v[1]);
            }
            None if n == 0 => continue,
            _ => return Err(Error::Config(format!("{}: cannot parse line {}", path.display(), n + 1))),
        }
    }
    if !xs.is_empty() {
        let step = length / (xs.len().max(2) - 1) as f64;
        let uniform = xs
            .iter()
            .enumerate()
            .all(|(k, &x)| (x - k as f64 * step).abs() <= 1e-9 * length.max(1.0));
        if xs.len() != ys.len() || !uniform {
            return Err(Error::Config(format!(
                "{}: x column must be uniform from 0 to {length}",
                path.display()
            )));
        }
    }
    Ok(ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STATIC: &str = r#"
[eos]
kind = "polytropic"
gamma = 2.0
kappa = 0.5
rho_ref = 0.0

[data]
v_star = 1.0
u_star = 0.5
r0 = 1.0
beta_plus = { kind = "constant", value = 2.0 }
alpha_minus = { kind = "constant", value = 2.0 }

[grid]
nu = 8
nv = 16
"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::from_toml(STATIC, Path::new(".")).unwrap();
        assert_eq!(s.geometry(), Geometry::Spherical);
        assert_eq!(s.solver.l, 2.0);
        assert_eq!(s.solver.segments, Auto::Value(1));
        assert_eq!(s.grid.h, None);
        assert_eq!(s.sample(&s.data.beta_plus, 1.0, 4, 0.0).unwrap(), vec![2.0; 5]);
    }

    #[test]
    fn auto_keys_and_profiles() {
        let text = STATIC.replace("nv = 16", "nv = 16\nh = \"auto\"")
            + "\n[solver]\nsegments = \"auto\"\n";
        let s = Scenario::from_toml(&text, Path::new(".")).unwrap();
        assert_eq!(s.grid.h, Some(Auto::Named(AutoName::Auto)));
        assert_eq!(s.solver.segments, Auto::Named(AutoName::Auto));
        let p = Profile::Samples { values: vec![0.0, 1.0, 2.0] };
        let v = s.sample(&p, 1.0, 4, 0.0).unwrap();
        for (k, x) in v.iter().enumerate() {
            assert!((x - 0.5 * k as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        for (from, to) in [("gamma = 2.0", "gamma = 1.0"), ("r0 = 1.0", "r0 = 0.0"), ("nu = 8", "nu = 0")] {
            let text = STATIC.replace(from, to);
            let r = Scenario::from_toml(&text, Path::new(".")).and_then(|s| s.eos().map(|_| s));
            assert!(r.is_err(), "{to}");
        }
        let text = STATIC.replace("kind = \"polytropic\"", "kind = \"tabulated\"\ntable_path = \"/no/such.csv\"");
        let err = Scenario::from_toml(&text, Path::new(".")).unwrap_err().to_string();
        assert!(err.contains("/no/such.csv"), "{err}");
        assert!(Scenario::from_toml(&(STATIC.to_string() + "\n[extra]\n"), Path::new(".")).is_err());
    }

    #[test]
    fn gauge_shift_moves_profiles() {
        let text = STATIC.replace("rho_ref = 0.0", "rho_ref = 1.0").replace("r0 = 1.0", "r0 = 1.0\ngauge_rho_ref = 0.0");
        let s = Scenario::from_toml(&text, Path::new(".")).unwrap();
        let e = s.eos().unwrap();
        let shift = s.gauge_shift(&e).unwrap();
        assert!((shift + 4.0).abs() < 1e-14);
        assert!(s.sample(&s.data.beta_plus, 1.0, 2, shift).unwrap().iter().all(|&x| x.abs() < 1e-14));
    }
}
