//! Barotropic closure p = f(ρ).
//!
//! Everything downstream sees the fluid through χ† = α+β, so the model is
//! organised around the potential χ†(ρ) = 2∫_{ρ_ref}^{ρ} η(ρ')/ρ' dρ' and its
//! inverse. Polytropic gases get closed forms; tabulated closures use a
//! monotone cubic of f with quadrature and a safeguarded Newton inversion.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, MonotoneCubic};

const QUAD_TOL: f64 = 1e-12;
const INVERSION_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub enum EosKind {
    /// p = κ ρ^γ
    Polytropic { gamma: f64, kappa: f64 },
    Tabulated(Table),
}

/// Samples of (ρ, f(ρ)) with the interpolant and χ† at the knots.
#[derive(Debug, Clone)]
pub struct Table {
    interp: MonotoneCubic,
    // 2∫_{ρ_0}^{ρ_k} η/ρ dρ at each knot
    chi_at_knots: Vec<f64>,
}

impl Table {
    pub fn new(rho: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if rho.len() < 4 {
            return Err(Error::InvalidEos("table needs at least 4 samples".into()));
        }
        if rho[0] <= 0.0 {
            return Err(Error::InvalidEos("table densities must be positive".into()));
        }
        let secants: Vec<f64> = rho
            .windows(2)
            .zip(f.windows(2))
            .map(|(r, p)| (p[1] - p[0]) / (r[1] - r[0]))
            .collect();
        if secants.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidEos("table pressure must increase strictly with density".into()));
        }
        if secants.windows(2).any(|s| !(s[1] > s[0])) {
            return Err(Error::InvalidEos("table pressure must be strictly convex in density".into()));
        }
        let interp = MonotoneCubic::new(rho, f)
            .ok_or_else(|| Error::InvalidEos("table densities must be strictly ascending".into()))?;
        // f'' is linear on each piece, so positivity at the piece ends covers the piece.
        let knots = interp.knots().to_vec();
        for w in knots.windows(2) {
            for x in [w[0], w[1]] {
                let eps = 1e-9 * (w[1] - w[0]);
                let probe = if x == w[0] { x + eps } else { x - eps };
                let (_, d1, d2) = interp.eval_all(probe);
                if !(d1 > 0.0 && d2 > 0.0) {
                    return Err(Error::InvalidEos(format!(
                        "interpolated closure loses dp/drho > 0 or d2p/drho2 > 0 near rho = {x}"
                    )));
                }
            }
        }
        let mut chi_at_knots = vec![0.0; knots.len()];
        for k in 1..knots.len() {
            let piece = adaptive_simpson(
                &|r: f64| 2.0 * interp.eval_all(r).1.sqrt() / r,
                knots[k - 1],
                knots[k],
                QUAD_TOL,
            );
            chi_at_knots[k] = chi_at_knots[k - 1] + piece;
        }
        Ok(Self { interp, chi_at_knots })
    }

    /// Two-column CSV `rho,f` with ascending density; a non-numeric first line is
    /// treated as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rho = Vec::new();
        let mut f = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = (cols.next(), cols.next());
            let parsed = match (a, b) {
                (Some(a), Some(b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some((r, p)) => {
                    rho.push(r);
                    f.push(p);
                }
                None if rho.is_empty() && n == 0 => continue, // header
                None => {
                    return Err(Error::InvalidEos(format!(
                        "{}: cannot parse line {}",
                        path.display(),
                        n + 1
                    )))
                }
            }
        }
        Self::new(rho, f)
    }

    fn range(&self) -> (f64, f64) {
        let k = self.interp.knots();
        (k[0], k[k.len() - 1])
    }

    fn eta(&self, rho: f64) -> f64 {
        self.interp.eval_all(rho).1.sqrt()
    }

    // 2∫_{ρ_0}^{ρ} η/ρ'
    fn chi_from_lowest(&self, rho: f64) -> f64 {
        let knots = self.interp.knots();
        let k = knots.partition_point(|&x| x <= rho).saturating_sub(1).min(knots.len() - 1);
        let base = self.chi_at_knots[k];
        if rho == knots[k] {
            return base;
        }
        base + adaptive_simpson(&|r: f64| 2.0 * self.eta(r) / r, knots[k], rho, QUAD_TOL)
    }

    fn rho_from_lowest(&self, chi: f64) -> f64 {
        let knots = self.interp.knots();
        let c = &self.chi_at_knots;
        let k = c.partition_point(|&x| x <= chi).saturating_sub(1).min(knots.len() - 2);
        let (mut lo, mut hi) = (knots[k], knots[k + 1]);
        let span = c[k + 1] - c[k];
        let mut rho = lo + (hi - lo) * ((chi - c[k]) / span).clamp(0.0, 1.0);
        for _ in 0..100 {
            let g = self.chi_from_lowest(rho) - chi;
            if g > 0.0 {
                hi = rho;
            } else {
                lo = rho;
            }
            // dχ†/dρ = 2η/ρ
            let step = g * rho / (2.0 * self.eta(rho));
            let mut next = rho - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - rho).abs() <= INVERSION_TOL * rho;
            rho = next;
            if done || hi - lo <= INVERSION_TOL * rho {
                break;
            }
        }
        rho
    }
}

/// Barotropic equation of state with a fixed χ† gauge and validity interval.
#[derive(Debug, Clone)]
pub struct EosModel {
    kind: EosKind,
    rho_ref: f64,
    rho_lo: f64,
    rho_hi: f64,
    chi_lo: f64,
    chi_hi: f64,
    // gauge shift in the χ† potential: χ†(ρ) = raw(ρ) - raw_ref
    raw_ref: f64,
}

impl EosModel {
    pub fn polytropic(gamma: f64, kappa: f64, rho_ref: f64, rho_domain: (f64, f64)) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::InvalidEos(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidEos(format!("kappa must be positive, got {kappa}")));
        }
        if !(rho_ref >= 0.0) {
            return Err(Error::InvalidEos(format!("rho_ref must be non-negative, got {rho_ref}")));
        }
        Self::build(EosKind::Polytropic { gamma, kappa }, rho_ref, rho_domain)
    }

    /// `rho_ref` defaults to the lowest density of the domain.
    pub fn tabulated(table: Table, rho_ref: Option<f64>, rho_domain: Option<(f64, f64)>) -> Result<Self> {
        let (tlo, thi) = table.range();
        let (lo, hi) = rho_domain.unwrap_or((tlo, thi));
        if lo < tlo || hi > thi {
            return Err(Error::InvalidEos(format!(
                "density domain [{lo}, {hi}] exceeds table range [{tlo}, {thi}]"
            )));
        }
        let rho_ref = rho_ref.unwrap_or(lo);
        if rho_ref < tlo || rho_ref > thi {
            return Err(Error::InvalidEos(format!("rho_ref {rho_ref} outside table range")));
        }
        Self::build(EosKind::Tabulated(table), rho_ref, (lo, hi))
    }

    fn build(kind: EosKind, rho_ref: f64, (rho_lo, rho_hi): (f64, f64)) -> Result<Self> {
        if !(rho_lo > 0.0 && rho_hi > rho_lo) {
            return Err(Error::InvalidEos(format!(
                "density domain must satisfy 0 < lo < hi, got [{rho_lo}, {rho_hi}]"
            )));
        }
        let mut eos = Self {
            kind,
            rho_ref,
            rho_lo,
            rho_hi,
            chi_lo: 0.0,
            chi_hi: 0.0,
            raw_ref: 0.0,
        };
        eos.raw_ref = eos.raw_chi(rho_ref);
        eos.chi_lo = eos.raw_chi(rho_lo) - eos.raw_ref;
        eos.chi_hi = eos.raw_chi(rho_hi) - eos.raw_ref;
        Ok(eos)
    }

    pub fn kind(&self) -> &EosKind {
        &self.kind
    }

    pub fn rho_ref(&self) -> f64 {
        self.rho_ref
    }

    pub fn rho_domain(&self) -> (f64, f64) {
        (self.rho_lo, self.rho_hi)
    }

    /// Admissible χ† interval, the image of the density domain.
    pub fn chi_dagger_range(&self) -> (f64, f64) {
        (self.chi_lo, self.chi_hi)
    }

    /// Same closure in another χ† gauge.
    pub fn with_rho_ref(&self, rho_ref: f64) -> Result<Self> {
        match &self.kind {
            EosKind::Polytropic { gamma, kappa } => {
                Self::polytropic(*gamma, *kappa, rho_ref, self.rho_domain())
            }
            EosKind::Tabulated(t) => Self::tabulated(t.clone(), Some(rho_ref), Some(self.rho_domain())),
        }
    }

    // Ungauged potential; total for polytropic ρ ≥ 0, table range otherwise.
    fn raw_chi(&self, rho: f64) -> f64 {
        match &self.kind {
            EosKind::Polytropic { gamma, .. } => 4.0 / (gamma - 1.0) * self.raw_eta(rho),
            EosKind::Tabulated(t) => t.chi_from_lowest(rho),
        }
    }

    fn raw_eta(&self, rho: f64) -> f64 {
        match &self.kind {
            EosKind::Polytropic { gamma, kappa } => (kappa * gamma).sqrt() * rho.powf(0.5 * (gamma - 1.0)),
            EosKind::Tabulated(t) => t.eta(rho),
        }
    }

    fn check_rho(&self, rho: f64) -> Result<()> {
        if rho >= self.rho_lo && rho <= self.rho_hi {
            Ok(())
        } else {
            Err(Error::Domain {
                rho,
                lo: self.rho_lo,
                hi: self.rho_hi,
            })
        }
    }

    fn check_chi(&self, chi: f64) -> Result<()> {
        if chi >= self.chi_lo && chi <= self.chi_hi {
            Ok(())
        } else {
            Err(Error::Range {
                chi_dagger: chi,
                lo: self.chi_lo,
                hi: self.chi_hi,
            })
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        self.check_rho(rho)?;
        Ok(match &self.kind {
            EosKind::Polytropic { gamma, kappa } => kappa * rho.powf(*gamma),
            EosKind::Tabulated(t) => t.interp.eval_all(rho).0,
        })
    }

    /// η = sqrt(f′(ρ)).
    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        self.check_rho(rho)?;
        Ok(self.raw_eta(rho))
    }

    pub fn chi_dagger_of_rho(&self, rho: f64) -> Result<f64> {
        self.check_rho(rho)?;
        Ok(self.raw_chi(rho) - self.raw_ref)
    }

    pub fn rho_of_chi_dagger(&self, chi: f64) -> Result<f64> {
        self.check_chi(chi)?;
        Ok(self.rho_unchecked(chi))
    }

    fn rho_unchecked(&self, chi: f64) -> f64 {
        let raw = chi + self.raw_ref;
        let rho = match &self.kind {
            EosKind::Polytropic { gamma, kappa } => {
                let eta = 0.25 * (gamma - 1.0) * raw;
                (eta / (kappa * gamma).sqrt()).max(0.0).powf(2.0 / (gamma - 1.0))
            }
            EosKind::Tabulated(t) => t.rho_from_lowest(raw),
        };
        rho.clamp(self.rho_lo, self.rho_hi)
    }

    /// η and η′ = dη/dχ† = ρ f″(ρ) / (4η²) at the given χ†.
    pub fn eta_and_slope(&self, chi: f64) -> Result<(f64, f64)> {
        self.check_chi(chi)?;
        Ok(match &self.kind {
            EosKind::Polytropic { gamma, .. } => {
                let slope = 0.25 * (gamma - 1.0);
                (slope * (chi + self.raw_ref), slope)
            }
            EosKind::Tabulated(t) => {
                let rho = self.rho_unchecked(chi);
                let (_, d1, d2) = t.interp.eval_all(rho);
                (d1.sqrt(), rho * d2 / (4.0 * d1))
            }
        })
    }

    /// χ† of density `rho` in this model's gauge, without the domain check.
    /// Used to move invariants given relative to another base density into this
    /// gauge: α_here = α_there + ½·gauge_offset(ρ_there).
    pub fn gauge_offset(&self, rho: f64) -> Result<f64> {
        match &self.kind {
            EosKind::Polytropic { .. } if rho >= 0.0 => Ok(self.raw_chi(rho) - self.raw_ref),
            EosKind::Tabulated(t) if rho >= t.range().0 && rho <= t.range().1 => {
                Ok(self.raw_chi(rho) - self.raw_ref)
            }
            _ => Err(Error::Domain {
                rho,
                lo: self.rho_lo,
                hi: self.rho_hi,
            }),
        }
    }
}
