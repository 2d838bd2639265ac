//! Riemann-invariant state algebra.

use serde::{Deserialize, Serialize};

use crate::eos::EosModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidState {
    pub rho: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharState {
    pub alpha: f64,
    pub beta: f64,
}

impl CharState {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// χ = α−β = 2w
    pub fn chi(&self) -> f64 {
        self.alpha - self.beta
    }

    /// χ† = α+β
    pub fn chi_dagger(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn velocity(&self) -> f64 {
        0.5 * self.chi()
    }
}

/// Plane geometry drops the geometric source; it exists as an exact reference case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    #[default]
    Spherical,
    Plane,
}

pub fn to_invariants(s: FluidState, eos: &EosModel) -> Result<CharState> {
    let half = 0.5 * eos.chi_dagger_of_rho(s.rho)?;
    Ok(CharState {
        alpha: half + s.w,
        beta: half - s.w,
    })
}

pub fn from_invariants(c: CharState, eos: &EosModel) -> Result<FluidState> {
    Ok(FluidState {
        rho: eos.rho_of_chi_dagger(c.chi_dagger())?,
        w: c.velocity(),
    })
}

/// (c₊, c₋) = (w+η, w−η)
pub fn char_speeds(c: CharState, eos: &EosModel) -> Result<(f64, f64)> {
    let (eta, _) = eos.eta_and_slope(c.chi_dagger())?;
    let w = c.velocity();
    Ok((w + eta, w - eta))
}

/// F(α,β,r) = −η(α−β)/r in spherical symmetry, zero in plane geometry.
pub fn source_f(c: CharState, r: f64, geom: Geometry, eos: &EosModel) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius { r, param: f64::NAN });
    }
    match geom {
        Geometry::Plane => Ok(0.0),
        Geometry::Spherical => {
            let (eta, _) = eos.eta_and_slope(c.chi_dagger())?;
            Ok(-eta * c.chi() / r)
        }
    }
}

/// Partials of the characteristic speeds with respect to the invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedGradients {
    pub cp_alpha: f64,
    pub cp_beta: f64,
    pub cm_alpha: f64,
    pub cm_beta: f64,
}

impl SpeedGradients {
    pub fn from_slope(eta_prime: f64) -> Self {
        Self {
            cp_alpha: 0.5 + eta_prime,
            cp_beta: -0.5 + eta_prime,
            cm_alpha: 0.5 - eta_prime,
            cm_beta: -0.5 - eta_prime,
        }
    }
}

pub fn speed_gradients(c: CharState, eos: &EosModel) -> Result<SpeedGradients> {
    let (_, slope) = eos.eta_and_slope(c.chi_dagger())?;
    Ok(SpeedGradients::from_slope(slope))
}

/// Everything the solvers need at one (α, β, r) point, from a single EOS call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCoefficients {
    pub eta: f64,
    pub eta_prime: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub grad: SpeedGradients,
    pub f: f64,
    pub f_alpha: f64,
    pub f_beta: f64,
    pub f_r: f64,
}

impl PointCoefficients {
    pub fn at(c: CharState, r: f64, geom: Geometry, eos: &EosModel) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius { r, param: f64::NAN });
        }
        let (eta, eta_prime) = eos.eta_and_slope(c.chi_dagger())?;
        Ok(Self::from_eta(c, r, eta, eta_prime, geom))
    }

    pub fn from_eta(c: CharState, r: f64, eta: f64, eta_prime: f64, geom: Geometry) -> Self {
        let chi = c.chi();
        let w = 0.5 * chi;
        let (f, f_alpha, f_beta, f_r) = match geom {
            Geometry::Plane => (0.0, 0.0, 0.0, 0.0),
            Geometry::Spherical => (
                -eta * chi / r,
                -(eta_prime * chi + eta) / r,
                -(eta_prime * chi - eta) / r,
                eta * chi / (r * r),
            ),
        };
        Self {
            eta,
            eta_prime,
            c_plus: w + eta,
            c_minus: w - eta,
            grad: SpeedGradients::from_slope(eta_prime),
            f,
            f_alpha,
            f_beta,
            f_r,
        }
    }

    /// Transport coefficients for (γ, μ) along v:
    /// ∂γ/∂v = A₁νγ + B₁μδ + C₁μν and ∂μ/∂v = A₂νγ + B₂μδ + C₂μν.
    pub fn gamma_mu_transport(&self) -> TransportCoefficients {
        let two_eta = 2.0 * self.eta;
        let g = &self.grad;
        let f = self.f;
        TransportCoefficients {
            a1: self.f_alpha - f * g.cp_alpha / two_eta,
            b1: f * g.cm_beta / two_eta,
            c1: f * f * (g.cm_alpha - g.cp_beta) / two_eta + f * self.f_beta + self.f_r * self.c_minus,
            a2: -g.cp_alpha / two_eta,
            b2: g.cm_beta / two_eta,
            c2: f * (g.cm_alpha - g.cp_beta) / two_eta,
        }
    }

    /// Transport coefficients for (δ, ν) along u:
    /// ∂δ/∂u = A₁μδ + B₁νγ + C₁μν and ∂ν/∂u = A₂μδ + B₂νγ + C₂μν.
    pub fn delta_nu_transport(&self) -> TransportCoefficients {
        let two_eta = 2.0 * self.eta;
        let g = &self.grad;
        let f = self.f;
        TransportCoefficients {
            a1: f * g.cm_beta / two_eta + self.f_beta,
            b1: -f * g.cp_alpha / two_eta,
            c1: f * f * (g.cm_alpha - g.cp_beta) / two_eta + f * self.f_alpha + self.f_r * self.c_plus,
            a2: g.cm_beta / two_eta,
            b2: -g.cp_alpha / two_eta,
            c2: f * (g.cm_alpha - g.cp_beta) / two_eta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportCoefficients {
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}
