//! Closed-form HOM figures of merit: the imbalance/multiphoton correction,
//! the wandering-averaged H-V visibility and its map over lifetime and FSS.

pub mod faddeeva;
mod map;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QdParameters;

pub use faddeeva::faddeeva;
pub use map::{linspace, visibility_map, write_line_cut, MapGrid, VisibilityMap};

/// Corrected HOM visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectedVisibility {
    pub value: f64,
    /// Set when the inputs imply a visibility above one.
    pub unphysical: bool,
}

/// Removes the multiphoton and beamsplitter-imbalance contributions from a
/// raw visibility: (v_raw + g2)/(1 - g2) · (r² + t²)/(2rt).
pub fn correct_hom(v_raw: f64, g2: f64, r: f64, t: f64) -> Result<CorrectedVisibility> {
    if !(0.0..1.0).contains(&g2) {
        return Err(Error::domain("g2", format!("{g2} not in [0,1)")));
    }
    for (field, v) in [("r", r), ("t", t)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain(field, format!("{v} not in (0,1)")));
        }
    }
    if !v_raw.is_finite() {
        return Err(Error::domain("v_raw", "must be finite"));
    }
    let value = (v_raw + g2) / (1.0 - g2) * (r * r + t * t) / (2.0 * r * t);
    Ok(CorrectedVisibility {
        value,
        unphysical: value > 1.0,
    })
}

/// How the dephasing rate γ follows the lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaRule {
    /// γ = 1/T1.
    Radiative,
    /// γ = 1/T1 + γ_pd, pure dephasing in 1/s.
    PureDephasing(f64),
    /// γ fixed, 1/s.
    Fixed(f64),
}

impl GammaRule {
    pub fn gamma(self, t1: f64) -> f64 {
        match self {
            GammaRule::Radiative => 1.0 / t1,
            GammaRule::PureDephasing(pd) => 1.0 / t1 + pd,
            GammaRule::Fixed(g) => g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eq2Inputs {
    /// s.
    pub t1: f64,
    /// H-V center-frequency difference, Hz.
    pub delta_nu: f64,
    /// Standard deviation of the frequency difference, Hz.
    pub sigma: f64,
    /// 1/s.
    pub gamma: f64,
}

impl Eq2Inputs {
    pub fn new(t1: f64, delta_nu: f64, sigma: f64) -> Self {
        Self {
            t1,
            delta_nu,
            sigma,
            gamma: 1.0 / t1,
        }
    }

    pub fn from_qd(qd: &QdParameters) -> Self {
        Self {
            t1: qd.t1_x,
            delta_nu: qd.delta_nu(),
            sigma: qd.sigma,
            gamma: qd.gamma(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0 && self.t1.is_finite()) {
            return Err(Error::domain("t1", "must be positive"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain("sigma", "must be non-negative"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain("gamma", "must be positive"));
        }
        if !self.delta_nu.is_finite() {
            return Err(Error::domain("delta_nu", "must be finite"));
        }
        Ok(())
    }

    /// Below this wandering the closed-form limit is used.
    pub fn crossover_sigma(&self) -> f64 {
        self.gamma.max(2.0 * PI * self.delta_nu.abs()) / 1e4
    }
}

/// Lorentzian overlap without wandering: γ / (T1·((2πδν)² + γ²)).
pub fn visibility_limit(t1: f64, delta_nu: f64, gamma: f64) -> f64 {
    let d = 2.0 * PI * delta_nu;
    gamma / (t1 * (d * d + gamma * gamma))
}

/// Two-photon visibility of photons with detuning δν and Gaussian wandering
/// of standard deviation Σ in their frequency difference:
/// Re[w(z)] / (√(2π)·Σ·2T1), z = (2πδν + iγ)/(2π√2·Σ).
pub fn visibility_eq2(inputs: &Eq2Inputs) -> Result<f64> {
    inputs.validate()?;
    let Eq2Inputs {
        t1,
        delta_nu,
        sigma,
        gamma,
    } = *inputs;
    if sigma < inputs.crossover_sigma() {
        return Ok(visibility_limit(t1, delta_nu, gamma));
    }
    let scale = 2.0 * PI * std::f64::consts::SQRT_2 * sigma;
    let z = Complex64::new(2.0 * PI * delta_nu.abs(), gamma) / scale;
    Ok(faddeeva(z).re / ((2.0 * PI).sqrt() * sigma * 2.0 * t1))
}
