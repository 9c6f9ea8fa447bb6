//! Closed-form model of the four-level dot (ground, H/V exciton, biexciton)
//! driven by a two-photon excitation pulse and a polarized stimulation pulse.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::normal_cdf;

/// Linear polarization of a photon or a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn orthogonal(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }

    /// Sign of the exciton eigenstate energy offset: H sits at +FSS/2.
    pub fn fss_sign(self) -> f64 {
        match self {
            Polarization::H => 1.0,
            Polarization::V => -1.0,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => f.write_str("H"),
            Polarization::V => f.write_str("V"),
        }
    }
}

/// Physical parameters of the emitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QdParameters {
    /// Exciton radiative lifetime, s.
    pub t1_x: f64,
    /// Biexciton lifetime, s.
    pub t1_xx: f64,
    /// Fine-structure splitting, eV.
    pub fss: f64,
    /// Standard deviation of the spectral wandering of the H-V frequency
    /// difference, Hz.
    pub sigma: f64,
    /// Total dephasing rate, 1/s. `None` means radiative only (1/t1_x).
    pub gamma: Option<f64>,
    /// Probability that the biexciton is prepared by a π pulse.
    pub prep_fidelity: f64,
    /// Probability that a successful stimulation selects the stim polarization.
    pub stim_fidelity: f64,
    /// Per-cycle probability of an extra, uncorrelated exciton photon.
    pub reexcitation_prob: f64,
    /// Time scale (s) converting a TPE detuning in Hz into the effective Rabi
    /// detuning angle: Δ = 2π · detuning · rabi_detuning_scale.
    pub rabi_detuning_scale: f64,
}

impl Default for QdParameters {
    fn default() -> Self {
        Self {
            t1_x: 175e-12,
            t1_xx: 120e-12,
            fss: 7.0e-6,
            sigma: 0.0,
            gamma: None,
            prep_fidelity: 1.0,
            stim_fidelity: 1.0,
            reexcitation_prob: 0.0,
            rabi_detuning_scale: 2e-12,
        }
    }
}

fn check_probability(field: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(field, format!("{p} is not a probability")))
    }
}

fn check_positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(field, format!("{v} must be positive and finite")))
    }
}

fn check_non_negative(field: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(field, format!("{v} must be non-negative and finite")))
    }
}

impl QdParameters {
    pub fn validate(&self) -> Result<()> {
        check_positive("t1_x", self.t1_x)?;
        check_positive("t1_xx", self.t1_xx)?;
        check_non_negative("fss", self.fss)?;
        check_non_negative("sigma", self.sigma)?;
        if let Some(g) = self.gamma {
            check_positive("gamma", g)?;
        }
        check_probability("prep_fidelity", self.prep_fidelity)?;
        check_probability("stim_fidelity", self.stim_fidelity)?;
        check_probability("reexcitation_prob", self.reexcitation_prob)?;
        check_non_negative("rabi_detuning_scale", self.rabi_detuning_scale)?;
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(1.0 / self.t1_x)
    }

    /// H-V exciton frequency splitting FSS/h, Hz.
    pub fn delta_nu(&self) -> f64 {
        crate::units::ev_to_hz(self.fss)
    }
}

/// A laser pulse acting on the dot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseParameters {
    /// Pulse area in units of π.
    pub area: f64,
    /// Detuning from the two-photon resonance, Hz.
    pub detuning: f64,
    /// Intensity FWHM, s.
    pub duration: f64,
}

impl Default for PulseParameters {
    fn default() -> Self {
        Self {
            area: 1.0,
            detuning: 0.0,
            duration: 2e-12,
        }
    }
}

impl PulseParameters {
    pub fn validate(&self) -> Result<()> {
        check_non_negative("area", self.area)?;
        if !self.detuning.is_finite() {
            return Err(Error::domain("detuning", "must be finite"));
        }
        check_positive("duration", self.duration)
    }

    /// Gaussian standard deviation of the intensity envelope.
    pub fn sigma(&self) -> f64 {
        self.duration / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
    }
}

/// Biexciton population after a TPE pulse, from the generalized two-level
/// Rabi formula with Ω = area·π and Δ = 2π·detuning·scale.
pub fn prepare_biexciton_probability(pulse: &PulseParameters, qd: &QdParameters) -> Result<f64> {
    pulse.validate()?;
    qd.validate()?;
    let omega = pulse.area * PI;
    let delta = 2.0 * PI * pulse.detuning * qd.rabi_detuning_scale;
    let omega_eff_sq = omega * omega + delta * delta;
    if omega_eff_sq == 0.0 {
        return Ok(0.0);
    }
    let half = 0.5 * omega_eff_sq.sqrt();
    let p = qd.prep_fidelity * (omega * omega / omega_eff_sq) * half.sin().powi(2);
    Ok(p.clamp(0.0, 1.0))
}

/// Probability that a stim pulse arriving `delta_t` after the TPE pulse
/// deterministically triggers the biexciton decay.
///
/// The rise is the Gaussian-CDF cross-correlation of two envelopes of the
/// stim pulse's duration (the TPE pulse is taken to be equally long); after
/// the rise the biexciton survival exp(-δt/t1_xx) limits the efficiency.
pub fn stim_efficiency(delta_t: f64, stim_pulse: &PulseParameters, qd: &QdParameters) -> f64 {
    let survival = (-delta_t.max(0.0) / qd.t1_xx).exp();
    (stim_rise(delta_t, stim_pulse) * survival).clamp(0.0, 1.0)
}

/// Probability that a biexciton still present at the stim pulse is
/// stimulated: the Gaussian-CDF rise of [`stim_efficiency`] alone.
pub fn stim_rise(delta_t: f64, stim_pulse: &PulseParameters) -> f64 {
    let width = std::f64::consts::SQRT_2 * stim_pulse.sigma();
    normal_cdf(delta_t / width)
}

/// Polarization of the exciton decay channel selected in one cycle.
pub fn branch_polarization<R: Rng + ?Sized>(
    stim_success: bool,
    stim_pol: Polarization,
    qd: &QdParameters,
    rng: &mut R,
) -> Polarization {
    if stim_success {
        if rng.random::<f64>() < qd.stim_fidelity {
            stim_pol
        } else {
            stim_pol.orthogonal()
        }
    } else if rng.random::<bool>() {
        Polarization::H
    } else {
        Polarization::V
    }
}
