//! Excitation timeline: per laser period one TPE+stim pulse pair per
//! polarization branch, the second branch delayed by `pair_delay`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Polarization;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitationCycle {
    /// Absolute TPE pulse time, s. The first TPE pulse defines t = 0.
    pub tpe_time: f64,
    pub stim_time: f64,
    /// Polarization of the stim pulse, which names the branch.
    pub stim_pol: Polarization,
    /// Whether the stim pulse of this branch is switched on.
    pub stim_enabled: bool,
    pub cycle_index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceConfig {
    /// Laser repetition period, s.
    pub rep_period: f64,
    /// Delay of the second pulse pair within a period, s.
    pub pair_delay: f64,
    /// Stim pulse delay after its TPE partner, s.
    pub stim_delay: f64,
    pub n_periods: u64,
    pub stim_enabled_h: bool,
    pub stim_enabled_v: bool,
    /// Branch fired at the start of each period.
    pub first_branch: Polarization,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self {
            rep_period: 12.5e-9,
            pair_delay: 2e-9,
            stim_delay: 6e-12,
            n_periods: 1,
            stim_enabled_h: true,
            stim_enabled_v: true,
            first_branch: Polarization::V,
        }
    }
}

impl SequenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rep_period > 0.0 && self.rep_period.is_finite()) {
            return Err(Error::config("sequence.rep_period", "must be positive"));
        }
        if !(self.pair_delay > 0.0 && self.pair_delay < self.rep_period) {
            return Err(Error::config(
                "sequence.pair_delay",
                format!(
                    "must satisfy 0 < pair_delay < rep_period, got {} s",
                    self.pair_delay
                ),
            ));
        }
        if !self.stim_delay.is_finite() {
            return Err(Error::config("sequence.stim_delay", "must be finite"));
        }
        if self.n_periods == 0 {
            return Err(Error::config("sequence.n_periods", "must be at least 1"));
        }
        Ok(())
    }

    pub fn stim_enabled(&self, pol: Polarization) -> bool {
        match pol {
            Polarization::H => self.stim_enabled_h,
            Polarization::V => self.stim_enabled_v,
        }
    }

    /// Total simulated time, s.
    pub fn duration(&self) -> f64 {
        self.n_periods as f64 * self.rep_period
    }

    /// Warning text when the pair delay is not well separated from the
    /// exciton lifetime (below 5·t1_x).
    pub fn pair_delay_warning(&self, t1_x: f64) -> Option<String> {
        (self.pair_delay < 5.0 * t1_x).then(|| {
            format!(
                "pair_delay {:.3e} s is below 5·t1_x = {:.3e} s; consecutive branches overlap",
                self.pair_delay,
                5.0 * t1_x
            )
        })
    }

    /// Cycle for a given global index without materialising the sequence.
    pub fn cycle(&self, index: u64) -> ExcitationCycle {
        let period = index / 2;
        let second = index % 2 == 1;
        let pol = if second {
            self.first_branch.orthogonal()
        } else {
            self.first_branch
        };
        let tpe_time =
            period as f64 * self.rep_period + if second { self.pair_delay } else { 0.0 };
        ExcitationCycle {
            tpe_time,
            stim_time: tpe_time + self.stim_delay,
            stim_pol: pol,
            stim_enabled: self.stim_enabled(pol),
            cycle_index: index,
        }
    }

    pub fn n_cycles(&self) -> u64 {
        2 * self.n_periods
    }
}

/// Builds the 2·n_periods cycles in increasing TPE time.
pub fn build_sequence(cfg: &SequenceConfig) -> Result<Vec<ExcitationCycle>> {
    cfg.validate()?;
    Ok((0..cfg.n_cycles()).map(|i| cfg.cycle(i)).collect())
}
