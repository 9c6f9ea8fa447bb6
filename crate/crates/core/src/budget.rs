//! Rate/loss budget for n-mode photon generation with an EOM switching tree,
//! optionally with the first split done passively by polarization-selective
//! stimulation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemuxScheme {
    pub n_modes: u32,
    /// Source repetition rate, Hz.
    pub rep_rate: f64,
    /// Probability of a collected photon per shot.
    pub source_efficiency: f64,
    /// Loss per EOM traversal, dB.
    pub eom_loss_db: f64,
    /// Highest switching rate of a single EOM, Hz.
    pub eom_max_rate: f64,
    pub passive_doubling: bool,
    /// Exciton lifetime, s; sets the physical clock ceiling.
    pub t1_x: f64,
}

impl Default for DemuxScheme {
    fn default() -> Self {
        Self {
            n_modes: 2,
            rep_rate: 80e6,
            source_efficiency: 0.5,
            eom_loss_db: 3.0,
            eom_max_rate: 40e6,
            passive_doubling: false,
            t1_x: 175e-12,
        }
    }
}

/// Which constraint sets the effective clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitingFactor {
    RepRate,
    EomRate,
    Lifetime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// n-fold coincidence rate, Hz.
    pub rate: f64,
    pub limiting_factor: LimitingFactor,
    /// Total EOMs in the tree.
    pub eom_count: u32,
    /// EOMs traversed by each photon.
    pub eom_depth: u32,
    /// Switching rate demanded of the first EOM at the effective clock, Hz
    /// (zero when no EOM is needed).
    pub first_eom_rate: f64,
    /// Effective pump clock, Hz.
    pub clock: f64,
    pub per_mode_efficiency: f64,
}

fn ceil_log2(n: u32) -> u32 {
    if n <= 1 {
        0
    } else {
        32 - (n - 1).leading_zeros()
    }
}

impl DemuxScheme {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 1 {
            return Err(Error::domain("n_modes", "must be at least 1"));
        }
        for (field, v) in [
            ("rep_rate", self.rep_rate),
            ("eom_max_rate", self.eom_max_rate),
            ("t1_x", self.t1_x),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(field, format!("{v} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.source_efficiency) {
            return Err(Error::domain("source_efficiency", "not in [0,1]"));
        }
        if !(self.eom_loss_db >= 0.0 && self.eom_loss_db.is_finite()) {
            return Err(Error::domain("eom_loss_db", "must be non-negative"));
        }
        Ok(())
    }

    /// EOMs a photon passes through on its way to its mode.
    pub fn eom_depth(&self) -> u32 {
        let d = ceil_log2(self.n_modes);
        if self.passive_doubling {
            d.saturating_sub(1)
        } else {
            d
        }
    }

    /// Total EOMs of the binary tree (n − 1, or n − 2 after a free first split).
    pub fn eom_count(&self) -> u32 {
        let n = self.n_modes;
        if self.passive_doubling {
            n.saturating_sub(2)
        } else {
            n - 1
        }
    }
}

/// Effective clock, losses and n-fold rate of a demultiplexing scheme.
pub fn multiphoton_rate(s: &DemuxScheme) -> Result<RateReport> {
    s.validate()?;
    let eom_count = s.eom_count();
    let eom_depth = s.eom_depth();
    // The first EOM toggles at clock/2, or clock/4 behind a passive split.
    let divider = if s.passive_doubling { 4.0 } else { 2.0 };
    let lifetime_ceiling = 1.0 / (5.0 * s.t1_x);
    let mut clock = s.rep_rate;
    let mut limiting = LimitingFactor::RepRate;
    if eom_count > 0 && divider * s.eom_max_rate < clock {
        clock = divider * s.eom_max_rate;
        limiting = LimitingFactor::EomRate;
    }
    if lifetime_ceiling < clock {
        clock = lifetime_ceiling;
        limiting = LimitingFactor::Lifetime;
    }
    let per_mode = s.source_efficiency * 10f64.powf(-(eom_depth as f64) * s.eom_loss_db / 10.0);
    let n = s.n_modes as f64;
    Ok(RateReport {
        rate: clock / n * per_mode.powi(s.n_modes as i32),
        limiting_factor: limiting,
        eom_count,
        eom_depth,
        first_eom_rate: if eom_count > 0 { clock / divider } else { 0.0 },
        clock,
        per_mode_efficiency: per_mode,
    })
}

/// Table of n_modes against the active and passive-assisted rates.
pub fn write_sweep<W: Write>(base: &DemuxScheme, max_modes: u32, mut w: W) -> Result<()> {
    writeln!(w, "n_modes\tactive_rate_hz\tactive_eoms\tpassive_rate_hz\tpassive_eoms")?;
    for n in 1..=max_modes {
        let a = multiphoton_rate(&DemuxScheme {
            n_modes: n,
            passive_doubling: false,
            ..base.clone()
        })?;
        let p = multiphoton_rate(&DemuxScheme {
            n_modes: n,
            passive_doubling: true,
            ..base.clone()
        })?;
        writeln!(w, "{n}\t{:.6e}\t{}\t{:.6e}\t{}", a.rate, a.eom_count, p.rate, p.eom_count)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scheme(n: u32, passive: bool) -> DemuxScheme {
        DemuxScheme {
            n_modes: n,
            passive_doubling: passive,
            eom_max_rate: 1e9,
            ..Default::default()
        }
    }

    #[test]
    fn single_mode_is_the_source() {
        let r = multiphoton_rate(&scheme(1, false)).unwrap();
        assert_eq!(r.rate, 80e6 * 0.5);
        assert_eq!(r.eom_count, 0);
    }

    #[test]
    fn passive_pair_needs_no_eom() {
        let p = multiphoton_rate(&scheme(2, true)).unwrap();
        let a = multiphoton_rate(&scheme(2, false)).unwrap();
        assert_eq!((p.eom_count, p.eom_depth), (0, 0));
        assert_eq!((a.eom_count, a.eom_depth), (1, 1));
        assert_eq!(p.clock, a.clock);
        let ratio = p.rate / a.rate;
        assert!((ratio - 10f64.powf(0.6)).abs() < 1e-12);
        assert!((ratio - 3.98).abs() < 0.005);
    }

    #[test]
    fn hybrid_first_eom_runs_at_half_rate() {
        let h = multiphoton_rate(&scheme(4, true)).unwrap();
        let a = multiphoton_rate(&scheme(4, false)).unwrap();
        assert_eq!((h.eom_count, a.eom_count), (2, 3));
        assert_eq!((h.eom_depth, a.eom_depth), (1, 2));
        assert_eq!(h.first_eom_rate * 2.0, a.first_eom_rate);
    }

    #[test]
    fn limiting_factors() {
        let slow = DemuxScheme {
            eom_max_rate: 10e6,
            ..scheme(4, false)
        };
        let r = multiphoton_rate(&slow).unwrap();
        assert_eq!(r.limiting_factor, LimitingFactor::EomRate);
        assert_eq!(r.clock, 20e6);
        let fast = DemuxScheme {
            rep_rate: 10e9,
            ..scheme(2, true)
        };
        let r = multiphoton_rate(&fast).unwrap();
        assert_eq!(r.limiting_factor, LimitingFactor::Lifetime);
        assert!((r.clock - 1.0 / (5.0 * 175e-12)).abs() < 1.0);
        assert_eq!(multiphoton_rate(&scheme(2, false)).unwrap().limiting_factor, LimitingFactor::RepRate);
    }

    #[test]
    fn sweep_table() {
        let mut buf = Vec::new();
        write_sweep(&DemuxScheme::default(), 8, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 9);
    }

    #[test]
    fn invalid_scheme() {
        assert!(multiphoton_rate(&DemuxScheme { n_modes: 0, ..Default::default() }).is_err());
        assert!(multiphoton_rate(&DemuxScheme { rep_rate: 0.0, ..Default::default() }).is_err());
    }

    proptest! {
        #[test]
        fn monotonicity(
            n in 1u32..32,
            loss in 0.0f64..10.0,
            rep in 1e6f64..1e10,
            eff in 0.0f64..1.0,
            eom in 1e6f64..1e10,
            passive in any::<bool>(),
        ) {
            let s = DemuxScheme { n_modes: n, rep_rate: rep, source_efficiency: eff, eom_loss_db: loss, eom_max_rate: eom, passive_doubling: passive, t1_x: 175e-12 };
            let r = multiphoton_rate(&s).unwrap().rate;
            let more_modes = multiphoton_rate(&DemuxScheme { n_modes: n + 1, ..s.clone() }).unwrap().rate;
            let more_loss = multiphoton_rate(&DemuxScheme { eom_loss_db: loss + 1.0, ..s.clone() }).unwrap().rate;
            let faster = multiphoton_rate(&DemuxScheme { rep_rate: rep * 1.5, ..s.clone() }).unwrap().rate;
            let better = multiphoton_rate(&DemuxScheme { source_efficiency: (eff + 0.1).min(1.0), ..s.clone() }).unwrap().rate;
            prop_assert!(more_modes <= r * (1.0 + 1e-12));
            prop_assert!(more_loss <= r * (1.0 + 1e-12));
            prop_assert!(faster >= r * (1.0 - 1e-12));
            prop_assert!(better >= r * (1.0 - 1e-12));
        }

        #[test]
        fn passive_saves_one_layer(n in 1u32..1000) {
            let a = scheme(n, false);
            let p = scheme(n, true);
            prop_assert_eq!(p.eom_depth(), a.eom_depth().saturating_sub(1));
            prop_assert_eq!(a.eom_count(), n - 1);
        }
    }
}
