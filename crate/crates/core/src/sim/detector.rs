use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{ps_to_seconds, seconds_to_ps};

/// Single-photon detector: efficiency, Gaussian timing jitter, Poissonian
/// dark counts and a non-paralyzable dead time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorModel {
    pub efficiency: f64,
    /// Standard deviation of the timing jitter, s.
    pub jitter_sigma: f64,
    /// Hz.
    pub dark_rate: f64,
    /// s.
    pub dead_time: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: 0.8,
            jitter_sigma: 5e-12,
            dark_rate: 0.0,
            dead_time: 0.0,
        }
    }
}

impl DetectorModel {
    /// Unit efficiency, no jitter, no darks, no dead time.
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            jitter_sigma: 0.0,
            dark_rate: 0.0,
            dead_time: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::domain("efficiency", format!("{} not in [0,1]", self.efficiency)));
        }
        for (field, v) in [
            ("jitter_sigma", self.jitter_sigma),
            ("dark_rate", self.dark_rate),
            ("dead_time", self.dead_time),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(field, format!("{v} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Turns photon arrival times (s) into a quantized, dead-time filtered
    /// tag stream. Darks are spread uniformly over `[0, duration)`.
    pub fn detect<R: Rng + ?Sized>(
        &self,
        arrivals: &[f64],
        duration: f64,
        channel: u8,
        rng: &mut R,
    ) -> TimeTagStream {
        let mut tags = Vec::with_capacity(arrivals.len());
        for &t in arrivals {
            let jitter = if self.jitter_sigma > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                z * self.jitter_sigma
            } else {
                0.0
            };
            if self.efficiency >= 1.0 || rng.random::<f64>() < self.efficiency {
                tags.push(seconds_to_ps(t + jitter));
            }
        }
        let mean_darks = self.dark_rate * duration;
        if mean_darks > 0.0 {
            let n = Poisson::new(mean_darks)
                .map(|p| p.sample(rng) as u64)
                .unwrap_or(0);
            for _ in 0..n {
                tags.push(seconds_to_ps(rng.random::<f64>() * duration));
            }
        }
        tags.sort_unstable();
        let dead = seconds_to_ps(self.dead_time);
        if dead > 0 {
            apply_dead_time(&mut tags, dead);
        }
        TimeTagStream {
            channel,
            tags,
            duration,
        }
    }
}

fn apply_dead_time(tags: &mut Vec<i64>, dead_ps: i64) {
    let mut last: Option<i64> = None;
    tags.retain(|&t| match last {
        Some(l) if t - l < dead_ps => false,
        _ => {
            last = Some(t);
            true
        }
    });
}

/// Detection timestamps of one channel, integer picoseconds, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagStream {
    pub channel: u8,
    pub tags: Vec<i64>,
    /// Acquisition time, s.
    pub duration: f64,
}

impl TimeTagStream {
    pub fn new(channel: u8, tags: Vec<i64>, duration: f64) -> Result<Self> {
        let s = Self {
            channel,
            tags,
            duration,
        };
        s.check_sorted()?;
        Ok(s)
    }

    pub fn check_sorted(&self) -> Result<()> {
        match self.tags.windows(2).position(|w| w[1] < w[0]) {
            None => Ok(()),
            Some(i) => Err(Error::Data(format!(
                "channel {} tags not sorted at index {}",
                self.channel,
                i + 1
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Mean count rate, Hz.
    pub fn rate(&self) -> f64 {
        if self.duration > 0.0 {
            self.tags.len() as f64 / self.duration
        } else {
            0.0
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.tags.iter().map(|&t| ps_to_seconds(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn transparent_detector_keeps_times() {
        let arrivals: Vec<f64> = (0..100).map(|i| i as f64 * 12.5e-9 + 3e-12).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = DetectorModel::ideal().detect(&arrivals, 1e-6, 0, &mut rng);
        let want: Vec<i64> = arrivals.iter().map(|&t| seconds_to_ps(t)).collect();
        assert_eq!(s.tags, want);
    }

    #[test]
    fn efficiency_thins_binomially() {
        let n = 1_000_000;
        let arrivals: Vec<f64> = (0..n).map(|i| i as f64 * 1e-9).collect();
        let det = DetectorModel {
            efficiency: 0.5,
            ..DetectorModel::ideal()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = det.detect(&arrivals, n as f64 * 1e-9, 0, &mut rng);
        let sd = (n as f64 * 0.25).sqrt();
        assert!((s.len() as f64 - 5e5).abs() < 3.0 * sd, "{}", s.len());
    }

    #[test]
    fn pure_dark_process_is_poissonian() {
        let det = DetectorModel {
            dark_rate: 1000.0,
            ..DetectorModel::ideal()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = det.detect(&[], 100.0, 0, &mut rng);
        let sd = 1e5f64.sqrt();
        assert!((s.len() as f64 - 1e5).abs() < 3.0 * sd, "{}", s.len());
        assert!(s.tags.iter().all(|&t| (0..=100_000_000_000_000).contains(&t)));
    }

    #[test]
    fn dead_time_is_non_paralyzable() {
        let mut tags = vec![0, 10, 20, 30, 100, 105];
        apply_dead_time(&mut tags, 25);
        assert_eq!(tags, vec![0, 30, 100]);
    }

    #[test]
    fn unsorted_stream_rejected() {
        assert!(TimeTagStream::new(0, vec![3, 1], 1.0).is_err());
        assert!(TimeTagStream::new(0, vec![1, 1, 3], 1.0).is_ok());
    }

    proptest! {
        #[test]
        fn output_sorted_and_dead_time_respected(
            mut arrivals in proptest::collection::vec(0.0f64..1e-6, 0..300),
            dead in 0.0f64..50e-9,
            jitter in 0.0f64..100e-12,
            seed in any::<u64>(),
        ) {
            arrivals.sort_by(f64::total_cmp);
            let det = DetectorModel { efficiency: 0.7, jitter_sigma: jitter, dark_rate: 1e6, dead_time: dead };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = det.detect(&arrivals, 1e-6, 1, &mut rng);
            let dead_ps = seconds_to_ps(dead);
            for w in s.tags.windows(2) {
                prop_assert!(w[1] >= w[0]);
                if dead_ps > 0 {
                    prop_assert!(w[1] - w[0] >= dead_ps);
                }
            }
        }
    }
}
