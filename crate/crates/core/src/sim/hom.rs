//! Asymmetric (unbalanced Mach-Zehnder) HOM interferometer.
//!
//! A 50:50 splitter sends each photon into a short or a long arm; the long
//! arm is delayed so that photons from two excitation cycles meet at the
//! second, imbalanced splitter. Photons reaching the second splitter in the
//! same time slot from opposite arms interfere pairwise; every other photon
//! is routed independently.

use rand::Rng;

use super::detector::{DetectorModel, TimeTagStream};
use super::optics::{hom_interfere, Arrival, BeamsplitterParams, OutputPort};
use super::photon::{PhotonKind, PhotonRecord};
use super::rng::{substream, DETECTION, ROUTING};
use crate::error::Result;
use crate::model::{Polarization, QdParameters};
use crate::sequence::SequenceConfig;
use crate::units::seconds_to_ps;

/// Which photons are admitted into the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFilter {
    Only(Polarization),
    Both,
}

impl InputFilter {
    fn admits(self, pol: Polarization) -> bool {
        match self {
            InputFilter::Only(p) => p == pol,
            InputFilter::Both => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomSetup {
    pub input: InputFilter,
    /// Extra delay of the long arm, s.
    pub arm_delay: f64,
    /// Rotate the polarization in the long arm by 90°.
    pub rotate_long_arm: bool,
    /// Force zero overlap for every pair (cross-polarized reference).
    pub distinguishable: bool,
}

impl HomSetup {
    /// Same-polarization setup: photons one repetition period apart meet.
    pub fn same_pol(pol: Polarization, seq: &SequenceConfig, co: bool) -> Self {
        Self {
            input: InputFilter::Only(pol),
            arm_delay: seq.rep_period,
            rotate_long_arm: !co,
            distinguishable: !co,
        }
    }

    /// H-V setup: the first branch photon is delayed onto the second one.
    pub fn hv(seq: &SequenceConfig, co: bool) -> Self {
        Self {
            input: InputFilter::Both,
            arm_delay: seq.pair_delay,
            rotate_long_arm: co,
            distinguishable: !co,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HomStats {
    /// Slots in which an X photon arrived from each arm.
    pub interfering_pairs: u64,
    /// Of those, pairs that exited through different ports.
    pub coincidences: u64,
    pub mean_overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomStreams {
    pub out1: TimeTagStream,
    pub out2: TimeTagStream,
    pub stats: HomStats,
}

const LONG: u8 = 0;
const SHORT: u8 = 1;

/// Runs the interferometer over `photons` (sorted or not) and detects both
/// outputs. Randomness is drawn from substreams of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_hom_experiment(
    photons: &[PhotonRecord],
    seq: &SequenceConfig,
    setup: &HomSetup,
    bs: &BeamsplitterParams,
    qd: &QdParameters,
    det1: &DetectorModel,
    det2: &DetectorModel,
    seed: u64,
) -> Result<HomStreams> {
    bs.validate()?;
    det1.validate()?;
    det2.validate()?;
    let mut rng = substream(seed, ROUTING, 0);

    let mut arrivals = Vec::with_capacity(photons.len());
    // (slot, arm, arrival index) for photons that may interfere.
    let mut slots: Vec<(i64, u8, usize)> = Vec::with_capacity(photons.len());
    for p in photons {
        if p.kind == PhotonKind::Xx || !setup.input.admits(p.polarization) {
            continue;
        }
        let long = rng.random::<bool>();
        let (delay, pol) = if long {
            let pol = if setup.rotate_long_arm {
                p.polarization.orthogonal()
            } else {
                p.polarization
            };
            (setup.arm_delay, pol)
        } else {
            (0.0, p.polarization)
        };
        let mut a = Arrival::from_photon(p, delay, pol);
        if setup.distinguishable {
            a.coherent = false;
        }
        if p.kind == PhotonKind::X {
            let slot = seconds_to_ps(seq.cycle(p.cycle_index).tpe_time + delay);
            slots.push((slot, if long { LONG } else { SHORT }, arrivals.len()));
        }
        arrivals.push((a, long));
    }
    slots.sort_unstable();

    let mut paired = vec![false; arrivals.len()];
    let mut out1 = Vec::with_capacity(arrivals.len() / 2 + 1);
    let mut out2 = Vec::with_capacity(arrivals.len() / 2 + 1);
    let mut stats = HomStats::default();
    let mut overlap_sum = 0.0;
    let mut i = 0;
    while i < slots.len() {
        let mut j = i + 1;
        while j < slots.len() && slots[j].0 == slots[i].0 {
            j += 1;
        }
        let group = &slots[i..j];
        let long = group.iter().find(|s| s.1 == LONG);
        let short = group.iter().find(|s| s.1 == SHORT);
        if let (Some(l), Some(s)) = (long, short) {
            let out = hom_interfere((&arrivals[l.2].0, &arrivals[s.2].0), bs, qd, &mut rng);
            paired[l.2] = true;
            paired[s.2] = true;
            stats.interfering_pairs += 1;
            stats.coincidences += out.coincidence as u64;
            overlap_sum += out.overlap;
            for (port, t) in out.outputs {
                match port {
                    OutputPort::Out1 => out1.push(t),
                    OutputPort::Out2 => out2.push(t),
                }
            }
        }
        i = j;
    }
    if stats.interfering_pairs > 0 {
        stats.mean_overlap = overlap_sum / stats.interfering_pairs as f64;
    }

    // Long arm enters port 1 (transmitted → out1), short arm port 2.
    for (k, (a, long)) in arrivals.iter().enumerate() {
        if paired[k] {
            continue;
        }
        let transmitted = rng.random::<f64>() < bs.t;
        if transmitted == *long {
            out1.push(a.time);
        } else {
            out2.push(a.time);
        }
    }

    let duration = seq.duration() + setup.arm_delay;
    out1.sort_unstable_by(f64::total_cmp);
    out2.sort_unstable_by(f64::total_cmp);
    let s1 = det1.detect(&out1, duration, 0, &mut substream(seed, DETECTION, 0));
    let s2 = det2.detect(&out2, duration, 1, &mut substream(seed, DETECTION, 1));
    Ok(HomStreams {
        out1: s1,
        out2: s2,
        stats,
    })
}
