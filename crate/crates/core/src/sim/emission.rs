use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::photon::{PhotonKind, PhotonRecord};
use super::rng::{substream, EMISSION};
use crate::error::{Error, Result};
use crate::model::{
    branch_polarization, prepare_biexciton_probability, stim_efficiency, stim_rise, Polarization,
    PulseParameters, QdParameters,
};
use crate::sequence::{ExcitationCycle, SequenceConfig};

/// Cycles per random substream. Fixed so the output does not depend on the
/// number of worker threads.
pub const EMISSION_BLOCK: u64 = 4096;

/// Everything the emission stage needs besides the cycle list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmissionModel {
    pub qd: QdParameters,
    pub tpe_pulse: PulseParameters,
    pub stim_pulse: PulseParameters,
    /// Replaces the modelled stim efficiency when set.
    pub stim_efficiency_override: Option<f64>,
    /// Keep XX photons in the output (they are spectrally filtered otherwise).
    pub retain_xx: bool,
}

impl Default for EmissionModel {
    fn default() -> Self {
        Self {
            qd: QdParameters::default(),
            tpe_pulse: PulseParameters::default(),
            stim_pulse: PulseParameters::default(),
            stim_efficiency_override: None,
            retain_xx: false,
        }
    }
}

impl EmissionModel {
    pub fn validate(&self) -> Result<()> {
        self.qd.validate()?;
        self.tpe_pulse.validate()?;
        self.stim_pulse.validate()?;
        if let Some(p) = self.stim_efficiency_override {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(
                    "stim_efficiency_override",
                    format!("{p} is not a probability"),
                ));
            }
        }
        Ok(())
    }

    pub fn stim_probability(&self, delta_t: f64) -> f64 {
        self.stim_efficiency_override
            .unwrap_or_else(|| stim_efficiency(delta_t, &self.stim_pulse, &self.qd))
    }
}

struct CycleSampler<'a> {
    model: &'a EmissionModel,
    p_xx: f64,
    half_split: f64,
    wander_sd: f64,
}

impl<'a> CycleSampler<'a> {
    fn new(model: &'a EmissionModel) -> Result<Self> {
        model.validate()?;
        let p_xx = prepare_biexciton_probability(&model.tpe_pulse, &model.qd)?;
        Ok(Self {
            model,
            p_xx,
            half_split: 0.5 * model.qd.delta_nu(),
            // Each photon carries half the variance of the pair difference,
            // so the H-V frequency difference has standard deviation sigma.
            wander_sd: model.qd.sigma / std::f64::consts::SQRT_2,
        })
    }

    fn wander<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.wander_sd > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            z * self.wander_sd
        } else {
            0.0
        }
    }

    fn emit<R: Rng + ?Sized>(&self, cycle: &ExcitationCycle, rng: &mut R, out: &mut Vec<PhotonRecord>) {
        let qd = &self.model.qd;
        if rng.random::<f64>() < self.p_xx {
            let delta_t = cycle.stim_time - cycle.tpe_time;
            let e: f64 = Exp1.sample(rng);
            let spontaneous = cycle.tpe_time + qd.t1_xx * e;
            let stimulated = cycle.stim_enabled
                && match self.model.stim_efficiency_override {
                    Some(eta) => rng.random::<f64>() < eta,
                    // The stim pulse acts only on a biexciton that has not yet
                    // decayed; failures keep their spontaneous decay time.
                    None => {
                        spontaneous >= cycle.stim_time.max(cycle.tpe_time)
                            && rng.random::<f64>() < stim_rise(delta_t, &self.model.stim_pulse)
                    }
                };
            let xx_time = if stimulated { cycle.stim_time } else { spontaneous };
            let pol = branch_polarization(stimulated, cycle.stim_pol, qd, rng);
            let e: f64 = Exp1.sample(rng);
            let x_time = xx_time + qd.t1_x * e;
            let wander = self.wander(rng);
            if self.model.retain_xx {
                out.push(PhotonRecord {
                    emit_time: xx_time,
                    wavepacket_start: cycle.tpe_time.min(xx_time),
                    center_freq_offset: -pol.fss_sign() * self.half_split + wander,
                    cycle_index: cycle.cycle_index,
                    polarization: pol,
                    kind: PhotonKind::Xx,
                });
            }
            out.push(PhotonRecord {
                emit_time: x_time,
                wavepacket_start: xx_time,
                center_freq_offset: pol.fss_sign() * self.half_split + wander,
                cycle_index: cycle.cycle_index,
                polarization: pol,
                kind: PhotonKind::X,
            });
        }
        if qd.reexcitation_prob > 0.0 && rng.random::<f64>() < qd.reexcitation_prob {
            let pol = if rng.random::<bool>() {
                Polarization::H
            } else {
                Polarization::V
            };
            let e: f64 = Exp1.sample(rng);
            let wander = self.wander(rng);
            out.push(PhotonRecord {
                emit_time: cycle.tpe_time + qd.t1_x * e,
                wavepacket_start: cycle.tpe_time,
                center_freq_offset: pol.fss_sign() * self.half_split + wander,
                cycle_index: cycle.cycle_index,
                polarization: pol,
                kind: PhotonKind::Noise,
            });
        }
    }
}

fn sort_by_time(photons: &mut [PhotonRecord]) {
    photons.par_sort_by(|a, b| a.emit_time.total_cmp(&b.emit_time));
}

/// Runs the cascade for each cycle with a single random source. Output is
/// sorted by emission time.
pub fn simulate_emission<R: Rng + ?Sized>(
    cycles: &[ExcitationCycle],
    model: &EmissionModel,
    rng: &mut R,
) -> Result<Vec<PhotonRecord>> {
    if cycles.windows(2).any(|w| w[1].tpe_time < w[0].tpe_time) {
        return Err(Error::Data("cycles must be sorted by TPE time".into()));
    }
    let sampler = CycleSampler::new(model)?;
    let mut out = Vec::with_capacity(cycles.len());
    for cycle in cycles {
        sampler.emit(cycle, rng, &mut out);
    }
    sort_by_time(&mut out);
    Ok(out)
}

/// Photons of one block of [`EMISSION_BLOCK`] cycles, unsorted. Block `b`
/// always draws from the same substream of `seed`.
pub fn simulate_emission_block(
    seq: &SequenceConfig,
    model: &EmissionModel,
    seed: u64,
    block: u64,
) -> Result<Vec<PhotonRecord>> {
    let sampler = CycleSampler::new(model)?;
    Ok(sampler.block(seq, seed, block))
}

impl CycleSampler<'_> {
    fn block(&self, seq: &SequenceConfig, seed: u64, b: u64) -> Vec<PhotonRecord> {
        let mut rng = substream(seed, EMISSION, b);
        let lo = b * EMISSION_BLOCK;
        let hi = (lo + EMISSION_BLOCK).min(seq.n_cycles());
        let mut out = Vec::with_capacity((hi.saturating_sub(lo)) as usize);
        for i in lo..hi {
            self.emit(&seq.cycle(i), &mut rng, &mut out);
        }
        out
    }
}

/// Number of emission blocks covering the sequence.
pub fn emission_block_count(seq: &SequenceConfig) -> u64 {
    seq.n_cycles().div_ceil(EMISSION_BLOCK)
}

/// Parallel emission over the whole sequence. Cycles are cut into blocks of
/// [`EMISSION_BLOCK`], each driven by its own substream of `seed`.
pub fn simulate_emission_blocks(
    seq: &SequenceConfig,
    model: &EmissionModel,
    seed: u64,
) -> Result<Vec<PhotonRecord>> {
    seq.validate()?;
    let sampler = CycleSampler::new(model)?;
    let blocks: Vec<Vec<PhotonRecord>> = (0..emission_block_count(seq))
        .into_par_iter()
        .map(|b| sampler.block(seq, seed, b))
        .collect();
    let mut photons = Vec::with_capacity(blocks.iter().map(Vec::len).sum());
    for block in blocks {
        photons.extend(block);
    }
    sort_by_time(&mut photons);
    Ok(photons)
}
