//! Scenario-driven experiments: simulation to tag streams, the streaming
//! stim-delay scan, the Rabi map, and the matching analysis of tag streams.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    cross_correlate, extract_g2, extract_hom_visibility, fit_lifetime, CoincidenceHistogram,
    HistogramGrid,
};
use crate::error::{Error, Result};
use crate::model::{prepare_biexciton_probability, Polarization, PulseParameters};
use crate::scenario::{AnalysisSettings, Experiment, Scenario};
use crate::sequence::SequenceConfig;
use crate::sim::rng::{substream, DARKS, DETECTION, ROUTING, SCAN};
use crate::sim::{
    emission_block_count, route_polarizing, route_splitter, simulate_emission_block,
    simulate_emission_blocks, simulate_hom_experiment, BeamsplitterParams, DetectorModel,
    EmissionModel, HomSetup, HomStats, PhotonKind, PhotonRecord, TimeTagStream,
};
use crate::units::seconds_to_ps;
use crate::visibility::correct_hom;

pub const CH_OUT1: u8 = 0;
pub const CH_OUT2: u8 = 1;
pub const CH_SYNC: u8 = 2;
pub const CH_XX: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    /// One stream per channel, ordered by channel.
    pub streams: Vec<TimeTagStream>,
    /// s.
    pub duration: f64,
    pub hom_stats: Option<HomStats>,
}

impl SimulationOutput {
    pub fn channel(&self, ch: u8) -> Option<&TimeTagStream> {
        self.streams.iter().find(|s| s.channel == ch)
    }

    pub fn stream_refs(&self) -> Vec<&TimeTagStream> {
        self.streams.iter().collect()
    }
}

fn hom_setup(experiment: Experiment, seq: &SequenceConfig) -> Option<HomSetup> {
    use Experiment::*;
    Some(match experiment {
        HomCoH => HomSetup::same_pol(Polarization::H, seq, true),
        HomCrossH => HomSetup::same_pol(Polarization::H, seq, false),
        HomCoV => HomSetup::same_pol(Polarization::V, seq, true),
        HomCrossV => HomSetup::same_pol(Polarization::V, seq, false),
        HomHv => HomSetup::hv(seq, true),
        HomHvCross => HomSetup::hv(seq, false),
        _ => return None,
    })
}

fn detect_split(
    times: impl IntoIterator<Item = f64>,
    s: &Scenario,
    duration: f64,
    stream: u64,
) -> (TimeTagStream, TimeTagStream) {
    let mut rng = substream(s.seed, ROUTING, stream);
    let (a, b) = route_splitter(times, &BeamsplitterParams::balanced(), &mut rng);
    let d1 = s.detectors.out1.detect(&a, duration, CH_OUT1, &mut substream(s.seed, DETECTION, 0));
    let d2 = s.detectors.out2.detect(&b, duration, CH_OUT2, &mut substream(s.seed, DETECTION, 1));
    (d1, d2)
}

fn run_on_photons(
    s: &Scenario,
    experiment: Experiment,
    seq: &SequenceConfig,
    photons: &[PhotonRecord],
) -> Result<SimulationOutput> {
    let duration = seq.duration();
    let non_xx = || photons.iter().filter(|p| p.kind != PhotonKind::Xx);
    let mut hom_stats = None;
    let mut streams = match experiment {
        Experiment::HbtH | Experiment::HbtV => {
            let pol = if experiment == Experiment::HbtH {
                Polarization::H
            } else {
                Polarization::V
            };
            let (a, b) = detect_split(non_xx().filter(|p| p.polarization == pol).map(|p| p.emit_time), s, duration, 1);
            vec![a, b]
        }
        Experiment::HbtCombined => {
            let (a, b) = detect_split(non_xx().map(|p| p.emit_time), s, duration, 1);
            vec![a, b]
        }
        Experiment::DemuxStream => {
            let mut rng = substream(s.seed, DETECTION, 0);
            let (h, v) = route_polarizing(photons, &s.detectors.out1, &s.detectors.out2, duration, &mut rng);
            vec![h, v]
        }
        Experiment::Lifetime => {
            let times: Vec<f64> = non_xx().map(|p| p.emit_time).collect();
            let x = s.detectors.out1.detect(&times, duration, CH_OUT1, &mut substream(s.seed, DETECTION, 0));
            let sync: Vec<i64> = (0..seq.n_cycles()).map(|i| seconds_to_ps(seq.cycle(i).tpe_time)).collect();
            vec![x, TimeTagStream::new(CH_SYNC, sync, duration)?]
        }
        e => match hom_setup(e, seq) {
            Some(setup) => {
                let out = simulate_hom_experiment(
                    photons,
                    seq,
                    &setup,
                    &s.beamsplitter,
                    &s.qd,
                    &s.detectors.out1,
                    &s.detectors.out2,
                    s.seed,
                )?;
                hom_stats = Some(out.stats);
                vec![out.out1, out.out2]
            }
            None => {
                return Err(Error::config(
                    "experiment",
                    format!("`{e}` produces tables, not tag streams"),
                ))
            }
        },
    };
    if s.retain_xx {
        let xx: Vec<f64> = photons.iter().filter(|p| p.kind == PhotonKind::Xx).map(|p| p.emit_time).collect();
        streams.push(s.detectors.xx.detect(&xx, duration, CH_XX, &mut substream(s.seed, DETECTION, 3)));
    }
    streams.sort_by_key(|st| st.channel);
    Ok(SimulationOutput {
        streams,
        duration,
        hom_stats,
    })
}

fn checked_sequence(s: &Scenario) -> Result<SequenceConfig> {
    s.validate()?;
    let seq = s.sequence_config();
    if let Some(w) = seq.pair_delay_warning(s.qd.t1_x) {
        log::warn!("{w}");
    }
    Ok(seq)
}

/// Simulates the scenario's experiment into detector tag streams.
pub fn simulate(s: &Scenario) -> Result<SimulationOutput> {
    let seq = checked_sequence(s)?;
    let photons = simulate_emission_blocks(&seq, &s.emission_model(), s.seed)?;
    run_on_photons(s, s.experiment, &seq, &photons)
}

/// Simulates a co-polarized HOM experiment and its distinguishable reference
/// on the same emitted photons.
pub fn simulate_hom_pair(s: &Scenario) -> Result<(SimulationOutput, SimulationOutput)> {
    let reference = s.experiment.hom_reference().ok_or_else(|| {
        Error::config("experiment", format!("`{}` is not a co-polarized HOM experiment", s.experiment))
    })?;
    let seq = checked_sequence(s)?;
    let photons = simulate_emission_blocks(&seq, &s.emission_model(), s.seed)?;
    let co = run_on_photons(s, s.experiment, &seq, &photons)?;
    let cross = run_on_photons(s, reference, &seq, &photons)?;
    Ok((co, cross))
}

/// Emits the sequence block by block without storing photons and counts the
/// V-polarized detections that fall in the V-branch time slot.
pub fn v_slot_counts(seq: &SequenceConfig, model: &EmissionModel, det: &DetectorModel, seed: u64) -> Result<u64> {
    seq.validate()?;
    model.validate()?;
    det.validate()?;
    let rep = seconds_to_ps(seq.rep_period);
    let (slot_lo, slot_len) = v_slot(seq);
    let n_blocks = emission_block_count(seq);
    let gate_fraction = slot_len as f64 / rep as f64;
    let counts: Vec<Result<u64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let photons = simulate_emission_block(seq, model, seed, b)?;
            let mut rng = substream(seed, SCAN, b);
            let in_gate = |t: i64| (t - slot_lo).rem_euclid(rep) < slot_len;
            let mut n = 0u64;
            for p in photons.iter().filter(|p| p.kind != PhotonKind::Xx && p.polarization == Polarization::V) {
                let jitter = if det.jitter_sigma > 0.0 {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * det.jitter_sigma
                } else {
                    0.0
                };
                if rng.random::<f64>() < det.efficiency && in_gate(seconds_to_ps(p.emit_time + jitter)) {
                    n += 1;
                }
            }
            let cycles = photons_span_cycles(seq, b);
            let dark_mean = det.dark_rate * cycles as f64 / 2.0 * seq.rep_period * gate_fraction;
            if dark_mean > 0.0 {
                let mut drng = substream(seed, DARKS, b);
                n += Poisson::new(dark_mean).map(|d| d.sample(&mut drng) as u64).unwrap_or(0);
            }
            Ok(n)
        })
        .collect();
    counts.into_iter().sum()
}

fn photons_span_cycles(seq: &SequenceConfig, b: u64) -> u64 {
    let lo = b * crate::sim::EMISSION_BLOCK;
    (lo + crate::sim::EMISSION_BLOCK).min(seq.n_cycles()) - lo
}

/// Start (ps, within the period) and length (ps) of the V-branch slot. The
/// slot opens an eighth of its length before the V TPE pulse so that
/// detections pulled early by timing jitter stay inside it.
fn v_slot(seq: &SequenceConfig) -> (i64, i64) {
    let pd = seconds_to_ps(seq.pair_delay);
    let rep = seconds_to_ps(seq.rep_period);
    let (start, len) = if seq.first_branch == Polarization::V {
        (0, pd)
    } else {
        (pd, rep - pd)
    };
    (start - len / 8, len)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayScanRow {
    /// s.
    pub delay: f64,
    pub counts: u64,
    /// counts / stim-off reference counts.
    pub ratio: f64,
    pub ratio_uncertainty: f64,
    /// 1 + η(δt), the expected ratio.
    pub model_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayScan {
    pub reference_counts: u64,
    pub rows: Vec<DelayScanRow>,
}

impl DelayScan {
    pub fn write_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "delay_ps\tcounts\tratio\tratio_err\tmodel_ratio")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.3}\t{}\t{:.6}\t{:.6}\t{:.6}",
                r.delay * 1e12,
                r.counts,
                r.ratio,
                r.ratio_uncertainty,
                r.model_ratio
            )?;
        }
        Ok(())
    }
}

/// V-slot count ratio stim-on(δt) / stim-off for one delay.
pub fn delay_ratio(s: &Scenario, delay: f64, reference: u64) -> Result<DelayScanRow> {
    let seq = SequenceConfig {
        stim_delay: delay,
        ..s.sequence_config()
    };
    let model = s.emission_model();
    let counts = v_slot_counts(&seq, &model, &s.detectors.out2, s.seed)?;
    if reference == 0 {
        return Err(Error::DegenerateNormalization("stim-off reference has no counts".into()));
    }
    let (c, r) = (counts as f64, reference as f64);
    let ratio = c / r;
    Ok(DelayScanRow {
        delay,
        counts,
        ratio,
        ratio_uncertainty: ratio * (1.0 / c.max(1.0) + 1.0 / r).sqrt(),
        model_ratio: 1.0 + model.stim_probability(delay),
    })
}

/// Stim-off V-slot counts for the scenario's sequence.
pub fn delay_reference(s: &Scenario) -> Result<u64> {
    let seq = SequenceConfig {
        stim_enabled_h: false,
        stim_enabled_v: false,
        ..s.sequence_config()
    };
    v_slot_counts(&seq, &s.emission_model(), &s.detectors.out2, s.seed)
}

/// Full stim-delay scan over `s.delay_scan.delays`.
pub fn delay_scan(s: &Scenario) -> Result<DelayScan> {
    checked_sequence(s)?;
    let reference = delay_reference(s)?;
    let rows = s
        .delay_scan
        .delays
        .iter()
        .map(|&d| delay_ratio(s, d, reference))
        .collect::<Result<_>>()?;
    Ok(DelayScan {
        reference_counts: reference,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiMap {
    /// Hz.
    pub detuning: Vec<f64>,
    /// Units of π.
    pub area: Vec<f64>,
    /// `population[i * area.len() + j]` at (detuning[i], area[j]).
    pub population: Vec<f64>,
}

impl RabiMap {
    pub fn write_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "detuning_ghz\tarea_pi\tpopulation")?;
        for (i, d) in self.detuning.iter().enumerate() {
            for (j, a) in self.area.iter().enumerate() {
                writeln!(w, "{:.6}\t{:.6}\t{:.9}", d * 1e-9, a, self.population[i * self.area.len() + j])?;
            }
        }
        Ok(())
    }
}

/// Biexciton population over TPE pulse area and detuning.
pub fn rabi_map(s: &Scenario) -> Result<RabiMap> {
    s.validate()?;
    let r = &s.rabi_map;
    let detuning = crate::visibility::linspace(-r.detuning_max, r.detuning_max, r.n_detuning);
    let area = crate::visibility::linspace(0.0, r.area_max, r.n_area);
    let mut population = Vec::with_capacity(detuning.len() * area.len());
    for &d in &detuning {
        for &a in &area {
            let pulse = PulseParameters {
                area: a,
                detuning: d,
                ..s.tpe_pulse
            };
            population.push(prepare_biexciton_probability(&pulse, &s.qd)?);
        }
    }
    Ok(RabiMap {
        detuning,
        area,
        population,
    })
}

/// A value with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub value: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub experiment: Experiment,
    pub metrics: BTreeMap<String, Metric>,
    pub histograms: BTreeMap<String, CoincidenceHistogram>,
}

fn coincidence_grid(a: &AnalysisSettings, rep_period: f64) -> Result<HistogramGrid> {
    HistogramGrid::symmetric(a.bin_width, 2.0 * rep_period + a.window)
}

fn out_streams<'a>(streams: &'a BTreeMap<u8, TimeTagStream>, empty: &'a TimeTagStream) -> (&'a TimeTagStream, &'a TimeTagStream) {
    (
        streams.get(&CH_OUT1).unwrap_or(empty),
        streams.get(&CH_OUT2).unwrap_or(empty),
    )
}

/// Extracts the figures of merit of `experiment` from tag streams. HOM
/// visibility needs the distinguishable `reference` run; `g2` is used for the
/// multiphoton correction.
pub fn analyze(
    experiment: Experiment,
    scenario: &Scenario,
    streams: &BTreeMap<u8, TimeTagStream>,
    reference: Option<&BTreeMap<u8, TimeTagStream>>,
    g2: f64,
) -> Result<AnalysisReport> {
    let a = &scenario.analysis;
    let rep = scenario.sequence.rep_period;
    let empty = TimeTagStream {
        channel: 0,
        tags: Vec::new(),
        duration: 0.0,
    };
    let mut metrics = BTreeMap::new();
    let mut histograms = BTreeMap::new();
    use Experiment::*;
    match experiment {
        HbtH | HbtV | HbtCombined | DemuxStream => {
            let (o1, o2) = out_streams(streams, &empty);
            let h = cross_correlate(o1, o2, &coincidence_grid(a, rep)?)?;
            if experiment != DemuxStream {
                let g = extract_g2(&h, rep, a.window)?;
                metrics.insert("g2".into(), Metric { value: g.value, uncertainty: g.uncertainty });
            }
            for (name, s) in [("rate_out1_hz", o1), ("rate_out2_hz", o2)] {
                let n = s.len() as f64;
                let rate = s.rate();
                metrics.insert(name.into(), Metric { value: rate, uncertainty: if n > 0.0 { rate / n.sqrt() } else { 0.0 } });
            }
            histograms.insert("coincidences".into(), h);
        }
        HomCoH | HomCoV | HomHv | HomCrossH | HomCrossV | HomHvCross => {
            let grid = coincidence_grid(a, rep)?;
            let (o1, o2) = out_streams(streams, &empty);
            let co = cross_correlate(o1, o2, &grid)?;
            if let Some(r) = reference {
                let (r1, r2) = out_streams(r, &empty);
                let cross = cross_correlate(r1, r2, &grid)?;
                let v = extract_hom_visibility(&co, &cross, rep, a.window)?;
                let bs = &scenario.beamsplitter;
                let c = correct_hom(v.value, g2, bs.r, bs.t)?;
                let scale = c.value / (v.value + g2);
                metrics.insert("v_raw".into(), Metric { value: v.value, uncertainty: v.uncertainty });
                metrics.insert(
                    "v_corrected".into(),
                    Metric {
                        value: c.value,
                        uncertainty: if scale.is_finite() { scale * v.uncertainty } else { 0.0 },
                    },
                );
                histograms.insert("reference".into(), cross);
            }
            metrics.insert(
                "central_area".into(),
                Metric {
                    value: co.area(0.0, a.window)? as f64,
                    uncertainty: (co.area(0.0, a.window)? as f64).sqrt(),
                },
            );
            histograms.insert("coincidences".into(), co);
        }
        Lifetime => {
            let x = streams.get(&CH_OUT1).unwrap_or(&empty);
            let sync = streams
                .get(&CH_SYNC)
                .ok_or_else(|| Error::Data("lifetime analysis needs the sync channel".into()))?;
            let w = seconds_to_ps(a.lifetime_bin_width);
            let lo = seconds_to_ps(a.lifetime_range.0);
            let n = ((seconds_to_ps(a.lifetime_range.1) - lo) / w).max(1) as usize;
            let h = cross_correlate(sync, x, &HistogramGrid::new(w, lo, n)?)?;
            let f = fit_lifetime(&h)?;
            metrics.insert("t1".into(), Metric { value: f.value, uncertainty: f.uncertainty });
            histograms.insert("decay".into(), h);
        }
        Experiment::DelayScan | Experiment::RabiMap => {
            return Err(Error::config("experiment", format!("`{experiment}` has no tag streams to analyze")));
        }
    }
    Ok(AnalysisReport {
        experiment,
        metrics,
        histograms,
    })
}

/// Converts simulation output to the channel map used by [`analyze`].
pub fn channel_map(out: &SimulationOutput) -> BTreeMap<u8, TimeTagStream> {
    out.streams.iter().map(|s| (s.channel, s.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(e: Experiment, n: u64) -> Scenario {
        Scenario {
            experiment: e,
            seed: 5,
            sequence: SequenceConfig {
                n_periods: n,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn every_stream_experiment_simulates() {
        for e in Experiment::ALL.into_iter().filter(|e| e.produces_tags()) {
            let out = simulate(&scenario(e, 2000)).unwrap();
            assert!(out.streams.len() >= 2, "{e}");
            for s in &out.streams {
                s.check_sorted().unwrap();
            }
        }
        assert!(simulate(&scenario(Experiment::DelayScan, 10)).is_err());
    }

    #[test]
    fn replay_is_bit_identical() {
        let s = scenario(Experiment::HomHv, 5000);
        assert_eq!(simulate(&s).unwrap(), simulate(&s).unwrap());
    }

    #[test]
    fn demux_stream_routes_by_polarization() {
        let mut s = scenario(Experiment::DemuxStream, 20_000);
        s.stim_efficiency_override = Some(1.0);
        s.detectors.out1 = DetectorModel::ideal();
        s.detectors.out2 = DetectorModel::ideal();
        let out = simulate(&s).unwrap();
        // Deterministic branching: V photons only in the V slot, H in the H slot.
        let (slot_lo, len) = v_slot(&s.sequence);
        let rep = seconds_to_ps(s.sequence.rep_period);
        let in_v = |t: &i64| (t - slot_lo).rem_euclid(rep) < len;
        // Only exponential tails longer than the 2 ns slot can cross over.
        let v = &out.channel(CH_OUT2).unwrap().tags;
        let h = &out.channel(CH_OUT1).unwrap().tags;
        assert!(v.iter().filter(|t| !in_v(t)).count() <= 3);
        assert!(h.iter().filter(|t| in_v(t)).count() <= 3);
        assert_eq!(v.len(), 20_000);
        assert_eq!(out.channel(CH_OUT1).unwrap().len(), 20_000);
    }

    #[test]
    fn retained_xx_photons_get_their_own_channel() {
        let mut s = scenario(Experiment::HbtCombined, 1000);
        s.retain_xx = true;
        let out = simulate(&s).unwrap();
        assert!(out.channel(CH_XX).is_some_and(|x| !x.is_empty()));
    }

    #[test]
    fn delay_scan_rows_follow_the_model() {
        let mut s = scenario(Experiment::DelayScan, 50_000);
        s.delay_scan.delays = vec![-20e-12, 6e-12];
        let scan = delay_scan(&s).unwrap();
        for r in &scan.rows {
            assert!((r.ratio - r.model_ratio).abs() < 4.0 * r.ratio_uncertainty, "{r:?}");
        }
    }

    #[test]
    fn rabi_map_peaks_at_odd_multiples_of_pi() {
        let s = scenario(Experiment::RabiMap, 1);
        let m = rabi_map(&s).unwrap();
        let centre = m.detuning.len() / 2;
        let row = &m.population[centre * m.area.len()..(centre + 1) * m.area.len()];
        // Area grid step is π/20: index 20 is a π pulse, 40 a 2π pulse.
        assert!((row[20] - 1.0).abs() < 1e-9);
        assert!(row[40] < 1e-9);
        assert!(row.iter().all(|&p| p <= row[20]));
    }

    #[test]
    fn hbt_analysis_round_trip() {
        let s = scenario(Experiment::HbtH, 50_000);
        let out = simulate(&s).unwrap();
        let rep = analyze(Experiment::HbtH, &s, &channel_map(&out), None, 0.0).unwrap();
        assert!(rep.metrics["g2"].value < 0.005);
    }

    #[test]
    fn hom_pair_analysis() {
        let mut s = scenario(Experiment::HomCoV, 50_000);
        s.stim_efficiency_override = Some(1.0);
        let (co, cross) = simulate_hom_pair(&s).unwrap();
        let rep = analyze(Experiment::HomCoV, &s, &channel_map(&co), Some(&channel_map(&cross)), 0.0).unwrap();
        let v = rep.metrics["v_corrected"];
        assert!((v.value - 1.0).abs() < 3.0 * v.uncertainty + 0.01, "{v:?}");
    }
}
