//! Scenario documents: one JSON file describing source, timeline, optics,
//! detectors and the experiment to run.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{PulseParameters, QdParameters};
use crate::sequence::SequenceConfig;
use crate::sim::{BeamsplitterParams, DetectorModel, EmissionModel};
use crate::visibility::MapGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    HbtH,
    HbtV,
    HbtCombined,
    HomCoH,
    HomCrossH,
    HomCoV,
    HomCrossV,
    HomHv,
    /// H-V interferometer without polarization rotation (reference for HomHv).
    HomHvCross,
    DelayScan,
    RabiMap,
    Lifetime,
    /// H and V outputs of the polarizing splitter, the passively
    /// demultiplexed streams.
    DemuxStream,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::HbtH,
        Experiment::HbtV,
        Experiment::HbtCombined,
        Experiment::HomCoH,
        Experiment::HomCrossH,
        Experiment::HomCoV,
        Experiment::HomCrossV,
        Experiment::HomHv,
        Experiment::HomHvCross,
        Experiment::DelayScan,
        Experiment::RabiMap,
        Experiment::Lifetime,
        Experiment::DemuxStream,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::HbtH => "hbt_h",
            Experiment::HbtV => "hbt_v",
            Experiment::HbtCombined => "hbt_combined",
            Experiment::HomCoH => "hom_co_h",
            Experiment::HomCrossH => "hom_cross_h",
            Experiment::HomCoV => "hom_co_v",
            Experiment::HomCrossV => "hom_cross_v",
            Experiment::HomHv => "hom_hv",
            Experiment::HomHvCross => "hom_hv_cross",
            Experiment::DelayScan => "delay_scan",
            Experiment::RabiMap => "rabi_map",
            Experiment::Lifetime => "lifetime",
            Experiment::DemuxStream => "demux_stream",
        }
    }

    /// The matching distinguishable reference for a co-polarized HOM run.
    pub fn hom_reference(self) -> Option<Experiment> {
        match self {
            Experiment::HomCoH => Some(Experiment::HomCrossH),
            Experiment::HomCoV => Some(Experiment::HomCrossV),
            Experiment::HomHv => Some(Experiment::HomHvCross),
            _ => None,
        }
    }

    /// Whether the experiment produces time-tag streams.
    pub fn produces_tags(self) -> bool {
        !matches!(self, Experiment::DelayScan | Experiment::RabiMap)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::config("experiment", format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Detectors {
    pub out1: DetectorModel,
    pub out2: DetectorModel,
    /// Detector for XX photons when they are retained.
    pub xx: DetectorModel,
}

impl Default for Detectors {
    fn default() -> Self {
        Self {
            out1: DetectorModel::default(),
            out2: DetectorModel::default(),
            xx: DetectorModel::default(),
        }
    }
}

/// Histogram and extraction settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    /// s.
    pub bin_width: f64,
    /// Peak integration window, s.
    pub window: f64,
    /// Lifetime histogram bin width, s.
    pub lifetime_bin_width: f64,
    /// Lifetime histogram range relative to the excitation pulse, s.
    pub lifetime_range: (f64, f64),
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            bin_width: 50e-12,
            window: 1e-9,
            lifetime_bin_width: 20e-12,
            lifetime_range: (-200e-12, 1800e-12),
        }
    }
}

/// Stim-delay scan: V-slot counts against δt, normalized to stim off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelayScanSettings {
    /// s.
    pub delays: Vec<f64>,
}

impl Default for DelayScanSettings {
    fn default() -> Self {
        Self {
            delays: (-10..=30).map(|k| k as f64 * 2e-12).collect(),
        }
    }
}

/// TPE Rabi map: biexciton population over pulse area and detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiMapSettings {
    pub area_max: f64,
    pub n_area: usize,
    /// Hz, symmetric range ±detuning_max.
    pub detuning_max: f64,
    pub n_detuning: usize,
}

impl Default for RabiMapSettings {
    fn default() -> Self {
        Self {
            area_max: 4.0,
            n_area: 81,
            detuning_max: 300e9,
            n_detuning: 61,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub experiment: Experiment,
    pub seed: u64,
    /// Overrides `sequence.n_periods` with ⌈duration / rep_period⌉ when set, s.
    pub duration: Option<f64>,
    pub qd: QdParameters,
    pub tpe_pulse: PulseParameters,
    pub stim_pulse: PulseParameters,
    pub stim_efficiency_override: Option<f64>,
    pub retain_xx: bool,
    pub sequence: SequenceConfig,
    pub detectors: Detectors,
    pub beamsplitter: BeamsplitterParams,
    pub analysis: AnalysisSettings,
    pub delay_scan: DelayScanSettings,
    pub rabi_map: RabiMapSettings,
    pub visibility_map: MapGrid,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            experiment: Experiment::HbtH,
            seed: 1,
            duration: None,
            qd: QdParameters::default(),
            tpe_pulse: PulseParameters::default(),
            stim_pulse: PulseParameters::default(),
            stim_efficiency_override: None,
            retain_xx: false,
            sequence: SequenceConfig {
                n_periods: 100_000,
                ..Default::default()
            },
            detectors: Detectors::default(),
            beamsplitter: BeamsplitterParams::default(),
            analysis: AnalysisSettings::default(),
            delay_scan: DelayScanSettings::default(),
            rabi_map: RabiMapSettings::default(),
            visibility_map: MapGrid::default(),
        }
    }
}

fn scoped(prefix: &str, e: Error) -> Error {
    match e {
        Error::Domain { field, message } => Error::config(format!("{prefix}.{field}"), message),
        other => other,
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Checks every sub-configuration; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        self.qd.validate().map_err(|e| scoped("qd", e))?;
        self.tpe_pulse.validate().map_err(|e| scoped("tpe_pulse", e))?;
        self.stim_pulse.validate().map_err(|e| scoped("stim_pulse", e))?;
        self.emission_model().validate().map_err(|e| scoped("emission", e))?;
        self.sequence_config().validate()?;
        self.detectors.out1.validate().map_err(|e| scoped("detectors.out1", e))?;
        self.detectors.out2.validate().map_err(|e| scoped("detectors.out2", e))?;
        self.detectors.xx.validate().map_err(|e| scoped("detectors.xx", e))?;
        self.beamsplitter.validate().map_err(|e| scoped("beamsplitter", e))?;
        if let Some(d) = self.duration {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::config("duration", "must be positive"));
            }
        }
        let a = &self.analysis;
        if !(a.bin_width >= 1e-12 && a.window > 0.0 && a.lifetime_bin_width >= 1e-12) {
            return Err(Error::config("analysis", "bin widths must be ≥ 1 ps and window positive"));
        }
        if !(a.lifetime_range.1 > a.lifetime_range.0) {
            return Err(Error::config("analysis.lifetime_range", "must be increasing"));
        }
        if self.delay_scan.delays.iter().any(|d| !d.is_finite()) {
            return Err(Error::config("delay_scan.delays", "must be finite"));
        }
        let r = &self.rabi_map;
        if r.n_area < 2 || r.n_detuning < 2 || !(r.area_max > 0.0) || !(r.detuning_max >= 0.0) {
            return Err(Error::config("rabi_map", "needs ≥ 2 points per axis and positive ranges"));
        }
        let m = &self.visibility_map;
        if m.n_t1 < 2 || m.n_fss < 2 || !(m.t1_max > m.t1_min && m.t1_min > 0.0) || !(m.fss_max > m.fss_min) {
            return Err(Error::config("visibility_map", "axes must be increasing with ≥ 2 points"));
        }
        Ok(())
    }

    /// Sequence with `duration` applied.
    pub fn sequence_config(&self) -> SequenceConfig {
        let mut seq = self.sequence.clone();
        if let Some(d) = self.duration {
            seq.n_periods = ((d / seq.rep_period).ceil() as u64).max(1);
        }
        seq
    }

    pub fn emission_model(&self) -> EmissionModel {
        EmissionModel {
            qd: self.qd.clone(),
            tpe_pulse: self.tpe_pulse,
            stim_pulse: self.stim_pulse,
            stim_efficiency_override: self.stim_efficiency_override,
            retain_xx: self.retain_xx,
        }
    }

    /// Canonical serialization: compact JSON in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
