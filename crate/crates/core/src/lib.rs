//! Simulation and analysis toolkit for passively demultiplexed photon pairs
//! generated by a quantum-dot biexciton-exciton cascade.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: closed-form four-level dot under TPE and stimulation pulses.
//! - [`sequence`]: the H/V pulse-pair excitation timeline.
//! - [`sim`]: Monte Carlo emission, optics, detectors and time-tag streams.
//! - [`analysis`]: coincidence histograms and figure-of-merit extraction.
//! - [`visibility`]: HOM correction, Faddeeva-based visibility model and maps.
//! - [`budget`]: active vs passive demultiplexing rate/loss calculator.
//! - [`scenario`], [`experiment`], [`reproduce`]: config-driven pipelines.

pub mod analysis;
pub mod budget;
pub mod error;
pub mod experiment;
pub mod model;
pub mod reproduce;
pub mod scenario;
pub mod sequence;
pub mod sim;
pub mod tagfile;
pub mod units;
pub mod visibility;

pub use analysis::{
    autocorrelate, cross_correlate, extract_g2, extract_hom_visibility, fit_fss, fit_lifetime,
    CoincidenceHistogram, FitResult, HistogramGrid, VisibilityResult,
};
pub use budget::{multiphoton_rate, DemuxScheme, LimitingFactor, RateReport};
pub use error::{Error, Result};
pub use model::{
    branch_polarization, prepare_biexciton_probability, stim_efficiency, stim_rise, Polarization,
    PulseParameters, QdParameters,
};
pub use scenario::{Experiment, Scenario};
pub use sequence::{build_sequence, ExcitationCycle, SequenceConfig};
pub use sim::{
    BeamsplitterParams, DetectorModel, EmissionModel, PhotonKind, PhotonRecord, TimeTagStream,
};
pub use visibility::{
    correct_hom, faddeeva, visibility_eq2, visibility_limit, visibility_map, Eq2Inputs,
    GammaRule,
};
