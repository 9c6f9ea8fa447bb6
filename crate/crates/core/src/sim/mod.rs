//! Monte Carlo trajectory engine: cascade emission, optics and detectors.

mod detector;
mod emission;
mod hom;
mod optics;
mod photon;
pub mod rng;

pub use detector::{DetectorModel, TimeTagStream};
pub use emission::{
    emission_block_count, simulate_emission, simulate_emission_block, simulate_emission_blocks,
    EmissionModel, EMISSION_BLOCK,
};
pub use hom::{simulate_hom_experiment, HomSetup, HomStats, HomStreams, InputFilter};
pub use optics::{
    coincidence_probability, hom_interfere, route_polarizing, route_splitter, two_photon_overlap,
    Arrival, BeamsplitterParams, HomOutcome, OutputPort,
};
pub use photon::{PhotonKind, PhotonRecord};
