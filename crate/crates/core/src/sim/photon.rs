use serde::{Deserialize, Serialize};

use crate::model::Polarization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhotonKind {
    /// Exciton-to-ground photon, the one kept by the spectral filter.
    X,
    /// Biexciton-to-exciton photon.
    Xx,
    /// Uncorrelated photon from re-excitation; never interferes.
    Noise,
}

/// One emitted photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonRecord {
    /// Emission (arrival at the source output) time, s.
    pub emit_time: f64,
    /// Start of the photon's exponential wavepacket, s. For an X photon this
    /// is the XX emission time; two photons interfere best when their
    /// wavepacket starts coincide at the beamsplitter.
    pub wavepacket_start: f64,
    /// Center frequency offset from the mean exciton line, Hz.
    pub center_freq_offset: f64,
    pub cycle_index: u64,
    pub polarization: Polarization,
    pub kind: PhotonKind,
}
