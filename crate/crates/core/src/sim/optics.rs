use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::detector::{DetectorModel, TimeTagStream};
use super::photon::{PhotonKind, PhotonRecord};
use crate::error::{Error, Result};
use crate::model::{Polarization, QdParameters};

/// Intensity reflectance and transmittance of a lossless beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamsplitterParams {
    pub r: f64,
    pub t: f64,
}

impl Default for BeamsplitterParams {
    fn default() -> Self {
        Self { r: 0.47, t: 0.53 }
    }
}

impl BeamsplitterParams {
    pub fn balanced() -> Self {
        Self { r: 0.5, t: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0 && self.t > 0.0 && self.t < 1.0) {
            return Err(Error::domain("beamsplitter", "r and t must lie in (0,1)"));
        }
        if (self.r + self.t - 1.0).abs() > 1e-9 {
            return Err(Error::domain(
                "beamsplitter",
                format!("r + t = {} must equal 1", self.r + self.t),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputPort {
    Out1,
    Out2,
}

/// Splits photons on a polarizing beamsplitter and detects each output.
/// XX photons are removed by the spectral filter in front of the PBS.
pub fn route_polarizing<R: Rng + ?Sized>(
    photons: &[PhotonRecord],
    det_h: &DetectorModel,
    det_v: &DetectorModel,
    duration: f64,
    rng: &mut R,
) -> (TimeTagStream, TimeTagStream) {
    let mut h = Vec::new();
    let mut v = Vec::new();
    for p in photons.iter().filter(|p| p.kind != PhotonKind::Xx) {
        match p.polarization {
            Polarization::H => h.push(p.emit_time),
            Polarization::V => v.push(p.emit_time),
        }
    }
    let sh = det_h.detect(&h, duration, 0, rng);
    let sv = det_v.detect(&v, duration, 1, rng);
    (sh, sv)
}

/// Sends each arrival time independently to out1 (transmitted) or out2.
pub fn route_splitter<R: Rng + ?Sized>(
    arrivals: impl IntoIterator<Item = f64>,
    bs: &BeamsplitterParams,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut out1 = Vec::new();
    let mut out2 = Vec::new();
    for t in arrivals {
        if rng.random::<f64>() < bs.t {
            out1.push(t);
        } else {
            out2.push(t);
        }
    }
    (out1, out2)
}

/// Mode overlap |⟨ψa|ψb⟩|² of two one-sided exponential wavepackets with
/// the same lifetime, start-time offset `tau0`, center-frequency difference
/// `delta_nu` (Hz) and coherence decay rate `gamma` (1/s, 1/T1 when
/// radiatively limited).
pub fn two_photon_overlap(tau0: f64, delta_nu: f64, t1: f64, gamma: f64) -> f64 {
    let d = 2.0 * PI * delta_nu;
    (-tau0.abs() / t1).exp() * gamma / (t1 * (d * d + gamma * gamma))
}

/// Probability of one photon in each output port.
pub fn coincidence_probability(overlap: f64, bs: &BeamsplitterParams) -> f64 {
    bs.r * bs.r + bs.t * bs.t - 2.0 * bs.r * bs.t * overlap
}

/// A photon arriving at one input port of the interfering beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub time: f64,
    pub wavepacket_start: f64,
    pub center_freq_offset: f64,
    pub polarization: Polarization,
    /// False for noise photons and darks, which never interfere.
    pub coherent: bool,
}

impl Arrival {
    pub fn from_photon(p: &PhotonRecord, delay: f64, polarization: Polarization) -> Self {
        Self {
            time: p.emit_time + delay,
            wavepacket_start: p.wavepacket_start + delay,
            center_freq_offset: p.center_freq_offset,
            polarization,
            coherent: p.kind == PhotonKind::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomOutcome {
    pub coincidence: bool,
    pub overlap: f64,
    /// Output port and time of the photons entering port 1 and port 2.
    pub outputs: [(OutputPort, f64); 2],
}

/// Two-photon interference of `pair.0` (input port 1) and `pair.1`
/// (input port 2). Coincidences occur with r² + t² − 2rt·|O|²; otherwise
/// both photons leave through the same port.
pub fn hom_interfere<R: Rng + ?Sized>(
    pair: (&Arrival, &Arrival),
    bs: &BeamsplitterParams,
    qd: &QdParameters,
    rng: &mut R,
) -> HomOutcome {
    let (a, b) = pair;
    let overlap = if a.coherent && b.coherent && a.polarization == b.polarization {
        two_photon_overlap(
            a.wavepacket_start - b.wavepacket_start,
            a.center_freq_offset - b.center_freq_offset,
            qd.t1_x,
            qd.gamma(),
        )
    } else {
        0.0
    };
    let p_c = coincidence_probability(overlap, bs);
    let coincidence = rng.random::<f64>() < p_c;
    let (pa, pb) = if coincidence {
        // Both transmitted (t²) or both reflected (r²).
        let tt = bs.t * bs.t / (bs.r * bs.r + bs.t * bs.t);
        if rng.random::<f64>() < tt {
            (OutputPort::Out1, OutputPort::Out2)
        } else {
            (OutputPort::Out2, OutputPort::Out1)
        }
    } else {
        // Bunched pairs leave either port with equal probability for any r:t.
        let port = if rng.random::<bool>() {
            OutputPort::Out1
        } else {
            OutputPort::Out2
        };
        (port, port)
    };
    HomOutcome {
        coincidence,
        overlap,
        outputs: [(pa, a.time), (pb, b.time)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arrival(t: f64, freq: f64, pol: Polarization) -> Arrival {
        Arrival {
            time: t,
            wavepacket_start: t,
            center_freq_offset: freq,
            polarization: pol,
            coherent: true,
        }
    }

    #[test]
    fn perfect_dip_for_identical_photons() {
        assert_eq!(coincidence_probability(two_photon_overlap(0.0, 0.0, 175e-12, 1.0 / 175e-12), &BeamsplitterParams::balanced()), 0.0);
    }

    #[test]
    fn distinguishable_limit() {
        let p = coincidence_probability(0.0, &BeamsplitterParams::balanced());
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fss_detuned_pair() {
        let o = two_photon_overlap(0.0, 1.693e9, 170e-12, 1.0 / 170e-12);
        let x = 2.0 * PI * 1.693e9 * 1.7e-10;
        assert!((o - 1.0 / (1.0 + x * x)).abs() < 1e-15);
        let p = coincidence_probability(o, &BeamsplitterParams::balanced());
        assert!((p - 0.383).abs() < 5e-4, "{p}");
    }

    #[test]
    fn dephasing_reduces_overlap_to_t2_over_2t1() {
        let t1 = 175e-12;
        let gamma = 1.0 / (0.9 * t1);
        let o = two_photon_overlap(0.0, 0.0, t1, gamma);
        assert!((o - 0.9).abs() < 1e-12);
        assert_eq!(o, crate::visibility::visibility_limit(t1, 0.0, gamma));
    }

    #[test]
    fn time_offset_reduces_overlap() {
        let o = two_photon_overlap(175e-12, 0.0, 175e-12, 1.0 / 175e-12);
        assert!((o - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(two_photon_overlap(-175e-12, 0.0, 175e-12, 1.0 / 175e-12), o);
    }

    #[test]
    fn orthogonal_polarizations_do_not_interfere() {
        let qd = QdParameters::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = arrival(0.0, 0.0, Polarization::H);
        let b = arrival(0.0, 0.0, Polarization::V);
        let out = hom_interfere((&a, &b), &BeamsplitterParams::balanced(), &qd, &mut rng);
        assert_eq!(out.overlap, 0.0);
    }

    #[test]
    fn identical_photons_always_bunch() {
        let qd = QdParameters::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = arrival(1e-9, 0.0, Polarization::H);
        let mut ports = [0usize; 2];
        for _ in 0..10_000 {
            let out = hom_interfere((&a, &a), &BeamsplitterParams::balanced(), &qd, &mut rng);
            assert!(!out.coincidence);
            assert_eq!(out.outputs[0].0, out.outputs[1].0);
            ports[(out.outputs[0].0 == OutputPort::Out2) as usize] += 1;
        }
        // Equal bunching into either port.
        assert!((ports[0] as f64 - 5000.0).abs() < 3.0 * 50.0);
    }

    #[test]
    fn monte_carlo_coincidence_rate_matches_formula() {
        let qd = QdParameters::default();
        let bs = BeamsplitterParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = arrival(0.0, 0.0, Polarization::V);
        let b = arrival(0.0, 1.0e9, Polarization::V);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| hom_interfere((&a, &b), &bs, &qd, &mut rng).coincidence)
            .count() as f64;
        let p = coincidence_probability(two_photon_overlap(0.0, 1.0e9, qd.t1_x, qd.gamma()), &bs);
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - n as f64 * p).abs() < 3.0 * sd);
    }

    #[test]
    fn beamsplitter_validation() {
        assert!(BeamsplitterParams::default().validate().is_ok());
        assert!(BeamsplitterParams { r: 0.5, t: 0.6 }.validate().is_err());
        assert!(BeamsplitterParams { r: 0.0, t: 1.0 }.validate().is_err());
    }
}
