//! Physical constants and unit conversions used across the crate.

/// Planck constant in eV·s (exact SI value).
pub const PLANCK_EV_S: f64 = 4.135_667_696e-15;

/// Picoseconds per second, the time-tag quantum.
pub const PS_PER_S: f64 = 1e12;

/// Frequency (Hz) corresponding to an energy splitting in eV.
pub fn ev_to_hz(energy_ev: f64) -> f64 {
    energy_ev / PLANCK_EV_S
}

pub fn hz_to_ev(freq_hz: f64) -> f64 {
    freq_hz * PLANCK_EV_S
}

/// Round a time in seconds to the nearest integer picosecond.
pub fn seconds_to_ps(t: f64) -> i64 {
    (t * PS_PER_S).round() as i64
}

pub fn ps_to_seconds(t: i64) -> f64 {
    t as f64 / PS_PER_S
}

/// Standard normal CDF.
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function for real arguments, accurate to ~1e-15
/// relative. Uses the Faddeeva continued fraction implementation on the
/// imaginary axis: erfc(x) = exp(-x²)·w(ix) for x ≥ 0.
pub(crate) fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 0.0 {
        crate::visibility::faddeeva::erfcx(x) * (-x * x).exp()
    } else {
        2.0 - crate::visibility::faddeeva::erfcx(-x) * (-x * x).exp()
    }
}
