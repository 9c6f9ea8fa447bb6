//! Faddeeva function w(z) = exp(-z²)·erfc(-iz).
//!
//! Three regimes in the upper half-plane: a Taylor series near the origin,
//! Weideman's 40-term rational expansion for moderate |z|, and the Laplace
//! continued fraction for large |z|. The lower half-plane follows from
//! w(z) = 2·exp(-z²) - w(-z).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const WEIDEMAN_N: usize = 40;
const SERIES_RADIUS: f64 = 0.5;
const CF_RADIUS: f64 = 8.0;
const CF_TERMS: usize = 60;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

struct Weideman {
    l: f64,
    /// Polynomial coefficients, constant term first.
    coef: [f64; WEIDEMAN_N],
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_N;
        let m = 2 * n;
        let l = (n as f64 / std::f64::consts::SQRT_2).sqrt();
        let samples: Vec<(f64, f64)> = (-(m as i64) + 1..m as i64)
            .map(|k| {
                let t = l * (k as f64 * PI / (2 * m) as f64).tan();
                (k as f64, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let mut coef = [0.0; WEIDEMAN_N];
        for (j, c) in coef.iter_mut().enumerate() {
            let jj = (j + 1) as f64;
            let s: f64 = samples
                .iter()
                .map(|&(k, f)| f * (PI * jj * k / m as f64).cos())
                .sum();
            *c = s / (2 * m) as f64;
        }
        Weideman { l, coef }
    })
}

fn w_weideman(z: Complex64) -> Complex64 {
    let tab = weideman();
    let iz = Complex64::i() * z;
    let denom = tab.l - iz;
    let zz = (tab.l + iz) / denom;
    let mut p = Complex64::new(0.0, 0.0);
    for &c in tab.coef.iter().rev() {
        p = p * zz + c;
    }
    2.0 * p / (denom * denom) + FRAC_1_SQRT_PI / denom
}

fn w_continued_fraction(z: Complex64) -> Complex64 {
    let mut r = Complex64::new(0.0, 0.0);
    for k in (1..=CF_TERMS).rev() {
        r = (0.5 * k as f64) / (z - r);
    }
    Complex64::i() * FRAC_1_SQRT_PI / (z - r)
}

fn w_series(z: Complex64) -> Complex64 {
    // Σ (iz)^n / Γ(n/2 + 1)
    let iz = Complex64::i() * z;
    let mut inv_gamma = [1.0, 2.0 * FRAC_1_SQRT_PI];
    let mut pow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..40 {
        let c = inv_gamma[n % 2];
        sum += pow * c;
        inv_gamma[n % 2] = c / (n as f64 / 2.0 + 1.0);
        pow *= iz;
    }
    sum
}

fn w_upper(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r < SERIES_RADIUS {
        w_series(z)
    } else if r < CF_RADIUS {
        w_weideman(z)
    } else {
        w_continued_fraction(z)
    }
}

/// The Faddeeva function for any finite complex argument.
pub fn faddeeva(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        w_upper(z)
    } else {
        2.0 * (-z * z).exp() - w_upper(-z)
    }
}

/// Scaled complementary error function exp(x²)·erfc(x) for real x.
pub fn erfcx(x: f64) -> f64 {
    if x >= 0.0 {
        w_upper(Complex64::new(0.0, x)).re
    } else {
        2.0 * (x * x).exp() - w_upper(Complex64::new(0.0, -x)).re
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn origin() {
        assert!(rel(faddeeva(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn imaginary_unit() {
        // exp(1)·erfc(1)
        let w = faddeeva(Complex64::new(0.0, 1.0));
        assert!((w.re - 0.427_583_576_155_807).abs() < 1e-14);
        assert!(w.im.abs() < 1e-15);
    }

    #[test]
    fn off_axis_point() {
        let w = faddeeva(Complex64::new(2.0, 1.0));
        let want = Complex64::new(0.140_239_581_366_277_94, 0.222_213_440_179_899_1);
        assert!(rel(w, want) < 1e-12);
    }

    #[test]
    fn regimes_agree_at_their_borders() {
        for k in 0..64 {
            let th = PI * k as f64 / 63.0;
            let (s, c) = th.sin_cos();
            for (r, a, b) in [
                (SERIES_RADIUS, w_series as fn(Complex64) -> Complex64, w_weideman as fn(Complex64) -> Complex64),
                (CF_RADIUS, w_weideman, w_continued_fraction),
            ] {
                let z = Complex64::new(r * c, r * s);
                assert!(rel(a(z), b(z)) < 1e-13, "r={r} θ={th}");
            }
        }
    }

    #[test]
    fn erfcx_large_argument() {
        // erfcx(x) ~ 1/(√π x) (1 - 1/(2x²))
        let x = 1e3;
        let approx = FRAC_1_SQRT_PI / x * (1.0 - 0.5 / (x * x));
        assert!((erfcx(x) - approx).abs() / approx < 1e-11);
        assert!((erfcx(-1.0) - (2.0 * 1f64.exp() - erfcx(1.0))).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn reflection_identity(re in -50.0f64..50.0, im in 0.0f64..50.0) {
            let z = Complex64::new(re, im);
            let lhs = faddeeva(-z.conj());
            let rhs = faddeeva(z).conj();
            prop_assert!(rel(lhs, rhs) < 1e-14);
        }
    }
}
