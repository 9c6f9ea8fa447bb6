use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::histogram::CoincidenceHistogram;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub value: f64,
    pub uncertainty: f64,
    pub n_points: usize,
    /// Root-mean-square residual.
    pub residual_rms: f64,
}

type Mat3 = [[f64; 3]; 3];

fn inverse3(m: &Mat3) -> Option<Mat3> {
    // Equilibrate so columns with very different units compare fairly.
    let d: Vec<f64> = (0..3).map(|i| 1.0 / m[i][i].abs().sqrt()).collect();
    if d.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let mut e = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            e[i][j] = m[i][j] * d[i] * d[j];
        }
    }
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0];
    let cof = [
        [c(1, 2, 1, 2), -c(1, 2, 0, 2), c(1, 2, 0, 1)],
        [-c(0, 2, 1, 2), c(0, 2, 0, 2), -c(0, 2, 0, 1)],
        [c(0, 1, 1, 2), -c(0, 1, 0, 2), c(0, 1, 0, 1)],
    ];
    let det = e[0][0] * cof[0][0] + e[0][1] * cof[0][1] + e[0][2] * cof[0][2];
    if !det.is_finite() || det.abs() <= 1e-10 {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cof[j][i] / det * d[i] * d[j];
        }
    }
    Some(inv)
}

/// Normal matrix JᵀJ and Jᵀy for rows of a 3-parameter linear model.
fn normal_equations(rows: impl Iterator<Item = ([f64; 3], f64)>) -> (Mat3, [f64; 3]) {
    let mut m = [[0.0; 3]; 3];
    let mut v = [0.0; 3];
    for (j, y) in rows {
        for a in 0..3 {
            v[a] += j[a] * y;
            for b in 0..3 {
                m[a][b] += j[a] * j[b];
            }
        }
    }
    (m, v)
}

/// Best A, B and the residual sum of squares for y ≈ A·exp(−t/T) + B.
fn linear_part(t: &[f64], y: &[f64], tau: f64) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let (mut se, mut see, mut sy, mut sey) = (0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let e = (-ti / tau).exp();
        se += e;
        see += e * e;
        sy += yi;
        sey += e * yi;
    }
    let det = see * n - se * se;
    if det.abs() < f64::MIN_POSITIVE {
        return (0.0, sy / n, f64::INFINITY);
    }
    let a = (sey * n - se * sy) / det;
    let b = (see * sy - se * sey) / det;
    let sse = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let r = yi - a * (-ti / tau).exp() - b;
            r * r
        })
        .sum();
    (a, b, sse)
}

/// Least-squares fit of A·exp(−t/T1) + B to a decay histogram, starting one
/// bin past the maximum. Returns T1 in seconds; the uncertainty assumes
/// Poissonian bin counts.
pub fn fit_lifetime(h: &CoincidenceHistogram) -> Result<FitResult> {
    let peak = h
        .counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::FitFailure("empty histogram".into()))?;
    let first = peak + 1;
    if h.counts.len() < first + 10 {
        return Err(Error::FitFailure(format!(
            "only {} bins after the peak, need at least 10",
            h.counts.len().saturating_sub(first)
        )));
    }
    let t0 = h.grid.bin_center(first);
    let t: Vec<f64> = (first..h.counts.len()).map(|k| h.grid.bin_center(k) - t0).collect();
    let y: Vec<f64> = h.counts[first..].iter().map(|&c| c as f64).collect();
    let w = h.bin_width();
    let span = t[t.len() - 1] + w;

    // Coarse log-spaced scan of the profiled residual, then golden section.
    let (lo, hi) = ((w / 20.0).ln(), (20.0 * span).ln());
    let n_scan = 240;
    let grid: Vec<f64> = (0..=n_scan).map(|i| lo + (hi - lo) * i as f64 / n_scan as f64).collect();
    let sse = |lt: f64| linear_part(&t, &y, lt.exp()).2;
    let best = (0..=n_scan)
        .min_by(|&a, &b| sse(grid[a]).total_cmp(&sse(grid[b])))
        .unwrap();
    if best == 0 || best == n_scan {
        return Err(Error::FitFailure("tail does not decay within the fit range".into()));
    }
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (sse(c), sse(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sse(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sse(d);
        }
    }
    let tau = (0.5 * (a + b)).exp();
    let (amp, bg, rss) = linear_part(&t, &y, tau);
    if !(amp > 0.0) {
        return Err(Error::FitFailure("fitted amplitude is not positive".into()));
    }
    let n = t.len();
    let jac = |ti: f64| {
        let e = (-ti / tau).exp();
        [e, 1.0, amp * ti / (tau * tau) * e]
    };
    let (jtj, _) = normal_equations(t.iter().map(|&ti| (jac(ti), 0.0)));
    let inv = inverse3(&jtj).ok_or_else(|| Error::FitFailure("singular Jacobian".into()))?;
    // Counts are Poissonian, so the unweighted estimator has covariance
    // (JᵀJ)⁻¹ Jᵀ diag(μ) J (JᵀJ)⁻¹ with μ the fitted model.
    let mut meat = [[0.0; 3]; 3];
    for &ti in &t {
        let j = jac(ti);
        let mu = (amp * j[0] + bg).max(1.0);
        for a in 0..3 {
            for b in 0..3 {
                meat[a][b] += mu * j[a] * j[b];
            }
        }
    }
    let var: f64 = (0..3)
        .flat_map(|a| (0..3).map(move |b| (a, b)))
        .map(|(a, b)| inv[2][a] * meat[a][b] * inv[b][2])
        .sum();
    Ok(FitResult {
        value: tau,
        uncertainty: var.max(0.0).sqrt(),
        n_points: n,
        residual_rms: (rss / n as f64).sqrt(),
    })
}

/// Fits E(θ) = E0 + a·cos2θ + b·sin2θ to (analyzer angle, line energy)
/// samples; the splitting is the peak-to-peak amplitude 2·√(a² + b²).
pub fn fit_fss(samples: &[(f64, f64)]) -> Result<FitResult> {
    let n = samples.len();
    if n < 8 {
        return Err(Error::FitFailure(format!("{n} samples, need at least 8")));
    }
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.0), hi.max(s.0)));
    if max - min < PI * (n - 1) as f64 / n as f64 - 1e-9 {
        return Err(Error::FitFailure(format!(
            "angles span {:.3} rad, need about π",
            max - min
        )));
    }
    let basis = |th: f64| [1.0, (2.0 * th).cos(), (2.0 * th).sin()];
    let (m, v) = normal_equations(samples.iter().map(|&(th, e)| (basis(th), e)));
    let inv = inverse3(&m).ok_or_else(|| Error::FitFailure("rank-deficient angle set".into()))?;
    let p: Vec<f64> = (0..3).map(|i| (0..3).map(|j| inv[i][j] * v[j]).sum()).collect();
    let rss: f64 = samples
        .iter()
        .map(|&(th, e)| {
            let f: f64 = basis(th).iter().zip(&p).map(|(x, c)| x * c).sum();
            (e - f).powi(2)
        })
        .sum();
    let s2 = rss / (n - 3) as f64;
    let (a, b) = (p[1], p[2]);
    let amp = a.hypot(b);
    let var = if amp > 0.0 {
        (a * a * inv[1][1] + b * b * inv[2][2] + 2.0 * a * b * inv[1][2]) / (amp * amp)
    } else {
        0.5 * (inv[1][1] + inv[2][2])
    };
    Ok(FitResult {
        value: 2.0 * amp,
        uncertainty: 2.0 * (s2 * var).max(0.0).sqrt(),
        n_points: n,
        residual_rms: (rss / n as f64).sqrt(),
    })
}
