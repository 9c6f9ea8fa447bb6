use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::histogram::CoincidenceHistogram;
use crate::error::{Error, Result};

/// A ratio-type figure of merit with Poissonian uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    pub value: f64,
    pub uncertainty: f64,
    /// Integration window, s.
    pub window: f64,
    /// Raw peak areas used, for diagnostics.
    pub peak_areas: BTreeMap<String, f64>,
}

/// g²(0) as the central peak area over the mean of the first side peaks at
/// ±`rep_period`, each integrated over `window`.
pub fn extract_g2(h: &CoincidenceHistogram, rep_period: f64, window: f64) -> Result<VisibilityResult> {
    let c = h.area(0.0, window)? as f64;
    let m = h.area(-rep_period, window)? as f64;
    let p = h.area(rep_period, window)? as f64;
    let side = 0.5 * (m + p);
    if side == 0.0 {
        return Err(Error::DegenerateNormalization(
            "side peaks at ±rep_period are empty".into(),
        ));
    }
    let value = c / side;
    // ∂g/∂c = 1/s, ∂g/∂m = ∂g/∂p = −c/(2s²), Poisson variances.
    let uncertainty = (c / (side * side) + (c / (2.0 * side * side)).powi(2) * (m + p)).sqrt();
    Ok(VisibilityResult {
        value,
        uncertainty,
        window,
        peak_areas: BTreeMap::from([
            ("center".to_string(), c),
            ("side_minus".to_string(), m),
            ("side_plus".to_string(), p),
        ]),
    })
}

/// Raw HOM visibility 1 − (A_co/N_co)/(A_cross/N_cross). Each central area
/// A is normalized by the mean N of that histogram's peaks at ±2·rep_period,
/// which lie outside the interference structure.
pub fn extract_hom_visibility(
    co: &CoincidenceHistogram,
    cross: &CoincidenceHistogram,
    rep_period: f64,
    window: f64,
) -> Result<VisibilityResult> {
    let areas = |h: &CoincidenceHistogram| -> Result<(f64, f64, f64)> {
        Ok((
            h.area(0.0, window)? as f64,
            h.area(-2.0 * rep_period, window)? as f64,
            h.area(2.0 * rep_period, window)? as f64,
        ))
    };
    let (a_co, co_m, co_p) = areas(co)?;
    let (a_cr, cr_m, cr_p) = areas(cross)?;
    let n_co = 0.5 * (co_m + co_p);
    let n_cr = 0.5 * (cr_m + cr_p);
    if a_cr == 0.0 {
        return Err(Error::DegenerateNormalization(
            "cross-polarized central area is zero".into(),
        ));
    }
    if n_co == 0.0 || n_cr == 0.0 {
        return Err(Error::DegenerateNormalization(
            "normalization peaks at ±2·rep_period are empty".into(),
        ));
    }
    let ratio = (a_co / n_co) / (a_cr / n_cr);
    let k = n_cr / (n_co * a_cr);
    let var = k * k * a_co
        + ratio * ratio / a_cr
        + ratio * ratio * (co_m + co_p) / (4.0 * n_co * n_co)
        + ratio * ratio * (cr_m + cr_p) / (4.0 * n_cr * n_cr);
    Ok(VisibilityResult {
        value: 1.0 - ratio,
        uncertainty: var.sqrt(),
        window,
        peak_areas: BTreeMap::from([
            ("co_center".to_string(), a_co),
            ("co_norm".to_string(), n_co),
            ("cross_center".to_string(), a_cr),
            ("cross_norm".to_string(), n_cr),
        ]),
    })
}
