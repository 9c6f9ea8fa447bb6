use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{visibility_eq2, Eq2Inputs, GammaRule};
use crate::error::{Error, Result};
use crate::units::ev_to_hz;

/// Axes of a lifetime × FSS visibility map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapGrid {
    pub t1_min: f64,
    pub t1_max: f64,
    pub n_t1: usize,
    /// eV.
    pub fss_min: f64,
    pub fss_max: f64,
    pub n_fss: usize,
    /// Hz.
    pub sigma: f64,
}

impl Default for MapGrid {
    fn default() -> Self {
        Self {
            t1_min: 20e-12,
            t1_max: 500e-12,
            n_t1: 200,
            fss_min: 0.0,
            fss_max: 20e-6,
            n_fss: 200,
            sigma: 0.0,
        }
    }
}

impl MapGrid {
    pub fn t1_axis(&self) -> Vec<f64> {
        linspace(self.t1_min, self.t1_max, self.n_t1)
    }

    pub fn fss_axis(&self) -> Vec<f64> {
        linspace(self.fss_min, self.fss_max, self.n_fss)
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityMap {
    /// s.
    pub t1: Vec<f64>,
    /// eV.
    pub fss: Vec<f64>,
    pub sigma: f64,
    pub gamma_rule: GammaRule,
    /// Row-major: `values[i * fss.len() + j]` is at (t1[i], fss[j]).
    pub values: Vec<f64>,
}

fn strictly_increasing(field: &'static str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::domain(field, "axis is empty"));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain(field, "axis must be strictly increasing"));
    }
    Ok(())
}

/// Evaluates the wandering-averaged visibility on the Cartesian product of
/// the axes. Rows (one per lifetime) are computed in parallel.
pub fn visibility_map(
    t1_axis: &[f64],
    fss_axis: &[f64],
    sigma: f64,
    gamma_rule: GammaRule,
) -> Result<VisibilityMap> {
    strictly_increasing("t1_axis", t1_axis)?;
    strictly_increasing("fss_axis", fss_axis)?;
    let rows: Vec<Vec<f64>> = t1_axis
        .par_iter()
        .map(|&t1| line(t1, fss_axis, sigma, gamma_rule))
        .collect::<Result<_>>()?;
    Ok(VisibilityMap {
        t1: t1_axis.to_vec(),
        fss: fss_axis.to_vec(),
        sigma,
        gamma_rule,
        values: rows.concat(),
    })
}

fn line(t1: f64, fss_axis: &[f64], sigma: f64, gamma_rule: GammaRule) -> Result<Vec<f64>> {
    fss_axis
        .iter()
        .map(|&fss| {
            visibility_eq2(&Eq2Inputs {
                t1,
                delta_nu: ev_to_hz(fss),
                sigma,
                gamma: gamma_rule.gamma(t1),
            })
        })
        .collect()
}

impl VisibilityMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.fss.len() + j]
    }

    /// Visibility against FSS at a fixed lifetime, evaluated exactly rather
    /// than interpolated from the grid.
    pub fn line_cut(&self, t1: f64) -> Result<Vec<(f64, f64)>> {
        let v = line(t1, &self.fss, self.sigma, self.gamma_rule)?;
        Ok(self.fss.iter().copied().zip(v).collect())
    }

    /// Columns: t1_ps, fss_ueV, visibility.
    pub fn write_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t1_ps\tfss_ueV\tvisibility")?;
        for (i, &t1) in self.t1.iter().enumerate() {
            for (j, &fss) in self.fss.iter().enumerate() {
                writeln!(w, "{:.6}\t{:.6}\t{:.9}", t1 * 1e12, fss * 1e6, self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Writes a line cut with the same columns as the map table.
pub fn write_line_cut<W: Write>(mut w: W, t1: f64, cut: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(w, "t1_ps\tfss_ueV\tvisibility")?;
    for &(fss, v) in cut {
        writeln!(w, "{:.6}\t{:.6}\t{:.9}", t1 * 1e12, fss * 1e6, v)?;
    }
    Ok(())
}
