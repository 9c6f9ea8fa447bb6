use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::TimeTagStream;
use crate::units::{ps_to_seconds, seconds_to_ps};

/// Tags of stream `a` handled per parallel work item.
const CHUNK: usize = 1 << 15;

/// Binning of delays t_b − t_a in integer picoseconds. Bin k covers
/// `[min + k·w, min + (k+1)·w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramGrid {
    pub bin_width_ps: i64,
    pub min_delay_ps: i64,
    pub n_bins: usize,
}

impl HistogramGrid {
    pub fn new(bin_width_ps: i64, min_delay_ps: i64, n_bins: usize) -> Result<Self> {
        if bin_width_ps <= 0 {
            return Err(Error::domain("bin_width", "must be at least 1 ps"));
        }
        if n_bins == 0 {
            return Err(Error::domain("span", "histogram needs at least one bin"));
        }
        Ok(Self {
            bin_width_ps,
            min_delay_ps,
            n_bins,
        })
    }

    /// Grid over [−span, +span), span rounded up to whole bins (seconds in).
    pub fn symmetric(bin_width: f64, span: f64) -> Result<Self> {
        let w = seconds_to_ps(bin_width);
        if w <= 0 {
            return Err(Error::domain("bin_width", "must be at least 1 ps"));
        }
        let half = (seconds_to_ps(span) + w - 1) / w;
        Self::new(w, -half * w, (2 * half) as usize)
    }

    pub fn max_delay_ps(&self) -> i64 {
        self.min_delay_ps + self.bin_width_ps * self.n_bins as i64
    }

    /// Grid for the reversed correlation: delay d lands in bin k here exactly
    /// when −d lands in bin n−1−k of the mirrored grid.
    pub fn mirrored(&self) -> Self {
        Self {
            bin_width_ps: self.bin_width_ps,
            min_delay_ps: 1 - self.max_delay_ps(),
            n_bins: self.n_bins,
        }
    }

    pub fn bin_of(&self, delay_ps: i64) -> Option<usize> {
        if delay_ps < self.min_delay_ps || delay_ps >= self.max_delay_ps() {
            None
        } else {
            Some(((delay_ps - self.min_delay_ps) / self.bin_width_ps) as usize)
        }
    }

    pub fn bin_lower_ps(&self, k: usize) -> i64 {
        self.min_delay_ps + k as i64 * self.bin_width_ps
    }

    /// Bin center, s.
    pub fn bin_center(&self, k: usize) -> f64 {
        ps_to_seconds(self.bin_lower_ps(k)) + 0.5 * ps_to_seconds(self.bin_width_ps)
    }
}

/// Binned coincidence counts with their grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceHistogram {
    pub grid: HistogramGrid,
    pub counts: Vec<u64>,
    pub total_pairs: u64,
}

impl CoincidenceHistogram {
    pub fn from_counts(grid: HistogramGrid, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != grid.n_bins {
            return Err(Error::Data(format!(
                "{} counts for {} bins",
                counts.len(),
                grid.n_bins
            )));
        }
        let total_pairs = counts.iter().sum();
        Ok(Self {
            grid,
            counts,
            total_pairs,
        })
    }

    pub fn bin_width(&self) -> f64 {
        ps_to_seconds(self.grid.bin_width_ps)
    }

    pub fn min_delay(&self) -> f64 {
        ps_to_seconds(self.grid.min_delay_ps)
    }

    pub fn max_delay(&self) -> f64 {
        ps_to_seconds(self.grid.max_delay_ps())
    }

    /// Same data on the mirrored grid, bin order reversed.
    pub fn mirrored(&self) -> Self {
        let mut counts = self.counts.clone();
        counts.reverse();
        Self {
            grid: self.grid.mirrored(),
            counts,
            total_pairs: self.total_pairs,
        }
    }

    /// Sum of the bins whose lower edge lies in `[c − w/2, c + w/2)`.
    pub fn area(&self, center: f64, window: f64) -> Result<u64> {
        let lo = seconds_to_ps(center - 0.5 * window);
        let hi = seconds_to_ps(center + 0.5 * window);
        if lo < self.grid.min_delay_ps || hi > self.grid.max_delay_ps() {
            return Err(Error::HistogramRange {
                needed: format!("[{lo}, {hi}) ps"),
            });
        }
        Ok(self
            .counts
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let e = self.grid.bin_lower_ps(*k);
                e >= lo && e < hi
            })
            .map(|(_, &c)| c)
            .sum())
    }

    /// Columns: delay_ps (bin center), counts.
    pub fn write_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "delay_ps\tcounts")?;
        let half = self.grid.bin_width_ps as f64 / 2.0;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(w, "{}\t{}", self.grid.bin_lower_ps(k) as f64 + half, c)?;
        }
        Ok(())
    }
}

fn correlate(a: &[i64], b: &[i64], grid: &HistogramGrid, exclude_self: bool) -> Vec<u64> {
    let n_chunks = a.len().div_ceil(CHUNK);
    let min = grid.min_delay_ps;
    let max = grid.max_delay_ps();
    let w = grid.bin_width_ps;
    (0..n_chunks)
        .into_par_iter()
        .fold(
            || vec![0u64; grid.n_bins],
            |mut hist, c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(a.len());
                let mut lo = b.partition_point(|&t| t < a[start] + min);
                for (i, &ta) in a.iter().enumerate().take(end).skip(start) {
                    while lo < b.len() && b[lo] < ta + min {
                        lo += 1;
                    }
                    let mut j = lo;
                    while j < b.len() && b[j] < ta + max {
                        if !(exclude_self && i == j) {
                            hist[((b[j] - ta - min) / w) as usize] += 1;
                        }
                        j += 1;
                    }
                }
                hist
            },
        )
        .reduce(
            || vec![0u64; grid.n_bins],
            |mut x, y| {
                for (p, q) in x.iter_mut().zip(y) {
                    *p += q;
                }
                x
            },
        )
}

/// Histogram of all delays t_b − t_a inside the grid. Linear two-pointer
/// sweep; stream `a` is processed in independent chunks.
pub fn cross_correlate(
    a: &TimeTagStream,
    b: &TimeTagStream,
    grid: &HistogramGrid,
) -> Result<CoincidenceHistogram> {
    a.check_sorted()?;
    b.check_sorted()?;
    CoincidenceHistogram::from_counts(*grid, correlate(&a.tags, &b.tags, grid, false))
}

/// Autocorrelation of one stream, excluding each tag paired with itself.
pub fn autocorrelate(a: &TimeTagStream, grid: &HistogramGrid) -> Result<CoincidenceHistogram> {
    a.check_sorted()?;
    CoincidenceHistogram::from_counts(*grid, correlate(&a.tags, &a.tags, grid, true))
}

/// Merges sorted streams into one (channel of the first), e.g. H+V.
pub fn merge_streams(streams: &[&TimeTagStream]) -> Result<TimeTagStream> {
    let mut tags: Vec<i64> = Vec::with_capacity(streams.iter().map(|s| s.len()).sum());
    for s in streams {
        s.check_sorted()?;
        tags.extend_from_slice(&s.tags);
    }
    tags.sort_unstable();
    let duration = streams.iter().map(|s| s.duration).fold(0.0, f64::max);
    let channel = streams.first().map_or(0, |s| s.channel);
    TimeTagStream::new(channel, tags, duration)
}
