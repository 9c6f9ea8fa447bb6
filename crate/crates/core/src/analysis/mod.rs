//! Coincidence correlation and figure-of-merit extraction.

mod estimators;
mod fit;
mod histogram;

pub use estimators::{extract_g2, extract_hom_visibility, VisibilityResult};
pub use fit::{fit_fss, fit_lifetime, FitResult};
pub use histogram::{
    autocorrelate, cross_correlate, merge_streams, CoincidenceHistogram, HistogramGrid,
};
