//! Change-point detection in the correlation of bivariate time series.
//!
//! The crate is organised bottom-up:
//!
//! - [`moments`]: segment sufficient statistics and Pearson correlations.
//! - [`lrv`]: the kernel long-run variance scale `D̂` of the correlation
//!   estimator on a sub-sample.
//! - [`cusum`]: the CUSUM target function on a sub-interval, its maximum and
//!   the location estimator.
//! - [`segmentation`]: Kolmogorov critical values, the significance schedule
//!   and the binary segmentation procedure.
//! - [`simulate`]: VAR(1) and DCC-GARCH generators with step-function
//!   correlation breaks, plus the dominance function `A*`.
//! - [`montecarlo`]: a seeded, parallel experiment harness.
//!
//! Observation indices in the public API are 1-based and inclusive, so a
//! segment `[a, b]` covers observations `a..=b` of a series of length `T`.

pub mod cusum;
pub mod lrv;
pub mod moments;
pub mod montecarlo;
pub mod segmentation;
pub mod simulate;

mod error;

pub use cusum::{CusumProfile, Interval};
pub use error::{Error, Result};
pub use lrv::{Bandwidth, DhatComponents, HacConfig};
pub use moments::{SegmentMoments, SeriesPair};
pub use segmentation::{detect, ChangePointReport, SegmentationConfig};
