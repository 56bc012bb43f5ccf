//! Stability statistics: peg-deviation metrics, two-sample comparisons,
//! correlation, Granger causality, and the special functions behind their
//! p-values.

use thiserror::Error;

pub mod correlation;
pub mod deviation;
pub mod series;
pub mod special;
pub mod ttest;

pub use correlation::{granger, pearson, CorrelationReport, GrangerReport};
pub use deviation::{downward_clip, downward_deviation, price_deviation, shortfall, Target};
pub use series::{align, Aligned, PriceSeries, Series};
pub use special::{f_cdf, f_upper_p, inc_beta, ln_gamma, t_two_sided_p};
pub use ttest::{welch_ttest, TTestReport};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StatsError {
    #[error("series is empty")]
    EmptySeries,
    #[error("non-finite value {value}")]
    NonFinite { value: f64 },
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("sample has no variance")]
    DegenerateVariance,
    #[error("regression design matrix is singular")]
    SingularDesign,
    #[error("band bounds invalid: lo = {lo}, hi = {hi}")]
    BadBand { lo: f64, hi: f64 },
    #[error("lag {lag} is not usable")]
    BadLag { lag: usize },
    #[error("series share no dates")]
    InsufficientOverlap,
}
