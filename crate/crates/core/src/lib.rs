//! # attrdiff
//!
//! Find the attribute dimensions whose distributions differ most between two
//! unlabeled datasets, given one attribute (embedding) vector per sample.
//!
//! The pipeline:
//!
//! 1. load both attribute matrices ([`format`]);
//! 2. optionally merge correlated dimensions with PCA ([`spectral`]);
//! 3. compute the exact 1-D Wasserstein distance of every dimension, raw and
//!    divided by the pooled standard deviation, and rank ([`diff::compare`]);
//! 4. explain the top dimensions with histograms, endpoint or window sample
//!    selections and direction vectors ([`diff`], [`report`]).
//!
//! [`baselines`] and [`eval`] hold the covering baselines and the biased-split
//! benchmark used to score selection methods against known labels.

pub mod baselines;
pub mod diff;
pub mod error;
pub mod eval;
pub mod format;
pub mod matrix;
pub mod ot;
pub mod report;
pub mod spectral;

pub use diff::{
    compare, endpoint_direction, histogram, select_endpoint, select_window, CompareOptions,
    Comparison, DimensionDiff, Endpoint, HistogramPair, ScoreKind, SelectionResult,
};
pub use error::{Error, Result};
pub use format::{load_matrix, save_matrix, MatrixFormat, Precision};
pub use matrix::{pooled_stats, AttributeMatrix, LabelVector, PooledStats};
pub use ot::{normalized_wasserstein_1d, wasserstein_1d, Order};
pub use spectral::{fit_pca, inverse_direction, transform, PcaModel};

/// Version string embedded in every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
