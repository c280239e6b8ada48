//! Extremal quantile regression with extreme-value inference.
//!
//! Fits linear conditional quantile models at tail quantile indices and
//! produces median-unbiased estimates and confidence intervals whose critical
//! values come from extreme-value limit laws, estimated either by recentered
//! subsampling or by direct simulation of the limiting point-process argmin.

pub mod dataset;
pub mod error;
pub mod inference;
pub mod limit;
pub(crate) mod linalg;
pub mod montecarlo;
pub mod qr;
pub mod solver;
pub mod subsample;
pub mod tail;

pub mod cli;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use qr::{brute_force_qr, check_loss, fit_qr, QuantileFit};
