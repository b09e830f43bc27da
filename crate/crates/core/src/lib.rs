//! Sublinear-time h-index estimation with exact query accounting.
//!
//! The crate is organised bottom-up:
//!
//! - [`oracle`]: query-counted array access, budgets, uniform index sampling.
//! - [`rng`]: reproducible, splittable random streams.
//! - [`gen`]: synthetic arrays with a prescribed h-index.
//! - [`exact`]: linear-time baselines and selection routines.
//! - [`estimator`]: the weak threshold test, the strong (1 ± ε) estimator and
//!   the combined estimator with amplification.
//! - [`hardness`]: popcount-thresholding instances and the reductions to
//!   h-index arrays and to triangle-counting graph oracles.
//! - [`harness`]: Monte Carlo trial orchestration, statistics and CSV output.

pub mod error;
pub mod estimator;
pub mod exact;
pub mod gen;
pub mod hardness;
pub mod harness;
pub mod oracle;
pub mod rng;

pub use error::{Error, OracleError, Result};
pub use estimator::{estimate_h_index, strong_estimate, weak_estimate, EstimatorParams, HEstimate};
pub use exact::exact_h_index;
pub use oracle::{ArrayData, ArrayOracle};
pub use rng::RngHandle;
