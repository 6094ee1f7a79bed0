//! Log-correlated bi-fractional Brownian motions indexed by metric spaces.
//!
//! The crate evaluates the covariance kernels of the bi-fractional family and of
//! its logarithmic limit, integrates them against test functions, and samples
//! the field through its stochastic-integral and aggregated representations.

pub mod acceptance;
pub mod aggregated;
pub mod error;
pub mod kernels;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod samples;
pub mod stats;
pub mod space;
pub mod testfn;

pub use error::{Error, Result};
