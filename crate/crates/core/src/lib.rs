//! Semi-random planted clique lab.
//!
//! * [`perturbed_bernoulli`]: perturbed Bernoulli laws, exact divergences and
//!   the superset-statistic KL bound.
//! * [`graph_model`]: planted-clique generators, the null designs and the
//!   coupled planted distribution.
//! * [`recovery`]: the unique-good-clique recovery rule and helpers.
//! * [`analysis`]: column laws, local and chained KL bounds with exact
//!   oracles, and Jaccard experiments.

pub mod analysis;
pub mod error;
pub mod graph_model;
pub mod perturbed_bernoulli;
pub mod recovery;
pub mod rng;
pub mod subset;
pub mod verify;

pub use error::{Error, Result};
