//! Closed-form bounds of the lower-bound argument and their exact oracles:
//! column laws, local and chained KL bounds, the toy-scale joint KL,
//! hypergeometric expectations, Pinsker, and Jaccard experiments.

pub mod chain;
pub mod column_law;
pub mod experiment;
pub mod hg;
pub mod joint;
pub mod local_bounds;

use serde::Serialize;

pub use chain::{
    chained_kl_bound, closed_form_grid, closed_form_lines, grid_chain_expectation, BoundLedger,
};
pub use column_law::{
    column_law, column_law_grid, column_law_lines, pi_formula, random_prefix, singleton_formula,
    ColumnLaw,
};
pub use experiment::{
    jaccard_experiment, oracle_line_pick, Estimator, ExperimentModel, ExperimentSummary,
    TrialRecord,
};
pub use hg::{hg_bound, hg_expectation, hg_expectation_exact};
pub use joint::{chain_rhs_exact, exact_joint_kl, joint_kl_report, JointKlReport};
pub use local_bounds::{column_kl, column_pb_bound, kl_local_bound_grid, kl_local_bound_lines};

use crate::error::{ensure, Result};

/// Pinsker: `min(1, sqrt(kl/2))`.
pub fn tv_from_kl(kl: f64) -> Result<f64> {
    ensure!(kl >= 0.0, "KL divergence must be non-negative (got {kl})");
    Ok((kl / 2.0).sqrt().min(1.0))
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std_err: (var / n as f64).sqrt(),
            trials: n,
        }
    }

    /// Normal-approximation 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        (
            self.mean - 1.96 * self.std_err,
            self.mean + 1.96 * self.std_err,
        )
    }
}
