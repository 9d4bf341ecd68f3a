//! Searches for minimal-volume fields at fixed winding `k`.

pub mod family;
pub mod grid;
pub mod simplex;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::VolError;

pub use family::{family_volume, minimize_in_family, random_start, FamilyConfig, FamilyObjective, FamilyQuadrature, FamilyResult};
pub use grid::{meridian_grid, minimize_grid, GridConfig, GridObjective, GridResult};
pub use simplex::{nelder_mead, NelderMeadConfig, NelderMeadOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub iterations: usize,
    pub evaluations: usize,
    /// Best objective after each iteration; nonincreasing.
    pub objective: Vec<f64>,
    /// Simplex size (family search) or scaled gradient norm (grid search) at exit.
    pub terminal_measure: f64,
    pub converged: bool,
    /// Not serialised, so that reports of identical runs are identical.
    #[serde(skip_serializing, default)]
    pub wall_clock_secs: f64,
}

impl OptimizationTrace {
    pub fn is_monotone(&self) -> bool {
        self.objective.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective\n");
        for (i, v) in self.objective.iter().enumerate() {
            let _ = writeln!(out, "{i},{v:e}");
        }
        out
    }
}

/// Best point reached before the budget ran out.
#[derive(Debug, Clone, PartialEq)]
pub enum BestSoFar {
    Family(FamilyResult),
    Grid(GridResult),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinimizeError {
    #[error("optimisation budget exhausted before convergence")]
    BudgetExhausted(Box<BestSoFar>),
    #[error("winding constraint violated by {0:e} (internal error)")]
    ConstraintViolation(f64),
    #[error(transparent)]
    Invalid(#[from] VolError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_csv() {
        let t = OptimizationTrace {
            iterations: 2,
            evaluations: 5,
            objective: vec![2.0, 1.5],
            terminal_measure: 0.0,
            converged: true,
            wall_clock_secs: 0.0,
        };
        assert!(t.is_monotone());
        let csv = t.to_csv();
        assert_eq!(csv.lines().next(), Some("iteration,objective"));
        assert_eq!(csv.lines().count(), 3);
        let back: f64 = csv.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 1.5);
    }
}
