//! Single-machine pricing.
//!
//! Jobs on a machine are taken in SWPT order, so a schedule is just a subset,
//! and `F(j, t)` = the best value `Σ (C_i w_i − π_i)` over subsets of the first
//! `j` SWPT jobs finishing at time `t`. The reduced cost of the best schedule is
//! `min F − σ_k`.

mod brute;
mod dp;

use serde::Serialize;
use thiserror::Error;

pub use brute::{brute_force_pricing, BRUTE_FORCE_MAX_JOBS};
pub use dp::{build_table, k_best_columns, solve_pricing_dp, DpTable};

use crate::schedule::Column;

/// Default negative-reduced-cost threshold.
pub const EPSILON: f64 = 1e-6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PricingError {
    #[error("brute-force pricing supports at most {max} jobs, got {n}")]
    TooLarge { n: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PricingResult {
    pub min_reduced_cost: f64,
    /// Present iff `min_reduced_cost < −ε`.
    pub column: Option<Column>,
    /// `(j*, t*)`: SWPT position and completion time of the minimizing state.
    pub certificate: (usize, u64),
}
