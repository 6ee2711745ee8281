//! Column-generation driver.
//!
//! Each iteration solves the restricted master LP, prices every machine with
//! the selected method and adds the improving columns. The run stops with a
//! certificate when an exact DP pass over all machines finds no column with
//! reduced cost below `−ε`, or at the time limit.

mod dataset;
mod init;
mod log;

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;
use crate::nn::{predict_column, ModelWeights};
use crate::pricing::{k_best_columns, solve_pricing_dp, EPSILON};
use crate::rmp::{ensure_feasible, ensure_partition, finalize_integer, solve_lp, ColumnPool, IntegerSolution, RmpError, RmpStatus};
use crate::schedule::{reduced_cost, Column, DualSolution};

pub use dataset::{emit_dataset, target_tokens, DatasetRecord, JobFeatures};
pub use init::{
    greedy_permutation_solutions, init_greedy_permutation, init_random_subsets, GreedySolution, GREEDY_KEEP,
    GREEDY_PERMUTATIONS,
};
pub use log::{normalize_curve, write_convergence_csv, CSV_HEADER};

#[derive(Debug, Clone)]
pub enum PricingMode {
    /// One most negative column per machine.
    GreedyDp,
    /// Up to `K` most negative columns per machine.
    DpK(usize),
    /// Network proposals first; exact DP on all machines when none improves.
    NnDp(Arc<ModelWeights>),
}

impl PricingMode {
    pub fn label(&self) -> String {
        match self {
            PricingMode::GreedyDp => "greedy-dp".into(),
            PricingMode::DpK(k) => format!("dp-{k}"),
            PricingMode::NnDp(_) => "nn-dp".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitStrategy {
    RandomSubsets { runs_per_machine: usize },
    GreedyPermutation,
}

#[derive(Debug, Clone)]
pub struct CgConfig {
    pub mode: PricingMode,
    pub epsilon: f64,
    pub time_limit: Option<Duration>,
    pub init: InitStrategy,
    pub seed: u64,
    pub finalize_integer: bool,
    pub finalize_time_limit: Option<Duration>,
    /// Keep every DP pricing result for dataset emission.
    pub record_trace: bool,
}

impl CgConfig {
    pub fn new(mode: PricingMode) -> Self {
        CgConfig {
            mode,
            epsilon: EPSILON,
            time_limit: None,
            init: InitStrategy::RandomSubsets {
                runs_per_machine: crate::instance::DEFAULT_INIT_COLS as usize,
            },
            seed: 0,
            finalize_integer: false,
            finalize_time_limit: None,
            record_trace: false,
        }
    }
}

/// Which pricer produced an iteration's columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PricingSource {
    #[serde(rename = "NN")]
    Nn,
    #[serde(rename = "DP")]
    Dp,
}

impl fmt::Display for PricingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PricingSource::Nn => "NN",
            PricingSource::Dp => "DP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub elapsed_ms: u64,
    pub rmp_objective: f64,
    /// Pool size after this iteration's columns were added.
    pub pool_size: usize,
    pub nn_count: usize,
    pub dp_count: usize,
    /// Most negative reduced cost seen by the pricer that decided the iteration.
    pub min_reduced_cost: f64,
    pub mode: PricingSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Certificate,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnTotals {
    /// Columns added by pricing (initial columns excluded).
    pub total: usize,
    pub nn: usize,
    pub dp: usize,
    pub initial: usize,
}

/// One DP pricing call: the duals it saw and the column it returned, if any.
#[derive(Debug, Clone)]
pub struct PricingObservation {
    pub iteration: usize,
    pub machine: usize,
    pub duals: Arc<DualSolution>,
    pub column: Option<Column>,
}

#[derive(Debug, Clone)]
pub struct CgResult {
    pub lp_objective: f64,
    pub integer: Option<IntegerSolution>,
    pub iterations: Vec<IterationRecord>,
    pub totals: ColumnTotals,
    /// Per-machine DP minimum reduced costs from the final pass; empty when the
    /// run stopped at the time limit.
    pub certificate: Vec<f64>,
    pub terminated_by: Termination,
    pub wall_ms: u64,
    pub pool: ColumnPool,
    pub final_duals: DualSolution,
    pub trace: Vec<PricingObservation>,
}

#[derive(Debug, Error)]
pub enum CgError {
    #[error("restricted master LP is infeasible")]
    Infeasible,
    #[error("pricing found min reduced cost {min_rc} on machine {machine} but produced no new column")]
    Stalled { machine: usize, min_rc: f64 },
    #[error(transparent)]
    Integer(#[from] RmpError),
}

fn initial_pool(inst: &Instance, config: &CgConfig) -> (ColumnPool, usize) {
    let cols = match config.init {
        InitStrategy::RandomSubsets { runs_per_machine } => init_random_subsets(inst, runs_per_machine, config.seed),
        InitStrategy::GreedyPermutation => init_greedy_permutation(inst, config.seed),
    };
    let mut pool = ColumnPool::new();
    pool.add_columns(cols.into_iter().filter(|c| !c.is_empty()));
    ensure_feasible(&mut pool, inst);
    ensure_partition(&mut pool, inst);
    let n = pool.len();
    (pool, n)
}

/// Exact pass over all machines: per-machine minimum reduced cost and columns.
fn dp_pass(inst: &Instance, duals: &DualSolution, k_best: Option<usize>, eps: f64) -> Vec<(f64, Vec<Column>)> {
    (0..inst.num_machines)
        .into_par_iter()
        .map(|k| match k_best {
            None => {
                let r = solve_pricing_dp(k, inst, duals, eps);
                (r.min_reduced_cost, r.column.into_iter().collect())
            }
            Some(count) => {
                let cols = k_best_columns(k, inst, duals, count, eps);
                let min_rc = match cols.first() {
                    Some(c) => reduced_cost(c, duals),
                    None => solve_pricing_dp(k, inst, duals, eps).min_reduced_cost,
                };
                (min_rc, cols)
            }
        })
        .collect()
}

pub fn run_cg(inst: &Instance, config: &CgConfig) -> Result<CgResult, CgError> {
    let start = Instant::now();
    let eps = config.epsilon;
    let (mut pool, initial) = initial_pool(inst, config);
    let mut totals = ColumnTotals {
        initial,
        ..ColumnTotals::default()
    };
    let mut iterations = Vec::new();
    let mut trace = Vec::new();

    for iteration in 0.. {
        let lp = solve_lp(&pool, inst);
        if lp.status != RmpStatus::Optimal {
            return Err(CgError::Infeasible);
        }
        let timed_out = config.time_limit.is_some_and(|tl| start.elapsed() >= tl);
        if timed_out {
            return finish(inst, config, start, pool, lp.objective, lp.duals, iterations, totals, Vec::new(), Termination::TimeLimit, trace);
        }
        let duals = Arc::new(lp.duals);

        let mut nn_cols = Vec::new();
        let mut nn_min = f64::INFINITY;
        if let PricingMode::NnDp(weights) = &config.mode {
            let proposals: Vec<Option<(Column, f64)>> = (0..inst.num_machines)
                .into_par_iter()
                .map(|k| predict_column(k, inst, &duals, weights))
                .collect();
            for (col, rc) in proposals.into_iter().flatten() {
                nn_min = nn_min.min(rc);
                if rc < -eps && !pool.contains(&col) {
                    nn_cols.push(col);
                }
            }
        }

        let (source, min_rc, added, certificate) = if !nn_cols.is_empty() {
            let added = pool.add_columns(nn_cols);
            totals.nn += added;
            (PricingSource::Nn, nn_min, added, None)
        } else {
            let k_best = match config.mode {
                PricingMode::DpK(count) => Some(count),
                _ => None,
            };
            let results = dp_pass(inst, &duals, k_best, eps);
            let mut added = 0;
            let mut min_rc = f64::INFINITY;
            let mut stalled = None;
            for (k, (rc, cols)) in results.iter().enumerate() {
                min_rc = min_rc.min(*rc);
                if config.record_trace {
                    trace.push(PricingObservation {
                        iteration,
                        machine: k,
                        duals: duals.clone(),
                        column: cols.first().cloned(),
                    });
                }
                let fresh = pool.add_columns(cols.iter().cloned());
                if fresh == 0 && *rc < -eps && stalled.is_none() {
                    stalled = Some((k, *rc));
                }
                added += fresh;
            }
            totals.dp += added;
            if added == 0 {
                if let Some((machine, min_rc)) = stalled {
                    return Err(CgError::Stalled { machine, min_rc });
                }
            }
            let cert = (added == 0).then(|| results.iter().map(|r| r.0).collect::<Vec<_>>());
            (PricingSource::Dp, min_rc, added, cert)
        };
        totals.total += added;

        iterations.push(IterationRecord {
            iteration,
            elapsed_ms: start.elapsed().as_millis() as u64,
            rmp_objective: lp.objective,
            pool_size: pool.len(),
            nn_count: if source == PricingSource::Nn { added } else { 0 },
            dp_count: if source == PricingSource::Dp { added } else { 0 },
            min_reduced_cost: min_rc,
            mode: source,
        });

        if let Some(cert) = certificate {
            let duals = Arc::try_unwrap(duals).unwrap_or_else(|a| (*a).clone());
            return finish(inst, config, start, pool, lp.objective, duals, iterations, totals, cert, Termination::Certificate, trace);
        }
    }
    unreachable!("the iteration counter is unbounded")
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &Instance,
    config: &CgConfig,
    start: Instant,
    pool: ColumnPool,
    lp_objective: f64,
    final_duals: DualSolution,
    iterations: Vec<IterationRecord>,
    totals: ColumnTotals,
    certificate: Vec<f64>,
    terminated_by: Termination,
    trace: Vec<PricingObservation>,
) -> Result<CgResult, CgError> {
    let integer = if config.finalize_integer {
        Some(finalize_integer(&pool, inst, config.finalize_time_limit)?)
    } else {
        None
    };
    Ok(CgResult {
        lp_objective,
        integer,
        iterations,
        totals,
        certificate,
        terminated_by,
        wall_ms: start.elapsed().as_millis() as u64,
        pool,
        final_duals,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_uniform;

    #[test]
    fn greedy_dp_terminates_with_certificate() {
        let inst = generate_uniform(2, 10, 3);
        let res = run_cg(&inst, &CgConfig::new(PricingMode::GreedyDp)).unwrap();
        assert_eq!(res.terminated_by, Termination::Certificate);
        assert_eq!(res.certificate.len(), 2);
        assert!(res.certificate.iter().all(|&rc| rc >= -EPSILON));
        assert_eq!(res.totals.total, res.totals.nn + res.totals.dp);
        assert_eq!(res.pool.len(), res.totals.initial + res.totals.total);
        let objs: Vec<f64> = res.iterations.iter().map(|r| r.rmp_objective).collect();
        assert!(objs.windows(2).all(|w| w[1] <= w[0] + 1e-6));
    }

    #[test]
    fn zero_time_limit_stops_immediately() {
        let inst = generate_uniform(2, 12, 1);
        let mut cfg = CgConfig::new(PricingMode::GreedyDp);
        cfg.time_limit = Some(Duration::ZERO);
        let res = run_cg(&inst, &cfg).unwrap();
        assert_eq!(res.terminated_by, Termination::TimeLimit);
        assert!(res.iterations.is_empty());
        assert!(res.lp_objective.is_finite());
    }

    #[test]
    fn trace_has_one_record_per_machine_per_dp_iteration() {
        let inst = generate_uniform(3, 7, 2);
        let mut cfg = CgConfig::new(PricingMode::GreedyDp);
        cfg.record_trace = true;
        let res = run_cg(&inst, &cfg).unwrap();
        assert_eq!(res.trace.len(), 3 * res.iterations.len());
        let last = &res.trace[res.trace.len() - 3..];
        assert!(last.iter().all(|o| o.column.is_none()));
    }

    #[test]
    fn finalize_gives_partition_above_lp_bound() {
        let inst = generate_uniform(2, 6, 9);
        let mut cfg = CgConfig::new(PricingMode::DpK(5));
        cfg.finalize_integer = true;
        let res = run_cg(&inst, &cfg).unwrap();
        let int = res.integer.unwrap();
        assert!(int.is_partition(&inst));
        assert!(int.objective as f64 >= res.lp_objective - 1e-6);
    }
}
