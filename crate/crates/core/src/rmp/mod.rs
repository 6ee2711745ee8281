//! Restricted master problem: the set-partitioning LP over the column pool,
//! its duals, and integer finalization over the generated columns.

mod pool;
pub mod simplex;

use std::time::{Duration, Instant};

use thiserror::Error;

pub use pool::{ensure_feasible, ensure_partition, greedy_assignment, ColumnPool};
use simplex::{LinearProgram, LpStatus, RowKind, SparseColumn};

use crate::instance::Instance;
use crate::schedule::{reduced_cost, Column, DualSolution};

/// Tolerance for dual feasibility and complementary slackness checks.
pub const DUAL_TOL: f64 = 1e-6;
/// Primal values below this count as zero.
pub const PRIMAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct RmpSolution {
    /// One value per pool column, in pool order.
    pub y: Vec<f64>,
    pub objective: f64,
    pub duals: DualSolution,
    pub status: RmpStatus,
}

#[derive(Debug, Error)]
pub enum RmpError {
    #[error("restricted master is infeasible")]
    Infeasible,
    #[error("no integer solution found before the time limit")]
    NoIncumbent,
}

/// LP over `cols` (pool indices) restricted to the given jobs and machines.
fn solve_subset(
    pool: &ColumnPool,
    cols: &[usize],
    jobs: &[usize],
    machines: &[usize],
    inst: &Instance,
) -> simplex::LpSolution {
    let mut job_row = vec![usize::MAX; inst.num_jobs() + 1];
    for (r, &j) in jobs.iter().enumerate() {
        job_row[j] = r;
    }
    let mut machine_row = vec![usize::MAX; inst.num_machines];
    for (r, &k) in machines.iter().enumerate() {
        machine_row[k] = jobs.len() + r;
    }
    let columns = cols
        .iter()
        .map(|&i| {
            let c = pool.get(i);
            let mut entries: Vec<(usize, f64)> = c.jobs.iter().map(|&j| (job_row[j], 1.0)).collect();
            entries.push((machine_row[c.machine], 1.0));
            debug_assert!(entries.iter().all(|&(r, _)| r != usize::MAX));
            SparseColumn {
                cost: c.cost as f64,
                entries,
            }
        })
        .collect();
    let mut kinds = vec![RowKind::Eq; jobs.len()];
    kinds.extend(std::iter::repeat_n(RowKind::Le, machines.len()));
    let lp = LinearProgram {
        rhs: vec![1.0; kinds.len()],
        kinds,
        columns,
    };
    simplex::solve(&lp)
}

/// Solves the LP relaxation of the restricted master over every pool column.
///
/// Rows are `Σ a_js y_s = 1` per job (dual `π_j`, free) and `Σ_{s on k} y_s ≤ 1`
/// per machine (dual `σ_k ≤ 0`).
pub fn solve_lp(pool: &ColumnPool, inst: &Instance) -> RmpSolution {
    let n = inst.num_jobs();
    let m = inst.num_machines;
    let cols: Vec<usize> = (0..pool.len()).collect();
    let jobs: Vec<usize> = (1..=n).collect();
    let machines: Vec<usize> = (0..m).collect();
    let sol = solve_subset(pool, &cols, &jobs, &machines, inst);
    match sol.status {
        LpStatus::Optimal => RmpSolution {
            y: sol.x,
            objective: sol.objective,
            duals: DualSolution {
                pi: sol.duals[..n].to_vec(),
                sigma: sol.duals[n..].to_vec(),
            },
            status: RmpStatus::Optimal,
        },
        // costs are non-negative, so the master is never unbounded
        LpStatus::Infeasible | LpStatus::Unbounded => RmpSolution {
            y: vec![0.0; pool.len()],
            objective: f64::INFINITY,
            duals: DualSolution::zeros(n, m),
            status: RmpStatus::Infeasible,
        },
    }
}

impl RmpSolution {
    /// Independent optimality check over the pool: primal feasibility, dual
    /// feasibility, complementary slackness and the sign of `σ`.
    pub fn verify(&self, pool: &ColumnPool, inst: &Instance) -> Result<(), String> {
        let mut cover = vec![0.0; inst.num_jobs() + 1];
        let mut load = vec![0.0; inst.num_machines];
        let mut obj = 0.0;
        for (c, &y) in pool.columns().iter().zip(&self.y) {
            if !(-PRIMAL_TOL..=1.0 + DUAL_TOL).contains(&y) {
                return Err(format!("y out of range: {y}"));
            }
            c.jobs.iter().for_each(|&j| cover[j] += y);
            load[c.machine] += y;
            obj += c.cost as f64 * y;
            let rc = reduced_cost(c, &self.duals);
            if rc < -DUAL_TOL {
                return Err(format!("column {:?} on {} has reduced cost {rc}", c.jobs, c.machine));
            }
            if y > PRIMAL_TOL && rc.abs() > DUAL_TOL {
                return Err(format!("basic column {:?} has reduced cost {rc}", c.jobs));
            }
        }
        if let Some(j) = (1..cover.len()).find(|&j| (cover[j] - 1.0).abs() > DUAL_TOL) {
            return Err(format!("job {j} covered {}", cover[j]));
        }
        if let Some(k) = (0..load.len()).find(|&k| load[k] > 1.0 + DUAL_TOL) {
            return Err(format!("machine {k} load {}", load[k]));
        }
        if (obj - self.objective).abs() > DUAL_TOL * obj.abs().max(1.0) {
            return Err(format!("objective {} but Σ f y = {obj}", self.objective));
        }
        if let Some(s) = self.duals.sigma.iter().find(|&&s| s > PRIMAL_TOL) {
            return Err(format!("positive machine dual {s}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IntegerSolution {
    /// At most one column per machine; every job in exactly one.
    pub chosen: Vec<Column>,
    pub objective: u64,
    /// The search stopped at the time limit; `chosen` is the best incumbent.
    pub timed_out: bool,
    pub nodes: usize,
}

impl IntegerSolution {
    pub fn is_partition(&self, inst: &Instance) -> bool {
        let mut seen = vec![0u32; inst.num_jobs() + 1];
        let mut used = vec![false; inst.num_machines];
        for c in &self.chosen {
            if std::mem::replace(&mut used[c.machine], true) {
                return false;
            }
            c.jobs.iter().for_each(|&j| seen[j] += 1);
        }
        seen[1..].iter().all(|&s| s == 1) && self.chosen.iter().map(|c| c.cost).sum::<u64>() == self.objective
    }
}

struct Node {
    fixed: Vec<usize>,
    excluded: Vec<usize>,
}

/// Best integer solution over the pool columns by depth-first branch and bound:
/// LP relaxation bounds, branching on the most fractional `y`, `y = 1` first.
pub fn finalize_integer(
    pool: &ColumnPool,
    inst: &Instance,
    time_limit: Option<Duration>,
) -> Result<IntegerSolution, RmpError> {
    let start = Instant::now();
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut nodes = 0;
    let mut timed_out = false;
    let mut stack = vec![Node {
        fixed: Vec::new(),
        excluded: Vec::new(),
    }];

    while let Some(node) = stack.pop() {
        if time_limit.is_some_and(|tl| start.elapsed() > tl) {
            timed_out = true;
            break;
        }
        nodes += 1;

        let mut job_free = vec![true; inst.num_jobs() + 1];
        let mut machine_free = vec![true; inst.num_machines];
        let mut fixed_cost = 0u64;
        for &i in &node.fixed {
            let c = pool.get(i);
            c.jobs.iter().for_each(|&j| job_free[j] = false);
            machine_free[c.machine] = false;
            fixed_cost += c.cost;
        }
        let jobs: Vec<usize> = (1..=inst.num_jobs()).filter(|&j| job_free[j]).collect();
        if jobs.is_empty() {
            if best.as_ref().is_none_or(|(b, _)| fixed_cost < *b) {
                best = Some((fixed_cost, node.fixed.clone()));
            }
            continue;
        }
        let machines: Vec<usize> = (0..inst.num_machines).filter(|&k| machine_free[k]).collect();
        let cols: Vec<usize> = (0..pool.len())
            .filter(|i| !node.excluded.contains(i))
            .filter(|&i| {
                let c = pool.get(i);
                !c.is_empty() && machine_free[c.machine] && c.jobs.iter().all(|&j| job_free[j])
            })
            .collect();
        let lp = solve_subset(pool, &cols, &jobs, &machines, inst);
        if lp.status != LpStatus::Optimal {
            continue;
        }
        let bound = fixed_cost as f64 + lp.objective;
        if let Some((b, _)) = &best {
            // integral costs: prune unless the bound admits a strictly better integer
            if bound > *b as f64 - 1.0 + 1e-6 {
                continue;
            }
        }

        let frac = cols
            .iter()
            .zip(&lp.x)
            .filter(|(_, &v)| v > 1e-6 && v < 1.0 - 1e-6)
            .min_by(|a, b| (a.1 - 0.5).abs().total_cmp(&(b.1 - 0.5).abs()).then(a.0.cmp(b.0)));
        match frac {
            None => {
                let mut chosen = node.fixed.clone();
                chosen.extend(cols.iter().zip(&lp.x).filter(|(_, &v)| v > 0.5).map(|(&i, _)| i));
                let cost: u64 = chosen.iter().map(|&i| pool.get(i).cost).sum();
                if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    best = Some((cost, chosen));
                }
            }
            Some((&i, _)) => {
                let mut excluded = node.excluded.clone();
                excluded.push(i);
                stack.push(Node {
                    fixed: node.fixed.clone(),
                    excluded,
                });
                let mut fixed = node.fixed;
                fixed.push(i);
                stack.push(Node {
                    fixed,
                    excluded: node.excluded,
                });
            }
        }
    }

    let (objective, chosen) = best.ok_or(if timed_out { RmpError::NoIncumbent } else { RmpError::Infeasible })?;
    let mut chosen: Vec<Column> = chosen.into_iter().map(|i| pool.get(i).clone()).collect();
    chosen.sort_by_key(|c| c.machine);
    Ok(IntegerSolution {
        chosen,
        objective,
        timed_out,
        nodes,
    })
}
