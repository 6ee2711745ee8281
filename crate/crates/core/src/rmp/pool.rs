use std::collections::HashMap;

use crate::instance::Instance;
use crate::schedule::{make_column, swpt_order, Column};

/// Generated columns, deduplicated on `(machine, job set)`.
#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    columns: Vec<Column>,
    index: HashMap<(usize, Vec<usize>), usize>,
}

impl ColumnPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn get(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn contains(&self, col: &Column) -> bool {
        self.index.contains_key(&(col.machine, col.jobs.clone()))
    }

    pub fn position(&self, machine: usize, jobs: &[usize]) -> Option<usize> {
        self.index.get(&(machine, jobs.to_vec())).copied()
    }

    /// Inserts `col` unless an identical `(machine, job set)` is present.
    pub fn add(&mut self, col: Column) -> bool {
        let key = (col.machine, col.jobs.clone());
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.columns.len());
        self.columns.push(col);
        true
    }

    /// Returns the number of columns actually inserted.
    pub fn add_columns<I: IntoIterator<Item = Column>>(&mut self, cols: I) -> usize {
        cols.into_iter().filter(|c| self.add(c.clone())).count()
    }
}

/// Adds, for every job, the singleton column on a machine minimizing `w_j·p_jk`
/// (lowest machine index on ties).
pub fn ensure_feasible(pool: &mut ColumnPool, inst: &Instance) -> usize {
    let singletons: Vec<Column> = inst
        .jobs
        .iter()
        .map(|job| {
            let k = (0..inst.num_machines)
                .min_by_key(|&k| u64::from(job.weight) * u64::from(job.proc_times[k]))
                .expect("at least one machine");
            make_column(k, &[job.id], inst).expect("valid job id")
        })
        .collect();
    pool.add_columns(singletons)
}

/// One complete assignment: jobs are taken in `order` and each goes to the
/// machine whose SWPT schedule cost grows the least (lowest index on ties).
pub fn greedy_assignment(inst: &Instance, order: &[usize]) -> Vec<Column> {
    let m = inst.num_machines;
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut costs = vec![0u64; m];
    for &j in order {
        let (k, cost) = (0..m)
            .map(|k| {
                let mut with = sets[k].clone();
                with.push(j);
                (k, make_column(k, &with, inst).expect("valid ids").cost)
            })
            .min_by_key(|&(k, cost)| (cost - costs[k], k))
            .expect("at least one machine");
        sets[k].push(j);
        costs[k] = cost;
    }
    sets.into_iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(k, s)| make_column(k, &s, inst).expect("valid ids"))
        .collect()
}

/// Adds the columns of one deterministic complete assignment, which makes the
/// restricted master feasible (singletons alone are not when `n > m`).
pub fn ensure_partition(pool: &mut ColumnPool, inst: &Instance) -> usize {
    let mut order: Vec<usize> = (1..=inst.num_jobs()).collect();
    let rank: Vec<usize> = {
        // SWPT position on the machine with the smallest total processing time
        let k = (0..inst.num_machines)
            .min_by_key(|&k| inst.total_proc_time(k))
            .expect("at least one machine");
        let mut rank = vec![0; inst.num_jobs() + 1];
        for (pos, j) in swpt_order(inst, k).into_iter().enumerate() {
            rank[j] = pos;
        }
        rank
    };
    order.sort_by_key(|&j| rank[j]);
    pool.add_columns(greedy_assignment(inst, &order))
}
