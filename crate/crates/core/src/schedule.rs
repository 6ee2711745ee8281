//! SWPT sequencing, single-machine schedules (columns) and reduced costs.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, Job};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("unknown job id {0}")]
    UnknownJob(usize),
    #[error("job {0} listed twice")]
    DuplicateJob(usize),
    #[error("unknown machine index {0}")]
    UnknownMachine(usize),
}

/// SWPT comparator on machine `k`: `a` precedes `b` iff `p_a/w_a < p_b/w_b`,
/// compared by exact cross-multiplication, ties broken by the lower job id.
pub fn swpt_compare(a: &Job, b: &Job, k: usize) -> Ordering {
    let lhs = u64::from(a.proc_times[k]) * u64::from(b.weight);
    let rhs = u64::from(b.proc_times[k]) * u64::from(a.weight);
    lhs.cmp(&rhs).then(a.id.cmp(&b.id))
}

/// All job ids of the instance in SWPT order on machine `k`.
pub fn swpt_order(inst: &Instance, k: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (1..=inst.num_jobs()).collect();
    ids.sort_by(|&a, &b| swpt_compare(inst.job(a), inst.job(b), k));
    ids
}

/// A schedule on one machine. Since the SWPT comparator is a total order,
/// `(machine, jobs)` identifies the job set canonically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Column {
    pub machine: usize,
    pub jobs: Vec<usize>,
    pub completion_times: Vec<u64>,
    pub cost: u64,
}

impl Column {
    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn contains(&self, job: usize) -> bool {
        self.jobs.contains(&job)
    }

    /// Checks SWPT order, cumulative completion times and the cost.
    pub fn is_consistent(&self, inst: &Instance) -> bool {
        let ordered = self
            .jobs
            .windows(2)
            .all(|w| swpt_compare(inst.job(w[0]), inst.job(w[1]), self.machine) == Ordering::Less);
        let mut t = 0u64;
        let mut cost = 0u64;
        for (&j, &c) in self.jobs.iter().zip(&self.completion_times) {
            t += u64::from(inst.proc_time(j, self.machine));
            if c != t {
                return false;
            }
            cost += u64::from(inst.weight(j)) * t;
        }
        ordered && self.completion_times.len() == self.jobs.len() && cost == self.cost
    }
}

/// Sequences `job_ids` on machine `k` in SWPT order. Input order is irrelevant.
pub fn make_column(k: usize, job_ids: &[usize], inst: &Instance) -> Result<Column, ScheduleError> {
    if k >= inst.num_machines {
        return Err(ScheduleError::UnknownMachine(k));
    }
    let n = inst.num_jobs();
    let mut seen = vec![false; n + 1];
    for &j in job_ids {
        if j == 0 || j > n {
            return Err(ScheduleError::UnknownJob(j));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(ScheduleError::DuplicateJob(j));
        }
    }
    let mut jobs = job_ids.to_vec();
    jobs.sort_by(|&a, &b| swpt_compare(inst.job(a), inst.job(b), k));
    Ok(sequenced_column(k, jobs, inst))
}

/// Builds a column from jobs already in SWPT order.
pub(crate) fn sequenced_column(k: usize, jobs: Vec<usize>, inst: &Instance) -> Column {
    let mut t = 0u64;
    let mut cost = 0u64;
    let completion_times = jobs
        .iter()
        .map(|&j| {
            t += u64::from(inst.proc_time(j, k));
            cost += u64::from(inst.weight(j)) * t;
            t
        })
        .collect();
    Column {
        machine: k,
        jobs,
        completion_times,
        cost,
    }
}

/// Duals of the restricted master: `pi[j-1]` for job `j`'s partition row,
/// `sigma[k]` for machine `k`'s at-most-one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub pi: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl DualSolution {
    pub fn zeros(n: usize, m: usize) -> Self {
        DualSolution {
            pi: vec![0.0; n],
            sigma: vec![0.0; m],
        }
    }

    pub fn pi_of(&self, job: usize) -> f64 {
        self.pi[job - 1]
    }
}

/// `f - Σ_{j∈col} π_j - σ_k`.
pub fn reduced_cost(col: &Column, duals: &DualSolution) -> f64 {
    let pi_sum: f64 = col.jobs.iter().map(|&j| duals.pi_of(j)).sum();
    col.cost as f64 - pi_sum - duals.sigma[col.machine]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_jobs() -> Instance {
        // j1: p=2,w=3 ; j2: p=3,w=1
        Instance::from_data("t", &[3, 1], &[vec![2], vec![3]]).unwrap()
    }

    #[test]
    fn compare_by_ratio() {
        let inst = two_jobs();
        assert_eq!(swpt_compare(inst.job(1), inst.job(2), 0), Ordering::Less);
        assert_eq!(swpt_compare(inst.job(2), inst.job(1), 0), Ordering::Greater);
    }

    #[test]
    fn compare_tie_uses_id() {
        let inst = Instance::from_data("t", &[4, 2], &[vec![2], vec![1]]).unwrap();
        assert_eq!(swpt_compare(inst.job(1), inst.job(2), 0), Ordering::Less);
        assert_eq!(swpt_compare(inst.job(2), inst.job(1), 0), Ordering::Greater);
        assert_eq!(swpt_compare(inst.job(1), inst.job(1), 0), Ordering::Equal);
    }

    #[test]
    fn column_examples() {
        let inst = two_jobs();
        let col = make_column(0, &[2, 1], &inst).unwrap();
        assert_eq!(col.jobs, vec![1, 2]);
        assert_eq!(col.completion_times, vec![2, 5]);
        assert_eq!(col.cost, 11);
        assert!(col.is_consistent(&inst));

        let empty = make_column(0, &[], &inst).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.cost, 0);

        let single = Instance::from_data("t", &[2], &[vec![4]]).unwrap();
        assert_eq!(make_column(0, &[1], &single).unwrap().cost, 8);
    }

    #[test]
    fn column_errors() {
        let inst = two_jobs();
        assert_eq!(make_column(0, &[3], &inst), Err(ScheduleError::UnknownJob(3)));
        assert_eq!(make_column(0, &[0], &inst), Err(ScheduleError::UnknownJob(0)));
        assert_eq!(make_column(0, &[1, 1], &inst), Err(ScheduleError::DuplicateJob(1)));
        assert_eq!(make_column(1, &[1], &inst), Err(ScheduleError::UnknownMachine(1)));
    }

    #[test]
    fn reduced_cost_examples() {
        let one = Instance::from_data("t", &[1], &[vec![2]]).unwrap();
        let col = make_column(0, &[1], &one).unwrap();
        let d = DualSolution { pi: vec![5.0], sigma: vec![0.0] };
        assert_eq!(reduced_cost(&col, &d), -3.0);

        let inst = two_jobs();
        let col = make_column(0, &[1, 2], &inst).unwrap();
        let d = DualSolution { pi: vec![4.0, 6.0], sigma: vec![-2.0] };
        assert_eq!(reduced_cost(&col, &d), 3.0);

        let empty = make_column(0, &[], &inst).unwrap();
        let d = DualSolution { pi: vec![4.0, 6.0], sigma: vec![-1.5] };
        assert_eq!(reduced_cost(&empty, &d), 1.5);
    }

    fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            for mut tail in permutations(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }

    fn sequence_cost(seq: &[usize], inst: &Instance, k: usize) -> u64 {
        let mut t = 0;
        seq.iter()
            .map(|&j| {
                t += u64::from(inst.proc_time(j, k));
                u64::from(inst.weight(j)) * t
            })
            .sum()
    }

    fn small_instance() -> impl Strategy<Value = Instance> {
        (1usize..=6).prop_flat_map(|n| {
            (
                proptest::collection::vec(1u32..=20, n),
                proptest::collection::vec(proptest::collection::vec(1u32..=15, 2), n),
            )
                .prop_map(|(w, p)| Instance::from_data("p", &w, &p).unwrap())
        })
    }

    proptest! {
        #[test]
        fn swpt_beats_every_permutation(inst in small_instance(), k in 0usize..2) {
            let ids: Vec<usize> = (1..=inst.num_jobs()).collect();
            let col = make_column(k, &ids, &inst).unwrap();
            for perm in permutations(&ids) {
                prop_assert!(col.cost <= sequence_cost(&perm, &inst, k));
            }
        }

        #[test]
        fn column_ignores_input_order(inst in small_instance(), seed in any::<u64>()) {
            let mut ids: Vec<usize> = (1..=inst.num_jobs()).collect();
            let sorted = make_column(1, &ids, &inst).unwrap();
            // deterministic shuffle
            let mut s = seed | 1;
            for i in (1..ids.len()).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                ids.swap(i, (s % (i as u64 + 1)) as usize);
            }
            prop_assert_eq!(make_column(1, &ids, &inst).unwrap(), sorted);
        }

        #[test]
        fn reduced_cost_is_affine_in_pi(inst in small_instance(), pis in proptest::collection::vec(-50i32..50, 6)) {
            let ids: Vec<usize> = (1..=inst.num_jobs()).collect();
            let col = make_column(0, &ids, &inst).unwrap();
            let pi: Vec<f64> = pis[..inst.num_jobs()].iter().map(|&x| f64::from(x)).collect();
            let d1 = DualSolution { pi: pi.clone(), sigma: vec![0.0, 0.0] };
            let d2 = DualSolution { pi: pi.iter().map(|x| 2.0 * x).collect(), sigma: vec![0.0, 0.0] };
            let sum: f64 = pi.iter().sum();
            prop_assert_eq!(reduced_cost(&col, &d2) - reduced_cost(&col, &d1), -sum);
        }
    }
}
