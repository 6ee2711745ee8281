//! Initial columns for the restricted master.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::Instance;
use crate::rmp::{greedy_assignment, ColumnPool};
use crate::rng;
use crate::schedule::{make_column, Column};

pub const GREEDY_PERMUTATIONS: usize = 2_000;
pub const GREEDY_KEEP: usize = 20;

/// `runs_per_machine` random subsets per machine, each job included with
/// probability 1/2, sequenced by SWPT. Empty subsets are returned as empty
/// columns; callers skip them.
pub fn init_random_subsets(inst: &Instance, runs_per_machine: usize, seed: u64) -> Vec<Column> {
    let mut rng = rng::stream(seed, "init/random-subsets");
    let mut cols = Vec::with_capacity(runs_per_machine * inst.num_machines);
    for k in 0..inst.num_machines {
        for _ in 0..runs_per_machine {
            let subset: Vec<usize> = (1..=inst.num_jobs()).filter(|_| rng.random_bool(0.5)).collect();
            cols.push(make_column(k, &subset, inst).expect("ids in range"));
        }
    }
    cols
}

/// A complete solution from one permutation: its total cost and its columns.
pub type GreedySolution = (u64, Vec<Column>);

/// All `GREEDY_PERMUTATIONS` list-scheduling solutions, sorted by cost (stable
/// on permutation index).
pub fn greedy_permutation_solutions(inst: &Instance, seed: u64) -> Vec<GreedySolution> {
    let mut rng = rng::stream(seed, "init/greedy-permutation");
    let mut order: Vec<usize> = (1..=inst.num_jobs()).collect();
    let mut solutions: Vec<GreedySolution> = (0..GREEDY_PERMUTATIONS)
        .map(|_| {
            order.shuffle(&mut rng);
            let cols = greedy_assignment(inst, &order);
            (cols.iter().map(|c| c.cost).sum(), cols)
        })
        .collect();
    solutions.sort_by_key(|s| s.0);
    solutions
}

/// Columns of the `GREEDY_KEEP` cheapest greedy solutions, deduplicated.
pub fn init_greedy_permutation(inst: &Instance, seed: u64) -> Vec<Column> {
    let mut pool = ColumnPool::new();
    for (_, cols) in greedy_permutation_solutions(inst, seed).into_iter().take(GREEDY_KEEP) {
        pool.add_columns(cols);
    }
    pool.columns().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_uniform;

    #[test]
    fn random_subsets_counts_and_order() {
        let inst = generate_uniform(2, 20, 1);
        let cols = init_random_subsets(&inst, 20, 5);
        assert_eq!(cols.len(), 40);
        assert!(cols.iter().all(|c| c.is_consistent(&inst)));
        assert_eq!(cols.iter().filter(|c| c.machine == 1).count(), 20);
        assert_eq!(cols, init_random_subsets(&inst, 20, 5));
        assert_ne!(cols, init_random_subsets(&inst, 20, 6));
    }

    #[test]
    fn greedy_permutation_bounds() {
        let inst = generate_uniform(3, 12, 2);
        let cols = init_greedy_permutation(&inst, 1);
        assert!(!cols.is_empty() && cols.len() <= GREEDY_KEEP * 3);
        assert!(cols.iter().all(|c| c.is_consistent(&inst)));

        let sols = greedy_permutation_solutions(&inst, 1);
        assert_eq!(sols.len(), GREEDY_PERMUTATIONS);
        let worst_kept = sols[..GREEDY_KEEP].iter().map(|s| s.0).max().unwrap();
        let best_discarded = sols[GREEDY_KEEP..].iter().map(|s| s.0).min().unwrap();
        assert!(worst_kept <= best_discarded);
        assert!(sols[0].0 <= best_discarded);
    }

    #[test]
    fn single_machine_yields_one_column() {
        let inst = generate_uniform(1, 9, 3);
        let cols = init_greedy_permutation(&inst, 4);
        assert_eq!(cols.len(), 1);
        assert_eq!(cols[0].jobs.len(), 9);
    }
}
