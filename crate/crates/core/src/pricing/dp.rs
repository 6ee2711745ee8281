use std::cmp::Ordering;

use super::PricingResult;
use crate::instance::Instance;
use crate::schedule::{sequenced_column, swpt_order, Column, DualSolution};

/// `F(j, t)` for `j = 0..=n` (SWPT positions on one machine) and `t = 0..=P`.
#[derive(Debug, Clone)]
pub struct DpTable {
    pub machine: usize,
    /// Job ids in SWPT order; position `j` in the table is `order[j - 1]`.
    pub order: Vec<usize>,
    /// Total processing time of all jobs on the machine.
    pub horizon: usize,
    values: Vec<f64>,
}

impl DpTable {
    #[inline]
    pub fn value(&self, j: usize, t: usize) -> f64 {
        self.values[j * (self.horizon + 1) + t]
    }

    pub fn num_states(&self) -> usize {
        self.values.len()
    }
}

/// Fills the table: `F(0, t) = 0` for `t ≥ 0`, `F(j, t < 0) = ∞`, and
/// `F(j, t) = min{F(j−1, t−p_j) + t·w_j − π_j, F(j−1, t)}`.
pub fn build_table(k: usize, inst: &Instance, duals: &DualSolution) -> DpTable {
    let order = swpt_order(inst, k);
    let horizon = inst.total_proc_time(k) as usize;
    let width = horizon + 1;
    let mut values = vec![0.0; (order.len() + 1) * width];
    for (pos, &job) in order.iter().enumerate() {
        let p = inst.proc_time(job, k) as usize;
        let w = f64::from(inst.weight(job));
        let pi = duals.pi_of(job);
        let (prev, cur) = values[pos * width..(pos + 2) * width].split_at_mut(width);
        for t in 0..width {
            let skip = prev[t];
            cur[t] = if t >= p {
                let take = prev[t - p] + t as f64 * w - pi;
                if take < skip {
                    take
                } else {
                    skip
                }
            } else {
                skip
            };
        }
    }
    DpTable {
        machine: k,
        order,
        horizon,
        values,
    }
}

/// Walks back from `(j, t)`, preferring "skip job j" whenever it attains the value.
fn backtrack(table: &DpTable, mut j: usize, mut t: usize, inst: &Instance) -> Vec<usize> {
    let mut jobs = Vec::new();
    while j > 0 {
        if table.value(j, t) == table.value(j - 1, t) {
            j -= 1;
            continue;
        }
        let job = table.order[j - 1];
        jobs.push(job);
        t -= inst.proc_time(job, table.machine) as usize;
        j -= 1;
    }
    jobs.reverse();
    jobs
}

/// Exact pricing on machine `k`: `min_{j,t} F(j,t) − σ_k`, with the schedule
/// reconstructed when it is below `−eps`.
pub fn solve_pricing_dp(k: usize, inst: &Instance, duals: &DualSolution, eps: f64) -> PricingResult {
    let table = build_table(k, inst, duals);
    let n = table.order.len();
    // F(n, t) ≤ F(j, t) for all j, so the minimum sits in the last row
    let (t_star, v_star) = (0..=table.horizon)
        .map(|t| (t, table.value(n, t)))
        .fold((0, 0.0), |best, cur| if cur.1 < best.1 { cur } else { best });
    let j_star = (0..=n).find(|&j| table.value(j, t_star) == v_star).unwrap_or(n);
    let min_reduced_cost = v_star - duals.sigma[k];
    let column = (min_reduced_cost < -eps)
        .then(|| sequenced_column(k, backtrack(&table, j_star, t_star, inst), inst));
    PricingResult {
        min_reduced_cost,
        column,
        certificate: (j_star, t_star as u64),
    }
}

#[derive(Clone, Copy)]
struct Label {
    value: f64,
    /// Rank of the predecessor label in its state's list.
    from: u16,
    take: bool,
}

/// Up to `count` columns with reduced cost below `−eps`, pairwise distinct, in
/// non-decreasing reduced cost.
///
/// Runs a K-best variant of the table where each state `(j, t)` keeps its best
/// `count` labels over subsets finishing exactly at `t`. Every label path is a
/// distinct job subset, so the `count` best terminal labels are the `count` most
/// negative schedules on the machine. Ties prefer "skip" labels, then smaller
/// `t`, which makes the first column agree with [`solve_pricing_dp`].
pub fn k_best_columns(
    k: usize,
    inst: &Instance,
    duals: &DualSolution,
    count: usize,
    eps: f64,
) -> Vec<Column> {
    assert!(count >= 1, "k_best_columns needs count >= 1");
    let count = count.min(usize::from(u16::MAX));
    let order = swpt_order(inst, k);
    let n = order.len();
    let width = inst.total_proc_time(k) as usize + 1;

    // back[j][t*count + r] for layers 1..=n; labels of layer 0 are implicit
    let mut back: Vec<Vec<(u16, bool)>> = Vec::with_capacity(n);
    let mut lens: Vec<Vec<u16>> = Vec::with_capacity(n + 1);
    let mut prev: Vec<Vec<f64>> = vec![Vec::new(); width];
    prev[0].push(0.0);
    lens.push(prev.iter().map(|l| l.len() as u16).collect());

    for &job in &order {
        let p = inst.proc_time(job, k) as usize;
        let w = f64::from(inst.weight(job));
        let pi = duals.pi_of(job);
        let mut cur: Vec<Vec<f64>> = Vec::with_capacity(width);
        let mut layer_back = vec![(0u16, false); width * count];
        for t in 0..width {
            let skip = &prev[t];
            let take_base: &[f64] = if t >= p { &prev[t - p] } else { &[] };
            let add = t as f64 * w - pi;
            let mut merged = Vec::with_capacity(count.min(skip.len() + take_base.len()));
            let (mut a, mut b) = (0, 0);
            while merged.len() < count && (a < skip.len() || b < take_base.len()) {
                let use_skip = match (skip.get(a), take_base.get(b)) {
                    (Some(&s), Some(&tb)) => s <= tb + add,
                    (Some(_), None) => true,
                    _ => false,
                };
                let label = if use_skip {
                    a += 1;
                    Label { value: skip[a - 1], from: (a - 1) as u16, take: false }
                } else {
                    b += 1;
                    Label { value: take_base[b - 1] + add, from: (b - 1) as u16, take: true }
                };
                layer_back[t * count + merged.len()] = (label.from, label.take);
                merged.push(label.value);
            }
            cur.push(merged);
        }
        lens.push(cur.iter().map(|l| l.len() as u16).collect());
        back.push(layer_back);
        prev = cur;
    }

    let sigma = duals.sigma[k];
    let mut terminal: Vec<(f64, usize, usize)> = prev
        .iter()
        .enumerate()
        .flat_map(|(t, labels)| labels.iter().enumerate().map(move |(r, &v)| (v, t, r)))
        .filter(|&(v, _, _)| v - sigma < -eps)
        .collect();
    terminal.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap_or(Ordering::Equal)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });
    terminal.truncate(count);

    terminal
        .into_iter()
        .map(|(_, t0, r0)| {
            let (mut t, mut r) = (t0, r0);
            let mut jobs = Vec::new();
            for j in (1..=n).rev() {
                debug_assert!(r < usize::from(lens[j][t]));
                let (from, take) = back[j - 1][t * count + r];
                if take {
                    let job = order[j - 1];
                    jobs.push(job);
                    t -= inst.proc_time(job, k) as usize;
                }
                r = usize::from(from);
            }
            debug_assert_eq!((t, r), (0, 0));
            jobs.reverse();
            sequenced_column(k, jobs, inst)
        })
        .collect()
}
