//! Dense two-phase primal simplex.
//!
//! Solves `min cᵀx` subject to rows `aᵢx = bᵢ` or `aᵢx ≤ bᵢ` with `b ≥ 0` and
//! `x ≥ 0`. Every row gets one identity column in the starting basis (a slack for
//! `≤` rows, an artificial for `=` rows); phase 1 minimizes the artificial sum.
//! Duals are read off the final basis as `c_Bᵀ B⁻¹`, where `B⁻¹` sits in the
//! tableau columns that started as the identity.

/// Pivot and ratio-test tolerance.
const PIVOT_TOL: f64 = 1e-9;
/// Entering threshold on reduced costs.
const OPT_TOL: f64 = 1e-9;
/// Phase-1 objective above this means the program is infeasible.
const FEAS_TOL: f64 = 1e-9;
/// Switch from Dantzig pricing to Bland's rule after this many degenerate pivots.
const BLAND_AFTER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumn {
    pub cost: f64,
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub kinds: Vec<RowKind>,
    pub rhs: Vec<f64>,
    pub columns: Vec<SparseColumn>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values.
    pub x: Vec<f64>,
    /// One dual per row.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// `(rows + 1) × width`; the last row is the reduced-cost row and the
    /// last column the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
    degenerate: usize,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let piv = self.at(pr, pc);
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[pc] = 1.0;
        let eliminate = |row: &mut [f64]| {
            let f = row[pc];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(eliminate);
        after.chunks_exact_mut(w).for_each(eliminate);
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Runs primal simplex on the current objective row over `allowed` columns.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool) -> bool {
        let obj = self.rows;
        let rhs = self.rhs_col();
        loop {
            let bland = self.degenerate >= BLAND_AFTER;
            let mut enter = None;
            let mut best = -OPT_TOL;
            for c in 0..rhs {
                if !allowed(c) {
                    continue;
                }
                let d = self.at(obj, c);
                if d < best {
                    enter = Some(c);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(pc) = enter else { return true };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.at(r, rhs).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let better = if ratio < lratio - 1e-12 {
                            true
                        } else if ratio <= lratio + 1e-12 {
                            if bland {
                                self.basis[r] < self.basis[lr]
                            } else {
                                a > self.at(lr, pc)
                            }
                        } else {
                            false
                        };
                        if better {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((pr, ratio)) = leave else { return false };
            if ratio <= 1e-12 {
                self.degenerate += 1;
            }
            self.pivot(pr, pc);
        }
    }
}

pub fn solve(lp: &LinearProgram) -> LpSolution {
    let m = lp.kinds.len();
    let n = lp.columns.len();
    debug_assert_eq!(lp.rhs.len(), m);
    debug_assert!(lp.rhs.iter().all(|&b| b >= 0.0));

    // column layout: structural | one identity column per row | rhs
    let ident = |r: usize| n + r;
    let width = n + m + 1;
    let rhs = width - 1;
    let mut t = Tableau {
        rows: m,
        width,
        data: vec![0.0; (m + 1) * width],
        basis: (0..m).map(ident).collect(),
        degenerate: 0,
        pivots: 0,
    };
    for (c, col) in lp.columns.iter().enumerate() {
        for &(r, v) in &col.entries {
            t.data[r * width + c] += v;
        }
    }
    for r in 0..m {
        t.data[r * width + ident(r)] = 1.0;
        t.data[r * width + rhs] = lp.rhs[r];
    }
    let is_artificial = |c: usize| c >= n && c < n + m && lp.kinds[c - n] == RowKind::Eq;

    // phase 1: minimize the sum of artificials
    let obj = m;
    for r in 0..m {
        if lp.kinds[r] == RowKind::Eq {
            for c in 0..width {
                if !is_artificial(c) {
                    t.data[obj * width + c] -= t.data[r * width + c];
                }
            }
        }
    }
    t.optimize(&|c| !is_artificial(c));
    let infeasibility = -t.at(obj, rhs);
    if infeasibility > FEAS_TOL {
        return LpSolution {
            status: LpStatus::Infeasible,
            x: vec![0.0; n],
            duals: vec![0.0; m],
            objective: f64::INFINITY,
            pivots: t.pivots,
        };
    }

    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if !is_artificial(t.basis[r]) {
            continue;
        }
        t.data[r * width + rhs] = 0.0;
        let candidate = (0..n + m)
            .filter(|&c| !is_artificial(c))
            .max_by(|&a, &b| t.at(r, a).abs().total_cmp(&t.at(r, b).abs()));
        if let Some(c) = candidate {
            if t.at(r, c).abs() > PIVOT_TOL {
                t.pivot(r, c);
            }
        }
    }

    // phase 2: original costs; identity columns have zero cost
    let cost = |c: usize| if c < n { lp.columns[c].cost } else { 0.0 };
    for c in 0..width {
        let mut d = if c < rhs { cost(c) } else { 0.0 };
        for r in 0..m {
            d -= cost(t.basis[r]) * t.at(r, c);
        }
        t.data[obj * width + c] = d;
    }
    let bounded = t.optimize(&|c| !is_artificial(c));

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.at(r, rhs).max(0.0);
        }
    }
    let duals = (0..m)
        .map(|i| (0..m).map(|r| cost(t.basis[r]) * t.at(r, ident(i))).sum())
        .collect();
    let objective = x.iter().zip(&lp.columns).map(|(v, c)| v * c.cost).sum();
    LpSolution {
        status: if bounded { LpStatus::Optimal } else { LpStatus::Unbounded },
        x,
        duals,
        objective,
        pivots: t.pivots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(cost: f64, entries: &[(usize, f64)]) -> SparseColumn {
        SparseColumn {
            cost,
            entries: entries.to_vec(),
        }
    }

    #[test]
    fn textbook_le_problem() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → x=2, y=6, obj 36
        let lp = LinearProgram {
            kinds: vec![RowKind::Le; 3],
            rhs: vec![4.0, 12.0, 18.0],
            columns: vec![col(-3.0, &[(0, 1.0), (2, 3.0)]), col(-5.0, &[(1, 2.0), (2, 2.0)])],
        };
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        // duals of a max problem written as min: (0, -1.5, -1)
        assert!((s.duals[0]).abs() < 1e-9);
        assert!((s.duals[1] + 1.5).abs() < 1e-9);
        assert!((s.duals[2] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        // x = 1 and x ≤ 0.5 via a second column-free row
        let lp = LinearProgram {
            kinds: vec![RowKind::Eq, RowKind::Le],
            rhs: vec![1.0, 0.5],
            columns: vec![col(1.0, &[(0, 1.0), (1, 1.0)])],
        };
        assert_eq!(solve(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let lp = LinearProgram {
            kinds: vec![RowKind::Eq],
            rhs: vec![1.0],
            columns: vec![col(-1.0, &[(0, 1.0)]), col(-1.0, &[(0, 1.0)]), col(-1.0, &[])],
        };
        assert_eq!(solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_equality_rows() {
        // two identical equality rows
        let lp = LinearProgram {
            kinds: vec![RowKind::Eq, RowKind::Eq],
            rhs: vec![1.0, 1.0],
            columns: vec![col(2.0, &[(0, 1.0), (1, 1.0)]), col(3.0, &[(0, 1.0), (1, 1.0)])],
        };
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-9);
        // dual feasibility on both columns
        for c in &lp.columns {
            let rc = c.cost - c.entries.iter().map(|&(r, v)| v * s.duals[r]).sum::<f64>();
            assert!(rc > -1e-9);
        }
    }
}
