//! Convergence logs.

use std::io::{self, Write};

use super::IterationRecord;

pub const CSV_HEADER: &str = "iteration,elapsed_ms,rmp_obj,pool_size,cols_nn,cols_dp,min_rc,mode";

pub fn write_convergence_csv<W: Write>(records: &[IterationRecord], out: &mut W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.iteration, r.elapsed_ms, r.rmp_objective, r.pool_size, r.nn_count, r.dp_count, r.min_reduced_cost, r.mode
        )?;
    }
    Ok(())
}

/// Min-max normalization of one run's objectives to `[0, 1]`; all zeros when
/// there are fewer than two distinct values.
pub fn normalize_curve(objectives: &[f64]) -> Vec<f64> {
    let min = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let max = objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if objectives.len() < 2 || max <= min {
        return vec![0.0; objectives.len()];
    }
    objectives.iter().map(|v| (v - min) / (max - min)).collect()
}
