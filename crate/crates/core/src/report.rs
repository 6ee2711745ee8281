//! Per-run result files and the Greedy-DP vs NN-DP comparison table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cg::{ColumnTotals, Termination};
use crate::instance::parse_instance_name;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub instance: String,
    pub solver: String,
    pub lp_obj: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub int_obj: Option<u64>,
    pub totals: ColumnTotals,
    pub terminated_by: Termination,
    pub wall_ms: u64,
    pub iterations: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("instance {instance} has a {present} result but no {missing} result")]
    Unpaired {
        instance: String,
        present: String,
        missing: String,
    },
    #[error("duplicate {solver} result for instance {instance}")]
    Duplicate { instance: String, solver: String },
}

pub const BASELINE_SOLVER: &str = "greedy-dp";
pub const HYBRID_SOLVER: &str = "nn-dp";

/// `(t_dp − t_nn) / t_dp` as a percentage; 0 when `t_dp` is 0.
pub fn reduction_percent(t_dp: f64, t_nn: f64) -> f64 {
    if t_dp == 0.0 {
        0.0
    } else {
        100.0 * (t_dp - t_nn) / t_dp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance: String,
    pub time_dp_s: f64,
    pub time_nn_s: f64,
    pub reduction_pct: f64,
    pub cols_dp: f64,
    pub cols_total: f64,
    pub cols_nn: f64,
    pub cols_nn_dp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassBlock {
    /// `<m>M<n>N`.
    pub class: String,
    pub rows: Vec<ReportRow>,
    pub average: ReportRow,
}

/// Class key for an instance name: `2M20N_1_20` → `2M20N`.
pub fn class_of(instance: &str) -> String {
    match parse_instance_name(instance) {
        Ok(p) => format!("{}M{}N", p.machines, p.jobs),
        Err(_) => instance.split('_').next().unwrap_or(instance).to_string(),
    }
}

/// Column-wise arithmetic mean of a class's rows.
pub fn class_average(class: &str, rows: &[ReportRow]) -> ReportRow {
    let n = rows.len() as f64;
    let mean = |f: fn(&ReportRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    ReportRow {
        instance: format!("{class} Average"),
        time_dp_s: mean(|r| r.time_dp_s),
        time_nn_s: mean(|r| r.time_nn_s),
        reduction_pct: mean(|r| r.reduction_pct),
        cols_dp: mean(|r| r.cols_dp),
        cols_total: mean(|r| r.cols_total),
        cols_nn: mean(|r| r.cols_nn),
        cols_nn_dp: mean(|r| r.cols_nn_dp),
    }
}

/// Pairs baseline and hybrid results by instance and groups them by class.
/// Results from other solvers are ignored.
pub fn build_report(results: &[RunResult]) -> Result<Vec<ClassBlock>, ReportError> {
    let mut pairs: BTreeMap<&str, (Option<&RunResult>, Option<&RunResult>)> = BTreeMap::new();
    for r in results {
        let slot = pairs.entry(&r.instance).or_default();
        let target = match r.solver.as_str() {
            BASELINE_SOLVER => &mut slot.0,
            HYBRID_SOLVER => &mut slot.1,
            _ => continue,
        };
        if target.replace(r).is_some() {
            return Err(ReportError::Duplicate {
                instance: r.instance.clone(),
                solver: r.solver.clone(),
            });
        }
    }

    let mut classes: BTreeMap<String, Vec<ReportRow>> = BTreeMap::new();
    for (instance, pair) in pairs {
        let (dp, nn) = match pair {
            (Some(dp), Some(nn)) => (dp, nn),
            (Some(_), None) | (None, Some(_)) => {
                let (present, missing) = if pair.0.is_some() {
                    (BASELINE_SOLVER, HYBRID_SOLVER)
                } else {
                    (HYBRID_SOLVER, BASELINE_SOLVER)
                };
                return Err(ReportError::Unpaired {
                    instance: instance.to_string(),
                    present: present.into(),
                    missing: missing.into(),
                });
            }
            (None, None) => unreachable!("entries are created with a result"),
        };
        let t_dp = dp.wall_ms as f64 / 1000.0;
        let t_nn = nn.wall_ms as f64 / 1000.0;
        classes.entry(class_of(instance)).or_default().push(ReportRow {
            instance: instance.to_string(),
            time_dp_s: t_dp,
            time_nn_s: t_nn,
            reduction_pct: reduction_percent(t_dp, t_nn),
            cols_dp: dp.totals.total as f64,
            cols_total: nn.totals.total as f64,
            cols_nn: nn.totals.nn as f64,
            cols_nn_dp: nn.totals.dp as f64,
        });
    }
    Ok(classes
        .into_iter()
        .map(|(class, rows)| ClassBlock {
            average: class_average(&class, &rows),
            class,
            rows,
        })
        .collect())
}

pub const REPORT_CSV_HEADER: &str =
    "instance,cg_greedy_dp_time_s,cg_nn_dp_time_s,reduction_pct,cg_greedy_dp_cols,cg_nn_dp_total,cg_nn_dp_nn,cg_nn_dp_dp";

fn csv_line(r: &ReportRow) -> String {
    format!(
        "{},{:.3},{:.3},{:.1},{},{},{},{}",
        r.instance, r.time_dp_s, r.time_nn_s, r.reduction_pct, r.cols_dp, r.cols_total, r.cols_nn, r.cols_nn_dp
    )
}

pub fn report_csv(blocks: &[ClassBlock]) -> String {
    let mut out = format!("{REPORT_CSV_HEADER}\n");
    for b in blocks {
        for r in b.rows.iter().chain(std::iter::once(&b.average)) {
            out.push_str(&csv_line(r));
            out.push('\n');
        }
    }
    out
}

pub fn report_text(blocks: &[ClassBlock]) -> String {
    let header = [
        "Instance",
        "CG-Greedy-DP (s)",
        "CG NN-DP (s)",
        "Reduction",
        "CG-Greedy-DP cols",
        "Total",
        "NN",
        "DP",
    ];
    let mut cells: Vec<[String; 8]> = vec![header.map(String::from)];
    for b in blocks {
        let rows = b.rows.iter().map(|r| (r, 0)).chain(std::iter::once((&b.average, 1)));
        for (r, decimals) in rows {
            cells.push([
                r.instance.clone(),
                format!("{:.2}", r.time_dp_s),
                format!("{:.2}", r.time_nn_s),
                format!("{:.*}%", decimals, r.reduction_pct),
                format!("{}", r.cols_dp),
                format!("{}", r.cols_total),
                format!("{}", r.cols_nn),
                format!("{}", r.cols_nn_dp),
            ]);
        }
    }
    let mut widths = [0usize; 8];
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    for (i, row) in cells.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(j, (c, w))| if j == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", line.join(" | ").trim_end());
        if i == 0 {
            let _ = writeln!(out, "{}", widths.map(|w| "-".repeat(w)).join("-|-"));
        }
    }
    out
}
