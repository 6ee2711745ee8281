//! Supervised pricing records from DP-priced runs, one per machine per iteration.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::PricingObservation;
use crate::instance::Instance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobFeatures {
    pub id: usize,
    pub p: u32,
    pub w: u32,
    pub pi: f64,
}

/// Unscaled pricing input plus the DP target as row indices: the start row
/// `n+1`, the jobs in SWPT order, the machine row `0`, the end row `n+2`.
/// `target` is `None` when the DP found no negative column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub instance: String,
    pub machine: usize,
    pub iteration: usize,
    pub sigma: f64,
    pub jobs: Vec<JobFeatures>,
    pub target: Option<Vec<usize>>,
}

pub fn target_tokens(n: usize, jobs: &[usize]) -> Vec<usize> {
    let mut t = Vec::with_capacity(jobs.len() + 3);
    t.push(n + 1);
    t.extend_from_slice(jobs);
    t.push(0);
    t.push(n + 2);
    t
}

impl DatasetRecord {
    pub fn new(inst: &Instance, obs: &PricingObservation) -> Self {
        let k = obs.machine;
        DatasetRecord {
            instance: inst.name.clone(),
            machine: k,
            iteration: obs.iteration,
            sigma: obs.duals.sigma[k],
            jobs: inst
                .jobs
                .iter()
                .map(|j| JobFeatures {
                    id: j.id,
                    p: j.proc_times[k],
                    w: j.weight,
                    pi: obs.duals.pi_of(j.id),
                })
                .collect(),
            target: obs.column.as_ref().map(|c| target_tokens(inst.num_jobs(), &c.jobs)),
        }
    }
}

/// Writes one JSON line per observation; returns the record count.
pub fn emit_dataset<W: Write>(inst: &Instance, trace: &[PricingObservation], sink: &mut W) -> io::Result<usize> {
    for obs in trace {
        let line = serde_json::to_string(&DatasetRecord::new(inst, obs)).map_err(io::Error::other)?;
        sink.write_all(line.as_bytes())?;
        sink.write_all(b"\n")?;
    }
    Ok(trace.len())
}
