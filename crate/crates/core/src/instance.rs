//! Problem instances: jobs with weights and per-machine processing times.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Weibull};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

/// Initial columns per machine encoded into generated instance names.
pub const DEFAULT_INIT_COLS: u32 = 20;

pub const INSTANCE_EXTENSION: &str = "inst.json";

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance name {name:?}: bad token {token:?}")]
    MalformedName { name: String, token: String },
    #[error("{path}: parse error at line {line}, column {column}: {msg}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("invalid instance: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistLabel {
    Uniform,
    Weibull,
    Custom,
}

impl fmt::Display for DistLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistLabel::Uniform => "uniform",
            DistLabel::Weibull => "weibull",
            DistLabel::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    /// 1-based.
    pub id: usize,
    #[serde(rename = "w")]
    pub weight: u32,
    /// One entry per machine.
    #[serde(rename = "p")]
    pub proc_times: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    #[serde(rename = "machines")]
    pub num_machines: usize,
    pub seed: u64,
    #[serde(rename = "dist")]
    pub dist_label: DistLabel,
    pub jobs: Vec<Job>,
}

impl Instance {
    /// Builds and validates an instance from weights and a job-major processing
    /// time table (`proc[j][k]` is job `j+1` on machine `k`).
    pub fn from_data(
        name: impl Into<String>,
        weights: &[u32],
        proc: &[Vec<u32>],
    ) -> Result<Self, InstanceError> {
        let num_machines = proc.first().map_or(0, Vec::len);
        let jobs = weights
            .iter()
            .zip(proc)
            .enumerate()
            .map(|(i, (&weight, p))| Job {
                id: i + 1,
                weight,
                proc_times: p.clone(),
            })
            .collect();
        let inst = Instance {
            name: name.into(),
            num_machines,
            seed: 0,
            dist_label: DistLabel::Custom,
            jobs,
        };
        if weights.len() != proc.len() {
            return Err(InstanceError::Invariant(format!(
                "{} weights but {} processing-time rows",
                weights.len(),
                proc.len()
            )));
        }
        inst.validate()?;
        Ok(inst)
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    /// Job by 1-based id.
    pub fn job(&self, id: usize) -> &Job {
        &self.jobs[id - 1]
    }

    pub fn weight(&self, id: usize) -> u32 {
        self.jobs[id - 1].weight
    }

    pub fn proc_time(&self, id: usize, machine: usize) -> u32 {
        self.jobs[id - 1].proc_times[machine]
    }

    /// Sum of processing times of all jobs on `machine`.
    pub fn total_proc_time(&self, machine: usize) -> u64 {
        self.jobs.iter().map(|j| u64::from(j.proc_times[machine])).sum()
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.num_machines == 0 {
            return Err(InstanceError::Invariant("machine count must be >= 1".into()));
        }
        if self.jobs.is_empty() {
            return Err(InstanceError::Invariant("job count must be >= 1".into()));
        }
        for (i, job) in self.jobs.iter().enumerate() {
            if job.id != i + 1 {
                return Err(InstanceError::Invariant(format!(
                    "job ids must be 1..n without gaps, found id {} at position {}",
                    job.id,
                    i + 1
                )));
            }
            if job.weight == 0 {
                return Err(InstanceError::Invariant(format!("job {} has weight 0", job.id)));
            }
            if job.proc_times.len() != self.num_machines {
                return Err(InstanceError::Invariant(format!(
                    "job {} has {} processing times for {} machines",
                    job.id,
                    job.proc_times.len(),
                    self.num_machines
                )));
            }
            if let Some(k) = job.proc_times.iter().position(|&p| p == 0) {
                return Err(InstanceError::Invariant(format!(
                    "job {} has processing time 0 on machine {}",
                    job.id,
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// `<m>M<n>N_<seed>_<init>`.
pub fn instance_name(m: usize, n: usize, seed: u64, init_cols: u32) -> String {
    format!("{m}M{n}N_{seed}_{init_cols}")
}

/// Integer weights on [1,100] and processing times on [1,30].
pub fn generate_uniform(m: usize, n: usize, seed: u64) -> Instance {
    let mut w_rng = rng::stream(seed, "instance/weights");
    let mut p_rng = rng::stream(seed, "instance/proc");
    let jobs = (1..=n)
        .map(|id| Job {
            id,
            weight: w_rng.random_range(1..=100),
            proc_times: (0..m).map(|_| p_rng.random_range(1..=30)).collect(),
        })
        .collect();
    Instance {
        name: instance_name(m, n, seed, DEFAULT_INIT_COLS),
        num_machines: m,
        seed,
        dist_label: DistLabel::Uniform,
        jobs,
    }
}

fn weibull_int<R: Rng>(dist: &Weibull<f64>, rng: &mut R) -> u32 {
    let x: f64 = dist.sample(rng);
    // round half up, clamp to >= 1
    ((x + 0.5).floor() as u32).max(1)
}

/// Weights ~ Weibull(k=1.5, λ=50) and processing times ~ Weibull(k=2, λ=15),
/// rounded half-up and clamped to at least 1.
pub fn generate_weibull(m: usize, n: usize, seed: u64) -> Instance {
    let w_dist = Weibull::new(50.0, 1.5).expect("valid Weibull parameters");
    let p_dist = Weibull::new(15.0, 2.0).expect("valid Weibull parameters");
    let mut w_rng = rng::stream(seed, "instance/weights");
    let mut p_rng = rng::stream(seed, "instance/proc");
    let jobs = (1..=n)
        .map(|id| Job {
            id,
            weight: weibull_int(&w_dist, &mut w_rng),
            proc_times: (0..m).map(|_| weibull_int(&p_dist, &mut p_rng)).collect(),
        })
        .collect();
    Instance {
        name: instance_name(m, n, seed, DEFAULT_INIT_COLS),
        num_machines: m,
        seed,
        dist_label: DistLabel::Weibull,
        jobs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NameParts {
    pub machines: usize,
    pub jobs: usize,
    pub seed: u64,
    pub init_cols: u32,
}

/// Parses `<m>M<n>N_<seed>_<init>`, e.g. `2M20N_1_20`.
pub fn parse_instance_name(name: &str) -> Result<NameParts, InstanceError> {
    let bad = |token: &str| InstanceError::MalformedName {
        name: name.to_string(),
        token: token.to_string(),
    };
    let mut parts = name.split('_');
    let class = parts.next().unwrap_or_default();
    let seed_tok = parts.next().ok_or_else(|| bad(class))?;
    let init_tok = parts.next().ok_or_else(|| bad(seed_tok))?;
    if let Some(extra) = parts.next() {
        return Err(bad(extra));
    }

    let (m_tok, rest) = class.split_once('M').ok_or_else(|| bad(class))?;
    let n_tok = rest.strip_suffix('N').ok_or_else(|| bad(rest))?;
    let positive = |tok: &str| -> Result<u64, InstanceError> {
        if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad(tok));
        }
        match tok.parse::<u64>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(bad(tok)),
        }
    };
    Ok(NameParts {
        machines: positive(m_tok)? as usize,
        jobs: positive(n_tok)? as usize,
        seed: positive(seed_tok)?,
        init_cols: u32::try_from(positive(init_tok)?).map_err(|_| bad(init_tok))?,
    })
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text, &path.display().to_string())
}

/// Parses instance JSON; `origin` labels error messages.
pub fn parse_instance(text: &str, origin: &str) -> Result<Instance, InstanceError> {
    let mut inst: Instance = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    inst.jobs.sort_by_key(|j| j.id);
    inst.validate()?;
    Ok(inst)
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(inst).expect("instance serializes");
    fs::write(path, text + "\n").map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}
