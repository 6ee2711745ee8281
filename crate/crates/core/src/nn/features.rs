use super::tensor::Matrix;
use super::ModelConfig;
use crate::instance::Instance;
use crate::schedule::DualSolution;

pub const INPUT_DIM: usize = 5;

/// `(n+3) × 5` input: row 0 the machine, rows `1..=n` the jobs, then the start
/// and end rows. Row indices double as decoder tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub x: Matrix,
    pub num_jobs: usize,
}

impl FeatureMatrix {
    pub const MACHINE: usize = 0;

    pub fn start_token(&self) -> usize {
        self.num_jobs + 1
    }

    pub fn end_token(&self) -> usize {
        self.num_jobs + 2
    }

    pub fn len(&self) -> usize {
        self.x.rows
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows == 0
    }

    /// Builds the matrix from raw values; `jobs` holds `(p, w, π)` per job.
    pub fn from_raw(sigma: f64, jobs: &[(f64, f64, f64)], divisors: [f64; 3]) -> Self {
        let n = jobs.len();
        let mut x = Matrix::zeros(n + 3, INPUT_DIM);
        x.row_mut(0)[2] = (sigma / divisors[2]) as f32;
        for (i, &(p, w, pi)) in jobs.iter().enumerate() {
            let row = x.row_mut(i + 1);
            row[0] = (p / divisors[0]) as f32;
            row[1] = (w / divisors[1]) as f32;
            row[2] = (pi / divisors[2]) as f32;
        }
        x.row_mut(n + 1)[3] = 1.0;
        x.row_mut(n + 2)[4] = 1.0;
        FeatureMatrix { x, num_jobs: n }
    }
}

pub fn build_features(k: usize, inst: &Instance, duals: &DualSolution, config: &ModelConfig) -> FeatureMatrix {
    let jobs: Vec<(f64, f64, f64)> = inst
        .jobs
        .iter()
        .map(|j| (f64::from(j.proc_times[k]), f64::from(j.weight), duals.pi_of(j.id)))
        .collect();
    FeatureMatrix::from_raw(duals.sigma[k], &jobs, config.feature_divisors)
}
