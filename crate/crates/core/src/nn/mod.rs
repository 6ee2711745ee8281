//! Transformer-pointer inference for the pricing subproblem.
//!
//! Input rows are `[machine, job_1..job_n, start, end]`; the decoder points back
//! into those rows one at a time until it emits the end row. Everything runs in
//! `f32` with a fixed summation order, so a given weight file decodes the same
//! way on every platform.

mod features;
mod format;
pub mod kernels;
mod model;
pub mod tensor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::{build_features, FeatureMatrix, INPUT_DIM};
pub use format::{
    load_weights, read_header, read_weights, save_weights, write_weights, TensorEntry, WeightsError, WeightsHeader, MAGIC,
};
pub use model::{
    decoder_stack, encode, greedy_decode, predict_column, AttentionWeights, DecodeTrace, DecoderLayer, EncoderLayer,
    FeedForwardWeights, LayerNormWeights, ModelWeights, PointerWeights,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Embedding dimension.
    pub d: usize,
    /// Attention heads; `d_k = d_v = d / h`.
    pub h: usize,
    pub n_enc: usize,
    pub n_dec: usize,
    pub input_dim: usize,
    pub ln_epsilon: f64,
    /// Divisors for the (processing time, weight, dual) feature slots.
    pub feature_divisors: [f64; 3],
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("d = {d} is not divisible by h = {h}")]
    HeadSplit { d: usize, h: usize },
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("input_dim must be {INPUT_DIM}, got {0}")]
    InputDim(usize),
    #[error("feature divisors must be positive, got {0:?}")]
    Divisors([f64; 3]),
    #[error("layer-norm epsilon must be non-negative, got {0}")]
    Epsilon(f64),
}

pub const DEFAULT_DIVISORS: [f64; 3] = [30.0, 100.0, 1000.0];

impl ModelConfig {
    /// d=64, h=8, two encoder and two decoder layers.
    pub fn best() -> Self {
        ModelConfig {
            d: 64,
            h: 8,
            n_enc: 2,
            n_dec: 2,
            input_dim: INPUT_DIM,
            ln_epsilon: 1e-5,
            feature_divisors: DEFAULT_DIVISORS,
        }
    }

    pub fn d_k(&self) -> usize {
        self.d / self.h
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [("d", self.d), ("h", self.h), ("n_enc", self.n_enc), ("n_dec", self.n_dec)] {
            if v == 0 {
                return Err(ConfigError::ZeroCount(name));
            }
        }
        if !self.d.is_multiple_of(self.h) {
            return Err(ConfigError::HeadSplit { d: self.d, h: self.h });
        }
        if self.input_dim != INPUT_DIM {
            return Err(ConfigError::InputDim(self.input_dim));
        }
        if !self.feature_divisors.iter().all(|&v| v > 0.0 && v.is_finite()) {
            return Err(ConfigError::Divisors(self.feature_divisors));
        }
        if self.ln_epsilon.is_nan() || self.ln_epsilon < 0.0 {
            return Err(ConfigError::Epsilon(self.ln_epsilon));
        }
        Ok(())
    }
}

/// Learnable parameter counts per building block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterCounts {
    pub embedding: usize,
    pub per_head: usize,
    pub attention: usize,
    pub feed_forward: usize,
    pub layer_norm: usize,
    pub encoder_layer: usize,
    pub encoder: usize,
    pub decoder_layer: usize,
    pub decoder: usize,
    pub pointer: usize,
    pub total: usize,
}

pub fn parameter_counts(config: &ModelConfig) -> ParameterCounts {
    let d = config.d;
    let dk = config.d_k();
    let embedding = config.input_dim * d;
    let per_head = 3 * (d * dk + dk);
    let attention = config.h * per_head + d * d + d;
    let feed_forward = 2 * (d * d + d);
    let layer_norm = 2 * d;
    let encoder_layer = attention + feed_forward + 2 * layer_norm;
    let decoder_layer = 2 * attention + feed_forward + 3 * layer_norm;
    let pointer = 2 * d * d + d;
    let encoder = config.n_enc * encoder_layer;
    let decoder = config.n_dec * decoder_layer;
    ParameterCounts {
        embedding,
        per_head,
        attention,
        feed_forward,
        layer_norm,
        encoder_layer,
        encoder,
        decoder_layer,
        decoder,
        pointer,
        total: embedding + encoder + decoder + pointer,
    }
}

pub fn count_parameters(config: &ModelConfig) -> usize {
    parameter_counts(config).total
}
