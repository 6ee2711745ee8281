use rand::Rng;

use super::features::{build_features, FeatureMatrix};
use super::kernels::{add_and_norm, causal_mask, feed_forward, multi_head, pointer_logit, project_kv, softmax_in_place, KeyValue};
use super::tensor::{matvec, Matrix};
use super::{ConfigError, ModelConfig};
use crate::instance::Instance;
use crate::rng;
use crate::schedule::{make_column, reduced_cost, Column, DualSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub bq: Vec<f32>,
    pub bk: Vec<f32>,
    pub bv: Vec<f32>,
    pub wo: Matrix,
    pub bo: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardWeights {
    pub w1: Matrix,
    pub b1: Vec<f32>,
    pub w2: Matrix,
    pub b2: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormWeights {
    pub w: Vec<f32>,
    pub b: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayer {
    pub sa: AttentionWeights,
    pub ffn: FeedForwardWeights,
    pub ln1: LayerNormWeights,
    pub ln2: LayerNormWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderLayer {
    pub sa: AttentionWeights,
    pub ca: AttentionWeights,
    pub ffn: FeedForwardWeights,
    pub ln1: LayerNormWeights,
    pub ln2: LayerNormWeights,
    pub ln3: LayerNormWeights,
}

/// `u_j = vᵀ tanh(W1 z_j + W2 o)`; `w1` and `w2` are stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerWeights {
    pub v: Vec<f32>,
    pub w1: Matrix,
    pub w2: Matrix,
}

/// All learnable tensors. Linear maps other than the pointer's are stored
/// `in × out` and applied as `x · W`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub config: ModelConfig,
    pub embed: Matrix,
    pub enc: Vec<EncoderLayer>,
    pub dec: Vec<DecoderLayer>,
    pub ptr: PointerWeights,
}

fn attn_zeros(d: usize) -> AttentionWeights {
    AttentionWeights {
        wq: Matrix::zeros(d, d),
        wk: Matrix::zeros(d, d),
        wv: Matrix::zeros(d, d),
        bq: vec![0.0; d],
        bk: vec![0.0; d],
        bv: vec![0.0; d],
        wo: Matrix::zeros(d, d),
        bo: vec![0.0; d],
    }
}

fn ffn_zeros(d: usize) -> FeedForwardWeights {
    FeedForwardWeights {
        w1: Matrix::zeros(d, d),
        b1: vec![0.0; d],
        w2: Matrix::zeros(d, d),
        b2: vec![0.0; d],
    }
}

fn ln_unit(d: usize) -> LayerNormWeights {
    LayerNormWeights {
        w: vec![1.0; d],
        b: vec![0.0; d],
    }
}

macro_rules! visit_params {
    ($self:ident, $f:ident, $as_slice:ident, $($mut_:tt)?) => {{
        fn mat(m: &$($mut_)? Matrix) -> (Vec<usize>, &$($mut_)? [f32]) {
            (vec![m.rows, m.cols], & $($mut_)? m.data[..])
        }
        fn vect(v: &$($mut_)? [f32]) -> (Vec<usize>, &$($mut_)? [f32]) {
            (vec![v.len()], v)
        }
        fn attn<'a>(p: &str, a: &'a $($mut_)? AttentionWeights, f: &mut dyn FnMut(String, Vec<usize>, &'a $($mut_)? [f32])) {
            let AttentionWeights { wq, wk, wv, bq, bk, bv, wo, bo } = a;
            for (n, (s, d)) in [("Wq", mat(wq)), ("Wk", mat(wk)), ("Wv", mat(wv)), ("bq", vect(bq)), ("bk", vect(bk)), ("bv", vect(bv)), ("Wo", mat(wo)), ("bo", vect(bo))] {
                f(format!("{p}.{n}"), s, d);
            }
        }
        fn ffn<'a>(p: &str, x: &'a $($mut_)? FeedForwardWeights, f: &mut dyn FnMut(String, Vec<usize>, &'a $($mut_)? [f32])) {
            let FeedForwardWeights { w1, b1, w2, b2 } = x;
            for (n, (s, d)) in [("W1", mat(w1)), ("b1", vect(b1)), ("W2", mat(w2)), ("b2", vect(b2))] {
                f(format!("{p}.{n}"), s, d);
            }
        }
        fn ln<'a>(p: &str, x: &'a $($mut_)? LayerNormWeights, f: &mut dyn FnMut(String, Vec<usize>, &'a $($mut_)? [f32])) {
            let LayerNormWeights { w, b } = x;
            for (n, (s, d)) in [("w", vect(w)), ("b", vect(b))] {
                f(format!("{p}.{n}"), s, d);
            }
        }
        let ModelWeights { embed, enc, dec, ptr, .. } = $self;
        let (s, d) = mat(embed);
        $f("embed.W".to_string(), s, d);
        for (i, l) in enc.$as_slice().enumerate() {
            let EncoderLayer { sa, ffn: ff, ln1, ln2 } = l;
            attn(&format!("enc.{i}.sa"), sa, $f);
            ffn(&format!("enc.{i}.ffn"), ff, $f);
            ln(&format!("enc.{i}.ln1"), ln1, $f);
            ln(&format!("enc.{i}.ln2"), ln2, $f);
        }
        for (i, l) in dec.$as_slice().enumerate() {
            let DecoderLayer { sa, ca, ffn: ff, ln1, ln2, ln3 } = l;
            attn(&format!("dec.{i}.sa"), sa, $f);
            attn(&format!("dec.{i}.ca"), ca, $f);
            ffn(&format!("dec.{i}.ffn"), ff, $f);
            ln(&format!("dec.{i}.ln1"), ln1, $f);
            ln(&format!("dec.{i}.ln2"), ln2, $f);
            ln(&format!("dec.{i}.ln3"), ln3, $f);
        }
        let PointerWeights { v, w1, w2 } = ptr;
        for (n, (s, d)) in [("ptr.v", vect(v)), ("ptr.W1", mat(w1)), ("ptr.W2", mat(w2))] {
            $f(n.to_string(), s, d);
        }
    }};
}

impl ModelWeights {
    /// All-zero linear maps and unit layer norms.
    pub fn zeros(config: &ModelConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let d = config.d;
        Ok(ModelWeights {
            config: config.clone(),
            embed: Matrix::zeros(config.input_dim, d),
            enc: (0..config.n_enc)
                .map(|_| EncoderLayer {
                    sa: attn_zeros(d),
                    ffn: ffn_zeros(d),
                    ln1: ln_unit(d),
                    ln2: ln_unit(d),
                })
                .collect(),
            dec: (0..config.n_dec)
                .map(|_| DecoderLayer {
                    sa: attn_zeros(d),
                    ca: attn_zeros(d),
                    ffn: ffn_zeros(d),
                    ln1: ln_unit(d),
                    ln2: ln_unit(d),
                    ln3: ln_unit(d),
                })
                .collect(),
            ptr: PointerWeights {
                v: vec![0.0; d],
                w1: Matrix::zeros(d, d),
                w2: Matrix::zeros(d, d),
            },
        })
    }

    /// Xavier-uniform matrices and pointer vector, zero biases, unit layer norms.
    pub fn random(config: &ModelConfig, seed: u64) -> Result<Self, ConfigError> {
        let mut w = Self::zeros(config)?;
        let mut rng = rng::stream(seed, "model/init");
        w.for_each_param_mut(&mut |name, shape, data| {
            let leaf = name.rsplit('.').next().unwrap_or_default();
            let bound = match (shape.as_slice(), leaf) {
                ([r, c], _) => (6.0 / (r + c) as f32).sqrt(),
                ([d], "v") => 1.0 / (*d as f32).sqrt(),
                _ => return,
            };
            data.iter_mut().for_each(|x| *x = rng.random_range(-bound..bound));
        });
        Ok(w)
    }

    /// Visits every tensor under its canonical name, in file order.
    pub fn for_each_param<'a>(&'a self, f: &mut dyn FnMut(String, Vec<usize>, &'a [f32])) {
        visit_params!(self, f, iter,)
    }

    pub fn for_each_param_mut<'a>(&'a mut self, f: &mut dyn FnMut(String, Vec<usize>, &'a mut [f32])) {
        visit_params!(self, f, iter_mut, mut)
    }

    pub fn param_count(&self) -> usize {
        let mut total = 0;
        self.for_each_param(&mut |_, _, d| total += d.len());
        total
    }
}

/// Embedding `E = X · W_embed` (no bias).
fn embed(x: &Matrix, w: &ModelWeights) -> Matrix {
    x.matmul(&w.embed, None)
}

fn encoder_stack(e: &Matrix, w: &ModelWeights) -> Matrix {
    let eps = w.config.ln_epsilon as f32;
    let mut g = e.clone();
    for layer in &w.enc {
        let kv = project_kv(&g, &layer.sa);
        let a = multi_head(&g, &kv, &layer.sa, w.config.h, None);
        g = add_and_norm(&g, &a, &layer.ln1, eps);
        let f = feed_forward(&g, &layer.ffn);
        g = add_and_norm(&g, &f, &layer.ln2, eps);
    }
    g
}

/// Encoder output `Z`, one row per input row. No positional encoding is added.
pub fn encode(x: &Matrix, w: &ModelWeights) -> Matrix {
    encoder_stack(&embed(x, w), w)
}

/// Full decoder pass over a prefix with a causal mask; row `i` is `o_i`.
pub fn decoder_stack(prefix: &Matrix, z: &Matrix, w: &ModelWeights) -> Matrix {
    let eps = w.config.ln_epsilon as f32;
    let mask = causal_mask(prefix.rows);
    let mut y = prefix.clone();
    for layer in &w.dec {
        let kv = project_kv(&y, &layer.sa);
        let a = multi_head(&y, &kv, &layer.sa, w.config.h, Some(&mask));
        y = add_and_norm(&y, &a, &layer.ln1, eps);
        let c = multi_head(&y, &project_kv(z, &layer.ca), &layer.ca, w.config.h, None);
        y = add_and_norm(&y, &c, &layer.ln2, eps);
        let f = feed_forward(&y, &layer.ffn);
        y = add_and_norm(&y, &f, &layer.ln3, eps);
    }
    y
}

/// Incremental decoder: caches self-attention keys/values per layer so each step
/// only processes the newest position. Equivalent to [`decoder_stack`]'s last row.
struct DecoderState<'w> {
    w: &'w ModelWeights,
    self_kv: Vec<KeyValue>,
    cross_kv: Vec<KeyValue>,
}

impl<'w> DecoderState<'w> {
    fn new(w: &'w ModelWeights, z: &Matrix) -> Self {
        let d = w.config.d;
        DecoderState {
            w,
            self_kv: w
                .dec
                .iter()
                .map(|_| KeyValue {
                    k: Matrix::zeros(0, d),
                    v: Matrix::zeros(0, d),
                })
                .collect(),
            cross_kv: w.dec.iter().map(|l| project_kv(z, &l.ca)).collect(),
        }
    }

    fn step(&mut self, embedding: &[f32]) -> Vec<f32> {
        let eps = self.w.config.ln_epsilon as f32;
        let h = self.w.config.h;
        let mut y = Matrix::from_rows(&[embedding.to_vec()]);
        for (l, layer) in self.w.dec.iter().enumerate() {
            let new = project_kv(&y, &layer.sa);
            let cache = &mut self.self_kv[l];
            cache.k.push_row(new.k.row(0));
            cache.v.push_row(new.v.row(0));
            let a = multi_head(&y, cache, &layer.sa, h, None);
            y = add_and_norm(&y, &a, &layer.ln1, eps);
            let c = multi_head(&y, &self.cross_kv[l], &layer.ca, h, None);
            y = add_and_norm(&y, &c, &layer.ln2, eps);
            let f = feed_forward(&y, &layer.ffn);
            y = add_and_norm(&y, &f, &layer.ln3, eps);
        }
        y.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace {
    /// Emitted row indices, not including the start row that seeds decoding.
    pub tokens: Vec<usize>,
    /// Pointer distribution over all input rows at each step.
    pub distributions: Vec<Vec<f32>>,
    pub encoder_output: Matrix,
    pub step_outputs: Vec<Vec<f32>>,
}

/// Greedy autoregressive decoding. Stops after emitting the end row, or after
/// `n + 3` steps.
pub fn greedy_decode(features: &FeatureMatrix, w: &ModelWeights) -> DecodeTrace {
    let rows = features.len();
    let start = features.start_token();
    let end = features.end_token();
    let e = embed(&features.x, w);
    let z = encoder_stack(&e, w);
    let z_proj: Vec<Vec<f32>> = (0..rows).map(|j| matvec(&w.ptr.w1, z.row(j))).collect();

    let mut state = DecoderState::new(w, &z);
    let mut used = vec![false; rows];
    used[start] = true;
    let mut last = start;
    let mut trace = DecodeTrace {
        tokens: Vec::new(),
        distributions: Vec::new(),
        encoder_output: z.clone(),
        step_outputs: Vec::new(),
    };
    for _ in 0..rows {
        let o = state.step(e.row(last));
        let o_proj = matvec(&w.ptr.w2, &o);
        let mut u: Vec<f32> = (0..rows)
            .map(|j| {
                if used[j] {
                    f32::NEG_INFINITY
                } else {
                    pointer_logit(&w.ptr.v, &z_proj[j], &o_proj)
                }
            })
            .collect();
        softmax_in_place(&mut u);
        // argmax, lowest index on ties, never a masked row
        let pick = (0..rows)
            .filter(|&j| !used[j])
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if u[b] >= u[j] => Some(b),
                _ => Some(j),
            });
        trace.step_outputs.push(o);
        trace.distributions.push(u);
        let Some(pick) = pick else { break };
        trace.tokens.push(pick);
        used[pick] = true;
        last = pick;
        if pick == end {
            break;
        }
    }
    trace
}

/// Decodes a job set for machine `k` and sequences it by SWPT. Returns the
/// column with its exact reduced cost, or `None` if no job was selected.
pub fn predict_column(
    k: usize,
    inst: &Instance,
    duals: &DualSolution,
    w: &ModelWeights,
) -> Option<(Column, f64)> {
    let features = build_features(k, inst, duals, &w.config);
    let trace = greedy_decode(&features, w);
    column_from_tokens(k, inst, &trace.tokens, duals)
}

/// Keeps job rows (`1..=n`) from a token sequence; machine, start and end rows
/// are dropped.
pub(crate) fn column_from_tokens(
    k: usize,
    inst: &Instance,
    tokens: &[usize],
    duals: &DualSolution,
) -> Option<(Column, f64)> {
    let n = inst.num_jobs();
    let jobs: Vec<usize> = tokens.iter().copied().filter(|&t| (1..=n).contains(&t)).collect();
    if jobs.is_empty() {
        return None;
    }
    let col = make_column(k, &jobs, inst).expect("decoded tokens are distinct job rows");
    let rc = reduced_cost(&col, duals);
    Some((col, rc))
}
