//! Attention, layer normalization and feed-forward kernels.

use super::model::{AttentionWeights, FeedForwardWeights, LayerNormWeights};
use super::tensor::{dot, Matrix};

/// Softmax over one row; `-∞` entries come out exactly zero.
pub fn softmax_in_place(row: &mut [f32]) {
    let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    if max == f32::NEG_INFINITY {
        // fully masked row: leave all-zero
        row.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    for v in row.iter_mut() {
        *v = if *v == f32::NEG_INFINITY { 0.0 } else { (*v - max).exp() };
    }
    let sum = canonical_sum(&mut row.to_vec());
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Sum of `terms` in ascending order, so the result does not depend on the
/// order the terms arrive in. Reorders `terms`.
pub fn canonical_sum(terms: &mut [f32]) -> f32 {
    terms.sort_unstable_by(f32::total_cmp);
    terms.iter().fold(0.0f32, |acc, &t| acc + t)
}

/// Causal mask: `0` on and below the diagonal, `-∞` above.
pub fn causal_mask(n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            m.data[i * n + j] = f32::NEG_INFINITY;
        }
    }
    m
}

/// `softmax(QKᵀ/√d_k + mask)·V`.
pub fn attention(q: &Matrix, k: &Matrix, v: &Matrix, mask: Option<&Matrix>) -> Matrix {
    assert_eq!(k.rows, v.rows, "keys and values must align");
    let scale = 1.0 / (q.cols as f32).sqrt();
    let mut scores = q.matmul_t(k);
    for x in scores.data.iter_mut() {
        *x *= scale;
    }
    if let Some(m) = mask {
        assert_eq!((m.rows, m.cols), (scores.rows, scores.cols), "mask shape");
        for (x, &mm) in scores.data.iter_mut().zip(&m.data) {
            *x += mm;
        }
    }
    // Key-order independent weighted sum; masked keys (probability 0) are
    // skipped, so a causal row equals attention over its visible prefix.
    let mut out = Matrix::zeros(q.rows, v.cols);
    let mut terms = Vec::with_capacity(k.rows);
    for i in 0..scores.rows {
        softmax_in_place(scores.row_mut(i));
        let probs = scores.row(i);
        for c in 0..v.cols {
            terms.clear();
            terms.extend(probs.iter().enumerate().filter(|(_, &p)| p != 0.0).map(|(j, &p)| p * v.get(j, c)));
            out.data[i * v.cols + c] = canonical_sum(&mut terms);
        }
    }
    out
}

/// `((x − μ)/√(σ² + ε)) ⊙ w + b` with the population variance.
pub fn layer_norm(x: &[f32], w: &[f32], b: &[f32], eps: f32) -> Vec<f32> {
    let d = x.len() as f32;
    let mean = x.iter().sum::<f32>() / d;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f32>() / d;
    let denom = (var + eps).sqrt();
    x.iter()
        .zip(w)
        .zip(b)
        .map(|((v, w), b)| (v - mean) / denom * w + b)
        .collect()
}

/// Row-wise `LayerNorm(g + sublayer)`.
pub fn add_and_norm(g: &Matrix, sub: &Matrix, ln: &LayerNormWeights, eps: f32) -> Matrix {
    let sum = g.add(sub);
    let mut out = Matrix::zeros(sum.rows, sum.cols);
    for i in 0..sum.rows {
        out.row_mut(i).copy_from_slice(&layer_norm(sum.row(i), &ln.w, &ln.b, eps));
    }
    out
}

/// Projected keys and values for one attention block, reusable across queries.
pub struct KeyValue {
    pub k: Matrix,
    pub v: Matrix,
}

pub fn project_kv(x: &Matrix, w: &AttentionWeights) -> KeyValue {
    KeyValue {
        k: x.matmul(&w.wk, Some(&w.bk)),
        v: x.matmul(&w.wv, Some(&w.bv)),
    }
}

/// `Concat(head_1..head_h)·W^O + b^O` for queries from `xq` against `kv`.
pub fn multi_head(xq: &Matrix, kv: &KeyValue, w: &AttentionWeights, heads: usize, mask: Option<&Matrix>) -> Matrix {
    let q = xq.matmul(&w.wq, Some(&w.bq));
    let dk = q.cols / heads;
    let mut concat = Matrix::zeros(q.rows, q.cols);
    for h in 0..heads {
        let out = attention(
            &q.column_block(h * dk, dk),
            &kv.k.column_block(h * dk, dk),
            &kv.v.column_block(h * dk, dk),
            mask,
        );
        for i in 0..out.rows {
            concat.row_mut(i)[h * dk..(h + 1) * dk].copy_from_slice(out.row(i));
        }
    }
    concat.matmul(&w.wo, Some(&w.bo))
}

/// `ReLU(x·W1 + b1)·W2 + b2`.
pub fn feed_forward(x: &Matrix, w: &FeedForwardWeights) -> Matrix {
    let mut hidden = x.matmul(&w.w1, Some(&w.b1));
    hidden.data.iter_mut().for_each(|v| *v = v.max(0.0));
    hidden.matmul(&w.w2, Some(&w.b2))
}

/// Pointer logit `vᵀ tanh(a + b)` for precomputed `a = W1 z_j`, `b = W2 o_i`.
pub fn pointer_logit(v: &[f32], a: &[f32], b: &[f32]) -> f32 {
    let act: Vec<f32> = a.iter().zip(b).map(|(x, y)| (x + y).tanh()).collect();
    dot(v, &act)
}
