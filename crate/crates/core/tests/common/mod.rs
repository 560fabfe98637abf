//! Independent reference implementations and shared fixtures for the
//! integration tests. Nothing here calls the crate's kernels; the oracles are
//! written as plain loops over nested vectors.

#![allow(dead_code)]

use erosion_core::data::{split, synthetic_sentiment, Dataset, Example, SyntheticConfig};
use erosion_core::harness::InlineTrain;
use erosion_core::nn::{
    attention_model, kim_cnn, AdamConfig, Architecture, KimCnnConfig, Model, ToyAttentionConfig, TrainConfig,
};
use erosion_core::tensor::CounterRng;
use erosion_core::{ParamTree, Tensor};

pub type Mat = Vec<Vec<f64>>;

pub fn uniform(rng: &mut CounterRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_unit()
}

pub fn random_mat(rng: &mut CounterRng, rows: usize, cols: usize) -> Mat {
    (0..rows)
        .map(|_| (0..cols).map(|_| uniform(rng, -1.0, 1.0)).collect())
        .collect()
}

pub fn to_tensor(m: &Mat) -> Tensor<f64> {
    Tensor::from_rows(m).unwrap()
}

pub fn to_mat(t: &Tensor<f64>) -> Mat {
    (0..t.rows()).map(|i| t.row(i).to_vec()).collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Largest relative error, measured against the larger magnitude of the pair
/// (pairs that are both exactly zero count as 0).
pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| if x == y { 0.0 } else { rel_err(x, y) })
        .fold(0.0, f64::max)
}

pub fn naive_conv(x: &Mat, w: &Mat, bias: f64) -> Vec<f64> {
    let (n, h) = (x.len(), w.len());
    let mut out = Vec::new();
    for i in 0..=n - h {
        let mut s = bias;
        for j in 0..h {
            for c in 0..x[0].len() {
                s += x[i + j][c] * w[j][c];
            }
        }
        out.push(s);
    }
    out
}

pub fn naive_matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            for t in 0..k {
                out[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    out
}

pub fn naive_attention(q: &Mat, k: &Mat, v: &Mat) -> Mat {
    let dk = q[0].len() as f64;
    q.iter()
        .map(|qi| {
            let scores: Vec<f64> = k
                .iter()
                .map(|kj| qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>() / dk.sqrt())
                .collect();
            let z: f64 = scores.iter().map(|s| s.exp()).sum();
            (0..v[0].len())
                .map(|c| scores.iter().zip(v).map(|(s, vj)| s.exp() / z * vj[c]).sum())
                .collect()
        })
        .collect()
}

fn weight_mat(t: &Tensor<f64>, slab: usize, rows: usize, cols: usize) -> Mat {
    let d = t.data();
    (0..rows)
        .map(|r| d[slab * rows * cols + r * cols..slab * rows * cols + (r + 1) * cols].to_vec())
        .collect()
}

/// Kim CNN logit assembled from the naive oracles.
pub fn oracle_kim_logit(cfg: &KimCnnConfig, p: &ParamTree<f64>, tokens: &[usize]) -> f64 {
    let emb = &p.get(kim_cnn::EMBEDDING).unwrap().weight;
    let mut toks = tokens.to_vec();
    let hmax = *cfg.kernel_sizes.iter().max().unwrap();
    while toks.len() < hmax {
        toks.push(0);
    }
    let x: Mat = toks.iter().map(|&t| emb.row(t).to_vec()).collect();
    let mut feats = Vec::new();
    for &h in &cfg.kernel_sizes {
        let e = p.get(&kim_cnn::conv_path(h)).unwrap();
        for f in 0..cfg.filters_per_size {
            let w = weight_mat(&e.weight, f, h, cfg.embed_dim);
            let b = e.bias.as_ref().unwrap().data()[f];
            let pooled = naive_conv(&x, &w, b)
                .into_iter()
                .map(|v| v.max(0.0))
                .fold(0.0, f64::max);
            feats.push(pooled);
        }
    }
    let dense = p.get(kim_cnn::DENSE).unwrap();
    feats.iter().zip(dense.weight.data()).map(|(a, b)| a * b).sum::<f64>() + dense.bias.as_ref().unwrap().data()[0]
}

/// Toy attention logit assembled from the naive oracles.
pub fn oracle_attention_logit(cfg: &ToyAttentionConfig, p: &ParamTree<f64>, tokens: &[usize]) -> f64 {
    let d = cfg.d_model;
    let emb = &p.get(attention_model::EMBEDDING).unwrap().weight;
    let mut x: Mat = tokens.iter().map(|&t| emb.row(t).to_vec()).collect();
    for b in 0..cfg.blocks {
        let a = &p.get(&attention_model::attention_path(b)).unwrap().weight;
        let q = naive_matmul(&x, &weight_mat(a, 0, d, d));
        let k = naive_matmul(&x, &weight_mat(a, 1, d, d));
        let v = naive_matmul(&x, &weight_mat(a, 2, d, d));
        let att = naive_attention(&q, &k, &v);
        let mid: Mat = x
            .iter()
            .zip(&att)
            .map(|(r, s)| r.iter().zip(s).map(|(u, w)| u + w).collect())
            .collect();
        let ffn = p.get(&attention_model::ffn_path(b)).unwrap();
        let bias = ffn.bias.as_ref().unwrap();
        let mut h = naive_matmul(&mid, &weight_mat(&ffn.weight, 0, d, d));
        for row in &mut h {
            for (c, v) in row.iter_mut().enumerate() {
                *v = (*v + bias.row(0)[c]).max(0.0);
            }
        }
        let mut out = naive_matmul(&h, &weight_mat(&ffn.weight, 1, d, d));
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v += bias.row(1)[c] + mid[r][c];
            }
        }
        x = out;
    }
    let n = x.len() as f64;
    let pooled: Vec<f64> = (0..d).map(|c| x.iter().map(|r| r[c]).sum::<f64>() / n).collect();
    let head = p.get(attention_model::HEAD).unwrap();
    pooled.iter().zip(head.weight.data()).map(|(a, b)| a * b).sum::<f64>() + head.bias.as_ref().unwrap().data()[0]
}

pub fn random_tokens(rng: &mut CounterRng, vocab: usize, min_len: usize, max_len: usize) -> Vec<usize> {
    let len = min_len + rng.below(max_len - min_len + 1);
    (0..len).map(|_| rng.below(vocab)).collect()
}

pub fn random_batch(rng: &mut CounterRng, vocab: usize, size: usize, max_len: usize) -> Vec<Example> {
    (0..size)
        .map(|_| Example::new(random_tokens(rng, vocab, 1, max_len), rng.below(2) as u8))
        .collect()
}

/// Max relative error between analytic gradients and central differences of
/// the mean batch loss, over every scalar of every entry.
pub fn finite_difference_error(model: &Model<f64>, batch: &[Example], step: f64) -> f64 {
    let (_, grads) = model.loss_and_grads(batch).unwrap();
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for (ei, g) in grads.entries().iter().enumerate() {
        let parts: [(Option<&Tensor<f64>>, bool); 2] = [(Some(&g.weight), false), (g.bias.as_ref(), true)];
        for (gt, is_bias) in parts {
            let Some(gt) = gt else { continue };
            for i in 0..gt.numel() {
                let at = |m: &mut Model<f64>, delta: f64| {
                    let e = &mut m.params.entries_mut()[ei];
                    let t = if is_bias {
                        e.bias.as_mut().unwrap()
                    } else {
                        &mut e.weight
                    };
                    t.data_mut()[i] += delta;
                };
                at(&mut probe, step);
                let up = probe.loss(batch).unwrap();
                at(&mut probe, -2.0 * step);
                let down = probe.loss(batch).unwrap();
                probe.params = model.params.clone();
                let numeric = (up - down) / (2.0 * step);
                let analytic = gt.data()[i];
                let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max((analytic - numeric).abs() / denom);
            }
        }
    }
    worst
}

/// Desk-scale stand-in for the sentiment experiments: 4000 synthetic
/// examples, a quarter held out (1000 balanced validation examples).
pub fn experiment_data() -> (Dataset, Dataset) {
    let cfg = SyntheticConfig {
        n: 4000,
        ..SyntheticConfig::default()
    };
    split(&synthetic_sentiment(&cfg, 0).unwrap(), 0.25, 0).unwrap()
}

/// Default-size Kim CNN, five epochs of Adam at lr 0.001, batch 64.
pub fn experiment_training() -> InlineTrain {
    InlineTrain {
        architecture: Architecture::KimCnn(KimCnnConfig::default()),
        train: TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        },
        adam: AdamConfig::default(),
    }
}

pub fn tiny_kim(vocab: usize) -> KimCnnConfig {
    KimCnnConfig {
        vocab_size: vocab,
        embed_dim: 3,
        kernel_sizes: vec![2, 3, 4],
        filters_per_size: 2,
        max_seq_len: 9,
    }
}
