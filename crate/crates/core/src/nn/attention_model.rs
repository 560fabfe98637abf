//! Minimal multi-block attention classifier.
//!
//! Each block is a residual single-head self-attention layer followed by a
//! residual two-layer ReLU feed-forward map. The final hidden states are
//! mean-pooled and fed to a single-logit dense head. The model exists to give
//! block-structured targets (attention and ffn kinds with block indices) to the
//! erosion selectors.

use serde::{Deserialize, Serialize};

use crate::data::Example;
use crate::error::{Error, Result};
use crate::nn::init::glorot_uniform;
use crate::nn::kim_cnn::check_tokens;
use crate::nn::params::{LayerKind, ParamEntry, ParamTree};
use crate::tensor::{bce_term, matmul, sigmoid_scalar, softmax_rows, Real, Tensor};

pub const EMBEDDING: &str = "embedding";
pub const HEAD: &str = "head";

pub fn attention_path(block: usize) -> String {
    format!("block{block}.attention")
}

pub fn ffn_path(block: usize) -> String {
    format!("block{block}.ffn")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyAttentionConfig {
    pub vocab_size: usize,
    pub d_model: usize,
    pub blocks: usize,
}

impl ToyAttentionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blocks % 2 == 1 {
            return Err(Error::OddBlocks(self.blocks));
        }
        if self.blocks < 2 {
            return Err(Error::invalid("attention model needs at least 2 blocks"));
        }
        if self.vocab_size == 0 || self.d_model == 0 {
            return Err(Error::invalid("attention model dimensions must be positive"));
        }
        Ok(())
    }
}

/// Entries, in order: `embedding`, then per block `block{b}.attention`
/// (fused `[3, d, d]` Q/K/V projections, no bias) and `block{b}.ffn`
/// (`[2, d, d]` up/down maps with `[2, d]` biases), then `head`.
pub fn build_toy_attention_model<F: Real>(config: &ToyAttentionConfig, seed: u64) -> Result<ParamTree<F>> {
    config.validate()?;
    let d = config.d_model;
    let mut entries = vec![ParamEntry::new(
        EMBEDDING,
        LayerKind::Embedding,
        None,
        glorot_uniform(&[config.vocab_size, d], config.vocab_size, d, seed, EMBEDDING)?,
        None,
    )];
    for b in 0..config.blocks {
        let attn = attention_path(b);
        entries.push(ParamEntry::new(
            attn.clone(),
            LayerKind::Attention,
            Some(b),
            glorot_uniform(&[3, d, d], d, d, seed, &attn)?,
            None,
        ));
        let ffn = ffn_path(b);
        entries.push(
            ParamEntry::new(
                ffn.clone(),
                LayerKind::Ffn,
                Some(b),
                glorot_uniform(&[2, d, d], d, d, seed, &ffn)?,
                Some(Tensor::zeros(&[2, d])?),
            )
            .with_relu_units(d),
        );
    }
    entries.push(ParamEntry::new(
        HEAD,
        LayerKind::Dense,
        None,
        glorot_uniform(&[1, d], d, 1, seed, HEAD)?,
        Some(Tensor::zeros(&[1])?),
    ));
    ParamTree::new(entries)
}

fn slab<F: Real>(t: &Tensor<F>, i: usize, d: usize) -> Tensor<F> {
    Tensor::new(vec![d, d], t.data()[i * d * d..(i + 1) * d * d].to_vec()).expect("slab shape")
}

fn add_row_bias<F: Real>(m: &mut Tensor<F>, bias: &[F]) {
    let rows = m.rows();
    for i in 0..rows {
        for (v, &b) in m.row_mut(i).iter_mut().zip(bias) {
            *v = *v + b;
        }
    }
}

fn col_sum_into<F: Real>(m: &Tensor<F>, out: &mut [F]) {
    for i in 0..m.rows() {
        for (o, &v) in out.iter_mut().zip(m.row(i)) {
            *o = *o + v;
        }
    }
}

fn accumulate<F: Real>(dst: &mut [F], src: &Tensor<F>) {
    for (a, &b) in dst.iter_mut().zip(src.data()) {
        *a = *a + b;
    }
}

struct BlockTrace<F> {
    x_in: Tensor<F>,
    q: Tensor<F>,
    k: Tensor<F>,
    v: Tensor<F>,
    probs: Tensor<F>,
    x_mid: Tensor<F>,
    h_pre: Tensor<F>,
    h: Tensor<F>,
}

struct Trace<F> {
    blocks: Vec<BlockTrace<F>>,
    pooled: Vec<F>,
    logit: F,
}

fn forward_trace<F: Real>(config: &ToyAttentionConfig, params: &ParamTree<F>, tokens: &[usize]) -> Result<Trace<F>> {
    check_tokens(tokens, config.vocab_size, None)?;
    let d = config.d_model;
    let n = tokens.len();
    let emb = params.get(EMBEDDING)?;
    if emb.weight.shape() != [config.vocab_size, d] {
        return Err(Error::shape("embedding layout does not match config"));
    }
    let mut x = Tensor::new(
        vec![n, d],
        tokens.iter().flat_map(|&t| emb.weight.row(t).iter().copied()).collect(),
    )?;
    let scale = F::one() / F::from_usize(d).expect("dim fits").sqrt();
    let mut blocks = Vec::with_capacity(config.blocks);
    for b in 0..config.blocks {
        let attn = params.get(&attention_path(b))?;
        let ffn = params.get(&ffn_path(b))?;
        let fb = ffn.bias.as_ref().ok_or_else(|| Error::shape("ffn entry lacks bias"))?;
        if attn.weight.shape() != [3, d, d] || ffn.weight.shape() != [2, d, d] || fb.shape() != [2, d] {
            return Err(Error::shape(format!("block {b} layout does not match config")));
        }
        let q = matmul(&x, &slab(&attn.weight, 0, d))?;
        let k = matmul(&x, &slab(&attn.weight, 1, d))?;
        let v = matmul(&x, &slab(&attn.weight, 2, d))?;
        let probs = softmax_rows(&matmul(&q, &k.transpose()?)?.scale(scale))?;
        let x_mid = x.add(&matmul(&probs, &v)?)?;

        let mut h_pre = matmul(&x_mid, &slab(&ffn.weight, 0, d))?;
        add_row_bias(&mut h_pre, fb.row(0));
        let h = crate::tensor::relu(&h_pre);
        let mut out = matmul(&h, &slab(&ffn.weight, 1, d))?;
        add_row_bias(&mut out, fb.row(1));
        let x_out = x_mid.add(&out)?;
        blocks.push(BlockTrace {
            x_in: std::mem::replace(&mut x, x_out),
            q,
            k,
            v,
            probs,
            x_mid,
            h_pre,
            h,
        });
    }
    let inv_n = F::one() / F::from_usize(n).expect("len fits");
    let mut pooled = vec![F::zero(); d];
    col_sum_into(&x, &mut pooled);
    pooled.iter_mut().for_each(|p| *p = *p * inv_n);

    let head = params.get(HEAD)?;
    if head.weight.shape() != [1, d] {
        return Err(Error::shape("head layout does not match config"));
    }
    let hb = head.bias.as_ref().ok_or_else(|| Error::shape("head lacks bias"))?;
    let logit = pooled
        .iter()
        .zip(head.weight.data())
        .fold(F::zero(), |acc, (&p, &w)| acc + p * w)
        + hb.data()[0];
    Ok(Trace { blocks, pooled, logit })
}

pub fn forward_toy_attention<F: Real>(
    config: &ToyAttentionConfig,
    params: &ParamTree<F>,
    tokens: &[usize],
) -> Result<F> {
    Ok(forward_trace(config, params, tokens)?.logit)
}

/// Mean BCE-with-logits over `batch` and its gradient.
pub fn backward_toy_attention<F: Real>(
    config: &ToyAttentionConfig,
    params: &ParamTree<F>,
    batch: &[Example],
) -> Result<(F, ParamTree<F>)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let d = config.d_model;
    let scale = F::one() / F::from_usize(d).expect("dim fits").sqrt();
    let inv_m = F::one() / F::from_usize(batch.len()).expect("batch fits");
    let mut grads = params.zeros_like();
    let idx = |p: &str| params.position(p).expect("validated by forward");
    let mut loss = F::zero();

    for ex in batch {
        let trace = forward_trace(config, params, &ex.tokens)?;
        let n = ex.tokens.len();
        let y = F::from_u8(ex.label).expect("label fits");
        loss = loss + bce_term(trace.logit, y);
        let dlogit = (sigmoid_scalar(trace.logit) - y) * inv_m;

        let head_w = params.get(HEAD)?.weight.data().to_vec();
        {
            let g = &mut grads.entries_mut()[idx(HEAD)];
            for (gw, &p) in g.weight.data_mut().iter_mut().zip(&trace.pooled) {
                *gw = *gw + dlogit * p;
            }
            let gb = g.bias.as_mut().expect("head bias").data_mut();
            gb[0] = gb[0] + dlogit;
        }
        let inv_n = F::one() / F::from_usize(n).expect("len fits");
        let row: Vec<F> = head_w.iter().map(|&w| dlogit * w * inv_n).collect();
        let mut dx = Tensor::new(vec![n, d], row.repeat(n))?;

        for (b, bt) in trace.blocks.iter().enumerate().rev() {
            let attn = params.get(&attention_path(b))?;
            let ffn = params.get(&ffn_path(b))?;
            let (w1, w2) = (slab(&ffn.weight, 0, d), slab(&ffn.weight, 1, d));

            // feed-forward: x_out = x_mid + relu(x_mid W1 + b1) W2 + b2
            let dh = matmul(&dx, &w2.transpose()?)?;
            let dw2 = matmul(&bt.h.transpose()?, &dx)?;
            let dh_pre = dh.zip_map(&bt.h_pre, |g, z| if z > F::zero() { g } else { F::zero() })?;
            let dw1 = matmul(&bt.x_mid.transpose()?, &dh_pre)?;
            {
                let g = &mut grads.entries_mut()[idx(&ffn_path(b))];
                let dd = d * d;
                accumulate(&mut g.weight.data_mut()[..dd], &dw1);
                accumulate(&mut g.weight.data_mut()[dd..], &dw2);
                let gb = g.bias.as_mut().expect("ffn bias");
                col_sum_into(&dh_pre, gb.row_mut(0));
                col_sum_into(&dx, gb.row_mut(1));
            }
            let dx_mid = dx.add(&matmul(&dh_pre, &w1.transpose()?)?)?;

            // attention: x_mid = x_in + softmax(Q Kᵀ s) V
            let dv = matmul(&bt.probs.transpose()?, &dx_mid)?;
            let dp = matmul(&dx_mid, &bt.v.transpose()?)?;
            let mut ds = dp.clone();
            for i in 0..n {
                let p = bt.probs.row(i);
                let dot = dp.row(i).iter().zip(p).fold(F::zero(), |acc, (&a, &b)| acc + a * b);
                for (s, (&g, &pv)) in ds.row_mut(i).iter_mut().zip(dp.row(i).iter().zip(p)) {
                    *s = pv * (g - dot) * scale;
                }
            }
            let dq = matmul(&ds, &bt.k)?;
            let dk = matmul(&ds.transpose()?, &bt.q)?;
            let x_t = bt.x_in.transpose()?;
            let (wq, wk, wv) = (
                slab(&attn.weight, 0, d),
                slab(&attn.weight, 1, d),
                slab(&attn.weight, 2, d),
            );
            {
                let g = &mut grads.entries_mut()[idx(&attention_path(b))];
                let dd = d * d;
                let gw = g.weight.data_mut();
                accumulate(&mut gw[..dd], &matmul(&x_t, &dq)?);
                accumulate(&mut gw[dd..2 * dd], &matmul(&x_t, &dk)?);
                accumulate(&mut gw[2 * dd..], &matmul(&x_t, &dv)?);
            }
            let mut dx_in = dx_mid;
            dx_in.add_assign(&matmul(&dq, &wq.transpose()?)?)?;
            dx_in.add_assign(&matmul(&dk, &wk.transpose()?)?)?;
            dx_in.add_assign(&matmul(&dv, &wv.transpose()?)?)?;
            dx = dx_in;
        }

        let g = &mut grads.entries_mut()[idx(EMBEDDING)];
        for (pos, &tok) in ex.tokens.iter().enumerate() {
            for (ge, &v) in g.weight.row_mut(tok).iter_mut().zip(dx.row(pos)) {
                *ge = *ge + v;
            }
        }
    }
    Ok((loss * inv_m, grads))
}
