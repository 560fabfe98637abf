//! Kim-style sentence CNN: word embeddings, parallel 1-D convolutions with
//! different window sizes, ReLU, max-over-time pooling and a single-logit
//! dense head.

use serde::{Deserialize, Serialize};

use crate::data::Example;
use crate::error::{Error, Result};
use crate::nn::init::glorot_uniform;
use crate::nn::params::{LayerKind, ParamEntry, ParamTree};
use crate::tensor::{bce_term, conv_valid_into, sigmoid_scalar, Real, Tensor};

pub const EMBEDDING: &str = "embedding";
pub const DENSE: &str = "dense";

pub fn conv_path(kernel_size: usize) -> String {
    format!("conv.h{kernel_size}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KimCnnConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub kernel_sizes: Vec<usize>,
    pub filters_per_size: usize,
    pub max_seq_len: usize,
}

impl Default for KimCnnConfig {
    fn default() -> Self {
        KimCnnConfig {
            vocab_size: 2,
            embed_dim: 64,
            kernel_sizes: vec![3, 4, 5],
            filters_per_size: 32,
            max_seq_len: 40,
        }
    }
}

impl KimCnnConfig {
    pub fn with_vocab(vocab_size: usize) -> Self {
        KimCnnConfig {
            vocab_size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 || self.embed_dim == 0 || self.filters_per_size == 0 || self.max_seq_len == 0 {
            return Err(Error::invalid("CNN dimensions must be positive"));
        }
        if self.kernel_sizes.is_empty() || self.kernel_sizes.contains(&0) {
            return Err(Error::invalid("kernel sizes must be a non-empty list of positive ints"));
        }
        let min = *self.kernel_sizes.iter().min().expect("non-empty");
        if min > self.max_seq_len {
            return Err(Error::invalid(format!(
                "smallest kernel {min} exceeds max_seq_len {}",
                self.max_seq_len
            )));
        }
        let mut sorted = self.kernel_sizes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.kernel_sizes.len() {
            return Err(Error::invalid("kernel sizes must be distinct"));
        }
        Ok(())
    }

    pub fn max_kernel(&self) -> usize {
        self.kernel_sizes.iter().copied().max().unwrap_or(1)
    }

    pub fn feature_dim(&self) -> usize {
        self.kernel_sizes.len() * self.filters_per_size
    }
}

/// Builds the parameter tree: `embedding`, one `conv.h{h}` per kernel size,
/// then `dense`. Weights are Glorot-uniform, biases zero.
///
/// Fan conventions: embedding (vocab, d); conv window (h·d, filters·h);
/// dense (features, 1).
pub fn build_kim_cnn<F: Real>(config: &KimCnnConfig, seed: u64) -> Result<ParamTree<F>> {
    config.validate()?;
    let d = config.embed_dim;
    let nf = config.filters_per_size;
    let mut entries = vec![ParamEntry::new(
        EMBEDDING,
        LayerKind::Embedding,
        None,
        glorot_uniform(&[config.vocab_size, d], config.vocab_size, d, seed, EMBEDDING)?,
        None,
    )];
    for &h in &config.kernel_sizes {
        let path = conv_path(h);
        let weight = glorot_uniform(&[nf, h, d], h * d, nf * h, seed, &path)?;
        entries.push(
            ParamEntry::new(path, LayerKind::Conv, None, weight, Some(Tensor::zeros(&[nf])?)).with_relu_units(nf),
        );
    }
    let feat = config.feature_dim();
    entries.push(ParamEntry::new(
        DENSE,
        LayerKind::Dense,
        None,
        glorot_uniform(&[1, feat], feat, 1, seed, DENSE)?,
        Some(Tensor::zeros(&[1])?),
    ));
    ParamTree::new(entries)
}

pub(crate) fn check_tokens(tokens: &[usize], vocab_size: usize, max_len: Option<usize>) -> Result<()> {
    if tokens.is_empty() {
        return Err(Error::invalid("token sequence is empty"));
    }
    if let Some(max) = max_len {
        if tokens.len() > max {
            return Err(Error::invalid(format!(
                "sequence of {} tokens exceeds max_seq_len {max}",
                tokens.len()
            )));
        }
    }
    if let Some(&id) = tokens.iter().find(|&&t| t >= vocab_size) {
        return Err(Error::TokenOutOfRange { id, vocab_size });
    }
    Ok(())
}

struct Layers<'a, F> {
    embedding: &'a ParamEntry<F>,
    convs: Vec<(usize, &'a ParamEntry<F>)>,
    dense: &'a ParamEntry<F>,
}

fn layers<'a, F: Real>(config: &KimCnnConfig, params: &'a ParamTree<F>) -> Result<Layers<'a, F>> {
    let embedding = params.get(EMBEDDING)?;
    if embedding.weight.shape() != [config.vocab_size, config.embed_dim] {
        return Err(Error::shape(format!(
            "embedding is {:?}, config expects [{}, {}]",
            embedding.weight.shape(),
            config.vocab_size,
            config.embed_dim
        )));
    }
    let convs = config
        .kernel_sizes
        .iter()
        .map(|&h| Ok((h, params.get(&conv_path(h))?)))
        .collect::<Result<Vec<_>>>()?;
    for (h, c) in &convs {
        if c.weight.shape() != [config.filters_per_size, *h, config.embed_dim] || c.bias.is_none() {
            return Err(Error::shape(format!("bad layout for `{}`", c.path())));
        }
    }
    let dense = params.get(DENSE)?;
    if dense.weight.shape() != [1, config.feature_dim()] || dense.bias.is_none() {
        return Err(Error::shape("bad layout for `dense`"));
    }
    Ok(Layers {
        embedding,
        convs,
        dense,
    })
}

/// Intermediate values of one forward pass, kept for backprop.
struct Trace<F> {
    tokens: Vec<usize>,
    embedded: Vec<F>,
    /// Per pooled feature: (window start, pooled value).
    pooled: Vec<(usize, F)>,
    logit: F,
}

fn padded(tokens: &[usize], min_len: usize) -> Vec<usize> {
    let mut t = tokens.to_vec();
    if t.len() < min_len {
        t.resize(min_len, 0);
    }
    t
}

fn forward_trace<F: Real>(config: &KimCnnConfig, layers: &Layers<'_, F>, tokens: &[usize]) -> Result<Trace<F>> {
    check_tokens(tokens, config.vocab_size, Some(config.max_seq_len))?;
    let d = config.embed_dim;
    let tokens = padded(tokens, config.max_kernel());
    let n = tokens.len();
    let mut embedded = Vec::with_capacity(n * d);
    for &t in &tokens {
        embedded.extend_from_slice(layers.embedding.weight.row(t));
    }

    let mut pooled = Vec::with_capacity(config.feature_dim());
    let mut scratch = Vec::with_capacity(n);
    for (h, conv) in &layers.convs {
        let bias = conv.bias.as_ref().expect("checked").data();
        for (f, &b) in bias.iter().enumerate() {
            conv_valid_into(&embedded, n, d, conv.weight.row(f), *h, b, &mut scratch);
            // relu then max-over-time; strict comparison keeps the first index
            let mut best = (0, scratch[0].max(F::zero()));
            for (i, &v) in scratch.iter().enumerate().skip(1) {
                let a = v.max(F::zero());
                if a > best.1 {
                    best = (i, a);
                }
            }
            pooled.push(best);
        }
    }

    let w = layers.dense.weight.data();
    let logit = pooled.iter().zip(w).fold(F::zero(), |acc, (&(_, p), &wi)| acc + p * wi)
        + layers.dense.bias.as_ref().expect("checked").data()[0];
    Ok(Trace {
        tokens,
        embedded,
        pooled,
        logit,
    })
}

/// Scalar logit for one token sequence; predicted label is `logit > 0`.
pub fn forward_kim_cnn<F: Real>(config: &KimCnnConfig, params: &ParamTree<F>, tokens: &[usize]) -> Result<F> {
    let layers = layers(config, params)?;
    Ok(forward_trace(config, &layers, tokens)?.logit)
}

/// Mean BCE-with-logits over `batch` and its exact gradient with respect to
/// every parameter. Max-pooling routes gradient to the first argmax.
pub fn backward_kim_cnn<F: Real>(
    config: &KimCnnConfig,
    params: &ParamTree<F>,
    batch: &[Example],
) -> Result<(F, ParamTree<F>)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let layers = layers(config, params)?;
    let mut grads = params.zeros_like();
    let emb_idx = params.position(EMBEDDING).expect("checked");
    let dense_idx = params.position(DENSE).expect("checked");
    let conv_idx: Vec<usize> = config
        .kernel_sizes
        .iter()
        .map(|&h| params.position(&conv_path(h)).expect("checked"))
        .collect();

    let d = config.embed_dim;
    let nf = config.filters_per_size;
    let inv_m = F::one() / F::from_usize(batch.len()).expect("batch size fits");
    let mut loss = F::zero();
    let mut d_embedded: Vec<F> = Vec::new();

    for ex in batch {
        let trace = forward_trace(config, &layers, &ex.tokens)?;
        let y = F::from_u8(ex.label).expect("label fits");
        loss = loss + bce_term(trace.logit, y);
        let dlogit = (sigmoid_scalar(trace.logit) - y) * inv_m;

        {
            let g = &mut grads.entries_mut()[dense_idx];
            for (gw, &(_, p)) in g.weight.data_mut().iter_mut().zip(&trace.pooled) {
                *gw = *gw + dlogit * p;
            }
            let gb = g.bias.as_mut().expect("dense bias").data_mut();
            gb[0] = gb[0] + dlogit;
        }

        let n = trace.tokens.len();
        d_embedded.clear();
        d_embedded.resize(n * d, F::zero());
        let dense_w = layers.dense.weight.data();
        for (ci, (h, conv)) in layers.convs.iter().enumerate() {
            let g = &mut grads.entries_mut()[conv_idx[ci]];
            for f in 0..nf {
                let feat = ci * nf + f;
                let (start, value) = trace.pooled[feat];
                if value <= F::zero() {
                    continue;
                }
                let dpre = dlogit * dense_w[feat];
                let span = h * d;
                let window = &trace.embedded[start * d..start * d + span];
                for (gw, &x) in g.weight.row_mut(f).iter_mut().zip(window) {
                    *gw = *gw + dpre * x;
                }
                let gb = g.bias.as_mut().expect("conv bias").data_mut();
                gb[f] = gb[f] + dpre;
                for (dx, &w) in d_embedded[start * d..start * d + span]
                    .iter_mut()
                    .zip(conv.weight.row(f))
                {
                    *dx = *dx + dpre * w;
                }
            }
        }

        let g = &mut grads.entries_mut()[emb_idx];
        for (pos, &tok) in trace.tokens.iter().enumerate() {
            for (ge, &dx) in g
                .weight
                .row_mut(tok)
                .iter_mut()
                .zip(&d_embedded[pos * d..(pos + 1) * d])
            {
                *ge = *ge + dx;
            }
        }
    }
    Ok((loss * inv_m, grads))
}
