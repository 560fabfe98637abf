use serde::{Deserialize, Serialize};

use crate::data::Example;
use crate::error::Result;
use crate::nn::attention_model::{
    backward_toy_attention, build_toy_attention_model, forward_toy_attention, ToyAttentionConfig,
};
use crate::nn::kim_cnn::{backward_kim_cnn, build_kim_cnn, forward_kim_cnn, KimCnnConfig};
use crate::nn::params::ParamTree;
use crate::tensor::Real;

/// Which network a parameter tree belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Architecture {
    KimCnn(KimCnnConfig),
    ToyAttention(ToyAttentionConfig),
}

impl Architecture {
    pub fn vocab_size(&self) -> usize {
        match self {
            Architecture::KimCnn(c) => c.vocab_size,
            Architecture::ToyAttention(c) => c.vocab_size,
        }
    }

    pub fn build<F: Real>(&self, seed: u64) -> Result<Model<F>> {
        let params = match self {
            Architecture::KimCnn(c) => build_kim_cnn(c, seed)?,
            Architecture::ToyAttention(c) => build_toy_attention_model(c, seed)?,
        };
        Ok(Model {
            arch: self.clone(),
            params,
        })
    }
}

/// An architecture together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<F = f32> {
    pub arch: Architecture,
    pub params: ParamTree<F>,
}

impl<F: Real> Model<F> {
    pub fn new(arch: Architecture, params: ParamTree<F>) -> Self {
        Model { arch, params }
    }

    /// Same architecture, different parameters.
    pub fn with_params(&self, params: ParamTree<F>) -> Self {
        Model {
            arch: self.arch.clone(),
            params,
        }
    }

    pub fn logit(&self, tokens: &[usize]) -> Result<F> {
        match &self.arch {
            Architecture::KimCnn(c) => forward_kim_cnn(c, &self.params, tokens),
            Architecture::ToyAttention(c) => forward_toy_attention(c, &self.params, tokens),
        }
    }

    pub fn predict(&self, tokens: &[usize]) -> Result<u8> {
        Ok(u8::from(self.logit(tokens)? > F::zero()))
    }

    pub fn predict_all(&self, examples: &[Example]) -> Result<Vec<u8>> {
        examples.iter().map(|e| self.predict(&e.tokens)).collect()
    }

    pub fn loss_and_grads(&self, batch: &[Example]) -> Result<(F, ParamTree<F>)> {
        match &self.arch {
            Architecture::KimCnn(c) => backward_kim_cnn(c, &self.params, batch),
            Architecture::ToyAttention(c) => backward_toy_attention(c, &self.params, batch),
        }
    }

    /// Mean loss without gradients.
    pub fn loss(&self, examples: &[Example]) -> Result<f64> {
        let mut total = 0.0;
        for e in examples {
            let z = self.logit(&e.tokens)?.to_f64().unwrap_or(f64::NAN);
            let y = f64::from(e.label);
            total += crate::tensor::bce_term(z, y);
        }
        Ok(total / examples.len().max(1) as f64)
    }

    pub fn cast<G: Real>(&self) -> Model<G> {
        Model {
            arch: self.arch.clone(),
            params: self.params.cast(),
        }
    }
}

/// Fraction of examples whose prediction matches the label, plus the
/// predictions themselves.
pub fn evaluate<F: Real>(model: &Model<F>, examples: &[Example]) -> Result<(f64, Vec<u8>)> {
    let preds = model.predict_all(examples)?;
    let correct = preds.iter().zip(examples).filter(|(p, e)| **p == e.label).count();
    Ok((correct as f64 / examples.len().max(1) as f64, preds))
}
