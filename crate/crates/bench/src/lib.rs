//! Fixtures shared by the criterion benches in `benches/`.

use erosion_core::data::{synthetic_sentiment, Example, SyntheticConfig};
use erosion_core::nn::{Architecture, KimCnnConfig, ToyAttentionConfig};
use erosion_core::tensor::{gaussian_sample, GaussianSpec};
use erosion_core::{Model, Tensor};

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Tensor<f64> {
    gaussian_sample(&[rows, cols], &GaussianSpec::new(0.0, 1.0, seed)).expect("positive shape")
}

/// Default-sized Kim CNN over the default synthetic vocabulary.
pub fn kim_model(seed: u64) -> Model {
    let vocab = SyntheticConfig::default().vocab_size;
    Architecture::KimCnn(KimCnnConfig::with_vocab(vocab))
        .build(seed)
        .expect("valid config")
}

pub fn attention_model(blocks: usize, seed: u64) -> Model {
    Architecture::ToyAttention(ToyAttentionConfig {
        vocab_size: SyntheticConfig::default().vocab_size,
        d_model: 32,
        blocks,
    })
    .build(seed)
    .expect("valid config")
}

/// `n` labelled synthetic examples.
pub fn examples(n: usize, seed: u64) -> Vec<Example> {
    let config = SyntheticConfig {
        n,
        ..SyntheticConfig::default()
    };
    synthetic_sentiment(&config, seed).expect("valid config").examples
}
