use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Example, Vocab};
use crate::error::{Error, Result};
use crate::tensor::CounterRng;

/// Parameters of the synthetic two-class corpus.
///
/// Ids `2..2+S` are the positive signal set, the next `S` ids the negative
/// set, and everything above is filler. Every example carries one or two
/// signal tokens of its class mixed into `noise_tokens_per_example` filler
/// tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    pub vocab_size: usize,
    pub signal_tokens: usize,
    pub noise_tokens_per_example: usize,
    pub max_seq_len: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n: 4000,
            vocab_size: 400,
            signal_tokens: 20,
            noise_tokens_per_example: 12,
            max_seq_len: 40,
        }
    }
}

impl SyntheticConfig {
    /// A small corpus for fast tests.
    pub fn small(n: usize) -> Self {
        SyntheticConfig {
            n,
            vocab_size: 100,
            signal_tokens: 8,
            noise_tokens_per_example: 6,
            max_seq_len: 40,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n % 2 == 1 {
            return Err(Error::OddExampleCount(self.n));
        }
        if self.signal_tokens == 0 || self.vocab_size <= 2 * self.signal_tokens + 2 {
            return Err(Error::invalid(format!(
                "vocab_size must exceed 2*signal_tokens + 2 with signal_tokens >= 1 (got {} and {})",
                self.vocab_size, self.signal_tokens
            )));
        }
        if self.noise_tokens_per_example + 2 > self.max_seq_len {
            return Err(Error::invalid("examples would exceed max_seq_len"));
        }
        Ok(())
    }

    pub fn positive_ids(&self) -> std::ops::Range<usize> {
        2..2 + self.signal_tokens
    }

    pub fn negative_ids(&self) -> std::ops::Range<usize> {
        2 + self.signal_tokens..2 + 2 * self.signal_tokens
    }

    fn vocab(&self) -> Result<Vocab> {
        let s = self.signal_tokens;
        let names = (0..s)
            .map(|i| format!("pos{i}"))
            .chain((0..s).map(|i| format!("neg{i}")))
            .chain((0..self.vocab_size - 2 - 2 * s).map(|i| format!("w{i}")));
        Vocab::from_tokens(names)
    }
}

/// Generates an exactly balanced corpus in shuffled order.
pub fn synthetic_sentiment(config: &SyntheticConfig, seed: u64) -> Result<Dataset> {
    config.validate()?;
    let mut rng = CounterRng::new(seed);
    let filler_start = 2 + 2 * config.signal_tokens;
    let filler_len = config.vocab_size - filler_start;
    let mut examples = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let label = (i % 2) as u8;
        let set = if label == 1 {
            config.positive_ids()
        } else {
            config.negative_ids()
        };
        let mut tokens: Vec<usize> = (0..config.noise_tokens_per_example)
            .map(|_| filler_start + rng.below(filler_len))
            .collect();
        for _ in 0..1 + rng.below(2) {
            let at = rng.below(tokens.len() + 1);
            tokens.insert(at, set.start + rng.below(set.len()));
        }
        examples.push(Example::new(tokens, label));
    }
    rng.shuffle(&mut examples);
    Ok(Dataset {
        examples,
        vocab: config.vocab()?,
        max_seq_len: config.max_seq_len,
        provenance: format!(
            "synthetic n={} vocab={} signal={} noise={} seed={seed}",
            config.n, config.vocab_size, config.signal_tokens, config.noise_tokens_per_example
        ),
    })
}
