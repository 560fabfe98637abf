//! Labeled token sequences: Sentiment140 ingestion, tokenization, vocabulary,
//! balanced subsampling, stratified splits and a synthetic generator.

mod sampling;
mod sentiment140;
mod synthetic;
mod tokenize;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use sampling::{split, subsample_balanced};
pub use sentiment140::{parse_sentiment140, ParsedCorpus, RawRecord};
pub use synthetic::{synthetic_sentiment, SyntheticConfig};
pub use tokenize::{tokenize, tokenize_and_build_vocab, TokenizerConfig};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Version written into dataset cache files.
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub tokens: Vec<usize>,
    pub label: u8,
}

impl Example {
    pub fn new(tokens: Vec<usize>, label: u8) -> Self {
        Example { tokens, label }
    }
}

/// Token ↔ id map with `<pad>` = 0 and `<unk>` = 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Builds a vocabulary from the non-reserved tokens, in id order.
    pub fn from_tokens<I: IntoIterator<Item = String>>(tokens: I) -> Result<Self> {
        let all: Vec<String> = [PAD_TOKEN.to_owned(), UNK_TOKEN.to_owned()]
            .into_iter()
            .chain(tokens)
            .collect();
        Self::try_from(all)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl TryFrom<Vec<String>> for Vocab {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[PAD_ID] != PAD_TOKEN || tokens[UNK_ID] != UNK_TOKEN {
            return Err(Error::Format("vocabulary must start with <pad>, <unk>".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Vocab { tokens, index })
    }
}

impl From<Vocab> for Vec<String> {
    fn from(v: Vocab) -> Self {
        v.tokens
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub vocab: Vocab,
    pub max_seq_len: usize,
    pub provenance: String,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    dataset: Dataset,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.examples.iter().filter(|e| e.label == 1).count();
        (self.examples.len() - pos, pos)
    }

    pub fn with_examples(&self, examples: Vec<Example>, provenance: String) -> Self {
        Dataset {
            examples,
            vocab: self.vocab.clone(),
            max_seq_len: self.max_seq_len,
            provenance,
        }
    }

    /// Checks labels, ids and lengths against the vocabulary.
    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.examples.iter().enumerate() {
            if e.label > 1 {
                return Err(Error::invalid(format!("example {i} has label {}", e.label)));
            }
            if e.tokens.is_empty() || e.tokens.len() > self.max_seq_len {
                return Err(Error::invalid(format!("example {i} has {} tokens", e.tokens.len())));
            }
            if let Some(&id) = e.tokens.iter().find(|&&t| t >= self.vocab.len()) {
                return Err(Error::TokenOutOfRange {
                    id,
                    vocab_size: self.vocab.len(),
                });
            }
        }
        Ok(())
    }

    pub fn to_cache_bytes(&self) -> Result<Vec<u8>> {
        let file = CacheFile {
            format: "erosion-dataset".into(),
            version: CACHE_VERSION,
            dataset: self.clone(),
        };
        Ok(serde_json::to_vec(&file)?)
    }

    pub fn from_cache_bytes(bytes: &[u8]) -> Result<Self> {
        let file: CacheFile = serde_json::from_slice(bytes)?;
        if file.format != "erosion-dataset" || file.version != CACHE_VERSION {
            return Err(Error::Format(format!(
                "unsupported dataset cache {} v{}",
                file.format, file.version
            )));
        }
        file.dataset.validate()?;
        Ok(file.dataset)
    }

    pub fn save_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_cache_bytes()?).map_err(|e| Error::from(e).at_path(path))
    }

    pub fn load_cache(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).at_path(path))?;
        Self::from_cache_bytes(&bytes).map_err(|e| e.at_path(path))
    }
}
