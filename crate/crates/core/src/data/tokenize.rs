use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Example, RawRecord, Vocab, UNK_ID};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenizerConfig {
    /// Minimum corpus frequency for a token to get its own id.
    pub min_freq: usize,
    /// Cap on the total vocabulary size, reserved ids included.
    pub max_vocab: usize,
    /// Sequences are truncated from the right to this many tokens.
    pub max_seq_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            min_freq: 1,
            max_vocab: 20_000,
            max_seq_len: 40,
        }
    }
}

fn is_url(chunk: &str) -> bool {
    chunk.starts_with("http://") || chunk.starts_with("https://") || chunk.starts_with("www.")
}

fn is_mention(chunk: &str) -> bool {
    let mut chars = chunk.chars();
    chars.next() == Some('@') && chars.next().is_some_and(|c| c.is_alphanumeric() || c == '_')
}

/// Lowercases, drops URLs and @mentions, then emits maximal alphanumeric runs
/// as words and every other visible character as a token of its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    for chunk in lower.split_whitespace() {
        if is_url(chunk) || is_mention(chunk) {
            continue;
        }
        let mut word = String::new();
        for c in chunk.chars() {
            if c.is_alphanumeric() {
                word.push(c);
            } else {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                out.push(c.to_string());
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}

/// Tokenizes every record and builds a frequency-ranked vocabulary (ties broken
/// lexicographically). Out-of-vocabulary tokens map to `<unk>`; a record with
/// no surviving tokens becomes the single token `<unk>`.
pub fn tokenize_and_build_vocab(records: &[RawRecord], config: &TokenizerConfig) -> Result<Dataset> {
    if records.is_empty() {
        return Err(Error::invalid("no records to tokenize"));
    }
    if config.max_vocab < 2 || config.max_seq_len == 0 {
        return Err(Error::invalid("max_vocab must be >= 2 and max_seq_len >= 1"));
    }
    let tokenized: Vec<Vec<String>> = records.iter().map(|r| tokenize(&r.text)).collect();
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for toks in &tokenized {
        for t in toks {
            *freq.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().filter(|&(_, c)| c >= config.min_freq.max(1)).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(config.max_vocab - 2);
    let vocab = Vocab::from_tokens(ranked.into_iter().map(|(t, _)| t.to_owned()))?;

    let examples = tokenized
        .iter()
        .zip(records)
        .map(|(toks, r)| {
            let mut ids: Vec<usize> = toks.iter().take(config.max_seq_len).map(|t| vocab.id(t)).collect();
            if ids.is_empty() {
                ids.push(UNK_ID);
            }
            Example::new(ids, r.label)
        })
        .collect();
    Ok(Dataset {
        examples,
        vocab,
        max_seq_len: config.max_seq_len,
        provenance: format!("sentiment140: {} records", records.len()),
    })
}
