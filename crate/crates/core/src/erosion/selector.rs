use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{LayerKind, ParamTree};
use crate::tensor::Real;

/// Rule choosing which parameter entries an erosion operator touches.
///
/// Text form (used by the CLI and config files): `all`, a single kind name
/// (`embedding`, `conv`, `dense`, `attention`, `ffn`), `kinds:conv,dense`,
/// `paths:a,b`, `alternating:0`, `alternating:1`, `first_half`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TargetSelector {
    All,
    Kinds(BTreeSet<LayerKind>),
    Paths(Vec<String>),
    /// Entries whose ordinal in tree order has parity `offset`.
    Alternating(u8),
    /// Entries in the first ⌊n/2⌋ of n blocks.
    FirstHalfBlocks,
}

impl TargetSelector {
    pub fn kind(kind: LayerKind) -> Self {
        TargetSelector::Kinds(BTreeSet::from([kind]))
    }
}

/// Paths picked by `selector`, in tree order.
pub fn select_targets<F: Real>(params: &ParamTree<F>, selector: &TargetSelector) -> Result<Vec<String>> {
    if params.is_empty() {
        return Err(Error::invalid("cannot select from an empty parameter tree"));
    }
    let entries = params.entries();
    let picked: Vec<String> = match selector {
        TargetSelector::All => params.paths(),
        TargetSelector::Kinds(kinds) => entries
            .iter()
            .filter(|e| kinds.contains(&e.kind()))
            .map(|e| e.path().to_owned())
            .collect(),
        TargetSelector::Paths(paths) => {
            let wanted: HashSet<&str> = paths.iter().map(String::as_str).collect();
            if let Some(missing) = paths.iter().find(|p| params.position(p).is_none()) {
                return Err(Error::UnknownPath(missing.clone()));
            }
            entries
                .iter()
                .filter(|e| wanted.contains(e.path()))
                .map(|e| e.path().to_owned())
                .collect()
        }
        TargetSelector::Alternating(offset) => entries
            .iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == usize::from(*offset))
            .map(|(_, e)| e.path().to_owned())
            .collect(),
        TargetSelector::FirstHalfBlocks => {
            let blocks: BTreeSet<usize> = entries.iter().filter_map(|e| e.block()).collect();
            if blocks.len() < 2 {
                return Err(Error::invalid(
                    "first_half selector needs a model with at least 2 distinct blocks",
                ));
            }
            let count = blocks.last().expect("non-empty") + 1;
            entries
                .iter()
                .filter(|e| e.block().is_some_and(|b| b < count / 2))
                .map(|e| e.path().to_owned())
                .collect()
        }
    };
    Ok(picked)
}

impl fmt::Display for TargetSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSelector::All => f.write_str("all"),
            TargetSelector::Kinds(k) if k.len() == 1 => f.write_str(k.iter().next().expect("one").as_str()),
            TargetSelector::Kinds(k) => {
                let names: Vec<_> = k.iter().map(|k| k.as_str()).collect();
                write!(f, "kinds:{}", names.join(","))
            }
            TargetSelector::Paths(p) => write!(f, "paths:{}", p.join(",")),
            TargetSelector::Alternating(o) => write!(f, "alternating:{o}"),
            TargetSelector::FirstHalfBlocks => f.write_str("first_half"),
        }
    }
}

impl FromStr for TargetSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "all" => return Ok(TargetSelector::All),
            "first_half" | "first_half_blocks" => return Ok(TargetSelector::FirstHalfBlocks),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("alternating:") {
            return match rest {
                "0" => Ok(TargetSelector::Alternating(0)),
                "1" => Ok(TargetSelector::Alternating(1)),
                _ => Err(Error::invalid(format!(
                    "alternating offset must be 0 or 1, got `{rest}`"
                ))),
            };
        }
        if let Some(rest) = s.strip_prefix("kinds:") {
            let kinds = rest
                .split(',')
                .map(|k| k.trim().parse())
                .collect::<Result<BTreeSet<LayerKind>>>()?;
            if kinds.is_empty() {
                return Err(Error::invalid("kinds selector needs at least one kind"));
            }
            return Ok(TargetSelector::Kinds(kinds));
        }
        if let Some(rest) = s.strip_prefix("paths:") {
            let paths: Vec<String> = rest
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(str::to_owned)
                .collect();
            if paths.is_empty() {
                return Err(Error::invalid("paths selector needs at least one path"));
            }
            return Ok(TargetSelector::Paths(paths));
        }
        s.parse::<LayerKind>()
            .map(TargetSelector::kind)
            .map_err(|_| Error::invalid(format!("unknown selector `{s}`")))
    }
}

impl TryFrom<String> for TargetSelector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TargetSelector> for String {
    fn from(s: TargetSelector) -> String {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{build_kim_cnn, build_toy_attention_model, KimCnnConfig, ToyAttentionConfig};

    fn cnn() -> ParamTree<f32> {
        build_kim_cnn(&KimCnnConfig::with_vocab(50), 0).unwrap()
    }

    fn toy(blocks: usize) -> ParamTree<f32> {
        build_toy_attention_model(
            &ToyAttentionConfig {
                vocab_size: 10,
                d_model: 4,
                blocks,
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn all_and_kinds() {
        let t = cnn();
        assert_eq!(select_targets(&t, &TargetSelector::All).unwrap().len(), 5);
        let conv = select_targets(&t, &TargetSelector::kind(LayerKind::Conv)).unwrap();
        assert_eq!(conv, vec!["conv.h3", "conv.h4", "conv.h5"]);
    }

    #[test]
    fn paths_keep_tree_order_and_reject_unknown() {
        let t = cnn();
        let sel = TargetSelector::Paths(vec!["dense".into(), "embedding".into()]);
        assert_eq!(select_targets(&t, &sel).unwrap(), vec!["embedding", "dense"]);
        let bad = TargetSelector::Paths(vec!["nope".into()]);
        assert!(matches!(select_targets(&t, &bad), Err(Error::UnknownPath(_))));
    }

    #[test]
    fn alternating_partitions_the_tree() {
        let t = toy(4);
        let a: BTreeSet<_> = select_targets(&t, &TargetSelector::Alternating(0))
            .unwrap()
            .into_iter()
            .collect();
        let b: BTreeSet<_> = select_targets(&t, &TargetSelector::Alternating(1))
            .unwrap()
            .into_iter()
            .collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.len() + b.len(), t.len());
    }

    #[test]
    fn first_half() {
        let t = toy(4);
        let sel = select_targets(&t, &TargetSelector::FirstHalfBlocks).unwrap();
        assert_eq!(
            sel,
            vec!["block0.attention", "block0.ffn", "block1.attention", "block1.ffn"]
        );
        assert!(select_targets(&cnn(), &TargetSelector::FirstHalfBlocks).is_err());
    }

    #[test]
    fn text_forms_roundtrip() {
        for s in [
            "all",
            "conv",
            "dense",
            "attention",
            "ffn",
            "embedding",
            "alternating:0",
            "alternating:1",
            "first_half",
            "kinds:conv,dense",
            "paths:a,b",
        ] {
            let sel: TargetSelector = s.parse().unwrap();
            assert_eq!(sel.to_string(), s);
        }
        assert!("alternating:2".parse::<TargetSelector>().is_err());
        assert!("bogus".parse::<TargetSelector>().is_err());
    }
}
