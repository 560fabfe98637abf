use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};

/// Role of a parameter entry inside its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Embedding,
    Conv,
    Dense,
    Attention,
    Ffn,
}

impl LayerKind {
    pub const ALL: [LayerKind; 5] = [
        LayerKind::Embedding,
        LayerKind::Conv,
        LayerKind::Dense,
        LayerKind::Attention,
        LayerKind::Ffn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Embedding => "embedding",
            LayerKind::Conv => "conv",
            LayerKind::Dense => "dense",
            LayerKind::Attention => "attention",
            LayerKind::Ffn => "ffn",
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown layer kind `{s}`")))
    }
}

/// One named weight (and optional bias) of a model.
///
/// `kind`, `block` and `relu_units` are fixed at construction. `block` is the
/// transformer-block index for block-structured models and `None` for entries
/// that sit outside any block. `relu_units` is set when the first that-many
/// bias scalars each feed a ReLU unit, which is what makes an entry
/// deactivatable.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry<F = f32> {
    path: String,
    kind: LayerKind,
    block: Option<usize>,
    relu_units: Option<usize>,
    pub weight: Tensor<F>,
    pub bias: Option<Tensor<F>>,
}

impl<F: Real> ParamEntry<F> {
    pub fn new(
        path: impl Into<String>,
        kind: LayerKind,
        block: Option<usize>,
        weight: Tensor<F>,
        bias: Option<Tensor<F>>,
    ) -> Self {
        ParamEntry {
            path: path.into(),
            kind,
            block,
            relu_units: None,
            weight,
            bias,
        }
    }

    pub fn with_relu_units(mut self, units: usize) -> Self {
        self.relu_units = Some(units);
        self
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn kind(&self) -> LayerKind {
        self.kind
    }

    pub fn block(&self) -> Option<usize> {
        self.block
    }

    pub fn relu_units(&self) -> Option<usize> {
        self.relu_units
    }

    pub fn numel(&self) -> usize {
        self.weight.numel() + self.bias.as_ref().map_or(0, Tensor::numel)
    }

    /// Same metadata and shapes, all values zero.
    pub fn zeros_like(&self) -> Self {
        ParamEntry {
            path: self.path.clone(),
            kind: self.kind,
            block: self.block,
            relu_units: self.relu_units,
            weight: Tensor::zeros_like(&self.weight),
            bias: self.bias.as_ref().map(Tensor::zeros_like),
        }
    }

    pub fn bit_eq(&self, other: &Self) -> bool {
        self.path == other.path
            && self.kind == other.kind
            && self.block == other.block
            && self.relu_units == other.relu_units
            && self.weight.bit_eq(&other.weight)
            && match (&self.bias, &other.bias) {
                (Some(a), Some(b)) => a.bit_eq(b),
                (None, None) => true,
                _ => false,
            }
    }
}

/// Ordered collection of named parameters. Iteration order is construction
/// order and survives checkpointing.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTree<F = f32> {
    entries: Vec<ParamEntry<F>>,
}

impl<F: Real> ParamTree<F> {
    pub fn new(entries: Vec<ParamEntry<F>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.path.as_str()) {
                return Err(Error::invalid(format!("duplicate parameter path `{}`", e.path)));
            }
        }
        Ok(ParamTree { entries })
    }

    pub fn entries(&self) -> &[ParamEntry<F>] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [ParamEntry<F>] {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ParamEntry<F>> {
        self.entries.iter()
    }

    pub fn paths(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.path.clone()).collect()
    }

    pub fn position(&self, path: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.path == path)
    }

    pub fn get(&self, path: &str) -> Result<&ParamEntry<F>> {
        self.entries
            .iter()
            .find(|e| e.path == path)
            .ok_or_else(|| Error::UnknownPath(path.to_owned()))
    }

    pub fn get_mut(&mut self, path: &str) -> Result<&mut ParamEntry<F>> {
        self.entries
            .iter_mut()
            .find(|e| e.path == path)
            .ok_or_else(|| Error::UnknownPath(path.to_owned()))
    }

    pub fn num_params(&self) -> usize {
        self.entries.iter().map(ParamEntry::numel).sum()
    }

    pub fn zeros_like(&self) -> Self {
        ParamTree {
            entries: self.entries.iter().map(ParamEntry::zeros_like).collect(),
        }
    }

    /// Checks that `other` has the same paths, metadata and shapes.
    pub fn expect_same_layout(&self, other: &Self) -> Result<()> {
        if self.entries.len() != other.entries.len() {
            return Err(Error::shape(format!(
                "{} entries vs {}",
                self.entries.len(),
                other.entries.len()
            )));
        }
        for (a, b) in self.entries.iter().zip(&other.entries) {
            let bias_ok = match (&a.bias, &b.bias) {
                (Some(x), Some(y)) => x.shape() == y.shape(),
                (None, None) => true,
                _ => false,
            };
            if a.path != b.path || a.weight.shape() != b.weight.shape() || !bias_ok {
                return Err(Error::shape(format!("layout differs at `{}` / `{}`", a.path, b.path)));
            }
        }
        Ok(())
    }

    pub fn bit_eq(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len() && self.entries.iter().zip(&other.entries).all(|(a, b)| a.bit_eq(b))
    }

    /// Euclidean norm over every scalar, in `f64`.
    pub fn global_norm(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| {
                e.weight
                    .data()
                    .iter()
                    .chain(e.bias.iter().flat_map(|b| b.data().iter()))
            })
            .map(|x| x.to_f64().unwrap_or(f64::NAN).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn cast<G: Real>(&self) -> ParamTree<G> {
        ParamTree {
            entries: self
                .entries
                .iter()
                .map(|e| ParamEntry {
                    path: e.path.clone(),
                    kind: e.kind,
                    block: e.block,
                    relu_units: e.relu_units,
                    weight: e.weight.cast(),
                    bias: e.bias.as_ref().map(Tensor::cast),
                })
                .collect(),
        }
    }
}
