//! Controlled degradation of trained text classifiers.
//!
//! The crate trains small sentiment models (a Kim-style CNN and a toy
//! attention stack), then erodes them with post-training Gaussian noise,
//! train-time update noise, synaptic pruning and neuronal deactivation, and
//! measures how accuracy and predicted labels drift as the damage grows.
//!
//! ```
//! use erosion_core::data::{split, synthetic_sentiment, SyntheticConfig};
//! use erosion_core::erosion::{apply_erosion, ErosionSpec, TargetSelector};
//! use erosion_core::nn::{evaluate, Architecture, KimCnnConfig};
//!
//! let ds = synthetic_sentiment(&SyntheticConfig::small(40), 0).unwrap();
//! let (_, val) = split(&ds, 0.5, 0).unwrap();
//! let arch = Architecture::KimCnn(KimCnnConfig::with_vocab(ds.vocab.len()));
//! let model = arch.build::<f32>(0).unwrap();
//! let spec = ErosionSpec::noise_post(TargetSelector::All, 0.0, 1);
//! let (eroded, _) = apply_erosion(&model.params, &spec).unwrap();
//! assert!(eroded.bit_eq(&model.params));
//! let (acc, _) = evaluate(&model, &val.examples).unwrap();
//! assert!((0.0..=1.0).contains(&acc));
//! ```

pub mod data;
pub mod erosion;
mod error;
pub mod harness;
pub mod nn;
pub mod tensor;

pub use error::{Error, Result};
pub use nn::{LayerKind, Model, ParamEntry, ParamTree};
pub use tensor::{GaussianSpec, Real, Tensor};
