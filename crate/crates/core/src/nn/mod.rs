//! Models, parameter trees, manual backprop, Adam and the training loop.

mod adam;
pub mod attention_model;
mod checkpoint;
mod init;
pub mod kim_cnn;
mod model;
mod params;
mod train;

pub use adam::{adam_step, AdamConfig, OptimizerState, UpdateNoise};
pub use attention_model::{
    backward_toy_attention, build_toy_attention_model, forward_toy_attention, ToyAttentionConfig,
};
pub use checkpoint::{decode_model, encode_model, load_model, save_model};
pub use kim_cnn::{backward_kim_cnn, build_kim_cnn, forward_kim_cnn, KimCnnConfig};
pub use model::{evaluate, Architecture, Model};
pub use params::{LayerKind, ParamEntry, ParamTree};
pub use train::{train, EpochStats, TrainConfig};
