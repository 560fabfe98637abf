//! Neural erosion operators: post-training noise, synaptic pruning, neuronal
//! deactivation, their combinations, and the train-time noise hook. Every
//! operator is a pure function from a parameter tree to a new tree plus a
//! receipt; the input is never modified.

mod ops;
mod selector;
mod spec;

pub use ops::{
    apply_combo, apply_erosion, combo_stage_seeds, deactivate_neurons, inject_noise_post, make_train_hook,
    prune_synapses, scaled_count, TrainHook, DEACTIVATION_SHIFT,
};
pub use selector::{select_targets, TargetSelector};
pub use spec::{ErosionMethod, ErosionReceipt, ErosionSpec};
