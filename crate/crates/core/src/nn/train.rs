use serde::{Deserialize, Serialize};

use crate::data::Example;
use crate::erosion::{make_train_hook, ErosionSpec};
use crate::error::{Error, Result};
use crate::nn::adam::{adam_step, AdamConfig, OptimizerState};
use crate::nn::model::{evaluate, Model};
use crate::tensor::{derive_seed, CounterRng, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Train-time noise, applied to every optimizer update.
    pub erosion_hook: Option<ErosionSpec>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 64,
            seed: 0,
            erosion_hook: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean training loss over the epoch's batches, weighted by batch size.
    pub train_loss: f64,
    pub val_accuracy: Option<f64>,
}

/// Mini-batch Adam training. The example order of epoch `e` is a shuffle keyed
/// by `(seed, e)`, so the whole run is a function of its inputs.
pub fn train<F: Real>(
    mut model: Model<F>,
    train_set: &[Example],
    val_set: &[Example],
    config: &TrainConfig,
    adam: &AdamConfig,
) -> Result<(Model<F>, Vec<EpochStats>)> {
    if config.epochs == 0 {
        return Err(Error::invalid("epochs must be at least 1"));
    }
    if config.batch_size == 0 {
        return Err(Error::invalid("batch_size must be at least 1"));
    }
    if train_set.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    let noise = config
        .erosion_hook
        .as_ref()
        .map(|spec| make_train_hook(spec)?.bind(&model.params))
        .transpose()?;
    let mut state = OptimizerState::new(*adam, &model.params)?;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut batch = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.epochs {
        order.sort_unstable();
        CounterRng::new(derive_seed(config.seed, &[epoch as u64])).shuffle(&mut order);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_set[i].clone()));
            let (loss, grads) = model.loss_and_grads(&batch)?;
            loss_sum += loss.to_f64().unwrap_or(f64::NAN) * chunk.len() as f64;
            adam_step(&mut model.params, &grads, &mut state, noise.as_ref())?;
        }
        let val_accuracy = if val_set.is_empty() {
            None
        } else {
            Some(evaluate(&model, val_set)?.0)
        };
        history.push(EpochStats {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            val_accuracy,
        });
    }
    Ok((model, history))
}
