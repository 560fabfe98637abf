mod common;

use common::*;
use erosion_core::nn::{Architecture, ToyAttentionConfig};
use erosion_core::tensor::CounterRng;

#[test]
fn kim_cnn_gradients_match_central_differences() {
    let mut rng = CounterRng::new(10);
    for seed in 0..20 {
        let arch = Architecture::KimCnn(tiny_kim(12));
        let model = arch.build::<f64>(seed).unwrap();
        let batch = random_batch(&mut rng, 12, 4, 9);
        let err = finite_difference_error(&model, &batch, 1e-5);
        assert!(err < 1e-4, "model {seed}: max relative error {err:e}");
    }
}

#[test]
fn attention_gradients_match_central_differences() {
    let mut rng = CounterRng::new(11);
    for seed in 0..10 {
        let arch = Architecture::ToyAttention(ToyAttentionConfig {
            vocab_size: 10,
            d_model: 3,
            blocks: 2,
        });
        let model = arch.build::<f64>(seed).unwrap();
        let batch = random_batch(&mut rng, 10, 3, 6);
        let err = finite_difference_error(&model, &batch, 1e-5);
        assert!(err < 1e-4, "model {seed}: max relative error {err:e}");
    }
}

#[test]
fn embedding_rows_outside_batch_get_zero_gradient() {
    let model = Architecture::KimCnn(tiny_kim(12)).build::<f64>(3).unwrap();
    let batch = vec![erosion_core::data::Example::new(vec![5, 6, 7, 5], 1)];
    let (_, grads) = model.loss_and_grads(&batch).unwrap();
    let g = &grads.get("embedding").unwrap().weight;
    for row in [1, 2, 3, 4, 8, 9, 10, 11] {
        assert!(g.row(row).iter().all(|&x| x == 0.0));
    }
    assert!(g.row(5).iter().any(|&x| x != 0.0));
}
