mod common;

use common::*;
use erosion_core::nn::{
    build_kim_cnn, build_toy_attention_model, forward_kim_cnn, forward_toy_attention, ToyAttentionConfig,
};
use erosion_core::tensor::{conv1d_valid, matmul, scaled_dot_attention, CounterRng};

#[test]
fn conv_matches_triple_loop() {
    let mut rng = CounterRng::new(1);
    for _ in 0..100 {
        let d = 1 + rng.below(8);
        let h = 1 + rng.below(8);
        let n = h + rng.below(9 - h);
        let x = random_mat(&mut rng, n, d);
        let w = random_mat(&mut rng, h, d);
        let b = uniform(&mut rng, -1.0, 1.0);
        let got = conv1d_valid(&to_tensor(&x), &to_tensor(&w), b).unwrap();
        assert!(max_rel_err(got.data(), &naive_conv(&x, &w, b)) < 1e-10);
    }
}

#[test]
fn matmul_matches_triple_loop() {
    let mut rng = CounterRng::new(2);
    for _ in 0..100 {
        let (n, k, m) = (1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(8));
        let a = random_mat(&mut rng, n, k);
        let b = random_mat(&mut rng, k, m);
        let got = to_mat(&matmul(&to_tensor(&a), &to_tensor(&b)).unwrap());
        assert!(max_rel_err(&got.concat(), &naive_matmul(&a, &b).concat()) < 1e-10);
    }
}

#[test]
fn attention_matches_unstabilized_softmax() {
    let mut rng = CounterRng::new(3);
    for _ in 0..100 {
        let (nq, nk, dk, dv) = (1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(8), 1 + rng.below(8));
        let q = random_mat(&mut rng, nq, dk);
        let k = random_mat(&mut rng, nk, dk);
        let v = random_mat(&mut rng, nk, dv);
        let got = to_mat(&scaled_dot_attention(&to_tensor(&q), &to_tensor(&k), &to_tensor(&v)).unwrap());
        assert!(max_rel_err(&got.concat(), &naive_attention(&q, &k, &v).concat()) < 1e-10);
    }
}

#[test]
fn kim_forward_matches_composed_oracle() {
    let mut rng = CounterRng::new(4);
    for seed in 0..20 {
        let mut cfg = tiny_kim(20);
        cfg.embed_dim = 4;
        let p = build_kim_cnn::<f64>(&cfg, seed).unwrap();
        for _ in 0..5 {
            let tokens = random_tokens(&mut rng, 20, 1, 9);
            let got = forward_kim_cnn(&cfg, &p, &tokens).unwrap();
            assert!(rel_err(got, oracle_kim_logit(&cfg, &p, &tokens)) < 1e-10);
        }
    }
}

#[test]
fn attention_forward_matches_composed_oracle() {
    let mut rng = CounterRng::new(5);
    for seed in 0..10 {
        let cfg = ToyAttentionConfig {
            vocab_size: 15,
            d_model: 4,
            blocks: 4,
        };
        let p = build_toy_attention_model::<f64>(&cfg, seed).unwrap();
        for _ in 0..5 {
            let tokens = random_tokens(&mut rng, 15, 1, 8);
            let got = forward_toy_attention(&cfg, &p, &tokens).unwrap();
            assert!(rel_err(got, oracle_attention_logit(&cfg, &p, &tokens)) < 1e-10);
        }
    }
}
