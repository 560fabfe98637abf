use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use erosion_bench::kim_model;
use erosion_core::erosion::{apply_erosion, ErosionMethod, ErosionSpec, TargetSelector};

fn operators(c: &mut Criterion) {
    let params = kim_model(0).params;
    let conv: TargetSelector = "conv".parse().unwrap();
    let specs = [
        ("noise_post_all", ErosionSpec::noise_post(TargetSelector::All, 0.01, 1)),
        ("prune_all_half", ErosionSpec::prune(TargetSelector::All, 0.5, 1)),
        ("deactivate_conv_half", ErosionSpec::deactivate(conv.clone(), 0.5, 1)),
        (
            "combo_prune_noise",
            ErosionSpec::combo(ErosionMethod::ComboPruneThenNoise, TargetSelector::All, 0.5, 0.01, 1),
        ),
        (
            "combo_deactivate_noise",
            ErosionSpec::combo(ErosionMethod::ComboDeactivateThenNoise, conv, 0.5, 0.01, 1),
        ),
    ];
    let mut g = c.benchmark_group("erosion");
    for (name, spec) in &specs {
        g.bench_function(*name, |b| b.iter(|| apply_erosion(black_box(&params), spec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, operators);
criterion_main!(benches);
