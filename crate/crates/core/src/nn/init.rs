use crate::error::Result;
use crate::tensor::{derive_seed, hash_str, CounterRng, Real, Tensor};

/// Uniform fill in `[-a, a]` with `a = sqrt(6 / (fan_in + fan_out))`, drawn
/// from a stream keyed by `(seed, path)`.
pub(crate) fn glorot_uniform<F: Real>(
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
    seed: u64,
    path: &str,
) -> Result<Tensor<F>> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let mut rng = CounterRng::new(derive_seed(seed, &[hash_str(path)]));
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| F::from_f64_lossy(a * (2.0 * rng.next_unit() - 1.0)))
        .collect();
    Tensor::new(shape.to_vec(), data)
}
