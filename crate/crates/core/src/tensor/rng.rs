//! Portable counter-based random numbers.
//!
//! The generator is SplitMix64 used in counter mode: the `i`-th 64-bit word of
//! stream `key` is `mix64(key + (i + 1) * 0x9E3779B97F4A7C15)` (wrapping), where
//! `mix64` is the SplitMix64 finalizer. Uniforms in (0, 1] take the top 53 bits:
//! `((w >> 11) + 1) * 2^-53`. Gaussians use Box–Muller on consecutive word pairs
//! `(2j, 2j + 1)`: `r = sqrt(-2 ln u1)`, `θ = 2π u2`, element `2j` gets `r cos θ`
//! and element `2j + 1` gets `r sin θ`. All arithmetic is IEEE `f64`, so a
//! given seed reproduces the same values on every platform.

use crate::error::{Error, Result};
use crate::tensor::{Real, Tensor};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn word(key: u64, counter: u64) -> u64 {
    mix64(key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
}

fn unit_open_closed(w: u64) -> f64 {
    ((w >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Folds a list of words into a child seed: `h = mix64(base ^ GOLDEN)`, then for
/// each word `h = mix64(h ^ mix64(word + GOLDEN))`.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix64(base ^ GOLDEN), |h, &w| mix64(h ^ mix64(w.wrapping_add(GOLDEN))))
}

/// FNV-1a over the UTF-8 bytes; used to fold parameter paths into seeds.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Sequential view over one counter stream.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: seed, counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let w = word(self.key, self.counter);
        self.counter += 1;
        w
    }

    /// Uniform in (0, 1].
    pub fn next_unit(&mut self) -> f64 {
        unit_open_closed(self.next_u64())
    }

    /// Uniform integer in `0..n` by rejection of the biased tail.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let w = self.next_u64();
            if w < zone {
                return (w % n) as usize;
            }
        }
    }

    /// Fisher–Yates, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// `k` distinct indices from `0..n`, uniformly without replacement, in
    /// draw order (partial Fisher–Yates from the front).
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// Parameters of an i.i.d. normal fill.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianSpec {
    pub mean: f64,
    pub std: f64,
    pub seed: u64,
}

impl GaussianSpec {
    pub fn new(mean: f64, std: f64, seed: u64) -> Self {
        GaussianSpec { mean, std, seed }
    }

    pub fn is_null(&self) -> bool {
        self.std == 0.0 && self.mean == 0.0
    }
}

/// Tensor of the given shape filled with N(mean, std²) draws from the stream
/// keyed by `spec.seed`. A zero `std` yields exactly `mean` everywhere.
pub fn gaussian_sample<F: Real>(shape: &[usize], spec: &GaussianSpec) -> Result<Tensor<F>> {
    if shape.is_empty() {
        return Err(Error::EmptyShape);
    }
    if !(spec.std >= 0.0) || !spec.std.is_finite() || !spec.mean.is_finite() {
        return Err(Error::invalid(format!(
            "gaussian std must be finite and non-negative (got {})",
            spec.std
        )));
    }
    let numel: usize = shape.iter().product();
    if spec.std == 0.0 {
        return Tensor::full(shape, F::from_f64_lossy(spec.mean));
    }
    let mut data = Vec::with_capacity(numel);
    let mut pair = 0u64;
    while data.len() < numel {
        let u1 = unit_open_closed(word(spec.seed, 2 * pair));
        let u2 = unit_open_closed(word(spec.seed, 2 * pair + 1));
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        data.push(F::from_f64_lossy(spec.mean + spec.std * r * theta.cos()));
        if data.len() < numel {
            data.push(F::from_f64_lossy(spec.mean + spec.std * r * theta.sin()));
        }
        pair += 1;
    }
    Tensor::new(shape.to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_std_is_constant() {
        let t: Tensor<f64> = gaussian_sample(&[3], &GaussianSpec::new(2.5, 0.0, 7)).unwrap();
        assert_eq!(t.data(), &[2.5, 2.5, 2.5]);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let spec = GaussianSpec::new(0.0, 1.0, 42);
        let a: Tensor<f64> = gaussian_sample(&[4], &spec).unwrap();
        let b: Tensor<f64> = gaussian_sample(&[4], &spec).unwrap();
        assert!(a.bit_eq(&b));
        let c: Tensor<f64> = gaussian_sample(&[4], &GaussianSpec::new(0.0, 1.0, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn empty_shape_rejected() {
        let err = gaussian_sample::<f32>(&[], &GaussianSpec::new(0.0, 1.0, 0)).unwrap_err();
        assert_eq!(err.to_string(), "empty shape");
    }

    #[test]
    fn negative_std_rejected() {
        assert!(gaussian_sample::<f32>(&[2], &GaussianSpec::new(0.0, -1.0, 0)).is_err());
    }

    #[test]
    fn million_draws_match_standard_normal_moments() {
        let n = 1_000_000usize;
        let t: Tensor<f64> = gaussian_sample(&[n], &GaussianSpec::new(0.0, 1.0, 1)).unwrap();
        let mean = t.data().iter().sum::<f64>() / n as f64;
        let var = t.data().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // 4σ/√n for the mean; the sample variance has sd √(2/n) ≈ 0.0014.
        assert!(mean.abs() < 0.004, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn prefix_stability() {
        // A longer draw extends a shorter one with the same seed.
        let spec = GaussianSpec::new(0.0, 1.0, 9);
        let a: Tensor<f64> = gaussian_sample(&[5], &spec).unwrap();
        let b: Tensor<f64> = gaussian_sample(&[8], &spec).unwrap();
        assert_eq!(a.data(), &b.data()[..5]);
    }

    #[test]
    fn below_and_sampling() {
        let mut rng = CounterRng::new(3);
        for _ in 0..1000 {
            assert!(rng.below(7) < 7);
        }
        let picks = rng.sample_indices(100, 25);
        let mut sorted = picks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 25);
        assert!(sorted.iter().all(|&i| i < 100));
    }

    #[test]
    fn derived_seeds_differ() {
        let s = 11;
        assert_ne!(derive_seed(s, &[1]), derive_seed(s, &[2]));
        assert_ne!(derive_seed(s, &[0, 1]), derive_seed(s, &[1, 0]));
        assert_eq!(derive_seed(s, &[4, 5]), derive_seed(s, &[4, 5]));
        assert_ne!(hash_str("conv.k3"), hash_str("conv.k4"));
    }
}
