use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::params::ParamTree;
use crate::tensor::{derive_seed, gaussian_sample, hash_str, GaussianSpec, Real, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |b: f64| b > 0.0 && b < 1.0;
        if !(self.lr > 0.0) || !(self.eps > 0.0) || !in_unit(self.beta1) || !in_unit(self.beta2) {
            return Err(Error::invalid(format!("invalid Adam hyper-parameters {self:?}")));
        }
        Ok(())
    }
}

/// Adam moments for one parameter tree.
#[derive(Debug, Clone)]
pub struct OptimizerState<F = f32> {
    pub config: AdamConfig,
    t: u64,
    first: ParamTree<F>,
    second: ParamTree<F>,
}

impl<F: Real> OptimizerState<F> {
    pub fn new(config: AdamConfig, params: &ParamTree<F>) -> Result<Self> {
        config.validate()?;
        Ok(OptimizerState {
            config,
            t: 0,
            first: params.zeros_like(),
            second: params.zeros_like(),
        })
    }

    /// Number of steps taken so far.
    pub fn step(&self) -> u64 {
        self.t
    }
}

/// Gaussian perturbation added to parameter updates.
///
/// Each scalar gets a fresh draw every step; the stream for one tensor is
/// keyed by `(spec.seed, step, hash(path), part)` with part 0 for the weight
/// and 1 for the bias. `targets = None` perturbs every entry.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateNoise {
    pub spec: GaussianSpec,
    pub targets: Option<BTreeSet<String>>,
}

impl UpdateNoise {
    pub fn all(spec: GaussianSpec) -> Self {
        UpdateNoise { spec, targets: None }
    }

    fn applies_to(&self, path: &str) -> bool {
        self.targets.as_ref().is_none_or(|t| t.contains(path))
    }

    fn sample<F: Real>(&self, step: u64, path: &str, part: u64, shape: &[usize]) -> Result<Tensor<F>> {
        let seed = derive_seed(self.spec.seed, &[step, hash_str(path), part]);
        gaussian_sample(shape, &GaussianSpec { seed, ..self.spec })
    }
}

fn update_tensor<F: Real>(
    param: &mut Tensor<F>,
    grad: &Tensor<F>,
    m: &mut Tensor<F>,
    v: &mut Tensor<F>,
    cfg: &AdamConfig,
    correction1: f64,
    correction2: f64,
) -> Result<()> {
    param.expect_same_shape(grad)?;
    let b1 = F::from_f64_lossy(cfg.beta1);
    let b2 = F::from_f64_lossy(cfg.beta2);
    let lr = F::from_f64_lossy(cfg.lr);
    let eps = F::from_f64_lossy(cfg.eps);
    let c1 = F::from_f64_lossy(correction1);
    let c2 = F::from_f64_lossy(correction2);
    let one = F::one();
    for (((p, &g), mi), vi) in param
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(m.data_mut())
        .zip(v.data_mut())
    {
        *mi = b1 * *mi + (one - b1) * g;
        *vi = b2 * *vi + (one - b2) * g * g;
        let m_hat = *mi / c1;
        let v_hat = *vi / c2;
        *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// One bias-corrected Adam step, in place. With `noise`, each targeted scalar
/// then receives an independent Gaussian draw on top of its update.
pub fn adam_step<F: Real>(
    params: &mut ParamTree<F>,
    grads: &ParamTree<F>,
    state: &mut OptimizerState<F>,
    noise: Option<&UpdateNoise>,
) -> Result<()> {
    params.expect_same_layout(grads)?;
    params.expect_same_layout(&state.first)?;
    state.t += 1;
    let t = state.t;
    let cfg = state.config;
    let correction1 = 1.0 - cfg.beta1.powf(t as f64);
    let correction2 = 1.0 - cfg.beta2.powf(t as f64);
    let noise = noise.filter(|n| !n.spec.is_null());

    for (i, entry) in params.entries_mut().iter_mut().enumerate() {
        let g = &grads.entries()[i];
        let m = &mut state.first.entries_mut()[i];
        let v = &mut state.second.entries_mut()[i];
        update_tensor(
            &mut entry.weight,
            &g.weight,
            &mut m.weight,
            &mut v.weight,
            &cfg,
            correction1,
            correction2,
        )?;
        if let (Some(b), Some(gb), Some(mb), Some(vb)) =
            (entry.bias.as_mut(), g.bias.as_ref(), m.bias.as_mut(), v.bias.as_mut())
        {
            update_tensor(b, gb, mb, vb, &cfg, correction1, correction2)?;
        }

        if let Some(noise) = noise.filter(|n| n.applies_to(entry.path())) {
            let path = entry.path().to_owned();
            let eps = noise.sample(t, &path, 0, entry.weight.shape())?;
            entry.weight.add_assign(&eps)?;
            if let Some(b) = entry.bias.as_mut() {
                let eps = noise.sample(t, &path, 1, b.shape())?;
                b.add_assign(&eps)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::{LayerKind, ParamEntry};

    fn scalar_tree(w: f64) -> ParamTree<f64> {
        ParamTree::new(vec![ParamEntry::new(
            "w",
            LayerKind::Dense,
            None,
            Tensor::vector(vec![w]).unwrap(),
            Some(Tensor::vector(vec![0.5]).unwrap()),
        )])
        .unwrap()
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = scalar_tree(0.3);
        let before = p.clone();
        let g = p.zeros_like();
        let mut st = OptimizerState::new(AdamConfig::default(), &p).unwrap();
        adam_step(&mut p, &g, &mut st, None).unwrap();
        assert!(p.bit_eq(&before));
        assert_eq!(st.step(), 1);
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        // m̂ = g and v̂ = g² after one step, so Δ = -lr·g/(|g| + ε).
        for g in [1.0, -3.0, 0.25] {
            let mut p = scalar_tree(0.0);
            let mut grads = p.zeros_like();
            grads.entries_mut()[0].weight.data_mut()[0] = g;
            let mut st = OptimizerState::new(AdamConfig::default(), &p).unwrap();
            adam_step(&mut p, &grads, &mut st, None).unwrap();
            let delta = p.entries()[0].weight.data()[0];
            let closed = -0.001 * g / (g.abs() + 1e-8);
            assert!((delta - closed).abs() < 1e-15, "{delta} vs {closed}");
            assert!((delta + 0.001 * g.signum()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_sigma_noise_matches_noiseless() {
        let mut a = scalar_tree(0.1);
        let mut b = a.clone();
        let mut grads = a.zeros_like();
        grads.entries_mut()[0].weight.data_mut()[0] = 0.7;
        let mut sa = OptimizerState::new(AdamConfig::default(), &a).unwrap();
        let mut sb = sa.clone();
        let noise = UpdateNoise::all(GaussianSpec::new(0.0, 0.0, 9));
        for _ in 0..5 {
            adam_step(&mut a, &grads, &mut sa, None).unwrap();
            adam_step(&mut b, &grads, &mut sb, Some(&noise)).unwrap();
        }
        assert!(a.bit_eq(&b));
    }

    #[test]
    fn noise_respects_targets() {
        let mut p = scalar_tree(0.1);
        let before = p.clone();
        let g = p.zeros_like();
        let mut st = OptimizerState::new(AdamConfig::default(), &p).unwrap();
        let noise = UpdateNoise {
            spec: GaussianSpec::new(0.0, 0.1, 3),
            targets: Some(BTreeSet::from(["other".to_owned()])),
        };
        adam_step(&mut p, &g, &mut st, Some(&noise)).unwrap();
        assert!(p.bit_eq(&before));
        let noise = UpdateNoise::all(GaussianSpec::new(0.0, 0.1, 3));
        adam_step(&mut p, &g, &mut st, Some(&noise)).unwrap();
        assert!(!p.bit_eq(&before));
    }

    #[test]
    fn layout_mismatch_rejected() {
        let mut p = scalar_tree(0.1);
        let other = ParamTree::new(vec![ParamEntry::new(
            "w",
            LayerKind::Dense,
            None,
            Tensor::<f64>::zeros(&[2]).unwrap(),
            Some(Tensor::zeros(&[1]).unwrap()),
        )])
        .unwrap();
        let mut st = OptimizerState::new(AdamConfig::default(), &p).unwrap();
        assert!(adam_step(&mut p, &other, &mut st, None).is_err());
    }
}
