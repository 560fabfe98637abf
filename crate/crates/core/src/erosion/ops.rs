use std::collections::BTreeMap;

use crate::erosion::selector::{select_targets, TargetSelector};
use crate::erosion::spec::{ErosionMethod, ErosionReceipt, ErosionSpec};
use crate::error::{Error, Result};
use crate::nn::{ParamTree, UpdateNoise};
use crate::tensor::{derive_seed, gaussian_sample, hash_str, CounterRng, GaussianSpec, Real};

/// Bias shift applied to deactivated units.
pub const DEACTIVATION_SHIFT: f64 = 1.0e6;

/// `round(fraction · n)`, half away from zero.
pub fn scaled_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64).round() as usize
}

/// Seeds of the two stages of a combo: `(seed, 1)` and `(seed, 2)`.
pub fn combo_stage_seeds(seed: u64) -> (u64, u64) {
    (derive_seed(seed, &[1]), derive_seed(seed, &[2]))
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!("fraction must be in [0, 1] (got {fraction})")));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be finite and >= 0 (got {sigma})")));
    }
    Ok(())
}

fn noise_seed(seed: u64, path: &str, part: u64) -> u64 {
    derive_seed(seed, &[hash_str(path), part])
}

fn noise_with_mask<F: Real>(
    params: &ParamTree<F>,
    selector: &TargetSelector,
    sigma: f64,
    seed: u64,
    mask: &BTreeMap<String, Vec<usize>>,
) -> Result<(ParamTree<F>, ErosionReceipt)> {
    check_sigma(sigma)?;
    let targets = select_targets(params, selector)?;
    let mut out = params.clone();
    let mut perturbed = 0;
    for path in &targets {
        let entry = out.get_mut(path)?;
        let masked = mask.get(path).map_or(&[][..], Vec::as_slice);
        perturbed += entry.numel() - masked.len();
        if sigma == 0.0 {
            continue;
        }
        let spec = GaussianSpec::new(0.0, sigma, noise_seed(seed, path, 0));
        let g = gaussian_sample::<F>(entry.weight.shape(), &spec)?;
        // Masked positions are skipped, not given +0, so pruned weights keep
        // their exact bit pattern.
        let mut keep = vec![true; g.numel()];
        for &i in masked {
            keep[i] = false;
        }
        for ((w, &n), keep) in entry.weight.data_mut().iter_mut().zip(g.data()).zip(keep) {
            if keep {
                *w = *w + n;
            }
        }
        if let Some(b) = entry.bias.as_mut() {
            let spec = GaussianSpec::new(0.0, sigma, noise_seed(seed, path, 1));
            b.add_assign(&gaussian_sample(b.shape(), &spec)?)?;
        }
    }
    Ok((
        out,
        ErosionReceipt {
            affected_paths: targets,
            scalars_perturbed: perturbed,
            seed_used: seed,
            ..ErosionReceipt::default()
        },
    ))
}

/// Adds independent N(0, σ²) draws to the weight and bias of every selected
/// entry. The weight of entry `p` uses stream `(seed, hash(p), 0)`, its bias
/// `(seed, hash(p), 1)`.
pub fn inject_noise_post<F: Real>(
    params: &ParamTree<F>,
    selector: &TargetSelector,
    sigma: f64,
    seed: u64,
) -> Result<(ParamTree<F>, ErosionReceipt)> {
    noise_with_mask(params, selector, sigma, seed, &BTreeMap::new())
}

/// Zeroes exactly `round(fraction · numel)` weight scalars of each selected
/// entry, chosen uniformly without replacement from stream `(seed, hash(path))`.
/// Biases are left alone.
pub fn prune_synapses<F: Real>(
    params: &ParamTree<F>,
    selector: &TargetSelector,
    fraction: f64,
    seed: u64,
) -> Result<(ParamTree<F>, ErosionReceipt)> {
    check_fraction(fraction)?;
    let targets = select_targets(params, selector)?;
    let mut out = params.clone();
    let mut receipt = ErosionReceipt {
        seed_used: seed,
        ..ErosionReceipt::default()
    };
    for path in &targets {
        let entry = out.get_mut(path)?;
        let n = entry.weight.numel();
        let k = scaled_count(fraction, n);
        let mut rng = CounterRng::new(derive_seed(seed, &[hash_str(path)]));
        let mut positions = rng.sample_indices(n, k);
        positions.sort_unstable();
        let w = entry.weight.data_mut();
        for &i in &positions {
            w[i] = F::zero();
        }
        receipt.scalars_zeroed += k;
        receipt.pruned_positions.push((path.clone(), positions));
    }
    receipt.affected_paths = targets;
    Ok((out, receipt))
}

/// Shifts the bias of `round(fraction · units)` ReLU units per selected entry
/// down by [`DEACTIVATION_SHIFT`], so their post-activation output is zero
/// whenever the pre-bias activation is smaller than the shift in magnitude.
///
/// Every selected entry must carry a bias that feeds a ReLU; output heads and
/// embeddings do not qualify.
pub fn deactivate_neurons<F: Real>(
    params: &ParamTree<F>,
    selector: &TargetSelector,
    fraction: f64,
    seed: u64,
) -> Result<(ParamTree<F>, ErosionReceipt)> {
    check_fraction(fraction)?;
    let targets = select_targets(params, selector)?;
    for path in &targets {
        let e = params.get(path)?;
        if e.bias.is_none() || e.relu_units().is_none() {
            return Err(Error::NotDeactivatable(path.clone()));
        }
    }
    let shift = F::from_f64_lossy(DEACTIVATION_SHIFT);
    let mut out = params.clone();
    let mut receipt = ErosionReceipt {
        seed_used: seed,
        ..ErosionReceipt::default()
    };
    for path in &targets {
        let entry = out.get_mut(path)?;
        let units = entry.relu_units().expect("checked");
        let k = scaled_count(fraction, units);
        let mut rng = CounterRng::new(derive_seed(seed, &[hash_str(path)]));
        let mut chosen = rng.sample_indices(units, k);
        chosen.sort_unstable();
        let b = entry.bias.as_mut().expect("checked").data_mut();
        for &u in &chosen {
            b[u] = b[u] - shift;
        }
        receipt.neurons_deactivated += k;
        receipt.deactivated_units.push((path.clone(), chosen));
    }
    receipt.affected_paths = targets;
    Ok((out, receipt))
}

/// Prune or deactivate with seed `(seed, 1)`, then add post-training noise with
/// seed `(seed, 2)` to the same selection. Pruned weights stay exactly zero;
/// deactivated biases keep their shift with noise added on top.
pub fn apply_combo<F: Real>(params: &ParamTree<F>, spec: &ErosionSpec) -> Result<(ParamTree<F>, ErosionReceipt)> {
    spec.validate()?;
    let fraction = spec.fraction.expect("validated");
    let sigma = spec.sigma.expect("validated");
    let (s1, s2) = combo_stage_seeds(spec.seed);
    let (stage1, first) = match spec.method {
        ErosionMethod::ComboPruneThenNoise => prune_synapses(params, &spec.selector, fraction, s1)?,
        ErosionMethod::ComboDeactivateThenNoise => deactivate_neurons(params, &spec.selector, fraction, s1)?,
        m => return Err(Error::invalid(format!("{m} is not a combo method"))),
    };
    let mask: BTreeMap<String, Vec<usize>> = first.pruned_positions.iter().cloned().collect();
    let (out, second) = noise_with_mask(&stage1, &spec.selector, sigma, s2, &mask)?;
    Ok((
        out,
        ErosionReceipt {
            affected_paths: second.affected_paths,
            scalars_perturbed: second.scalars_perturbed,
            scalars_zeroed: first.scalars_zeroed,
            neurons_deactivated: first.neurons_deactivated,
            seed_used: spec.seed,
            pruned_positions: first.pruned_positions,
            deactivated_units: first.deactivated_units,
        },
    ))
}

/// Applies any post-training erosion described by `spec`.
pub fn apply_erosion<F: Real>(params: &ParamTree<F>, spec: &ErosionSpec) -> Result<(ParamTree<F>, ErosionReceipt)> {
    spec.validate()?;
    match spec.method {
        ErosionMethod::NoisePost => {
            inject_noise_post(params, &spec.selector, spec.sigma.expect("validated"), spec.seed)
        }
        ErosionMethod::PruneSynapses => {
            prune_synapses(params, &spec.selector, spec.fraction.expect("validated"), spec.seed)
        }
        ErosionMethod::DeactivateNeurons => {
            deactivate_neurons(params, &spec.selector, spec.fraction.expect("validated"), spec.seed)
        }
        ErosionMethod::ComboPruneThenNoise | ErosionMethod::ComboDeactivateThenNoise => apply_combo(params, spec),
        ErosionMethod::NoiseTrain => Err(Error::invalid(
            "noise_train acts on optimizer updates; pass it to training as a hook",
        )),
    }
}

/// Train-time noise hook: fresh N(0, σ²) on each selected entry's update at
/// every optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHook {
    pub selector: TargetSelector,
    pub sigma: f64,
    pub seed: u64,
}

pub fn make_train_hook(spec: &ErosionSpec) -> Result<TrainHook> {
    if spec.method != ErosionMethod::NoiseTrain {
        return Err(Error::invalid(format!(
            "train hook needs method noise_train, got {}",
            spec.method
        )));
    }
    spec.validate()?;
    Ok(TrainHook {
        selector: spec.selector.clone(),
        sigma: spec.sigma.expect("validated"),
        seed: spec.seed,
    })
}

impl TrainHook {
    /// Resolves the selector against a concrete tree.
    pub fn bind<F: Real>(&self, params: &ParamTree<F>) -> Result<UpdateNoise> {
        let targets = select_targets(params, &self.selector)?;
        Ok(UpdateNoise {
            spec: GaussianSpec::new(0.0, self.sigma, self.seed),
            targets: Some(targets.into_iter().collect()),
        })
    }
}
