use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::erosion::selector::TargetSelector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErosionMethod {
    /// Gaussian noise on every optimizer update during training.
    NoiseTrain,
    /// Gaussian noise added once to trained parameters.
    NoisePost,
    /// Zero a fraction of individual weights.
    PruneSynapses,
    /// Push a fraction of ReLU units permanently below zero.
    DeactivateNeurons,
    ComboPruneThenNoise,
    ComboDeactivateThenNoise,
}

impl ErosionMethod {
    pub const ALL: [ErosionMethod; 6] = [
        ErosionMethod::NoiseTrain,
        ErosionMethod::NoisePost,
        ErosionMethod::PruneSynapses,
        ErosionMethod::DeactivateNeurons,
        ErosionMethod::ComboPruneThenNoise,
        ErosionMethod::ComboDeactivateThenNoise,
    ];

    pub fn uses_sigma(self) -> bool {
        !matches!(self, ErosionMethod::PruneSynapses | ErosionMethod::DeactivateNeurons)
    }

    pub fn uses_fraction(self) -> bool {
        !matches!(self, ErosionMethod::NoiseTrain | ErosionMethod::NoisePost)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErosionMethod::NoiseTrain => "noise_train",
            ErosionMethod::NoisePost => "noise_post",
            ErosionMethod::PruneSynapses => "prune_synapses",
            ErosionMethod::DeactivateNeurons => "deactivate_neurons",
            ErosionMethod::ComboPruneThenNoise => "combo_prune_then_noise",
            ErosionMethod::ComboDeactivateThenNoise => "combo_deactivate_then_noise",
        }
    }
}

impl fmt::Display for ErosionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErosionMethod {
    type Err = Error;

    /// Accepts the canonical names plus the short CLI aliases `prune`,
    /// `deactivate`, `combo_prune_noise` and `combo_deactivate_noise`.
    fn from_str(s: &str) -> Result<Self> {
        let m = match s {
            "prune" => ErosionMethod::PruneSynapses,
            "deactivate" => ErosionMethod::DeactivateNeurons,
            "combo_prune_noise" => ErosionMethod::ComboPruneThenNoise,
            "combo_deactivate_noise" => ErosionMethod::ComboDeactivateThenNoise,
            other => *Self::ALL
                .iter()
                .find(|m| m.as_str() == other)
                .ok_or_else(|| Error::invalid(format!("unknown erosion method `{other}`")))?,
        };
        Ok(m)
    }
}

/// One erosion intervention.
///
/// `sigma` is present exactly when the method injects noise and `fraction`
/// exactly when it prunes or deactivates; combos carry both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErosionSpec {
    pub method: ErosionMethod,
    pub selector: TargetSelector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ErosionSpec {
    pub fn noise_post(selector: TargetSelector, sigma: f64, seed: u64) -> Self {
        Self::build(ErosionMethod::NoisePost, selector, Some(sigma), None, seed)
    }

    pub fn noise_train(selector: TargetSelector, sigma: f64, seed: u64) -> Self {
        Self::build(ErosionMethod::NoiseTrain, selector, Some(sigma), None, seed)
    }

    pub fn prune(selector: TargetSelector, fraction: f64, seed: u64) -> Self {
        Self::build(ErosionMethod::PruneSynapses, selector, None, Some(fraction), seed)
    }

    pub fn deactivate(selector: TargetSelector, fraction: f64, seed: u64) -> Self {
        Self::build(ErosionMethod::DeactivateNeurons, selector, None, Some(fraction), seed)
    }

    pub fn combo(method: ErosionMethod, selector: TargetSelector, fraction: f64, sigma: f64, seed: u64) -> Self {
        Self::build(method, selector, Some(sigma), Some(fraction), seed)
    }

    fn build(
        method: ErosionMethod,
        selector: TargetSelector,
        sigma: Option<f64>,
        fraction: Option<f64>,
        seed: u64,
    ) -> Self {
        ErosionSpec {
            method,
            selector,
            sigma,
            fraction,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.method;
        match (m.uses_sigma(), self.sigma) {
            (true, None) => return Err(Error::invalid(format!("{m} requires sigma"))),
            (false, Some(_)) => return Err(Error::invalid(format!("{m} does not take sigma"))),
            (true, Some(s)) if !(s >= 0.0 && s.is_finite()) => {
                return Err(Error::invalid(format!("sigma must be finite and >= 0 (got {s})")))
            }
            _ => {}
        }
        match (m.uses_fraction(), self.fraction) {
            (true, None) => return Err(Error::invalid(format!("{m} requires fraction"))),
            (false, Some(_)) => return Err(Error::invalid(format!("{m} does not take fraction"))),
            (true, Some(f)) if !(0.0..=1.0).contains(&f) => {
                return Err(Error::invalid(format!("fraction must be in [0, 1] (got {f})")))
            }
            _ => {}
        }
        Ok(())
    }

    /// Same intervention at a different magnitude. For combos, `sweep_fraction`
    /// chooses which of the two knobs the magnitude replaces.
    pub fn at_magnitude(&self, magnitude: f64, sweep_fraction: bool, seed: u64) -> Self {
        let mut s = self.clone();
        s.seed = seed;
        match (s.method.uses_sigma(), s.method.uses_fraction()) {
            (true, false) => s.sigma = Some(magnitude),
            (false, true) => s.fraction = Some(magnitude),
            _ if sweep_fraction => s.fraction = Some(magnitude),
            _ => s.sigma = Some(magnitude),
        }
        s
    }
}

/// Audit record of what an erosion operator changed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErosionReceipt {
    pub affected_paths: Vec<String>,
    pub scalars_perturbed: usize,
    pub scalars_zeroed: usize,
    pub neurons_deactivated: usize,
    pub seed_used: u64,
    /// Flat weight indices set to zero, per path, ascending.
    pub pruned_positions: Vec<(String, Vec<usize>)>,
    /// Bias indices shifted down, per path, ascending.
    pub deactivated_units: Vec<(String, Vec<usize>)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presence_rules() {
        assert!(ErosionSpec::noise_post(TargetSelector::All, 0.1, 0).validate().is_ok());
        assert!(ErosionSpec::prune(TargetSelector::All, 0.5, 0).validate().is_ok());
        let mut s = ErosionSpec::prune(TargetSelector::All, 0.5, 0);
        s.sigma = Some(0.1);
        assert!(s.validate().is_err());
        s.method = ErosionMethod::ComboPruneThenNoise;
        assert!(s.validate().is_ok());
        s.fraction = None;
        assert!(s.validate().is_err());
        assert!(ErosionSpec::prune(TargetSelector::All, 1.5, 0).validate().is_err());
        assert!(ErosionSpec::noise_post(TargetSelector::All, -0.1, 0)
            .validate()
            .is_err());
    }

    #[test]
    fn method_aliases() {
        assert_eq!("prune".parse::<ErosionMethod>().unwrap(), ErosionMethod::PruneSynapses);
        assert_eq!(
            "combo_deactivate_noise".parse::<ErosionMethod>().unwrap(),
            ErosionMethod::ComboDeactivateThenNoise
        );
        for m in ErosionMethod::ALL {
            assert_eq!(m.as_str().parse::<ErosionMethod>().unwrap(), m);
        }
    }

    #[test]
    fn toml_form() {
        let spec: ErosionSpec = toml::from_str(
            "method = \"combo_prune_then_noise\"\nselector = \"kinds:conv,dense\"\nsigma = 0.1\nfraction = 0.25\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(spec.fraction, Some(0.25));
        assert_eq!(spec.selector.to_string(), "kinds:conv,dense");
        let back: ErosionSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
