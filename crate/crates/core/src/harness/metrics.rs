use crate::error::{Error, Result};
use crate::harness::sweep::SweepResult;

/// Fraction of positions where two prediction vectors disagree.
pub fn label_divergence(a: &[u8], b: &[u8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "prediction vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("prediction vectors are empty"));
    }
    let differ = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(differ as f64 / a.len() as f64)
}

/// First magnitude whose mean accuracy falls below the midpoint between
/// `baseline` and `chance`. `means` is `(magnitude, mean accuracy)` in
/// ascending magnitude order.
pub fn dropoff_from_means(means: &[(f64, f64)], baseline: f64, chance: f64) -> Option<f64> {
    let mid = 0.5 * (baseline + chance);
    means.iter().find(|&&(_, acc)| acc < mid).map(|&(m, _)| m)
}

/// Dropoff magnitude of a sweep, or `None` if accuracy never crosses the
/// midpoint.
pub fn detect_dropoff(sweep: &SweepResult) -> Option<f64> {
    dropoff_from_means(&sweep.mean_accuracy(), sweep.baseline_accuracy, sweep.chance_level)
}

/// Mean and standard error of a sample (standard error 0 for n < 2).
pub fn mean_and_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divergence_values() {
        assert_eq!(label_divergence(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap(), 0.0);
        assert_eq!(label_divergence(&[0, 1, 1, 0], &[1, 0, 0, 1]).unwrap(), 1.0);
        assert_eq!(label_divergence(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap(), 0.25);
        assert!(label_divergence(&[0, 1], &[0]).is_err());
        assert!(label_divergence(&[], &[]).is_err());
    }

    #[test]
    fn dropoff_is_first_midpoint_crossing() {
        let means: Vec<(f64, f64)> = [0.9, 0.9, 0.9, 0.6, 0.5]
            .iter()
            .enumerate()
            .map(|(i, &a)| (i as f64, a))
            .collect();
        assert_eq!(dropoff_from_means(&means, 0.9, 0.5), Some(3.0));
        let flat: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 0.9)).collect();
        assert_eq!(dropoff_from_means(&flat, 0.9, 0.5), None);
    }

    #[test]
    fn sem() {
        assert_eq!(mean_and_sem(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_and_sem(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
