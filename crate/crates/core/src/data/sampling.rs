use crate::data::{Dataset, Example};
use crate::error::{Error, Result};
use crate::tensor::{derive_seed, CounterRng};

fn by_class(ds: &Dataset) -> [Vec<&Example>; 2] {
    let mut classes: [Vec<&Example>; 2] = [Vec::new(), Vec::new()];
    for e in &ds.examples {
        classes[usize::from(e.label == 1)].push(e);
    }
    classes
}

fn round_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64).round() as usize
}

/// Draws `round(ratio · count)` examples per class without replacement and
/// returns them in shuffled order.
pub fn subsample_balanced(ds: &Dataset, ratio: f64, seed: u64) -> Result<Dataset> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid(format!("ratio must be in (0, 1] (got {ratio})")));
    }
    let classes = by_class(ds);
    let mut out = Vec::new();
    for (label, members) in classes.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::invalid(format!("dataset has no examples of class {label}")));
        }
        let k = round_count(ratio, members.len());
        if k == 0 {
            return Err(Error::invalid(format!("ratio {ratio} leaves class {label} empty")));
        }
        let mut rng = CounterRng::new(derive_seed(seed, &[label as u64]));
        let mut picked = rng.sample_indices(members.len(), k);
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|i| members[i].clone()));
    }
    CounterRng::new(derive_seed(seed, &[2])).shuffle(&mut out);
    Ok(ds.with_examples(out, format!("{} | subsample {ratio} seed {seed}", ds.provenance)))
}

/// Stratified split: each class contributes `round(val_fraction · count)`
/// examples to validation. Both halves keep the input's relative order.
pub fn split(ds: &Dataset, val_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "val_fraction must be in (0, 1) (got {val_fraction})"
        )));
    }
    let mut is_val = vec![false; ds.examples.len()];
    for label in 0..2u8 {
        let idx: Vec<usize> = (0..ds.examples.len())
            .filter(|&i| ds.examples[i].label == label)
            .collect();
        let k = round_count(val_fraction, idx.len());
        let mut rng = CounterRng::new(derive_seed(seed, &[u64::from(label)]));
        for j in rng.sample_indices(idx.len(), k) {
            is_val[idx[j]] = true;
        }
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (e, v) in ds.examples.iter().zip(is_val) {
        if v { &mut val } else { &mut train }.push(e.clone());
    }
    Ok((
        ds.with_examples(train, format!("{} | train split seed {seed}", ds.provenance)),
        ds.with_examples(val, format!("{} | val split seed {seed}", ds.provenance)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthetic_sentiment, SyntheticConfig};

    fn balanced(n: usize) -> Dataset {
        synthetic_sentiment(&SyntheticConfig::small(n), 11).unwrap()
    }

    #[test]
    fn quarter_subsample() {
        let ds = balanced(1000);
        let sub = subsample_balanced(&ds, 0.25, 4).unwrap();
        assert_eq!(sub.class_counts(), (125, 125));
        assert_eq!(sub, subsample_balanced(&ds, 0.25, 4).unwrap());
    }

    #[test]
    fn full_ratio_is_permutation() {
        let ds = balanced(60);
        let sub = subsample_balanced(&ds, 1.0, 9).unwrap();
        let mut a = ds.examples.clone();
        let mut b = sub.examples.clone();
        a.sort_by(|x, y| (&x.tokens, x.label).cmp(&(&y.tokens, y.label)));
        b.sort_by(|x, y| (&x.tokens, x.label).cmp(&(&y.tokens, y.label)));
        assert_eq!(a, b);
    }

    #[test]
    fn subsample_errors() {
        let ds = balanced(10);
        assert!(subsample_balanced(&ds, 0.01, 0).is_err());
        assert!(subsample_balanced(&ds, 0.0, 0).is_err());
        let one_class = ds.with_examples(
            ds.examples.iter().filter(|e| e.label == 1).cloned().collect(),
            String::new(),
        );
        assert!(subsample_balanced(&one_class, 0.5, 0).is_err());
    }

    #[test]
    fn stratified_split() {
        let ds = balanced(200);
        let (train, val) = split(&ds, 0.2, 5).unwrap();
        assert_eq!(train.class_counts(), (80, 80));
        assert_eq!(val.class_counts(), (20, 20));
        let (train2, val2) = split(&ds, 0.2, 5).unwrap();
        assert_eq!((train2, val2), (train.clone(), val.clone()));
        assert!(split(&ds, 1.0, 0).is_err());
        assert!(split(&ds, 0.0, 0).is_err());
    }
}
