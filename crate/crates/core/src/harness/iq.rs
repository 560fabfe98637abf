use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const VERBAL_ITEMS: u32 = 50;
pub const QUANT_ITEMS: u32 = 26;

/// Section scores of the verbal/quantitative test plus the mapping to an
/// IQ-style number. The mapping is a declared stand-in: affine in the weighted
/// fraction correct, with 50 % correct landing on `baseline_iq`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqSectionResult {
    pub verbal_correct: u32,
    pub quant_correct: u32,
    pub weights: (f64, f64),
    pub baseline_iq: f64,
    pub slope: f64,
    pub calibration_offset: f64,
}

impl IqSectionResult {
    /// Default mapping: equal weights, 100 at the calibration point, 60 points
    /// per unit of weighted fraction correct.
    pub fn new(verbal_correct: u32, quant_correct: u32) -> Self {
        IqSectionResult {
            verbal_correct,
            quant_correct,
            weights: (0.5, 0.5),
            baseline_iq: 100.0,
            slope: 60.0,
            calibration_offset: 0.5,
        }
    }
}

pub fn iq_score(r: &IqSectionResult) -> Result<f64> {
    if r.verbal_correct > VERBAL_ITEMS || r.quant_correct > QUANT_ITEMS {
        return Err(Error::invalid(format!(
            "section counts {}/{VERBAL_ITEMS} verbal, {}/{QUANT_ITEMS} quantitative exceed section sizes",
            r.verbal_correct, r.quant_correct
        )));
    }
    let (wv, wq) = r.weights;
    if !(wv > 0.0 && wq > 0.0 && wv.is_finite() && wq.is_finite()) {
        return Err(Error::invalid("weights must be positive"));
    }
    let v = f64::from(r.verbal_correct) / f64::from(VERBAL_ITEMS);
    let q = f64::from(r.quant_correct) / f64::from(QUANT_ITEMS);
    Ok(r.baseline_iq + r.slope * (wv * v + wq * q - r.calibration_offset))
}
