//! Confusion-matrix scores of a change map against ground truth, with
//! "changed" as the positive class.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Overall errors, `fp + fn`.
    pub fn oe(&self) -> u64 {
        self.fp + self.fn_
    }

    /// Counts with the roles of the two classes exchanged.
    pub fn class_swapped(&self) -> Self {
        Self { tp: self.tn, tn: self.tp, fp: self.fn_, fn_: self.fp }
    }
}

pub fn confusion(pred: &BinaryMap, truth: &BinaryMap) -> Result<ConfusionCounts> {
    if pred.width() != truth.width() || pred.height() != truth.height() {
        return Err(Error::param(format!(
            "prediction is {}x{}, truth is {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Fraction of correctly classified pixels.
pub fn pcc(c: &ConfusionCounts) -> f64 {
    (c.tp + c.tn) as f64 / c.total() as f64
}

/// Chance agreement `((tp+fp)(tp+fn) + (fn+tn)(fp+tn)) / total²`.
pub fn expected_agreement(c: &ConfusionCounts) -> f64 {
    let n = c.total() as f64;
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    ((tp + fp) * (tp + fn_) + (fn_ + tn) * (fp + tn)) / (n * n)
}

/// Cohen's kappa, `(PCC - PRE) / (1 - PRE)`.
pub fn kappa(c: &ConfusionCounts) -> Result<f64> {
    let pre = expected_agreement(c);
    if pre >= 1.0 {
        return Err(Error::UndefinedKappa);
    }
    Ok((pcc(c) - pre) / (1.0 - pre))
}

/// Changed-to-unchanged pixel ratio of a ground truth.
pub fn imbalance_ratio(truth: &BinaryMap) -> Result<f64> {
    let nc = truth.count_changed();
    let nu = truth.len() - nc;
    if nu == 0 {
        return Err(Error::param("imbalance ratio undefined: no unchanged pixels"));
    }
    Ok(nc as f64 / nu as f64)
}

/// Flat report written as `metrics.json`; undefined scores become `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub oe: u64,
    pub pcc: f64,
    pub kc: Option<f64>,
    pub ir: Option<f64>,
}

pub fn evaluate(pred: &BinaryMap, truth: &BinaryMap) -> Result<MetricsReport> {
    let c = confusion(pred, truth)?;
    if c.total() == 0 {
        return Err(Error::param("cannot score an empty map"));
    }
    Ok(MetricsReport {
        fp: c.fp,
        fn_: c.fn_,
        oe: c.oe(),
        pcc: pcc(&c),
        kc: kappa(&c).ok(),
        ir: imbalance_ratio(truth).ok(),
    })
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}
