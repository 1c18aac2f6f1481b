//! Confusion counts, sensitivity/specificity, ROC and AUC.
//!
//! A row is predicted positive iff its score is strictly greater than the
//! threshold. The ROC sweep uses every distinct score as a threshold; tied
//! scores therefore move the curve diagonally, which gives the usual
//! half-credit for ties in the area.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

pub(crate) fn check_binary(y: &[f64]) -> Result<()> {
    match y.iter().find(|&&v| v != 0.0 && v != 1.0) {
        Some(&v) => Err(Error::NonBinary(v)),
        None => Ok(()),
    }
}

fn check_inputs(y: &[f64], scores: &[f64]) -> Result<()> {
    if y.len() != scores.len() {
        return Err(Error::Shape(format!(
            "{} labels but {} scores",
            y.len(),
            scores.len()
        )));
    }
    check_binary(y)?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("scores".into()));
    }
    Ok(())
}

pub fn confusion(y: &[f64], scores: &[f64], threshold: f64) -> Result<ConfusionCounts> {
    check_inputs(y, scores)?;
    let mut c = ConfusionCounts::default();
    for (&label, &s) in y.iter().zip(scores) {
        match (label == 1.0, s > threshold) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// True positives over positives.
pub fn sensitivity(c: &ConfusionCounts) -> Result<f64> {
    match c.positives() {
        0 => Err(Error::UndefinedRate("sensitivity")),
        p => Ok(c.tp as f64 / p as f64),
    }
}

/// True negatives over negatives.
pub fn specificity(c: &ConfusionCounts) -> Result<f64> {
    match c.negatives() {
        0 => Err(Error::UndefinedRate("specificity")),
        n => Ok(c.tn as f64 / n as f64),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// `None` for the closing (1, 1) point, which lies below every score.
    pub threshold: Option<f64>,
    pub tp: u64,
    pub fp: u64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub positives: u64,
    pub negatives: u64,
}

impl RocCurve {
    /// CSV with `threshold,sensitivity,specificity` per point.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::new();
        writeln!(out, "threshold,sensitivity,specificity").unwrap();
        for p in &self.points {
            let t = p
                .threshold
                .map_or_else(|| "-inf".to_string(), |t| t.to_string());
            writeln!(out, "{t},{},{}", p.tpr, 1.0 - p.fpr).unwrap();
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Trapezoidal area, accumulated on integer counts.
    pub fn area(&self) -> f64 {
        // twice the area in units of (1/negatives)·(1/positives)
        let doubled: u128 = self
            .points
            .windows(2)
            .map(|w| (w[1].fp - w[0].fp) as u128 * (w[1].tp + w[0].tp) as u128)
            .sum();
        doubled as f64 / (2.0 * self.positives as f64 * self.negatives as f64)
    }
}

pub fn roc_curve(y: &[f64], scores: &[f64]) -> Result<RocCurve> {
    check_inputs(y, scores)?;
    let positives = y.iter().filter(|&&v| v == 1.0).count() as u64;
    let negatives = y.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let point = |threshold: Option<f64>, tp: u64, fp: u64| RocPoint {
        threshold,
        tp,
        fp,
        fpr: fp as f64 / negatives as f64,
        tpr: tp as f64 / positives as f64,
    };
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        // rows strictly above t are already counted
        points.push(point(Some(t), tp, fp));
        while i < order.len() && scores[order[i]] == t {
            if y[order[i]] == 1.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
    }
    points.push(point(None, tp, fp));
    Ok(RocCurve {
        points,
        positives,
        negatives,
    })
}

/// Area under the ROC curve.
pub fn auc(y: &[f64], scores: &[f64]) -> Result<f64> {
    Ok(roc_curve(y, scores)?.area())
}

/// Mann–Whitney form: P(score₊ > score₋) + ½·P(tie), via midranks.
pub fn auc_rank(y: &[f64], scores: &[f64]) -> Result<f64> {
    check_inputs(y, scores)?;
    let n = y.len();
    let positives = y.iter().filter(|&&v| v == 1.0).count();
    let negatives = n - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // doubled midranks keep everything integral
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank2 = (i + 1 + j) as u128; // 2·(mean of ranks i+1..=j)
        let pos_in_group = order[i..j].iter().filter(|&&r| y[r] == 1.0).count() as u128;
        rank_sum2 += midrank2 * pos_in_group;
        i = j;
    }
    let p = positives as u128;
    let u2 = rank_sum2 - p * (p + 1);
    Ok(u2 as f64 / (2.0 * positives as f64 * negatives as f64))
}
