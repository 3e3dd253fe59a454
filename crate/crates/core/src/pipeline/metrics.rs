//! Confusion matrices and one-vs-rest rates.

use serde::Serialize;

use super::EpochStats;
use crate::error::{Error, Result};

/// One-vs-rest tallies and rates for a single class. Rates whose
/// denominator is zero are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassRates {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
    pub tpr: Option<f64>,
    pub fnr: Option<f64>,
    pub fpr: Option<f64>,
    pub tnr: Option<f64>,
    /// `(TP + TN) / total`.
    pub accuracy: f64,
}

/// Rate pair `(a / (a + b), 1 - that)`, the complement taken exactly so the
/// two always sum to one.
fn rate_pair(a: u64, b: u64) -> (Option<f64>, Option<f64>) {
    let d = a + b;
    if d == 0 {
        return (None, None);
    }
    let r = a as f64 / d as f64;
    (Some(r), Some(1.0 - r))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    /// `confusion[truth][prediction]`.
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassRates>,
    /// `trace / total`.
    pub accuracy: f64,
    pub curves: Vec<EpochStats>,
}

impl ClassificationReport {
    pub fn from_confusion(confusion: Vec<Vec<u64>>) -> Result<Self> {
        let k = confusion.len();
        if k == 0 || confusion.iter().any(|r| r.len() != k) {
            return Err(Error::dim(None, "confusion matrix must be square and non-empty"));
        }
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::dim(None, "confusion matrix holds no samples"));
        }
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let per_class = (0..k)
            .map(|c| {
                let tp = confusion[c][c];
                let fn_ = confusion[c].iter().sum::<u64>() - tp;
                let fp = (0..k).map(|r| confusion[r][c]).sum::<u64>() - tp;
                let tn = total - tp - fn_ - fp;
                let (tpr, fnr) = rate_pair(tp, fn_);
                let (tnr, fpr) = rate_pair(tn, fp);
                ClassRates {
                    tp,
                    fn_,
                    fp,
                    tn,
                    tpr,
                    fnr,
                    fpr,
                    tnr,
                    accuracy: (tp + tn) as f64 / total as f64,
                }
            })
            .collect();
        Ok(ClassificationReport {
            confusion,
            per_class,
            accuracy: trace as f64 / total as f64,
            curves: Vec::new(),
        })
    }

    pub fn num_classes(&self) -> usize {
        self.confusion.len()
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn with_curves(mut self, curves: Vec<EpochStats>) -> Self {
        self.curves = curves;
        self
    }

    /// Sectioned CSV: confusion rows, per-class rates, overall accuracy.
    /// Undefined rates are written as `NA`.
    pub fn to_csv(&self, level: &str) -> String {
        let k = self.num_classes();
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let mut header = vec!["section".to_string(), "level".into(), "truth".into()];
        header.extend((0..k).map(|c| format!("pred_{c}")));
        w.write_record(&header).unwrap();
        for (t, row) in self.confusion.iter().enumerate() {
            let mut rec = vec!["confusion".to_string(), level.into(), t.to_string()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec).unwrap();
        }
        w.write_record([
            "section", "level", "class", "tp", "fn", "fp", "tn", "tpr", "fnr", "fpr", "tnr", "accuracy",
        ])
        .unwrap();
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        for (c, r) in self.per_class.iter().enumerate() {
            w.write_record([
                "rates".to_string(),
                level.into(),
                c.to_string(),
                r.tp.to_string(),
                r.fn_.to_string(),
                r.fp.to_string(),
                r.tn.to_string(),
                opt(r.tpr),
                opt(r.fnr),
                opt(r.fpr),
                opt(r.tnr),
                r.accuracy.to_string(),
            ])
            .unwrap();
        }
        w.write_record(["section", "level", "samples", "accuracy"]).unwrap();
        w.write_record([
            "overall".to_string(),
            level.into(),
            self.total().to_string(),
            self.accuracy.to_string(),
        ])
        .unwrap();
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Builds the report for paired predictions and ground truths.
pub fn evaluate(predictions: &[usize], truths: &[usize], num_classes: usize) -> Result<ClassificationReport> {
    if predictions.len() != truths.len() {
        return Err(Error::dim(
            None,
            format!("{} predictions for {} truths", predictions.len(), truths.len()),
        ));
    }
    if num_classes == 0 {
        return Err(Error::Config("at least one class is required".into()));
    }
    let mut confusion = vec![vec![0u64; num_classes]; num_classes];
    for (&p, &t) in predictions.iter().zip(truths) {
        if p >= num_classes || t >= num_classes {
            return Err(Error::Label(format!(
                "label pair (truth {t}, prediction {p}) outside {num_classes} classes"
            )));
        }
        confusion[t][p] += 1;
    }
    ClassificationReport::from_confusion(confusion)
}
