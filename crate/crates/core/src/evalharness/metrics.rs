use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Set-recovery scores of one predicted blanket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// correctly identified members
    pub mnc: usize,
    /// identified members
    pub mni: usize,
    /// true members that were missed
    pub mnf: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// `0/0` precision or recall counts as 0, except that an empty prediction
/// of an empty truth scores 1 everywhere.
pub fn score_mb(predicted: &BTreeSet<String>, truth: &BTreeSet<String>) -> Metrics {
    let mnc = predicted.intersection(truth).count();
    let mni = predicted.len();
    let mnf = truth.difference(predicted).count();
    if mni == 0 && truth.is_empty() {
        return Metrics {
            mnc,
            mni,
            mnf,
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        };
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(mnc, mni);
    let recall = ratio(mnc, mnc + mnf);
    Metrics {
        mnc,
        mni,
        mnf,
        precision,
        recall,
        f1: f_measure(precision, recall),
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Per-data-set scores and their arithmetic means. The mean F1 is the mean
/// of per-data-set F1 values, not the F1 of the mean precision and recall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_dataset: Vec<Metrics>,
    pub mean_mnc: f64,
    pub mean_mni: f64,
    pub mean_mnf: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
}

impl MetricsReport {
    pub fn from_runs(per_dataset: Vec<Metrics>) -> Self {
        let k = per_dataset.len().max(1) as f64;
        let mean = |f: &dyn Fn(&Metrics) -> f64| per_dataset.iter().map(f).sum::<f64>() / k;
        MetricsReport {
            mean_mnc: mean(&|m| m.mnc as f64),
            mean_mni: mean(&|m| m.mni as f64),
            mean_mnf: mean(&|m| m.mnf as f64),
            mean_precision: mean(&|m| m.precision),
            mean_recall: mean(&|m| m.recall),
            mean_f1: mean(&|m| m.f1),
            per_dataset,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[&str]) -> BTreeSet<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_and_partial() {
        let t = set(&["A", "B"]);
        let m = score_mb(&t, &t);
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));

        let m = score_mb(&set(&["A", "B", "C", "X"]), &set(&["A", "B", "C", "D", "E"]));
        assert_eq!((m.mnc, m.mni, m.mnf), (3, 4, 2));
        assert_eq!(m.precision, 0.75);
        assert_eq!(m.recall, 0.6);
    }

    #[test]
    fn harmonic_mean_value() {
        assert!((f_measure(0.765, 0.633) - 0.6928).abs() < 1e-3);
        assert_eq!(f_measure(0.0, 0.0), 0.0);
    }

    #[test]
    fn empty_cases() {
        let m = score_mb(&set(&[]), &set(&["A"]));
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        let m = score_mb(&set(&[]), &set(&[]));
        assert_eq!(m.f1, 1.0);
    }

    #[test]
    fn per_dataset_averaging() {
        let a = score_mb(&set(&["A"]), &set(&["A", "B"]));
        let b = score_mb(&set(&["A", "B", "C"]), &set(&["A", "B"]));
        let r = MetricsReport::from_runs(vec![a, b]);
        assert!((r.mean_f1 - (a.f1 + b.f1) / 2.0).abs() < 1e-15);
        assert!(r.mean_f1 >= a.f1.min(b.f1) && r.mean_f1 <= a.f1.max(b.f1));
    }
}
