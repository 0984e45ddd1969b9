use serde::{Deserialize, Serialize};

use super::run::SequenceResult;
use crate::detect::DetectorKind;
use crate::error::{Error, Result};
use crate::merge::MergeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Alarm when `score >= threshold`; the sweep starts at `+inf` and ends at `-inf`.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub detector: DetectorKind,
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub positives: usize,
    pub negatives: usize,
}

/// ROC over `(score, label)` pairs with invalid merges as the positive class.
pub fn roc_from_scores(detector: DetectorKind, scores: &[(f64, MergeLabel)]) -> Result<RocCurve> {
    let positives = scores.iter().filter(|s| s.1 == MergeLabel::Invalid).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass(detector.to_string()));
    }
    let mut sorted: Vec<(f64, MergeLabel)> = scores.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let (p, n) = (positives as u64, negatives as u64);
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0u64, 0u64);
    // Twice the area in units of 1/(P·N): sum of (Δfp)·(tp_prev + tp).
    let mut area2 = 0u64;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        let (tp0, fp0) = (tp, fp);
        while i < sorted.len() && sorted[i].0 == t {
            match sorted[i].1 {
                MergeLabel::Invalid => tp += 1,
                MergeLabel::Correct => fp += 1,
            }
            i += 1;
        }
        area2 += (fp - fp0) * (tp + tp0);
        points.push(RocPoint {
            threshold: t,
            fpr: fp as f64 / n as f64,
            tpr: tp as f64 / p as f64,
        });
    }
    points.push(RocPoint {
        threshold: f64::NEG_INFINITY,
        fpr: 1.0,
        tpr: 1.0,
    });
    Ok(RocCurve {
        detector,
        points,
        auc: area2 as f64 / (2 * p * n) as f64,
        positives,
        negatives,
    })
}

/// ROC of `detector` over all results that evaluated it.
pub fn compute_roc(results: &[SequenceResult], detector: DetectorKind) -> Result<RocCurve> {
    let scores: Vec<(f64, MergeLabel)> = results
        .iter()
        .filter_map(|r| r.detectors.get(&detector).map(|d| (d.max_score, r.label)))
        .collect();
    roc_from_scores(detector, &scores)
}

/// Point of the curve maximizing `tpr − fpr`.
pub fn best_operating_point(curve: &RocCurve) -> RocPoint {
    *curve
        .points
        .iter()
        .max_by(|a, b| (a.tpr - a.fpr).total_cmp(&(b.tpr - b.fpr)))
        .expect("curves are never empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use MergeLabel::{Correct as C, Invalid as I};

    fn auc(s: &[(f64, MergeLabel)]) -> f64 {
        roc_from_scores(DetectorKind::Change, s).unwrap().auc
    }

    #[test]
    fn separated_and_degenerate() {
        assert_eq!(auc(&[(0.9, I), (0.8, I), (0.4, C), (0.1, C)]), 1.0);
        assert_eq!(auc(&[(0.9, I), (0.4, I), (0.8, C), (0.1, C)]), 0.75);
        assert_eq!(auc(&[(0.5, I), (0.5, I), (0.5, C), (0.5, C)]), 0.5);
        assert_eq!(auc(&[(0.1, I), (0.9, C)]), 0.0);
    }

    #[test]
    fn curve_shape() {
        let c = roc_from_scores(DetectorKind::Gridmap, &[(0.5, I), (0.5, C), (0.2, C)]).unwrap();
        assert_eq!(c.points.first().unwrap().threshold, f64::INFINITY);
        assert_eq!(c.points.last().unwrap().threshold, f64::NEG_INFINITY);
        assert_eq!((c.points[0].fpr, c.points[0].tpr), (0.0, 0.0));
        assert_eq!((c.points[1].fpr, c.points[1].tpr), (0.5, 1.0));
        for w in c.points.windows(2) {
            assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
        }
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(matches!(
            roc_from_scores(DetectorKind::Entropy, &[(0.1, I), (0.2, I)]),
            Err(Error::SingleClass(_))
        ));
    }
}
