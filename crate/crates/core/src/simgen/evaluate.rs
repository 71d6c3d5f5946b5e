use crate::error::{Error, Result};
use crate::inference::{pfdr_list, ListMode};

/// One point of an actual-versus-desired false discovery rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdrPoint {
    pub desired: f64,
    /// False positives over selected units, 0 for an empty selection.
    pub actual: f64,
    pub selected: usize,
}

/// The desired-rate grid 0.01, 0.02, ..., 0.30.
pub fn fdr_grid() -> Vec<f64> {
    (1..=30).map(|k| k as f64 / 100.0).collect()
}

fn check_aligned(truth: &[bool], scores: &[f64]) -> Result<()> {
    if truth.len() != scores.len() {
        return Err(Error::Shape(format!(
            "{} truth labels but {} scores",
            truth.len(),
            scores.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::Domain(format!("score {s} is not a number")));
    }
    Ok(())
}

/// For each desired rate, select the fixed-rate list from the null
/// probabilities `1 - score` and report the realised false discovery rate.
pub fn fdr_calibration(truth: &[bool], scores: &[f64], grid: &[f64]) -> Result<Vec<FdrPoint>> {
    check_aligned(truth, scores)?;
    let null: Vec<f64> = scores.iter().map(|s| 1.0 - s).collect();
    grid.iter()
        .map(|&desired| {
            let list = pfdr_list(&null, None, ListMode::FixRate(desired))?;
            let false_pos = list.units.iter().filter(|&&i| !truth[i]).count();
            let selected = list.units.len();
            let actual = if selected == 0 {
                0.0
            } else {
                false_pos as f64 / selected as f64
            };
            Ok(FdrPoint {
                desired,
                actual,
                selected,
            })
        })
        .collect()
}

/// Mean of `|actual - desired|` over a curve.
pub fn mean_fdr_deviation(curve: &[FdrPoint]) -> f64 {
    if curve.is_empty() {
        return 0.0;
    }
    curve
        .iter()
        .map(|p| (p.actual - p.desired).abs())
        .sum::<f64>()
        / curve.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Roc {
    /// From `(0, 0)` to `(1, 1)`, one point per distinct score.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve by sweeping the threshold down through the distinct scores.
/// Tied scores move the curve diagonally, so the trapezoid area counts a
/// tied positive-negative pair as one half.
pub fn roc(truth: &[bool], scores: &[f64]) -> Result<Roc> {
    check_aligned(truth, scores)?;
    let pos = truth.iter().filter(|t| **t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Domain(
            "ROC needs both positive and negative units".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if truth[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let p = RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        };
        let last = points[points.len() - 1];
        auc += (p.fpr - last.fpr) * (p.tpr + last.tpr) / 2.0;
        points.push(p);
    }
    Ok(Roc { points, auc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_inverted_scores() {
        let truth = [true, true, false, false, false];
        let good = [0.9, 0.8, 0.3, 0.2, 0.1];
        assert_eq!(roc(&truth, &good).unwrap().auc, 1.0);
        let bad: Vec<f64> = good.iter().map(|s| -s).collect();
        assert_eq!(roc(&truth, &bad).unwrap().auc, 0.0);
    }

    #[test]
    fn all_tied_scores_give_one_half() {
        let truth = [true, false, true, false];
        let r = roc(&truth, &[0.5; 4]).unwrap();
        assert_eq!(r.auc, 0.5);
        assert_eq!(r.points.len(), 2);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(roc(&[true, true], &[0.1, 0.2]).is_err());
        assert!(roc(&[false], &[0.1]).is_err());
    }

    #[test]
    fn oracle_scores_have_no_false_discoveries() {
        let truth = [true, false, true, false, false];
        let scores: Vec<f64> = truth.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
        let curve = fdr_calibration(&truth, &scores, &fdr_grid()).unwrap();
        assert!(curve.iter().all(|p| p.actual == 0.0 && p.selected == 2));
    }

    #[test]
    fn empty_selection_has_zero_fdr() {
        let curve = fdr_calibration(&[true, false], &[0.5, 0.4], &[0.0]).unwrap();
        assert_eq!(curve[0].selected, 0);
        assert_eq!(curve[0].actual, 0.0);
    }
}
