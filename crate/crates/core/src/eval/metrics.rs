use crate::dataset::ClassId;
use crate::error::{Error, Result};

/// Unweighted mean of per-class f1 over the classes present in `truth`.
///
/// A class that is never predicted correctly contributes 0.
pub fn f1_macro(truth: &[ClassId], predicted: &[ClassId]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} true labels, {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Shape("f1 of an empty label sequence".into()));
    }
    let k = truth.iter().chain(predicted).max().map_or(0, |m| m + 1);
    let mut tp = vec![0usize; k];
    let mut fp = vec![0usize; k];
    let mut fn_ = vec![0usize; k];
    let mut present = vec![false; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        present[t] = true;
        if t == p {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let (sum, count) = (0..k).filter(|&c| present[c]).fold((0.0, 0usize), |(s, n), c| {
        let f1 = if tp[c] == 0 {
            0.0
        } else {
            2.0 * tp[c] as f64 / (2 * tp[c] + fp[c] + fn_[c]) as f64
        };
        (s + f1, n + 1)
    });
    Ok(sum / count as f64)
}

pub fn accuracy(truth: &[ClassId], predicted: &[ClassId]) -> Result<f64> {
    if truth.len() != predicted.len() || truth.is_empty() {
        return Err(Error::Shape(format!(
            "{} true labels, {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_cases() {
        let v = f1_macro(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
        assert!((v - (2.0 / 3.0 + 4.0 / 5.0) / 2.0).abs() < 1e-12);
        assert_eq!(f1_macro(&[2, 0, 1], &[2, 0, 1]).unwrap(), 1.0);
        assert!((f1_macro(&[0, 1], &[0, 0]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn classes_absent_from_truth_are_not_averaged() {
        // class 2 only predicted: its f1 is excluded, but the false positive
        // still lowers class 1's f1.
        let v = f1_macro(&[0, 1], &[0, 2]).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(f1_macro(&[0], &[0, 1]).is_err());
        assert!(f1_macro(&[], &[]).is_err());
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap(), 0.75);
    }
}
