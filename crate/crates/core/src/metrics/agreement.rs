use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::taxonomy::{TalkMoveLabel, NUM_LABELS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub percent_agreement: f64,
    pub kappa: f64,
    pub n: usize,
}

/// Cohen's kappa from observed and chance agreement counts, computed as
/// `(agree*n - sum a_k b_k) / (n^2 - sum a_k b_k)` in integers.
fn kappa_from_counts(agree: u64, n: u64, marginals_a: &[u64], marginals_b: &[u64]) -> f64 {
    let n = n as i128;
    let chance: i128 = marginals_a
        .iter()
        .zip(marginals_b)
        .map(|(&a, &b)| a as i128 * b as i128)
        .sum();
    let den = n * n - chance;
    if den == 0 {
        // p_e = 1 forces both raters onto one shared label, so p_o = 1.
        return if agree as i128 == n { 1.0 } else { 0.0 };
    }
    (agree as i128 * n - chance) as f64 / den as f64
}

fn check(a: &[TalkMoveLabel], b: &[TalkMoveLabel]) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

pub fn cohens_kappa(a: &[TalkMoveLabel], b: &[TalkMoveLabel]) -> Result<AgreementReport, MetricsError> {
    check(a, b)?;
    let mut ca = [0u64; NUM_LABELS];
    let mut cb = [0u64; NUM_LABELS];
    let mut agree = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        ca[x.code()] += 1;
        cb[y.code()] += 1;
        agree += u64::from(x == y);
    }
    let n = a.len() as u64;
    Ok(AgreementReport {
        percent_agreement: agree as f64 / n as f64,
        kappa: kappa_from_counts(agree, n, &ca, &cb),
        n: a.len(),
    })
}

/// One binary (label vs. rest) agreement report per label, the layout of a
/// per-coding-decision reliability table.
pub fn per_label_kappa(
    a: &[TalkMoveLabel],
    b: &[TalkMoveLabel],
) -> Result<Vec<(TalkMoveLabel, AgreementReport)>, MetricsError> {
    check(a, b)?;
    let n = a.len() as u64;
    Ok(TalkMoveLabel::ALL
        .iter()
        .map(|&label| {
            let mut ca = [0u64; 2];
            let mut cb = [0u64; 2];
            let mut agree = 0u64;
            for (&x, &y) in a.iter().zip(b) {
                let (x, y) = (x == label, y == label);
                ca[usize::from(x)] += 1;
                cb[usize::from(y)] += 1;
                agree += u64::from(x == y);
            }
            (
                label,
                AgreementReport {
                    percent_agreement: agree as f64 / n as f64,
                    kappa: kappa_from_counts(agree, n, &ca, &cb),
                    n: a.len(),
                },
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use TalkMoveLabel::*;

    #[test]
    fn identical_raters() {
        let a = [Restating, None, Revoicing, Restating];
        let r = cohens_kappa(&a, &a).unwrap();
        assert_eq!(r.percent_agreement, 1.0);
        assert_eq!(r.kappa, 1.0);
    }

    #[test]
    fn textbook_two_by_two() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut push = |x, y, n| {
            for _ in 0..n {
                a.push(x);
                b.push(y);
            }
        };
        push(Restating, Restating, 20);
        push(None, None, 70);
        push(Restating, None, 5);
        push(None, Restating, 5);
        let r = cohens_kappa(&a, &b).unwrap();
        assert!((r.percent_agreement - 0.90).abs() < 1e-12);
        assert!((r.kappa - 0.275 / 0.375).abs() < 1e-12);
        assert!((r.kappa - 0.7333).abs() < 1e-4);
    }

    #[test]
    fn constant_rater_gives_zero() {
        let a = [Restating, None, Revoicing, Restating, PressForAccuracy];
        let b = [Restating; 5];
        assert_eq!(cohens_kappa(&a, &b).unwrap().kappa, 0.0);
    }

    #[test]
    fn both_constant_and_equal() {
        let a = [None; 4];
        let r = cohens_kappa(&a, &a).unwrap();
        assert_eq!(r.kappa, 1.0);
    }

    #[test]
    fn errors() {
        assert_eq!(cohens_kappa(&[], &[]), Err(MetricsError::Empty));
        assert!(matches!(
            cohens_kappa(&[None], &[None, None]),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn per_label_reports_cover_all_labels() {
        let a = [Restating, None, Revoicing, Restating];
        let b = [Restating, None, Restating, Restating];
        let per = per_label_kappa(&a, &b).unwrap();
        assert_eq!(per.len(), NUM_LABELS);
        let none = per.iter().find(|(l, _)| *l == None).unwrap().1;
        assert_eq!(none.kappa, 1.0);
        let revoicing = per.iter().find(|(l, _)| *l == Revoicing).unwrap().1;
        assert_eq!(revoicing.percent_agreement, 0.75);
    }
}
