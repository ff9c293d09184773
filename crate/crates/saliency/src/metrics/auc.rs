use crate::error::{Error, Result};

/// Area under the ROC curve via the rank statistic: the probability that
/// a random positive exceeds a random negative, ties counted half.
///
/// Equivalent to trapezoidal integration of TPR versus FPR over all
/// thresholds, and invariant to any strictly increasing transform applied
/// jointly to both sample sets.
pub fn auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::DegenerateInput(
            "auc requires nonempty positive and negative sets".into(),
        ));
    }
    let mut combined: Vec<(f64, bool)> = positives
        .iter()
        .map(|&v| (v, true))
        .chain(negatives.iter().map(|&v| (v, false)))
        .collect();
    combined.sort_by(|a, b| a.0.total_cmp(&b.0));

    // sum of positive ranks with average ranks over tie groups
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < combined.len() {
        let mut j = i;
        while j < combined.len() && combined[j].0 == combined[i].0 {
            j += 1;
        }
        // ranks are 1-based; the tie group [i, j) shares the average rank
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for item in &combined[i..j] {
            if item.1 {
                rank_sum += avg_rank;
            }
        }
        i = j;
    }
    let np = positives.len() as f64;
    let nn = negatives.len() as f64;
    Ok((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_sets() {
        assert_eq!(auc(&[0.8, 0.9], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.2], &[0.8, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn identical_multisets_chance() {
        let v = [0.1, 0.5, 0.9];
        assert_eq!(auc(&v, &v).unwrap(), 0.5);
    }

    #[test]
    fn pairwise_oracle_example() {
        // wins 3 of 4 pairs, no ties
        assert_eq!(auc(&[0.9, 0.4], &[0.5, 0.1]).unwrap(), 0.75);
    }

    #[test]
    fn swap_symmetry() {
        let p = [0.3, 0.3, 0.8, 0.6];
        let n = [0.3, 0.5, 0.1];
        let a = auc(&p, &n).unwrap();
        let b = auc(&n, &p).unwrap();
        assert_eq!(a + b, 1.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(auc(&[], &[0.1]).is_err());
        assert!(auc(&[0.1], &[]).is_err());
    }
}
