//! Entropy-based similarity measures over a joint histogram: mutual
//! information (MI) and normalized mutual information (NMI), in bits.
//!
//! MI = H(ref) + H(flt) − H(joint) rewards alignments whose joint intensity
//! distribution is sharp; NMI = (H(ref) + H(flt)) / H(joint) is its
//! overlap-robust normalization, ranging from 1 (independent) to 2 (one is a
//! deterministic relabeling of the other).

use crate::histogram::JointHistogram;
use crate::{Error, Result};

/// Which measure a [`SimilarityValue`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Mi,
    Nmi,
}

/// A similarity score in bits (MI) or as a dimensionless ratio (NMI).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimilarityValue {
    pub value: f64,
    pub measure: Measure,
}

/// Shannon entropy in bits of a probability vector (entries ≥ 0, summing to
/// 1 within 1e-9), with the 0·log 0 = 0 convention.
pub fn entropy(p: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &v in p {
        if !(v >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "probability entries must be non-negative, got {v}"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "probabilities must sum to 1, got {sum}"
        )));
    }
    Ok(entropy_unchecked(p.iter().cloned()))
}

#[inline]
fn entropy_unchecked(p: impl Iterator<Item = f64>) -> f64 {
    -p.filter(|&v| v > 0.0).map(|v| v * v.log2()).sum::<f64>()
}

fn entropies(h: &JointHistogram) -> Result<(f64, f64, f64)> {
    if !(h.total_mass() > 0.0) {
        return Err(Error::EmptyOverlap);
    }
    let h_joint = entropy_unchecked(h.joint_probabilities().into_iter());
    let h_ref = entropy_unchecked(h.marginal_ref().into_iter());
    let h_flt = entropy_unchecked(h.marginal_flt().into_iter());
    Ok((h_ref, h_flt, h_joint))
}

/// MI = H(ref) + H(flt) − H(joint), in bits.
pub fn mutual_information(h: &JointHistogram) -> Result<SimilarityValue> {
    let (h_ref, h_flt, h_joint) = entropies(h)?;
    Ok(SimilarityValue {
        value: h_ref + h_flt - h_joint,
        measure: Measure::Mi,
    })
}

/// NMI = (H(ref) + H(flt)) / H(joint). A joint entropy of exactly 0 (all
/// mass in one bin pair) maps to the supremum 2.
pub fn normalized_mutual_information(h: &JointHistogram) -> Result<SimilarityValue> {
    let (h_ref, h_flt, h_joint) = entropies(h)?;
    let value = if h_joint > 0.0 {
        (h_ref + h_flt) / h_joint
    } else {
        2.0
    };
    Ok(SimilarityValue {
        value,
        measure: Measure::Nmi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hist(bins: usize, counts: Vec<f64>) -> JointHistogram {
        JointHistogram::from_counts(bins, counts).unwrap()
    }

    #[test]
    fn entropy_known_values() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((entropy(&[0.25; 4]).unwrap() - 2.0).abs() < 1e-12);
        assert!((entropy(&[0.5, 0.25, 0.25]).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_bad_input() {
        assert!(entropy(&[0.5, 0.4]).is_err());
        assert!(entropy(&[1.5, -0.5]).is_err());
        assert!(entropy(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn diagonal_histogram_mi_equals_marginal_entropy() {
        let h = hist(4, {
            let mut c = vec![0.0; 16];
            c[0] = 2.0;
            c[5] = 1.0;
            c[10] = 1.0;
            c[15] = 4.0;
            c
        });
        let mi = mutual_information(&h).unwrap().value;
        let h_ref = entropy(&h.marginal_ref()).unwrap();
        let h_flt = entropy(&h.marginal_flt()).unwrap();
        assert!((mi - h_ref).abs() < 1e-12);
        assert!((mi - h_flt).abs() < 1e-12);
    }

    #[test]
    fn independent_histogram_has_zero_mi_and_unit_nmi() {
        // Outer product of two marginals.
        let pr = [0.5, 0.3, 0.2];
        let pf = [0.1, 0.6, 0.3];
        let mut counts = vec![0.0; 9];
        for r in 0..3 {
            for f in 0..3 {
                counts[r * 3 + f] = 12.0 * pr[r] * pf[f];
            }
        }
        let h = hist(3, counts);
        assert!(mutual_information(&h).unwrap().value.abs() < 1e-12);
        assert!((normalized_mutual_information(&h).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_diagonal_mi_is_one_bit() {
        let h = hist(2, vec![0.5, 0.0, 0.0, 0.5]);
        assert!((mutual_information(&h).unwrap().value - 1.0).abs() < 1e-12);
        assert!((normalized_mutual_information(&h).unwrap().value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_of_noisy_two_by_two() {
        // Marginals are (0.5, 0.5) so H_ref = H_flt = 1 bit; the joint
        // entropy of (0.4, 0.1, 0.1, 0.4) works out to
        // 0.8·log2(5/2) + 0.2·log2(10).
        let h = hist(2, vec![0.4, 0.1, 0.1, 0.4]);
        let expected_joint = 1.7219280948873622;
        let nmi = normalized_mutual_information(&h).unwrap().value;
        assert!((nmi - 2.0 / expected_joint).abs() < 1e-12);
        let mi = mutual_information(&h).unwrap().value;
        assert!((mi - (2.0 - expected_joint)).abs() < 1e-12);
    }

    #[test]
    fn single_occupied_bin_nmi_is_two() {
        let mut counts = vec![0.0; 16];
        counts[7] = 3.0;
        let h = hist(4, counts);
        assert_eq!(normalized_mutual_information(&h).unwrap().value, 2.0);
        assert_eq!(mutual_information(&h).unwrap().value, 0.0);
    }

    #[test]
    fn measure_tags() {
        let h = hist(2, vec![0.5, 0.0, 0.0, 0.5]);
        assert_eq!(mutual_information(&h).unwrap().measure, Measure::Mi);
        assert_eq!(
            normalized_mutual_information(&h).unwrap().measure,
            Measure::Nmi
        );
    }

    #[test]
    fn permuting_bins_changes_nothing() {
        let counts: Vec<f64> = (0..16).map(|i| ((i * 7 + 3) % 11) as f64).collect();
        let h = hist(4, counts.clone());
        // Apply the permutation (0 1 2 3) -> (2 0 3 1) to rows and columns.
        let perm = [2usize, 0, 3, 1];
        let mut permuted = vec![0.0; 16];
        for r in 0..4 {
            for f in 0..4 {
                permuted[perm[r] * 4 + perm[f]] = counts[r * 4 + f];
            }
        }
        let hp = hist(4, permuted);
        let (a, b) = (
            mutual_information(&h).unwrap().value,
            mutual_information(&hp).unwrap().value,
        );
        assert!((a - b).abs() < 1e-12);
        let (a, b) = (
            normalized_mutual_information(&h).unwrap().value,
            normalized_mutual_information(&hp).unwrap().value,
        );
        assert!((a - b).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn mi_and_nmi_bounds(counts in proptest::collection::vec(0.0f64..10.0, 16)) {
            prop_assume!(counts.iter().sum::<f64>() > 0.0);
            let h = hist(4, counts);
            let mi = mutual_information(&h).unwrap().value;
            let nmi = normalized_mutual_information(&h).unwrap().value;
            let h_ref = entropy(&h.marginal_ref()).unwrap();
            let h_flt = entropy(&h.marginal_flt()).unwrap();
            prop_assert!(mi >= -1e-12);
            prop_assert!(mi <= h_ref.min(h_flt) + 1e-12);
            prop_assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&nmi));
        }
    }
}
