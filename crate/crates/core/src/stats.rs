//! Small shared order-statistics helpers.
//!
//! Quartiles follow the Tukey median-of-halves convention everywhere: the
//! lower quartile is the median of the lower half of the sorted data, the
//! half excluding the overall median when the length is odd.

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased (n−1 divisor) sample variance. Caller guarantees `len ≥ 2`.
pub(crate) fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub(crate) fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
    v
}

/// Median of already-sorted data: middle order statistic for odd length,
/// midpoint of the two central order statistics for even length.
pub(crate) fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Tukey quartiles `(lower, median, upper)` of already-sorted data.
///
/// For a single observation all three collapse to that value.
pub(crate) fn quartiles_sorted(sorted: &[f64]) -> (f64, f64, f64) {
    let n = sorted.len();
    debug_assert!(n > 0);
    let med = median_sorted(sorted);
    if n == 1 {
        return (sorted[0], med, sorted[0]);
    }
    let half = n / 2;
    let lower = median_sorted(&sorted[..half]);
    let upper = median_sorted(&sorted[n - half..]);
    (lower, med, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_conventions() {
        assert_eq!(median_sorted(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(median_sorted(&[1.0, 2.0, 3.0, 4.0]), 2.5);
        assert_eq!(median_sorted(&[5.0]), 5.0);
    }

    #[test]
    fn tukey_quartiles() {
        // Odd length: halves exclude the overall median.
        assert_eq!(quartiles_sorted(&[1.0, 2.0, 3.0, 4.0, 5.0]), (1.5, 3.0, 4.5));
        // Even length: halves split in the middle.
        assert_eq!(quartiles_sorted(&[1.0, 2.0, 3.0, 4.0]), (1.5, 2.5, 3.5));
        assert_eq!(quartiles_sorted(&[1.0, 2.0]), (1.0, 1.5, 2.0));
        assert_eq!(quartiles_sorted(&[1.0, 2.0, 3.0]), (1.0, 2.0, 3.0));
        assert_eq!(quartiles_sorted(&[7.0]), (7.0, 7.0, 7.0));
    }
}
