//! Point estimators of the population mode computed from one SRSWOR sample.
//!
//! The naive estimator is `3·median − 2·mean`. The ratio, product, and
//! shifted (transformed) variants correct it with the known auxiliary-mode
//! `X̃`; how far the shift scalars dampen the correction is the tuning knob
//! the theory module optimizes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::SampleDraw;
use crate::stats;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample too small: {n} values, need at least 2")]
    SampleTooSmall { n: usize },
    #[error("{estimator}: denominator {denominator} vanished")]
    DegenerateDenominator {
        estimator: &'static str,
        denominator: f64,
    },
    #[error("{estimator}: sample denominator {sample} has opposite sign to population denominator {population}")]
    SignFlip {
        estimator: &'static str,
        sample: f64,
        population: f64,
    },
    #[error("{estimator}: population auxiliary mode is zero")]
    ZeroAuxiliaryMode { estimator: &'static str },
}

/// The five estimators, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Naive,
    Ratio,
    Product,
    TransformedRatio,
    TransformedProduct,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Naive,
        Estimator::Ratio,
        Estimator::Product,
        Estimator::TransformedRatio,
        Estimator::TransformedProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Naive => "naive",
            Estimator::Ratio => "ratio",
            Estimator::Product => "product",
            Estimator::TransformedRatio => "transformed_ratio",
            Estimator::TransformedProduct => "transformed_product",
        }
    }
}

/// Per-sample summary the estimators are built from. `naive_mode_*` is
/// always exactly `3·median − 2·mean` of the corresponding values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean_y: f64,
    pub mean_x: f64,
    pub median_y: f64,
    pub median_x: f64,
    pub naive_mode_y: f64,
    pub naive_mode_x: f64,
}

impl SampleMoments {
    pub fn from_draw(draw: &SampleDraw) -> Result<Self, EstimatorError> {
        Self::from_values(draw.y(), draw.x())
    }

    pub fn from_values(y: &[f64], x: &[f64]) -> Result<Self, EstimatorError> {
        if y.len() < 2 {
            return Err(EstimatorError::SampleTooSmall { n: y.len() });
        }
        debug_assert_eq!(y.len(), x.len());
        let mean_y = stats::mean(y);
        let mean_x = stats::mean(x);
        let median_y = sample_median(y)?;
        let median_x = sample_median(x)?;
        Ok(Self {
            n: y.len(),
            mean_y,
            mean_x,
            median_y,
            median_x,
            naive_mode_y: 3.0 * median_y - 2.0 * mean_y,
            naive_mode_x: 3.0 * median_x - 2.0 * mean_x,
        })
    }
}

/// The shift scalars of the transformed estimators: `l1` for the ratio
/// form, `k1` for the product form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarChoice {
    pub l1: f64,
    pub k1: f64,
}

/// All five estimates from a single sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub naive: f64,
    pub ratio: f64,
    pub product: f64,
    pub transformed_ratio: f64,
    pub transformed_product: f64,
    pub scalars: ScalarChoice,
}

impl EstimateSet {
    pub fn get(&self, estimator: Estimator) -> f64 {
        match estimator {
            Estimator::Naive => self.naive,
            Estimator::Ratio => self.ratio,
            Estimator::Product => self.product,
            Estimator::TransformedRatio => self.transformed_ratio,
            Estimator::TransformedProduct => self.transformed_product,
        }
    }
}

/// Middle order statistic for odd n, midpoint of the two central order
/// statistics for even n.
pub fn sample_median(values: &[f64]) -> Result<f64, EstimatorError> {
    if values.is_empty() {
        return Err(EstimatorError::EmptySample);
    }
    let sorted = stats::sorted_copy(values);
    Ok(stats::median_sorted(&sorted))
}

/// Naive mode estimate `3·median − 2·mean`. Can legitimately be negative
/// even for positive data.
pub fn naive_mode(values: &[f64]) -> Result<f64, EstimatorError> {
    if values.len() < 2 {
        return Err(EstimatorError::SampleTooSmall { n: values.len() });
    }
    Ok(3.0 * sample_median(values)? - 2.0 * stats::mean(values))
}

/// Guards a ratio-type denominator: zero is degenerate, and a sign opposite
/// to the population-level denominator would silently flip the estimate, so
/// both are reported as errors rather than returned.
fn check_denominator(
    estimator: &'static str,
    sample: f64,
    population: f64,
) -> Result<(), EstimatorError> {
    if sample == 0.0 {
        return Err(EstimatorError::DegenerateDenominator {
            estimator,
            denominator: sample,
        });
    }
    if population != 0.0 && sample.signum() != population.signum() {
        return Err(EstimatorError::SignFlip {
            estimator,
            sample,
            population,
        });
    }
    Ok(())
}

/// Ratio estimate `ỹ·X̃/x̃`.
pub fn ratio_estimate(sm: &SampleMoments, aux_mode: f64) -> Result<f64, EstimatorError> {
    check_denominator("ratio", sm.naive_mode_x, aux_mode)?;
    Ok(sm.naive_mode_y * (aux_mode / sm.naive_mode_x))
}

/// Product estimate `ỹ·x̃/X̃`.
pub fn product_estimate(sm: &SampleMoments, aux_mode: f64) -> Result<f64, EstimatorError> {
    if aux_mode == 0.0 {
        return Err(EstimatorError::ZeroAuxiliaryMode { estimator: "product" });
    }
    Ok(sm.naive_mode_y * (sm.naive_mode_x / aux_mode))
}

/// Transformed ratio estimate `ỹ·(X̃+L1)/(x̃+L1)`.
pub fn transformed_ratio_estimate(
    sm: &SampleMoments,
    aux_mode: f64,
    l1: f64,
) -> Result<f64, EstimatorError> {
    let population = aux_mode + l1;
    if population == 0.0 {
        return Err(EstimatorError::DegenerateDenominator {
            estimator: "transformed_ratio",
            denominator: population,
        });
    }
    let sample = sm.naive_mode_x + l1;
    check_denominator("transformed_ratio", sample, population)?;
    Ok(sm.naive_mode_y * (population / sample))
}

/// Transformed product estimate `ỹ·(x̃+K1)/(X̃+K1)`.
pub fn transformed_product_estimate(
    sm: &SampleMoments,
    aux_mode: f64,
    k1: f64,
) -> Result<f64, EstimatorError> {
    let population = aux_mode + k1;
    if population == 0.0 {
        return Err(EstimatorError::DegenerateDenominator {
            estimator: "transformed_product",
            denominator: population,
        });
    }
    Ok(sm.naive_mode_y * ((sm.naive_mode_x + k1) / population))
}

/// All five estimators from one sample.
pub fn estimate_all(
    draw: &SampleDraw,
    aux_mode: f64,
    scalars: ScalarChoice,
) -> Result<EstimateSet, EstimatorError> {
    let sm = SampleMoments::from_draw(draw)?;
    Ok(EstimateSet {
        naive: sm.naive_mode_y,
        ratio: ratio_estimate(&sm, aux_mode)?,
        product: product_estimate(&sm, aux_mode)?,
        transformed_ratio: transformed_ratio_estimate(&sm, aux_mode, scalars.l1)?,
        transformed_product: transformed_product_estimate(&sm, aux_mode, scalars.k1)?,
        scalars,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PairedPopulation;
    use proptest::prelude::*;

    fn moments(naive_mode_y: f64, naive_mode_x: f64) -> SampleMoments {
        // Only the naive modes matter for the ratio-type estimators; fill the
        // rest consistently (median = mode = mean makes them exact).
        SampleMoments {
            n: 5,
            mean_y: naive_mode_y,
            mean_x: naive_mode_x,
            median_y: naive_mode_y,
            median_x: naive_mode_x,
            naive_mode_y,
            naive_mode_x,
        }
    }

    #[test]
    fn sample_median_conventions() {
        assert_eq!(sample_median(&[1.0, 3.0, 2.0]).unwrap(), 2.0);
        assert_eq!(sample_median(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        assert_eq!(sample_median(&[5.0]).unwrap(), 5.0);
        assert!(matches!(sample_median(&[]), Err(EstimatorError::EmptySample)));
    }

    #[test]
    fn naive_mode_examples() {
        assert_eq!(naive_mode(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(), 3.0);
        // 3·0 − 2·2.5: the estimate goes negative on skewed data.
        assert_eq!(naive_mode(&[0.0, 0.0, 0.0, 10.0]).unwrap(), -5.0);
        assert!(naive_mode(&[1.0]).is_err());
    }

    #[test]
    fn ratio_and_product_arithmetic() {
        assert_eq!(ratio_estimate(&moments(4.0, 5.0), 5.0).unwrap(), 4.0);
        assert_eq!(ratio_estimate(&moments(4.0, 2.0), 4.0).unwrap(), 8.0);
        assert_eq!(product_estimate(&moments(4.0, 5.0), 5.0).unwrap(), 4.0);
        assert_eq!(product_estimate(&moments(3.0, 4.0), 2.0).unwrap(), 6.0);
        assert_eq!(product_estimate(&moments(0.0, 4.0), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_denominators_are_reported() {
        assert!(matches!(
            ratio_estimate(&moments(4.0, 0.0), 5.0),
            Err(EstimatorError::DegenerateDenominator { estimator: "ratio", .. })
        ));
        assert!(matches!(
            ratio_estimate(&moments(4.0, -1.0), 5.0),
            Err(EstimatorError::SignFlip { .. })
        ));
        assert!(matches!(
            product_estimate(&moments(4.0, 5.0), 0.0),
            Err(EstimatorError::ZeroAuxiliaryMode { .. })
        ));
        assert!(matches!(
            transformed_ratio_estimate(&moments(4.0, 2.0), 5.0, -5.0),
            Err(EstimatorError::DegenerateDenominator { .. })
        ));
        // x̃ + L1 < 0 while X̃ + L1 > 0: loud error, no silent sign flip.
        assert!(matches!(
            transformed_ratio_estimate(&moments(4.0, 2.0), 5.0, -3.0),
            Err(EstimatorError::SignFlip { .. })
        ));
    }

    #[test]
    fn transformed_reductions_are_bitwise() {
        let sm = moments(4.26, 3.9);
        let aux = 4.4;
        assert_eq!(
            transformed_ratio_estimate(&sm, aux, 0.0).unwrap(),
            ratio_estimate(&sm, aux).unwrap()
        );
        assert_eq!(
            transformed_product_estimate(&sm, aux, 0.0).unwrap(),
            product_estimate(&sm, aux).unwrap()
        );
    }

    #[test]
    fn huge_shift_reduces_to_naive() {
        let sm = moments(4.26, 3.9);
        let tr = transformed_ratio_estimate(&sm, 4.4, 1e9).unwrap();
        assert!((tr - 4.26).abs() < 1e-8);
        let tp = transformed_product_estimate(&sm, 4.4, 1e9).unwrap();
        assert!((tp - 4.26).abs() < 1e-8);
        // And the approach is monotone from each side for a few decades.
        let mut last = (transformed_ratio_estimate(&sm, 4.4, 1e3).unwrap() - 4.26).abs();
        for exp in [4, 5, 6, 7, 8] {
            let gap =
                (transformed_ratio_estimate(&sm, 4.4, 10f64.powi(exp)).unwrap() - 4.26).abs();
            assert!(gap <= last);
            last = gap;
        }
    }

    #[test]
    fn matched_sample_mode_collapses_everything_to_naive() {
        let sm = moments(4.26, 4.4);
        for k1 in [-1.0, 0.0, 2.5, 100.0] {
            assert_eq!(transformed_product_estimate(&sm, 4.4, k1).unwrap(), 4.26);
        }
        assert_eq!(ratio_estimate(&sm, 4.4).unwrap(), 4.26);
        assert_eq!(product_estimate(&sm, 4.4).unwrap(), 4.26);
        assert_eq!(transformed_ratio_estimate(&sm, 4.4, 1.37).unwrap(), 4.26);
    }

    #[test]
    fn whole_population_sample_gives_population_naive_mode() {
        let pop = PairedPopulation::new(
            vec![1.0, 2.0, 4.0, 4.5, 7.0, 9.5],
            vec![2.0, 3.0, 5.0, 5.5, 8.0, 10.5],
        )
        .unwrap();
        let draw = crate::dataset::srswor(&pop, 6, 1).unwrap();
        let aux = naive_mode(pop.x()).unwrap();
        let set = estimate_all(&draw, aux, ScalarChoice { l1: 0.7, k1: 0.7 }).unwrap();
        let naive = naive_mode(pop.y()).unwrap();
        for e in Estimator::ALL {
            assert_eq!(set.get(e), naive, "{}", e.name());
        }
    }

    #[test]
    fn zero_scalars_collapse_transformed_to_plain() {
        let pop = PairedPopulation::new(
            vec![1.0, 2.0, 4.0, 4.5, 7.0, 9.5],
            vec![2.0, 3.0, 5.0, 5.5, 8.0, 10.5],
        )
        .unwrap();
        let draw = crate::dataset::srswor(&pop, 4, 9).unwrap();
        let set = estimate_all(&draw, 5.0, ScalarChoice { l1: 0.0, k1: 0.0 }).unwrap();
        assert_eq!(set.transformed_ratio, set.ratio);
        assert_eq!(set.transformed_product, set.product);
    }

    proptest! {
        #[test]
        fn naive_mode_is_linear_equivariant(
            values in proptest::collection::vec(-50.0f64..50.0, 2..40),
            a in -4.0f64..4.0,
            b in -10.0f64..10.0,
        ) {
            let direct = naive_mode(&values).unwrap();
            let mapped: Vec<f64> = values.iter().map(|v| a * v + b).collect();
            let through = naive_mode(&mapped).unwrap();
            let expect = a * direct + b;
            let scale = 1.0 + expect.abs();
            prop_assert!((through - expect).abs() <= 1e-10 * scale);
        }
    }
}
