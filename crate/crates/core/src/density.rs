//! Marginal density estimation at the population medians.
//!
//! The variance formulas all consume `f_y(M_y)` and `f_x(M_x)`. The default
//! route fits a Gamma distribution to the whole variable by maximum
//! likelihood and evaluates its density at the empirical median; a Gaussian
//! kernel estimate with Silverman's bandwidth is available for data the
//! Gamma fit cannot handle (non-positive values, poor fit).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{digamma, ln_gamma, trigamma};
use crate::stats;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("non-positive value at index {index}: the Gamma fit needs strictly positive data")]
    NonPositiveValue { index: usize },
    #[error("too few values for a Gamma fit: {n} given, {min} required")]
    TooFewValues { n: usize, min: usize },
    #[error("degenerate data: zero variance, the fit is undefined")]
    DegenerateData,
    #[error("Gamma fit did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("gamma density is undefined at t = {t}; needs t > 0")]
    NonPositiveArgument { t: f64 },
    #[error("kernel bandwidth collapsed to zero (constant data)")]
    ZeroBandwidth,
    #[error("invalid bandwidth override {bandwidth}; must be positive and finite")]
    InvalidBandwidth { bandwidth: f64 },
}

/// Shape/scale parameters of a fitted Gamma distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub scale: f64,
}

/// How to estimate a marginal density at the median.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    /// Maximum-likelihood Gamma fit, evaluated at the empirical median.
    GammaMle,
    /// Gaussian kernel estimate with Silverman's rule-of-thumb bandwidth
    /// `h = 0.9·min(sd, IQR/1.34)·n^{−1/5}`, optionally overridden.
    KdeSilverman { bandwidth: Option<f64> },
}

impl std::fmt::Display for DensityMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityMethod::GammaMle => write!(f, "gamma"),
            DensityMethod::KdeSilverman { bandwidth: None } => write!(f, "kde"),
            DensityMethod::KdeSilverman {
                bandwidth: Some(h),
            } => write!(f, "kde(h={h})"),
        }
    }
}

const FIT_MIN_VALUES: usize = 10;
const FIT_MAX_ITER: usize = 100;

/// Maximum-likelihood Gamma fit.
///
/// The shape solves `ln k − ψ(k) = ln(mean) − mean(ln values)` by Newton
/// iteration started at the moment estimator `k₀ = mean²/variance`; the
/// scale is `mean/k`. Convergence: successive shapes within 1e-10 relative.
pub fn fit_gamma(values: &[f64]) -> Result<GammaParams, DensityError> {
    if values.len() < FIT_MIN_VALUES {
        return Err(DensityError::TooFewValues {
            n: values.len(),
            min: FIT_MIN_VALUES,
        });
    }
    if let Some(index) = values.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(DensityError::NonPositiveValue { index });
    }
    let mean = stats::mean(values);
    let variance = stats::variance(values);
    if variance <= 0.0 {
        return Err(DensityError::DegenerateData);
    }
    let mean_ln = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    let s = mean.ln() - mean_ln;
    if !(s > 0.0) {
        // s = 0 only for constant data (Jensen); rounding can push it there.
        return Err(DensityError::DegenerateData);
    }

    let mut k = mean * mean / variance;
    for _ in 0..FIT_MAX_ITER {
        let g = k.ln() - digamma(k) - s;
        let dg = 1.0 / k - trigamma(k);
        let mut step = g / dg;
        // Keep the iterate positive; halve any step that would overshoot.
        while k - step <= 0.0 {
            step *= 0.5;
        }
        let next = k - step;
        let done = (next - k).abs() < 1e-10 * next.abs();
        k = next;
        if done {
            return Ok(GammaParams {
                shape: k,
                scale: mean / k,
            });
        }
    }
    Err(DensityError::NoConvergence {
        iterations: FIT_MAX_ITER,
    })
}

/// Gamma density `t^{k−1} e^{−t/θ} / (Γ(k) θ^k)` evaluated in log space.
pub fn gamma_pdf(params: &GammaParams, t: f64) -> Result<f64, DensityError> {
    if !(t > 0.0) {
        return Err(DensityError::NonPositiveArgument { t });
    }
    let k = params.shape;
    let theta = params.scale;
    let log_pdf = (k - 1.0) * t.ln() - t / theta - ln_gamma(k) - k * theta.ln();
    Ok(log_pdf.exp())
}

/// Gaussian kernel density of `values` at `t` with bandwidth `h`.
fn gaussian_kde_at(values: &[f64], h: f64, t: f64) -> f64 {
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    values
        .iter()
        .map(|&v| {
            let z = (t - v) / h;
            (-0.5 * z * z).exp()
        })
        .sum::<f64>()
        * norm
}

/// Silverman's rule-of-thumb bandwidth.
fn silverman_bandwidth(values: &[f64]) -> Result<f64, DensityError> {
    let sorted = stats::sorted_copy(values);
    let (q1, _, q3) = stats::quartiles_sorted(&sorted);
    let sd = stats::variance(values).sqrt();
    let spread = sd.min((q3 - q1) / 1.34);
    let h = 0.9 * spread * (values.len() as f64).powf(-0.2);
    if h > 0.0 {
        Ok(h)
    } else {
        Err(DensityError::ZeroBandwidth)
    }
}

/// Estimates the marginal density of `values` at their own sample median.
pub fn density_at_median(values: &[f64], method: &DensityMethod) -> Result<f64, DensityError> {
    if values.len() < 2 {
        return Err(DensityError::TooFewValues {
            n: values.len(),
            min: 2,
        });
    }
    let sorted = stats::sorted_copy(values);
    let median = stats::median_sorted(&sorted);
    match method {
        DensityMethod::GammaMle => {
            let params = fit_gamma(values)?;
            gamma_pdf(&params, median)
        }
        DensityMethod::KdeSilverman { bandwidth } => {
            let h = match bandwidth {
                Some(h) if h.is_finite() && *h > 0.0 => *h,
                Some(h) => return Err(DensityError::InvalidBandwidth { bandwidth: *h }),
                None => silverman_bandwidth(values)?,
            };
            Ok(gaussian_kde_at(values, h, median))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_population, GeneratorConfig};
    use approx::assert_relative_eq;

    /// Seeded Gamma(shape, scale) draws through the population generator
    /// (slope 1, no intercept, no noise makes y == x == the Gamma draws).
    fn gamma_draws(shape: f64, scale: f64, n: usize, seed: u64) -> Vec<f64> {
        let cfg = GeneratorConfig {
            n,
            gamma_shape: shape,
            gamma_scale: scale,
            intercept: 0.0,
            slope: 1.0,
            noise_sd: 0.0,
            seed,
        };
        generate_population(&cfg).unwrap().x().to_vec()
    }

    #[test]
    fn fit_recovers_generating_parameters() {
        let values = gamma_draws(10.0, 0.667, 5000, 1234);
        let fit = fit_gamma(&values).unwrap();
        assert!((fit.shape - 10.0).abs() / 10.0 < 0.05, "shape {}", fit.shape);
        assert!((fit.scale - 0.667).abs() / 0.667 < 0.05, "scale {}", fit.scale);
    }

    #[test]
    fn fit_recovers_exponential() {
        // Exponential(1) is Gamma(1, 1).
        let values = gamma_draws(1.0, 1.0, 5000, 99);
        let fit = fit_gamma(&values).unwrap();
        assert!((fit.shape - 1.0).abs() < 0.05, "shape {}", fit.shape);
        assert!((fit.scale - 1.0).abs() < 0.05, "scale {}", fit.scale);
    }

    #[test]
    fn fit_rejects_degenerate_and_invalid_data() {
        assert!(matches!(
            fit_gamma(&[3.0; 20]),
            Err(DensityError::DegenerateData)
        ));
        assert!(matches!(
            fit_gamma(&[1.0, 2.0, 3.0]),
            Err(DensityError::TooFewValues { .. })
        ));
        let mut values = vec![1.0; 12];
        values[4] = -2.0;
        assert!(matches!(
            fit_gamma(&values),
            Err(DensityError::NonPositiveValue { index: 4 })
        ));
    }

    #[test]
    fn fit_is_scale_equivariant() {
        let values = gamma_draws(3.5, 2.0, 2000, 5);
        let base = fit_gamma(&values).unwrap();
        let scaled: Vec<f64> = values.iter().map(|v| v * 7.25).collect();
        let fit = fit_gamma(&scaled).unwrap();
        assert_relative_eq!(fit.shape, base.shape, max_relative = 1e-8);
        assert_relative_eq!(fit.scale, base.scale * 7.25, max_relative = 1e-8);
    }

    #[test]
    fn pdf_known_values() {
        let exp1 = GammaParams { shape: 1.0, scale: 1.0 };
        assert_relative_eq!(
            gamma_pdf(&exp1, 1.0).unwrap(),
            (-1.0f64).exp(),
            max_relative = 1e-12
        );
        // Shape > 1 vanishes at the origin.
        let g2 = GammaParams { shape: 2.0, scale: 1.0 };
        assert!(gamma_pdf(&g2, 1e-300).unwrap() < 1e-290);
        assert!(gamma_pdf(&g2, 0.0).is_err());
        assert!(gamma_pdf(&g2, -1.0).is_err());
    }

    /// Composite-Simpson quadrature of the pdf over (0, hi).
    fn pdf_integral(params: &GammaParams, hi: f64, panels: usize) -> f64 {
        let f = |t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                gamma_pdf(params, t).unwrap()
            }
        };
        let h = hi / panels as f64;
        let mut acc = f(1e-12) + f(hi);
        for i in 1..panels {
            let t = i as f64 * h;
            acc += f(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn pdf_integrates_to_one() {
        for params in [
            GammaParams { shape: 10.0, scale: 0.667 },
            GammaParams { shape: 1.0, scale: 1.0 },
            GammaParams { shape: 2.5, scale: 3.0 },
        ] {
            let mean = params.shape * params.scale;
            let sd = params.shape.sqrt() * params.scale;
            let hi = mean + 40.0 * sd;
            let integral = pdf_integral(&params, hi, 200_000);
            assert!(
                (integral - 1.0).abs() < 1e-6,
                "integral {integral} for {params:?}"
            );
        }
    }

    #[test]
    fn density_at_median_matches_exponential_truth() {
        // For Exponential(1), f(median) = exp(−ln 2) = 1/2.
        let values = gamma_draws(1.0, 1.0, 5000, 77);
        let gamma = density_at_median(&values, &DensityMethod::GammaMle).unwrap();
        assert!((gamma - 0.5).abs() / 0.5 < 0.05, "gamma route {gamma}");
        let kde =
            density_at_median(&values, &DensityMethod::KdeSilverman { bandwidth: None }).unwrap();
        assert!((kde - 0.5).abs() / 0.5 < 0.10, "kde route {kde}");
    }

    #[test]
    fn density_at_median_errors_on_constant_data() {
        let constant = vec![4.0; 40];
        assert!(density_at_median(&constant, &DensityMethod::GammaMle).is_err());
        assert!(matches!(
            density_at_median(&constant, &DensityMethod::KdeSilverman { bandwidth: None }),
            Err(DensityError::ZeroBandwidth)
        ));
        assert!(matches!(
            density_at_median(
                &[1.0, 2.0, 3.0, 4.0],
                &DensityMethod::KdeSilverman { bandwidth: Some(0.0) }
            ),
            Err(DensityError::InvalidBandwidth { .. })
        ));
    }

    #[test]
    fn density_is_positive_for_nondegenerate_data() {
        let values = gamma_draws(4.0, 1.3, 500, 8);
        for method in [
            DensityMethod::GammaMle,
            DensityMethod::KdeSilverman { bandwidth: None },
        ] {
            assert!(density_at_median(&values, &method).unwrap() > 0.0);
        }
    }
}
