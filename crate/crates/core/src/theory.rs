//! Population-level quantities and closed-form results: indicator moments,
//! the 2×2 median-split proportion matrix, first-order variances and
//! covariance of the naive mode estimators, MSEs and biases of every
//! estimator, the MSE-minimising shift scalars, efficiency conditions,
//! relative efficiencies, Student-t quantiles and confidence intervals.
//!
//! Divisor conventions: variances, covariances and indicator cross-moments
//! use N−1; the proportion matrix uses plain proportions (divisor N). Under
//! those conventions `(P11 − 0.25) · N/(N−1)` equals the N−1-divisor mean of
//! `(I_x − 0.5)(I_y − 0.5)` exactly whenever both median splits are even
//! (even N, distinct values); odd N adds a half-count correction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::PairedPopulation;
use crate::density::{density_at_median, DensityError, DensityMethod};
use crate::estimators::ScalarChoice;
use crate::special::inv_inc_beta;
use crate::stats;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("degenerate {variable} variable: zero variance")]
    DegenerateVariable { variable: &'static str },
    #[error("sample size {n} out of range for population of {population} units")]
    SampleSizeOutOfRange { n: usize, population: usize },
    #[error("first-order variance of the {variable} mode estimator is negative ({value}); the approximation has broken down for this population")]
    NegativeFirstOrderVariance { variable: &'static str, value: f64 },
    #[error("first-order mode-estimator correlation {rho} lies outside [-1, 1]; the approximation has broken down for this population")]
    CorrelationOutOfRange { rho: f64 },
    #[error("auxiliary population mode is zero; ratio and product forms are undefined")]
    ZeroAuxiliaryMode,
    #[error("shifted auxiliary mode X\u{303} + {scalar} vanishes")]
    VanishingShiftedMode { scalar: f64 },
    #[error("mode-estimator covariance is zero: no finite optimal scalar exists")]
    ZeroCovariance,
    #[error("degenerate coefficient of variation; efficiency conditions are undefined")]
    DegenerateCv,
    #[error("relative efficiency is undefined for zero MSE")]
    ZeroMse,
    #[error("probability {p} outside the open interval (0, 1)")]
    InvalidProbability { p: f64 },
    #[error("degrees of freedom must be at least 1")]
    InvalidDegreesOfFreedom,
    #[error("confidence level {level} outside the open interval (0, 1)")]
    InvalidLevel { level: f64 },
    #[error("MSE must be finite and nonnegative, got {mse}")]
    InvalidMse { mse: f64 },
    #[error("confidence intervals need a sample size of at least 2, got {n}")]
    InvalidSampleSize { n: usize },
}

/// Joint proportions of the population split at both medians (plain
/// proportions, divisor N). `p11` is the fraction of units at or below both
/// medians; ties with a median count as below (≤ convention).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionMatrix {
    /// y ≤ M_y and x ≤ M_x
    pub p11: f64,
    /// y ≤ M_y and x > M_x
    pub p12: f64,
    /// y > M_y and x ≤ M_x
    pub p21: f64,
    /// y > M_y and x > M_x
    pub p22: f64,
}

/// Every population symbol the closed-form results consume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationTheory {
    pub n_pop: usize,
    pub mean_y: f64,
    pub mean_x: f64,
    pub var_y: f64,
    pub var_x: f64,
    pub cov_yx: f64,
    pub corr_yx: f64,
    pub median_y: f64,
    pub median_x: f64,
    /// Population modes through `3·median − 2·mean`.
    pub mode_y: f64,
    pub mode_x: f64,
    /// Marginal densities at the population medians.
    pub density_y: f64,
    pub density_x: f64,
    /// Cross-moments (divisor N−1) of a variable with a centered
    /// below-median indicator: `s_y_my` pairs y with its own indicator,
    /// `s_y_mx` pairs y with the indicator of x, and so on.
    pub s_y_my: f64,
    pub s_x_mx: f64,
    pub s_y_mx: f64,
    pub s_x_my: f64,
    pub p_matrix: ProportionMatrix,
    /// Ratio of the population modes, `mode_y / mode_x`.
    pub mode_ratio: f64,
}

/// Design-dependent first-order moments of the naive mode estimators for a
/// given sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMomentSet {
    pub n: usize,
    /// Sampling fraction n/N.
    pub sampling_fraction: f64,
    pub var_mode_y: f64,
    pub var_mode_x: f64,
    pub cov_modes: f64,
    /// First-order correlation of the two naive mode estimators. Computed
    /// from the prefactor-free brackets, so it is the same for every n and
    /// stays defined at n = N where the variances vanish.
    pub rho: f64,
    /// Coefficients of variation `sqrt(V)/mode`.
    pub cv_y: f64,
    pub cv_x: f64,
}

/// First-order bias and MSE of a transformed estimator at a given scalar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformedTheory {
    pub bias: f64,
    pub mse: f64,
}

/// Minimum MSEs at the optimal scalars. The `evaluated` values come from
/// plugging the optimal scalars into the MSE expressions and are
/// authoritative; `mse_tp_opt_printed` is the `V(ỹ)(1+ρ²)` variant some
/// derivations quote, surfaced for comparison only (direct minimisation
/// gives `V(ỹ)(1−ρ²)` for both forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalMse {
    pub mse_tr_opt: f64,
    pub mse_tp_opt: f64,
    pub mse_tp_opt_printed: f64,
}

/// Efficiency comparison of the transformed ratio estimator at a given L1.
///
/// The booleans come from the MSE expressions themselves (with a 1e-12
/// relative boundary tolerance). The thresholds are the correlation form of
/// the same boundaries; note the ratio-vs-ratio comparison flips direction
/// with the sign of L1, so `rho >= threshold_vs_ratio` only matches
/// `vs_ratio` for negative shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyConditions {
    pub vs_naive: bool,
    pub vs_ratio: bool,
    pub threshold_vs_naive: f64,
    pub threshold_vs_ratio: f64,
    pub rho: f64,
}

/// Closed-form results for one sample size and one scalar choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub n: usize,
    pub scalars: ScalarChoice,
    pub mse_naive: f64,
    pub mse_ratio: f64,
    pub mse_product: f64,
    pub mse_tr: f64,
    pub mse_tp: f64,
    pub bias_tr: f64,
    pub bias_tp: f64,
    pub l1_opt: f64,
    pub k1_opt: f64,
    pub mse_tr_opt: f64,
    pub mse_tp_opt: f64,
    pub mse_tp_opt_printed: f64,
    /// Exact relative efficiencies (percent) against the naive estimator.
    pub re_ratio: f64,
    pub re_tr: f64,
    pub efficiency: EfficiencyConditions,
}

/// Two-sided confidence interval `estimate ± t·sqrt(MSE)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub df: usize,
}

/// Computes every population-level symbol.
pub fn compute_population_theory(
    pop: &PairedPopulation,
    method: &DensityMethod,
) -> Result<PopulationTheory, TheoryError> {
    let n_pop = pop.len();
    let nf = n_pop as f64;
    let y = pop.y();
    let x = pop.x();

    let mean_y = stats::mean(y);
    let mean_x = stats::mean(x);
    let median_y = stats::median_sorted(&stats::sorted_copy(y));
    let median_x = stats::median_sorted(&stats::sorted_copy(x));

    let mut var_y = 0.0;
    let mut var_x = 0.0;
    let mut cov_yx = 0.0;
    let mut s_y_my = 0.0;
    let mut s_x_mx = 0.0;
    let mut s_y_mx = 0.0;
    let mut s_x_my = 0.0;
    let mut n11 = 0usize;
    let mut n12 = 0usize;
    let mut n21 = 0usize;
    for i in 0..n_pop {
        let dy = y[i] - mean_y;
        let dx = x[i] - mean_x;
        var_y += dy * dy;
        var_x += dx * dx;
        cov_yx += dy * dx;
        let iy = if y[i] <= median_y { 0.5 } else { -0.5 };
        let ix = if x[i] <= median_x { 0.5 } else { -0.5 };
        s_y_my += dy * iy;
        s_x_mx += dx * ix;
        s_y_mx += dy * ix;
        s_x_my += dx * iy;
        match (iy > 0.0, ix > 0.0) {
            (true, true) => n11 += 1,
            (true, false) => n12 += 1,
            (false, true) => n21 += 1,
            (false, false) => {}
        }
    }
    let denom = nf - 1.0;
    var_y /= denom;
    var_x /= denom;
    cov_yx /= denom;
    s_y_my /= denom;
    s_x_mx /= denom;
    s_y_mx /= denom;
    s_x_my /= denom;

    if var_y <= 0.0 {
        return Err(TheoryError::DegenerateVariable { variable: "y" });
    }
    if var_x <= 0.0 {
        return Err(TheoryError::DegenerateVariable { variable: "x" });
    }

    let density_y = density_at_median(y, method)?;
    let density_x = density_at_median(x, method)?;

    let mode_y = 3.0 * median_y - 2.0 * mean_y;
    let mode_x = 3.0 * median_x - 2.0 * mean_x;

    Ok(PopulationTheory {
        n_pop,
        mean_y,
        mean_x,
        var_y,
        var_x,
        cov_yx,
        corr_yx: cov_yx / (var_y * var_x).sqrt(),
        median_y,
        median_x,
        mode_y,
        mode_x,
        density_y,
        density_x,
        s_y_my,
        s_x_mx,
        s_y_mx,
        s_x_my,
        p_matrix: ProportionMatrix {
            p11: n11 as f64 / nf,
            p12: n12 as f64 / nf,
            p21: n21 as f64 / nf,
            p22: (n_pop - n11 - n12 - n21) as f64 / nf,
        },
        mode_ratio: mode_y / mode_x,
    })
}

/// Asymptotic variance of the sample median, `((1−f)/(4n))·f_y(M_y)^{-2}`.
pub fn median_variance(theory: &PopulationTheory, n: usize) -> Result<f64, TheoryError> {
    check_sample_size(theory, n)?;
    let f = n as f64 / theory.n_pop as f64;
    Ok((1.0 - f) / (4.0 * n as f64) / (theory.density_y * theory.density_y))
}

fn check_sample_size(theory: &PopulationTheory, n: usize) -> Result<(), TheoryError> {
    if n == 0 || n > theory.n_pop {
        return Err(TheoryError::SampleSizeOutOfRange {
            n,
            population: theory.n_pop,
        });
    }
    Ok(())
}

/// Tolerance for the first-order correlation to exceed [-1, 1] through
/// rounding alone before it is treated as a model breakdown.
const RHO_ROUNDING_TOL: f64 = 1e-9;

/// First-order variances and covariance of the naive mode estimators at
/// sample size `n`.
///
/// The shared `(1−f)/n` prefactor multiplies three population brackets; a
/// negative variance bracket or a correlation outside [-1, 1] means the
/// first-order approximation is not usable on this population and is
/// reported as an error instead of being clamped.
pub fn mode_moments(theory: &PopulationTheory, n: usize) -> Result<ModeMomentSet, TheoryError> {
    check_sample_size(theory, n)?;
    let f = n as f64 / theory.n_pop as f64;
    let prefactor = (1.0 - f) / n as f64;

    let dy = theory.density_y;
    let dx = theory.density_x;
    let bracket_y = 2.25 / (dy * dy) + 4.0 * theory.var_y + 12.0 * theory.s_y_my / dy;
    let bracket_x = 2.25 / (dx * dx) + 4.0 * theory.var_x + 12.0 * theory.s_x_mx / dx;
    let bracket_cov = 9.0 / (dx * dy) * (theory.p_matrix.p11 - 0.25)
        + 6.0 * theory.s_y_mx / dx
        + 6.0 * theory.s_x_my / dy
        + 4.0 * theory.cov_yx;

    if bracket_y <= 0.0 {
        return Err(TheoryError::NegativeFirstOrderVariance {
            variable: "y",
            value: prefactor * bracket_y,
        });
    }
    if bracket_x <= 0.0 {
        return Err(TheoryError::NegativeFirstOrderVariance {
            variable: "x",
            value: prefactor * bracket_x,
        });
    }
    let rho = bracket_cov / (bracket_y * bracket_x).sqrt();
    if rho.abs() > 1.0 + RHO_ROUNDING_TOL {
        return Err(TheoryError::CorrelationOutOfRange { rho });
    }

    let var_mode_y = prefactor * bracket_y;
    let var_mode_x = prefactor * bracket_x;
    Ok(ModeMomentSet {
        n,
        sampling_fraction: f,
        var_mode_y,
        var_mode_x,
        cov_modes: prefactor * bracket_cov,
        rho,
        cv_y: var_mode_y.sqrt() / theory.mode_y,
        cv_x: var_mode_x.sqrt() / theory.mode_x,
    })
}

/// Quadratic forms like `V(ỹ) + u²V(x̃) − 2u·Cov` are nonnegative whenever
/// |ρ| ≤ 1; rounding can still produce a tiny negative near zero, which is
/// clamped.
fn clamp_mse(raw: f64) -> f64 {
    raw.max(0.0)
}

/// First-order MSE of the ratio estimator, `V(ỹ) + R̃²V(x̃) − 2R̃·Cov`.
pub fn mse_naive_ratio(mm: &ModeMomentSet, theory: &PopulationTheory) -> Result<f64, TheoryError> {
    if theory.mode_x == 0.0 {
        return Err(TheoryError::ZeroAuxiliaryMode);
    }
    let r = theory.mode_y / theory.mode_x;
    Ok(clamp_mse(
        mm.var_mode_y + r * r * mm.var_mode_x - 2.0 * r * mm.cov_modes,
    ))
}

/// First-order MSE of the product estimator, `V(ỹ) + R̃²V(x̃) + 2R̃·Cov`.
pub fn mse_naive_product(
    mm: &ModeMomentSet,
    theory: &PopulationTheory,
) -> Result<f64, TheoryError> {
    if theory.mode_x == 0.0 {
        return Err(TheoryError::ZeroAuxiliaryMode);
    }
    let r = theory.mode_y / theory.mode_x;
    Ok(clamp_mse(
        mm.var_mode_y + r * r * mm.var_mode_x + 2.0 * r * mm.cov_modes,
    ))
}

/// First-order bias and MSE of the transformed ratio estimator at shift
/// `l1`: with `u = Ỹ/(X̃+L1)`, bias is `Ỹ·V(x̃)/(X̃+L1)² − Cov/(X̃+L1)` and
/// MSE is `V(ỹ) + u²V(x̃) − 2u·Cov`.
pub fn transformed_ratio_theory(
    mm: &ModeMomentSet,
    theory: &PopulationTheory,
    l1: f64,
) -> Result<TransformedTheory, TheoryError> {
    let shifted = theory.mode_x + l1;
    if shifted == 0.0 {
        return Err(TheoryError::VanishingShiftedMode { scalar: l1 });
    }
    let u = theory.mode_y / shifted;
    Ok(TransformedTheory {
        bias: theory.mode_y * mm.var_mode_x / (shifted * shifted) - mm.cov_modes / shifted,
        mse: clamp_mse(mm.var_mode_y + u * u * mm.var_mode_x - 2.0 * u * mm.cov_modes),
    })
}

/// First-order bias and MSE of the transformed product estimator at shift
/// `k1` (the `+2u·Cov` branch of the same quadratic form).
pub fn transformed_product_theory(
    mm: &ModeMomentSet,
    theory: &PopulationTheory,
    k1: f64,
) -> Result<TransformedTheory, TheoryError> {
    let shifted = theory.mode_x + k1;
    if shifted == 0.0 {
        return Err(TheoryError::VanishingShiftedMode { scalar: k1 });
    }
    let u = theory.mode_y / shifted;
    Ok(TransformedTheory {
        bias: theory.mode_y * mm.var_mode_x / (shifted * shifted) + mm.cov_modes / shifted,
        mse: clamp_mse(mm.var_mode_y + u * u * mm.var_mode_x + 2.0 * u * mm.cov_modes),
    })
}

/// MSE-minimising shift scalars: `L1 = Ỹ·V(x̃)/Cov − X̃`, `K1 = −Ỹ·V(x̃)/Cov − X̃`.
/// The ratio `V(x̃)/Cov` is free of the `(1−f)/n` prefactor, so the optima
/// do not depend on the sample size.
pub fn optimal_scalars(
    mm: &ModeMomentSet,
    theory: &PopulationTheory,
) -> Result<ScalarChoice, TheoryError> {
    if mm.cov_modes == 0.0 {
        return Err(TheoryError::ZeroCovariance);
    }
    let core = theory.mode_y * mm.var_mode_x / mm.cov_modes;
    Ok(ScalarChoice {
        l1: core - theory.mode_x,
        k1: -core - theory.mode_x,
    })
}

/// Minimum MSEs, by evaluating the MSE expressions at the optimal scalars.
pub fn optimal_mse(mm: &ModeMomentSet, theory: &PopulationTheory) -> Result<OptimalMse, TheoryError> {
    let scalars = optimal_scalars(mm, theory)?;
    let tr = transformed_ratio_theory(mm, theory, scalars.l1)?;
    let tp = transformed_product_theory(mm, theory, scalars.k1)?;
    Ok(OptimalMse {
        mse_tr_opt: tr.mse,
        mse_tp_opt: tp.mse,
        mse_tp_opt_printed: mm.var_mode_y * (1.0 + mm.rho * mm.rho),
    })
}

/// Boundary tolerance for the efficiency booleans.
const EFFICIENCY_TOL: f64 = 1e-12;

/// Whether the transformed ratio estimator at `l1` beats the naive and the
/// plain ratio estimators, with the correlation-form thresholds alongside.
pub fn efficiency_conditions(
    mm: &ModeMomentSet,
    theory: &PopulationTheory,
    l1: f64,
) -> Result<EfficiencyConditions, TheoryError> {
    if !(mm.cv_y > 0.0) || !mm.cv_x.is_finite() {
        return Err(TheoryError::DegenerateCv);
    }
    let shifted = theory.mode_x + l1;
    if shifted == 0.0 {
        return Err(TheoryError::VanishingShiftedMode { scalar: l1 });
    }
    let mse_naive = mm.var_mode_y;
    let mse_ratio = mse_naive_ratio(mm, theory)?;
    let mse_tr = transformed_ratio_theory(mm, theory, l1)?.mse;

    let cv_ratio = mm.cv_x / mm.cv_y;
    let damping = theory.mode_x / shifted;
    Ok(EfficiencyConditions {
        vs_naive: mse_tr <= mse_naive + EFFICIENCY_TOL * mse_naive.abs(),
        vs_ratio: mse_tr <= mse_ratio + EFFICIENCY_TOL * mse_ratio.abs().max(mse_naive.abs()),
        threshold_vs_naive: 0.5 * damping * cv_ratio,
        threshold_vs_ratio: 0.5 * (damping + 1.0) * cv_ratio,
        rho: mm.rho,
    })
}

/// Relative efficiency in percent, `100·MSE(base)/MSE(candidate)`.
pub fn relative_efficiency(mse_base: f64, mse: f64) -> Result<f64, TheoryError> {
    if !(mse > 0.0) {
        return Err(TheoryError::ZeroMse);
    }
    Ok(100.0 * mse_base / mse)
}

/// Inverse CDF of Student's t with `df` degrees of freedom, through the
/// inverted regularized incomplete beta function.
pub fn t_quantile(df: usize, p: f64) -> Result<f64, TheoryError> {
    if df == 0 {
        return Err(TheoryError::InvalidDegreesOfFreedom);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(TheoryError::InvalidProbability { p });
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let nu = df as f64;
    let tail = 2.0 * p.min(1.0 - p);
    let y = inv_inc_beta(tail, 0.5 * nu, 0.5);
    let t = (nu * (1.0 - y) / y).sqrt();
    Ok(if p > 0.5 { t } else { -t })
}

/// `estimate ± t_{n−1}((1+level)/2)·sqrt(mse)`.
pub fn confidence_interval(
    estimate: f64,
    mse: f64,
    n: usize,
    level: f64,
) -> Result<ConfidenceInterval, TheoryError> {
    if n < 2 {
        return Err(TheoryError::InvalidSampleSize { n });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(TheoryError::InvalidLevel { level });
    }
    if !mse.is_finite() || mse < 0.0 {
        return Err(TheoryError::InvalidMse { mse });
    }
    let t = t_quantile(n - 1, 0.5 + 0.5 * level)?;
    let half = t * mse.sqrt();
    Ok(ConfidenceInterval {
        lower: estimate - half,
        upper: estimate + half,
        level,
        df: n - 1,
    })
}

/// Assembles the full closed-form report for one sample size and scalar
/// choice.
pub fn build_theory_report(
    theory: &PopulationTheory,
    mm: &ModeMomentSet,
    scalars: ScalarChoice,
) -> Result<TheoryReport, TheoryError> {
    let mse_naive = mm.var_mode_y;
    let mse_ratio = mse_naive_ratio(mm, theory)?;
    let mse_product = mse_naive_product(mm, theory)?;
    let tr = transformed_ratio_theory(mm, theory, scalars.l1)?;
    let tp = transformed_product_theory(mm, theory, scalars.k1)?;
    let opt_scalars = optimal_scalars(mm, theory)?;
    let opt = optimal_mse(mm, theory)?;
    Ok(TheoryReport {
        n: mm.n,
        scalars,
        mse_naive,
        mse_ratio,
        mse_product,
        mse_tr: tr.mse,
        mse_tp: tp.mse,
        bias_tr: tr.bias,
        bias_tp: tp.bias,
        l1_opt: opt_scalars.l1,
        k1_opt: opt_scalars.k1,
        mse_tr_opt: opt.mse_tr_opt,
        mse_tp_opt: opt.mse_tp_opt,
        mse_tp_opt_printed: opt.mse_tp_opt_printed,
        re_ratio: relative_efficiency(mse_naive, mse_ratio)?,
        re_tr: relative_efficiency(mse_naive, tr.mse)?,
        efficiency: efficiency_conditions(mm, theory, scalars.l1)?,
    })
}
