//! Monte Carlo engine: simulated MSE / ARB / relative efficiency,
//! exact-over-simulated MSE ratios, confidence-interval coverage, the
//! shift-scalar sweep, and an exhaustive-enumeration oracle for small
//! populations.
//!
//! Determinism contract: replication `k` at sample size `n` draws from the
//! stream `derive_seed(base_seed, PURPOSE_SIMULATION, n, k)`, and all
//! aggregation runs in fixed replication order over the collected
//! per-replication values. Reports are therefore bit-identical across runs,
//! thread counts and scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, DataError, PairedPopulation};
use crate::estimators::{
    self, Estimator, EstimatorError, SampleMoments, ScalarChoice,
};
use crate::rng::{derive_seed, PURPOSE_SIMULATION};
use crate::theory::{
    mode_moments, mse_naive_product, mse_naive_ratio, optimal_scalars, t_quantile,
    transformed_product_theory, transformed_ratio_theory, PopulationTheory, TheoryError,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("{estimator}: {excluded} of {replications} replications degenerated (over the 0.1% budget); the results would be biased")]
    TooManyExclusions {
        estimator: &'static str,
        excluded: usize,
        replications: usize,
    },
    #[error("scalar sweep needs a nonempty grid")]
    EmptyGrid,
}

/// Shift scalars for a run: fixed values, or the MSE-minimising optima
/// computed from the population theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarSpec {
    Optimal,
    Fixed(ScalarChoice),
}

/// Monte Carlo run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub replications: usize,
    pub sample_sizes: Vec<usize>,
    pub base_seed: u64,
    /// Significance level of the coverage intervals.
    pub alpha: f64,
    pub scalars: ScalarSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Simulated results for one estimator at one sample size.
///
/// `arb`, `re_percent` and `exact_over_sim_ratio` are `None` where the
/// defining ratio is 0/0 (population mode zero, or zero simulated MSE when
/// n = N); `re_percent` of the naive estimator is 100 by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub n: usize,
    pub estimator: Estimator,
    pub sim_mse: f64,
    pub arb: Option<f64>,
    pub re_percent: Option<f64>,
    pub exact_mse: f64,
    pub exact_over_sim_ratio: Option<f64>,
    pub coverage_percent: f64,
    pub mean_estimate: f64,
    pub quartiles: Quartiles,
    /// Mean per-replication confidence interval endpoints,
    /// `mean(estimate) ± t·sqrt(exact MSE)`.
    pub sim_ci: CiBounds,
    pub excluded: usize,
}

/// Full Monte Carlo report: one row per estimator per sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub replications: usize,
    pub base_seed: u64,
    pub alpha: f64,
    pub scalars: ScalarChoice,
    /// Population mode of the study variable (the estimation target).
    pub true_mode: f64,
    /// Known population mode of the auxiliary variable.
    pub aux_mode: f64,
    pub rows: Vec<SimRow>,
}

impl SimReport {
    pub fn row(&self, n: usize, estimator: Estimator) -> Option<&SimRow> {
        self.rows.iter().find(|r| r.n == n && r.estimator == estimator)
    }
}

/// One grid point of the scalar sweep. Degenerate points (where the shifted
/// population mode vanishes) are flagged and carry no MSE values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub l1: f64,
    pub exact_mse: Option<f64>,
    pub sim_mse: Option<f64>,
    pub excluded: usize,
    pub degenerate: bool,
    pub is_optimum: bool,
}

/// Exact and simulated MSE of the transformed ratio estimator over a grid
/// of shift scalars, with common random numbers across the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub n: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub true_mode: f64,
    pub aux_mode: f64,
    pub l1_opt: f64,
    pub points: Vec<SweepPoint>,
}

/// Exact sampling-design moments of one estimator over all C(N, n) samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumRow {
    pub estimator: Estimator,
    pub mse: f64,
    pub bias: f64,
    pub excluded: usize,
}

/// Exhaustive enumeration over every subset: the exact design MSE and bias
/// that a simulation estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub subsets: u64,
    pub true_mode: f64,
    pub aux_mode: f64,
    pub rows: Vec<EnumRow>,
}

/// Fraction of replications allowed to degenerate before a run is aborted.
const MAX_EXCLUSION_FRACTION: f64 = 0.001;

fn validate_config(pop: &PairedPopulation, cfg: &SimConfig) -> Result<(), SimError> {
    if cfg.replications == 0 {
        return Err(SimError::InvalidConfig("replications must be at least 1".into()));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(SimError::InvalidConfig(format!(
            "alpha {} outside the open interval (0, 1)",
            cfg.alpha
        )));
    }
    if cfg.sample_sizes.is_empty() {
        return Err(SimError::InvalidConfig("no sample sizes given".into()));
    }
    for &n in &cfg.sample_sizes {
        if n < 2 || n > pop.len() {
            return Err(SimError::InvalidConfig(format!(
                "sample size {n} outside (1, {}]",
                pop.len()
            )));
        }
    }
    Ok(())
}

/// Resolves a scalar spec against the population theory. The optimal
/// scalars are free of the sampling fraction, so any valid sample size
/// yields the same values; n = N (where the finite-population factor
/// annihilates the moments) is probed one unit lower.
pub fn resolve_scalars(
    theory: &PopulationTheory,
    spec: &ScalarSpec,
    n: usize,
) -> Result<ScalarChoice, SimError> {
    match spec {
        ScalarSpec::Fixed(s) => Ok(*s),
        ScalarSpec::Optimal => {
            let probe = if n == theory.n_pop { n - 1 } else { n };
            let mm = mode_moments(theory, probe)?;
            Ok(optimal_scalars(&mm, theory)?)
        }
    }
}

/// Per-replication estimates; `None` marks a degenerate estimator on that
/// sample (denominator crossed zero), counted and excluded upstream.
fn replicate(
    pop: &PairedPopulation,
    n: usize,
    seed: u64,
    aux_mode: f64,
    scalars: ScalarChoice,
) -> [Option<f64>; 5] {
    let draw = dataset::srswor(pop, n, seed).expect("sample size validated");
    let sm = SampleMoments::from_draw(&draw).expect("n >= 2 validated");
    [
        Some(sm.naive_mode_y),
        estimators::ratio_estimate(&sm, aux_mode).ok(),
        estimators::product_estimate(&sm, aux_mode).ok(),
        estimators::transformed_ratio_estimate(&sm, aux_mode, scalars.l1).ok(),
        estimators::transformed_product_estimate(&sm, aux_mode, scalars.k1).ok(),
    ]
}

/// Runs the Monte Carlo study: for each sample size, `replications` SRSWOR
/// samples, all five estimators per sample, and the aggregates defined in
/// the report types. The per-replication confidence interval plugs the
/// exact (formula) MSE of each estimator into `estimate ± t·sqrt(MSE)`.
pub fn run_simulation(
    pop: &PairedPopulation,
    theory: &PopulationTheory,
    cfg: &SimConfig,
) -> Result<SimReport, SimError> {
    validate_config(pop, cfg)?;
    let scalars = resolve_scalars(theory, &cfg.scalars, cfg.sample_sizes[0])?;
    let true_mode = theory.mode_y;
    let aux_mode = theory.mode_x;

    let mut rows = Vec::with_capacity(cfg.sample_sizes.len() * Estimator::ALL.len());
    for &n in &cfg.sample_sizes {
        let mm = mode_moments(theory, n)?;
        let exact = [
            mm.var_mode_y,
            mse_naive_ratio(&mm, theory)?,
            mse_naive_product(&mm, theory)?,
            transformed_ratio_theory(&mm, theory, scalars.l1)?.mse,
            transformed_product_theory(&mm, theory, scalars.k1)?.mse,
        ];
        let t_mult = t_quantile(n - 1, 1.0 - cfg.alpha / 2.0)?;

        let estimates: Vec<[Option<f64>; 5]> = (0..cfg.replications as u64)
            .into_par_iter()
            .map(|k| {
                let seed = derive_seed(cfg.base_seed, PURPOSE_SIMULATION, n, k);
                replicate(pop, n, seed, aux_mode, scalars)
            })
            .collect();

        let mut per_estimator = Vec::with_capacity(5);
        for (idx, estimator) in Estimator::ALL.into_iter().enumerate() {
            let values: Vec<f64> = estimates.iter().filter_map(|row| row[idx]).collect();
            let excluded = cfg.replications - values.len();
            if excluded as f64 > MAX_EXCLUSION_FRACTION * cfg.replications as f64 {
                return Err(SimError::TooManyExclusions {
                    estimator: estimator.name(),
                    excluded,
                    replications: cfg.replications,
                });
            }
            per_estimator.push((estimator, values, excluded));
        }

        let sim_mse_naive = mean_squared_deviation(&per_estimator[0].1, true_mode);
        for (estimator, values, excluded) in &per_estimator {
            let count = values.len() as f64;
            let sim_mse = mean_squared_deviation(values, true_mode);
            let mean_estimate = values.iter().sum::<f64>() / count;
            let arb = if true_mode != 0.0 {
                Some((mean_estimate - true_mode).abs() / true_mode.abs())
            } else {
                None
            };
            let re_percent = if *estimator == Estimator::Naive {
                Some(100.0)
            } else if sim_mse > 0.0 {
                Some(100.0 * sim_mse_naive / sim_mse)
            } else if sim_mse_naive == 0.0 {
                Some(100.0)
            } else {
                None
            };
            let exact_mse = exact[Estimator::ALL.iter().position(|e| e == estimator).unwrap()];
            let exact_over_sim_ratio = if sim_mse > 0.0 {
                Some(exact_mse / sim_mse)
            } else {
                None
            };
            let half_width = t_mult * exact_mse.sqrt();
            let covered = values
                .iter()
                .filter(|v| (**v - true_mode).abs() <= half_width)
                .count();
            let (lower, median, upper) = dataset::quartiles(values);
            rows.push(SimRow {
                n,
                estimator: *estimator,
                sim_mse,
                arb,
                re_percent,
                exact_mse,
                exact_over_sim_ratio,
                coverage_percent: 100.0 * covered as f64 / count,
                mean_estimate,
                quartiles: Quartiles { lower, median, upper },
                sim_ci: CiBounds {
                    lower: mean_estimate - half_width,
                    upper: mean_estimate + half_width,
                },
                excluded: *excluded,
            });
        }
    }

    Ok(SimReport {
        replications: cfg.replications,
        base_seed: cfg.base_seed,
        alpha: cfg.alpha,
        scalars,
        true_mode,
        aux_mode,
        rows,
    })
}

/// The coverage study is the same engine; the coverage and interval fields
/// of the report are its outputs.
pub fn coverage_study(
    pop: &PairedPopulation,
    theory: &PopulationTheory,
    cfg: &SimConfig,
) -> Result<SimReport, SimError> {
    run_simulation(pop, theory, cfg)
}

fn mean_squared_deviation(values: &[f64], target: f64) -> f64 {
    values.iter().map(|v| (v - target) * (v - target)).sum::<f64>() / values.len() as f64
}

/// Exact and simulated MSE of the transformed ratio estimator over a grid
/// of shifts. The same `replications` samples are reused at every grid
/// point (common random numbers), drawn from the same streams as
/// [`run_simulation`], so the L1 = 0 column reproduces that run's plain
/// ratio estimator bit for bit. The grid is augmented with 0 and the
/// optimal shift, then sorted.
pub fn scalar_sweep(
    pop: &PairedPopulation,
    theory: &PopulationTheory,
    n: usize,
    grid: &[f64],
    replications: usize,
    base_seed: u64,
) -> Result<SweepReport, SimError> {
    if grid.is_empty() {
        return Err(SimError::EmptyGrid);
    }
    if replications == 0 {
        return Err(SimError::InvalidConfig("replications must be at least 1".into()));
    }
    if n < 2 || n > pop.len() {
        return Err(SimError::InvalidConfig(format!(
            "sample size {n} outside (1, {}]",
            pop.len()
        )));
    }
    let mm = mode_moments(theory, n)?;
    let l1_opt = optimal_scalars(&mm, theory)?.l1;
    let aux_mode = theory.mode_x;
    let true_mode = theory.mode_y;

    let mut points: Vec<f64> = grid.to_vec();
    for extra in [0.0, l1_opt] {
        if !points.iter().any(|&p| p == extra) {
            points.push(extra);
        }
    }
    points.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    points.dedup();

    let modes: Vec<(f64, f64)> = (0..replications as u64)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(base_seed, PURPOSE_SIMULATION, n, k);
            let draw = dataset::srswor(pop, n, seed).expect("sample size validated");
            let sm = SampleMoments::from_draw(&draw).expect("n >= 2 validated");
            (sm.naive_mode_y, sm.naive_mode_x)
        })
        .collect();

    let mut out = Vec::with_capacity(points.len());
    for l1 in points {
        let shifted_pop = aux_mode + l1;
        if shifted_pop == 0.0 {
            out.push(SweepPoint {
                l1,
                exact_mse: None,
                sim_mse: None,
                excluded: 0,
                degenerate: true,
                is_optimum: l1 == l1_opt,
            });
            continue;
        }
        let exact = transformed_ratio_theory(&mm, theory, l1)?.mse;
        let mut acc = 0.0;
        let mut count = 0usize;
        for &(mode_y, mode_x) in &modes {
            let shifted = mode_x + l1;
            if shifted == 0.0 || shifted.signum() != shifted_pop.signum() {
                continue;
            }
            let est = mode_y * (shifted_pop / shifted);
            acc += (est - true_mode) * (est - true_mode);
            count += 1;
        }
        let excluded = replications - count;
        if excluded as f64 > MAX_EXCLUSION_FRACTION * replications as f64 {
            return Err(SimError::TooManyExclusions {
                estimator: "transformed_ratio",
                excluded,
                replications,
            });
        }
        out.push(SweepPoint {
            l1,
            exact_mse: Some(exact),
            sim_mse: Some(acc / count as f64),
            excluded,
            degenerate: false,
            is_optimum: l1 == l1_opt,
        });
    }

    Ok(SweepReport {
        n,
        replications,
        base_seed,
        true_mode,
        aux_mode,
        l1_opt,
        points: out,
    })
}

/// Averages every estimator over every C(N, n) subset with equal weight:
/// the exact design MSE and bias the Monte Carlo run estimates. Needs no
/// density model, only the population modes.
pub fn enumeration_oracle(
    pop: &PairedPopulation,
    n: usize,
    scalars: ScalarChoice,
) -> Result<EnumerationReport, SimError> {
    let true_mode = naive_mode_of(pop.y())?;
    let aux_mode = naive_mode_of(pop.x())?;
    let mut sums = [0.0f64; 5];
    let mut sq_devs = [0.0f64; 5];
    let mut counts = [0u64; 5];
    let mut subsets = 0u64;
    for draw in dataset::enumerate_samples(pop, n)? {
        subsets += 1;
        let sm = SampleMoments::from_draw(&draw).expect("n >= 2 validated");
        let values = [
            Some(sm.naive_mode_y),
            estimators::ratio_estimate(&sm, aux_mode).ok(),
            estimators::product_estimate(&sm, aux_mode).ok(),
            estimators::transformed_ratio_estimate(&sm, aux_mode, scalars.l1).ok(),
            estimators::transformed_product_estimate(&sm, aux_mode, scalars.k1).ok(),
        ];
        for (idx, value) in values.into_iter().enumerate() {
            if let Some(v) = value {
                sums[idx] += v;
                sq_devs[idx] += (v - true_mode) * (v - true_mode);
                counts[idx] += 1;
            }
        }
    }
    let rows = Estimator::ALL
        .into_iter()
        .enumerate()
        .map(|(idx, estimator)| EnumRow {
            estimator,
            mse: sq_devs[idx] / counts[idx] as f64,
            bias: sums[idx] / counts[idx] as f64 - true_mode,
            excluded: (subsets - counts[idx]) as usize,
        })
        .collect();
    Ok(EnumerationReport {
        subsets,
        true_mode,
        aux_mode,
        rows,
    })
}

fn naive_mode_of(values: &[f64]) -> Result<f64, SimError> {
    estimators::naive_mode(values).map_err(|e: EstimatorError| {
        SimError::InvalidConfig(format!("population too small for the naive mode: {e}"))
    })
}
