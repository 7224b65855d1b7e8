//! Finite populations: synthetic generation, CSV ingestion, summaries,
//! SRSWOR draws and exhaustive sample enumeration.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, PURPOSE_GENERATE};
use crate::stats;

/// Default ceiling on the number of subsets `enumerate_samples` will visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("study and auxiliary variables differ in length ({y_len} vs {x_len})")]
    LengthMismatch { y_len: usize, x_len: usize },
    #[error("population too small: {n} units, need at least 4")]
    PopulationTooSmall { n: usize },
    #[error("non-finite value in column {column} at data row {row}")]
    NonFinite { column: String, row: usize },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("no data rows")]
    NoDataRows,
    #[error("missing column {name:?} in header row")]
    MissingColumn { name: &'static str },
    #[error("non-numeric value {value:?} in column {column} at data row {row}")]
    NonNumeric {
        column: String,
        row: usize,
        value: String,
    },
    #[error("sample size {n} out of range for population of {population} units")]
    SampleSizeOutOfRange { n: usize, population: usize },
    #[error("C({population}, {n}) exceeds the enumeration cap of {cap} subsets")]
    EnumerationCapExceeded {
        population: usize,
        n: usize,
        cap: u64,
    },
}

/// A finite population of paired `(y, x)` observations. `y` is the study
/// variable, `x` the auxiliary variable whose population mode is treated as
/// known by the ratio-type estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedPopulation {
    y: Vec<f64>,
    x: Vec<f64>,
}

impl PairedPopulation {
    /// Builds a population, enforcing equal lengths, `N ≥ 4` and finiteness.
    pub fn new(y: Vec<f64>, x: Vec<f64>) -> Result<Self, DataError> {
        if y.len() != x.len() {
            return Err(DataError::LengthMismatch {
                y_len: y.len(),
                x_len: x.len(),
            });
        }
        if y.len() < 4 {
            return Err(DataError::PopulationTooSmall { n: y.len() });
        }
        for (column, values) in [("y", &y), ("x", &x)] {
            if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFinite {
                    column: column.to_string(),
                    row: row + 1,
                });
            }
        }
        Ok(Self { y, x })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }
}

/// Parameters of the synthetic population: `x_i` i.i.d. Gamma(shape, scale)
/// and `y_i = intercept + slope·x_i + noise_sd·z_i` with standard normal
/// `z_i`. The Gamma is in the (shape k, scale θ) parameterization with
/// density `t^{k−1} e^{−t/θ} / (Γ(k) θ^k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub gamma_shape: f64,
    pub gamma_scale: f64,
    pub intercept: f64,
    pub slope: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    fn validate(&self) -> Result<(), DataError> {
        if self.n < 4 {
            return Err(DataError::InvalidConfig(format!(
                "population size {} below the minimum of 4",
                self.n
            )));
        }
        let finite_positive = [
            ("gamma_shape", self.gamma_shape),
            ("gamma_scale", self.gamma_scale),
        ];
        for (name, v) in finite_positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(DataError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("intercept", self.intercept), ("slope", self.slope)] {
            if !v.is_finite() {
                return Err(DataError::InvalidConfig(format!("{name} must be finite, got {v}")));
            }
        }
        if !self.noise_sd.is_finite() || self.noise_sd < 0.0 {
            return Err(DataError::InvalidConfig(format!(
                "noise_sd must be nonnegative, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }
}

/// One SRSWOR sample: the selected unit indices (ascending) and the
/// corresponding value vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDraw {
    indices: Vec<usize>,
    y_s: Vec<f64>,
    x_s: Vec<f64>,
}

impl SampleDraw {
    fn from_indices(pop: &PairedPopulation, indices: Vec<usize>) -> Self {
        let y_s = indices.iter().map(|&i| pop.y[i]).collect();
        let x_s = indices.iter().map(|&i| pop.x[i]).collect();
        Self { indices, y_s, x_s }
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn y(&self) -> &[f64] {
        &self.y_s
    }

    pub fn x(&self) -> &[f64] {
        &self.x_s
    }
}

/// Six-number summary of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub min: f64,
    pub lower_quartile: f64,
    pub median: f64,
    pub mean: f64,
    pub upper_quartile: f64,
    pub max: f64,
}

/// Per-variable six-number summaries of a population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub y: VariableSummary,
    pub x: VariableSummary,
}

/// Generates the synthetic population. Deterministic for a fixed seed: one
/// ChaCha8 stream, drawing `(x_i, z_i)` pairs unit by unit.
pub fn generate_population(cfg: &GeneratorConfig) -> Result<PairedPopulation, DataError> {
    cfg.validate()?;
    let gamma = Gamma::new(cfg.gamma_shape, cfg.gamma_scale)
        .map_err(|e| DataError::InvalidConfig(format!("gamma parameters rejected: {e}")))?;
    let mut rng = rng::stream(rng::derive_seed(cfg.seed, PURPOSE_GENERATE, cfg.n, 0));
    let mut y = Vec::with_capacity(cfg.n);
    let mut x = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let xi: f64 = gamma.sample(&mut rng);
        let zi: f64 = StandardNormal.sample(&mut rng);
        x.push(xi);
        y.push(cfg.intercept + cfg.slope * xi + cfg.noise_sd * zi);
    }
    PairedPopulation::new(y, x)
}

/// Loads a population from CSV. The header must contain `y` and `x` columns
/// (any order, case-insensitive); extra columns are ignored. Lines starting
/// with `#` are treated as comments, so artifacts written by the CLI (which
/// carry a manifest header) round-trip.
pub fn load_csv(path: &Path) -> Result<PairedPopulation, DataError> {
    let bytes = std::fs::read(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_csv_bytes(&bytes)
}

/// CSV ingestion from an in-memory buffer; see [`load_csv`].
pub fn load_csv_bytes(bytes: &[u8]) -> Result<PairedPopulation, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);

    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(DataError::NoDataRows);
    }
    let find = |name: &'static str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(DataError::MissingColumn { name })
    };
    let y_col = find("y")?;
    let x_col = find("x")?;

    let mut y = Vec::new();
    let mut x = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1; // 1-based data row, excluding the header
        let parse = |col: usize, name: &str| -> Result<f64, DataError> {
            let raw = record.get(col).unwrap_or("");
            let value: f64 = raw.parse().map_err(|_| DataError::NonNumeric {
                column: name.to_string(),
                row,
                value: raw.to_string(),
            })?;
            if !value.is_finite() {
                return Err(DataError::NonFinite {
                    column: name.to_string(),
                    row,
                });
            }
            Ok(value)
        };
        y.push(parse(y_col, "y")?);
        x.push(parse(x_col, "x")?);
    }
    if y.is_empty() {
        return Err(DataError::NoDataRows);
    }
    PairedPopulation::new(y, x)
}

fn summary_of(values: &[f64]) -> VariableSummary {
    let sorted = stats::sorted_copy(values);
    let (lower_quartile, median, upper_quartile) = stats::quartiles_sorted(&sorted);
    VariableSummary {
        min: sorted[0],
        lower_quartile,
        median,
        mean: stats::mean(values),
        upper_quartile,
        max: sorted[sorted.len() - 1],
    }
}

/// Six-number summaries for both variables.
pub fn summarize(pop: &PairedPopulation) -> SummaryStats {
    SummaryStats {
        y: summary_of(&pop.y),
        x: summary_of(&pop.x),
    }
}

/// Tukey quartiles `(lower, median, upper)` of arbitrary values; the same
/// convention `summarize` uses, exposed for the simulation report.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let sorted = stats::sorted_copy(values);
    stats::quartiles_sorted(&sorted)
}

/// Draws a simple random sample without replacement of size `n`.
///
/// Floyd's algorithm: each of the C(N, n) subsets is equally likely and
/// only O(n) working memory is used. Deterministic per `stream_seed`.
pub fn srswor(pop: &PairedPopulation, n: usize, stream_seed: u64) -> Result<SampleDraw, DataError> {
    let mut rng = rng::stream(stream_seed);
    srswor_with_rng(pop, n, &mut rng)
}

/// SRSWOR draw from a caller-provided generator.
pub fn srswor_with_rng<R: Rng>(
    pop: &PairedPopulation,
    n: usize,
    rng: &mut R,
) -> Result<SampleDraw, DataError> {
    let population = pop.len();
    if n < 2 || n > population {
        return Err(DataError::SampleSizeOutOfRange { n, population });
    }
    let mut chosen: HashSet<usize> = HashSet::with_capacity(n);
    let mut indices: Vec<usize> = Vec::with_capacity(n);
    for j in (population - n)..population {
        let t = rng.random_range(0..=j);
        if chosen.insert(t) {
            indices.push(t);
        } else {
            chosen.insert(j);
            indices.push(j);
        }
    }
    indices.sort_unstable();
    Ok(SampleDraw::from_indices(pop, indices))
}

/// C(n, k) if it does not exceed `cap`, else `None`. Exact integer
/// arithmetic; the running value is itself a binomial coefficient, so it
/// grows monotonically and the cap check cannot overflow.
pub fn binomial_at_most(n: usize, k: usize, cap: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > cap as u128 {
            return None;
        }
    }
    Some(c as u64)
}

/// Iterator over every size-`n` subset of the population in lexicographic
/// index order.
pub struct SampleEnumeration<'a> {
    pop: &'a PairedPopulation,
    next: Option<Vec<usize>>,
}

impl Iterator for SampleEnumeration<'_> {
    type Item = SampleDraw;

    fn next(&mut self) -> Option<SampleDraw> {
        let current = self.next.take()?;
        let draw = SampleDraw::from_indices(self.pop, current.clone());
        self.next = next_combination(current, self.pop.len());
        Some(draw)
    }
}

fn next_combination(mut c: Vec<usize>, population: usize) -> Option<Vec<usize>> {
    let n = c.len();
    // Find the rightmost index that can still advance.
    let mut i = n;
    while i > 0 {
        i -= 1;
        if c[i] != i + population - n {
            c[i] += 1;
            for j in (i + 1)..n {
                c[j] = c[j - 1] + 1;
            }
            return Some(c);
        }
    }
    None
}

/// Enumerates all C(N, n) samples with the default cap.
pub fn enumerate_samples(
    pop: &PairedPopulation,
    n: usize,
) -> Result<SampleEnumeration<'_>, DataError> {
    enumerate_samples_with_cap(pop, n, DEFAULT_ENUMERATION_CAP)
}

/// Enumerates all C(N, n) samples, rejecting runs larger than `cap`.
pub fn enumerate_samples_with_cap(
    pop: &PairedPopulation,
    n: usize,
    cap: u64,
) -> Result<SampleEnumeration<'_>, DataError> {
    let population = pop.len();
    if n < 2 || n > population {
        return Err(DataError::SampleSizeOutOfRange { n, population });
    }
    if binomial_at_most(population, n, cap).is_none() {
        return Err(DataError::EnumerationCapExceeded { population, n, cap });
    }
    Ok(SampleEnumeration {
        pop,
        next: Some((0..n).collect()),
    })
}
