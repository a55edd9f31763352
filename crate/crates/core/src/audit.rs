//! Variable-count checks and construction-time scaling measurements.

use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::kmeans::{self, KmeansProblem};
use crate::regression::{self, RegressionProblem};
use crate::svm::{self, SvmProblem};
use crate::terms::QuboTerms;
use crate::{Error, Model, PrecisionVector, Result};

/// One instance size: `n` points, `d` features, `clusters` (k-means only)
/// and `precision` entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SweepPoint {
    pub model: Model,
    pub n: usize,
    pub d: usize,
    pub clusters: usize,
    pub precision: usize,
}

impl SweepPoint {
    pub fn regression(n: usize, d: usize, precision: usize) -> Self {
        Self { model: Model::Regression, n, d, clusters: 0, precision }
    }

    pub fn svm(n: usize, d: usize, precision: usize) -> Self {
        Self { model: Model::Svm, n, d, clusters: 0, precision }
    }

    pub fn kmeans(n: usize, d: usize, clusters: usize) -> Self {
        Self { model: Model::Kmeans, n, d, clusters, precision: 0 }
    }

    /// The closed-form variable count.
    pub fn expected_variables(&self) -> usize {
        let p = audit_precision(self.precision);
        match self.model {
            Model::Regression => regression::variable_count(self.d, p.len()),
            Model::Svm => svm::variable_count(self.n, self.d, p.len(), p.positive_count()),
            Model::Kmeans => kmeans::variable_count(self.n, self.clusters),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRecord {
    pub model: Model,
    pub n: usize,
    pub d: usize,
    pub clusters: usize,
    pub precision: usize,
    pub positive_precision: usize,
    pub variables: usize,
    pub expected_variables: usize,
    /// Coefficient generation only.
    pub construction_s: f64,
    /// Dense accumulation and symmetrization of the generated terms.
    pub densify_s: f64,
    pub nonzeros: usize,
    /// `variables^2`, the logical count under a quadratic embedding.
    pub embedded_variables_estimate: usize,
}

/// `K` signed powers of two: `ceil(K/2)` positive entries `1, 1/2, ..` and
/// `floor(K/2)` negative entries `-2, -4, ..`.
pub fn audit_precision(k: usize) -> PrecisionVector {
    if k == 0 {
        return PrecisionVector::default();
    }
    let positive = k.div_ceil(2);
    let mut entries: Vec<f64> = (0..k - positive).map(|i| -(2f64.powi(i as i32 + 1))).collect();
    entries.extend((0..positive).map(|i| 2f64.powi(-(i as i32))));
    entries.sort_by(f64::total_cmp);
    PrecisionVector::new(entries).expect("audit precision entries are powers of two")
}

enum Instance {
    Regression(RegressionProblem, PrecisionVector),
    Svm(SvmProblem, PrecisionVector),
    Kmeans(KmeansProblem),
}

impl Instance {
    fn random(point: &SweepPoint, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(point.n, point.d, |_, _| rng.random_range(-1.0..1.0));
        Ok(match point.model {
            Model::Regression => {
                let y = DVector::from_fn(point.n, |_, _| rng.random_range(-1.0..1.0));
                Instance::Regression(RegressionProblem::new(x, y)?, audit_precision(point.precision))
            }
            Model::Svm => {
                let y = DVector::from_fn(point.n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
                Instance::Svm(SvmProblem::new(x, y)?, audit_precision(point.precision))
            }
            Model::Kmeans => Instance::Kmeans(KmeansProblem::new(x, point.clusters, 1.0, 1.0)?),
        })
    }

    fn terms(&self) -> Result<QuboTerms> {
        Ok(match self {
            Instance::Regression(prob, p) => regression::regression_terms(prob, p),
            Instance::Svm(prob, p) => svm::svm_terms(prob, p)?,
            Instance::Kmeans(prob) => kmeans::kmeans_terms(prob),
        })
    }
}

fn measure(point: &SweepPoint, repeats: usize) -> Result<ScalingRecord> {
    let instance = Instance::random(point, 0x5eed)?;
    let mut construction_s = f64::INFINITY;
    let mut terms = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let t = black_box(instance.terms()?);
        construction_s = construction_s.min(start.elapsed().as_secs_f64());
        terms = Some(t);
    }
    let terms = terms.expect("at least one repeat");
    let variables = terms.m();
    let start = Instant::now();
    let qubo = terms.into_instance()?;
    let densify_s = start.elapsed().as_secs_f64();
    let p = audit_precision(point.precision);
    Ok(ScalingRecord {
        model: point.model,
        n: point.n,
        d: point.d,
        clusters: point.clusters,
        precision: if point.model == Model::Kmeans { 0 } else { p.len() },
        positive_precision: if point.model == Model::Kmeans { 0 } else { p.positive_count() },
        variables,
        expected_variables: point.expected_variables(),
        construction_s,
        densify_s,
        nonzeros: qubo.nonzeros(),
        embedded_variables_estimate: variables * variables,
    })
}

/// Builds each instance and checks its variable count against the formula.
pub fn audit_variable_counts(sweep: &[SweepPoint]) -> Result<Vec<ScalingRecord>> {
    sweep
        .iter()
        .map(|point| {
            let record = measure(point, 1)?;
            if record.variables != record.expected_variables {
                return Err(Error::VariableCount {
                    model: point.model.name(),
                    expected: record.expected_variables,
                    actual: record.variables,
                });
            }
            Ok(record)
        })
        .collect()
}

/// The size parameter varied by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    N,
    D,
    Clusters,
    Precision,
}

impl Axis {
    fn apply(self, base: SweepPoint, size: usize) -> SweepPoint {
        let mut p = base;
        match self {
            Axis::N => p.n = size,
            Axis::D => p.d = size,
            Axis::Clusters => p.clusters = size,
            Axis::Precision => p.precision = size,
        }
        p
    }
}

/// Growth exponents of the construction cost.
pub fn claimed_exponent(model: Model, axis: Axis) -> Option<f64> {
    match (model, axis) {
        (Model::Regression, Axis::N) => Some(1.0),
        (Model::Regression, Axis::D) => Some(2.0),
        (Model::Regression, Axis::Precision) => Some(2.0),
        (Model::Svm, Axis::N) => Some(1.0),
        (Model::Svm, Axis::D) => Some(1.0),
        (Model::Svm, Axis::Precision) => Some(2.0),
        (Model::Kmeans, Axis::N) => Some(2.0),
        (Model::Kmeans, Axis::Clusters) => Some(1.0),
        (Model::Kmeans, Axis::D) => Some(1.0),
        _ => None,
    }
}

/// Allowance above the claimed exponent for timing noise.
pub const EXPONENT_TOLERANCE: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisSweep {
    pub base: SweepPoint,
    pub axis: Axis,
    pub sizes: Vec<usize>,
    pub repeats: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentEstimate {
    pub model: Model,
    pub axis: Axis,
    pub sizes: Vec<usize>,
    pub construction_s: Vec<f64>,
    pub fitted_exponent: f64,
    pub claimed_exponent: f64,
    pub bound: f64,
    pub within_bound: bool,
    /// Informational: slope of the dense materialization time.
    pub densify_exponent: f64,
    pub records: Vec<ScalingRecord>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-12).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Times coefficient generation along one axis and fits the growth exponent.
pub fn audit_construction_scaling(sweep: &AxisSweep) -> Result<ExponentEstimate> {
    let model = sweep.base.model;
    let mut sizes = sweep.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 4 {
        return Err(Error::Config(format!(
            "a scaling sweep needs at least 4 distinct sizes, got {}",
            sizes.len()
        )));
    }
    let claimed = claimed_exponent(model, sweep.axis).ok_or_else(|| {
        Error::Config(format!("no construction exponent is audited for {model} along {:?}", sweep.axis))
    })?;
    let records = sizes
        .iter()
        .map(|&size| measure(&sweep.axis.apply(sweep.base, size), sweep.repeats))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let construction_s: Vec<f64> = records.iter().map(|r| r.construction_s).collect();
    let densify: Vec<f64> = records.iter().map(|r| r.densify_s).collect();
    let fitted_exponent = log_log_slope(&xs, &construction_s);
    let bound = claimed + EXPONENT_TOLERANCE;
    Ok(ExponentEstimate {
        model,
        axis: sweep.axis,
        sizes,
        construction_s,
        fitted_exponent,
        claimed_exponent: claimed,
        bound,
        within_bound: fitted_exponent <= bound,
        densify_exponent: log_log_slope(&xs, &densify),
        records,
    })
}

/// One sweep per audited axis, sized to finish in seconds.
pub fn default_scaling_sweeps() -> Vec<AxisSweep> {
    let sweep = |base, axis, sizes: &[usize]| AxisSweep {
        base,
        axis,
        sizes: sizes.to_vec(),
        repeats: 7,
    };
    vec![
        sweep(SweepPoint::regression(0, 4, 6), Axis::N, &[20_000, 40_000, 80_000, 160_000]),
        sweep(SweepPoint::regression(2_000, 0, 6), Axis::D, &[8, 16, 32, 64]),
        sweep(SweepPoint::svm(0, 4, 6), Axis::N, &[500, 1_000, 2_000, 4_000]),
        sweep(SweepPoint::svm(500, 0, 6), Axis::D, &[8, 16, 32, 64]),
        sweep(SweepPoint::svm(100, 4, 0), Axis::Precision, &[4, 8, 16, 32]),
        sweep(SweepPoint::kmeans(0, 2, 4), Axis::N, &[32, 64, 128, 256]),
        sweep(SweepPoint::kmeans(128, 2, 0), Axis::Clusters, &[2, 4, 8, 16]),
        sweep(SweepPoint::kmeans(128, 0, 4), Axis::D, &[8, 16, 32, 64]),
    ]
}

/// A mixed sweep over all three models.
pub fn default_count_sweep() -> Vec<SweepPoint> {
    let mut sweep = Vec::new();
    for (d, k) in [(1, 2), (2, 3), (3, 6), (4, 4), (6, 5), (8, 8), (7, 3), (10, 1), (2, 7), (5, 2)] {
        sweep.push(SweepPoint::regression(12, d, k));
    }
    for (n, d, k) in [(5, 2, 4), (3, 1, 2), (10, 3, 6), (8, 2, 3), (2, 1, 1), (6, 4, 5), (20, 2, 6), (4, 3, 7), (12, 1, 8), (9, 5, 4)] {
        sweep.push(SweepPoint::svm(n, d, k));
    }
    for (n, d, k) in [(6, 2, 3), (4, 1, 2), (8, 3, 4), (10, 2, 5), (12, 2, 3), (9, 1, 3), (16, 3, 4), (5, 2, 2), (20, 4, 10), (7, 1, 7)] {
        sweep.push(SweepPoint::kmeans(n, d, k));
    }
    sweep
}

pub fn write_records_csv<W: Write>(records: &[ScalingRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer
            .serialize(record)
            .map_err(|e| Error::Config(format!("CSV serialization failed: {e}")))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn estimates_json(estimates: &[ExponentEstimate]) -> Result<String> {
    #[derive(Serialize)]
    struct Summary<'a> {
        model: Model,
        axis: Axis,
        sizes: &'a [usize],
        construction_s: &'a [f64],
        fitted_exponent: f64,
        claimed_exponent: f64,
        bound: f64,
        within_bound: bool,
        densify_exponent: f64,
    }
    let summary: Vec<Summary> = estimates
        .iter()
        .map(|e| Summary {
            model: e.model,
            axis: e.axis,
            sizes: &e.sizes,
            construction_s: &e.construction_s,
            fitted_exponent: e.fitted_exponent,
            claimed_exponent: e.claimed_exponent,
            bound: e.bound,
            within_bound: e.within_bound,
            densify_exponent: e.densify_exponent,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&summary)?)
}
