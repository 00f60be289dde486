//! The testing step: Monte-Carlo fidelity of a trained field over random
//! fluctuations, and sweeps over the fluctuation bound or the training-grid
//! size.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::models::{ModelFamily, QubitModel};
use crate::optimizer::{evaluate_ensemble, train, ControlField, OptimizationConfig, TrainingResult};
use crate::sampling::{draw_sample, stream_rng, training_grid_per_group, Distribution, FluctuationSample, Stream};
use crate::Scalar;

/// Number of uniform histogram bins on `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 100;

/// Header of sweep and report CSV files.
pub const REPORT_CSV_COLUMNS: &str = "mean_fidelity,std_fidelity,min_fidelity,n,seed";

/// Summary of fidelities over a batch of random fluctuation samples.
#[derive(Clone, Debug, PartialEq)]
pub struct TestReport<T> {
    pub n_samples: usize,
    pub mean_fidelity: T,
    /// Population standard deviation.
    pub std_fidelity: T,
    pub min_fidelity: T,
    /// Counts over [`HISTOGRAM_BINS`] equal bins of `[0, 1]`.
    pub histogram: Vec<u64>,
    pub seed: u64,
    /// Per-sample fidelities in draw order.
    pub fidelities: Vec<T>,
    /// The drawn fluctuation samples, aligned with `fidelities`.
    pub samples: Vec<FluctuationSample<T>>,
}

impl<T: Scalar> TestReport<T> {
    pub fn from_fidelities(fidelities: Vec<T>, samples: Vec<FluctuationSample<T>>, seed: u64) -> Result<Self> {
        if fidelities.is_empty() {
            return Err(invalid("report needs at least one fidelity"));
        }
        let n = fidelities.len();
        let nn = T::from_usize_lossy(n);
        let mut sum = T::zero();
        let mut min = T::infinity();
        let mut histogram = vec![0u64; HISTOGRAM_BINS];
        for &f in &fidelities {
            sum = sum + f;
            min = min.min(f);
            let bin = (f * T::from_usize_lossy(HISTOGRAM_BINS)).floor().to_usize().unwrap_or(0).min(HISTOGRAM_BINS - 1);
            histogram[bin] += 1;
        }
        let mean = sum / nn;
        let mut var = T::zero();
        for &f in &fidelities {
            var = var + (f - mean) * (f - mean);
        }
        Ok(Self {
            n_samples: n,
            mean_fidelity: mean,
            std_fidelity: (var / nn).sqrt(),
            min_fidelity: min,
            histogram,
            seed,
            fidelities,
            samples,
        })
    }

    /// Report over the union of two batches (`self` first). Keeps `self.seed`.
    pub fn combine(&self, other: &Self) -> Result<Self> {
        let mut f = self.fidelities.clone();
        f.extend_from_slice(&other.fidelities);
        let mut s = self.samples.clone();
        s.extend_from_slice(&other.samples);
        Self::from_fidelities(f, s, self.seed)
    }

    /// `mean,std,min,n,seed` (no trailing newline).
    pub fn csv_fields(&self) -> String {
        format!("{},{},{},{},{}", self.mean_fidelity, self.std_fidelity, self.min_fidelity, self.n_samples, self.seed)
    }
}

/// Tests `field` on `n` samples drawn from each parameter's distribution
/// using the testing stream of `seed`.
///
/// Samples are drawn sequentially from one generator and evaluated in
/// parallel, so the report does not depend on the thread count.
pub fn monte_carlo_fidelity<T: Scalar>(field: &ControlField<T>, model: &QubitModel<T>, n: usize, seed: u64) -> Result<TestReport<T>> {
    if n == 0 {
        return Err(invalid("need at least one test sample"));
    }
    model.check_field(field)?;
    let mut rng = stream_rng(seed, Stream::Testing);
    let samples = (0..n)
        .map(|_| draw_sample(model.fluctuations(), &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let fidelities = evaluate_ensemble(field, model, &samples, false)?
        .iter()
        .map(|e| e.fidelity())
        .collect();
    TestReport::from_fidelities(fidelities, samples, seed)
}

/// Knobs shared by all sweep points.
#[derive(Clone, Debug)]
pub struct SweepSettings<T> {
    /// Grid points per tie group during training.
    pub n_f: usize,
    pub n_test: usize,
    /// Recorded with the results; the training grid itself is deterministic.
    pub seed_train: u64,
    pub seed_test: u64,
    pub optimizer: OptimizationConfig<T>,
    /// Replaces each model's default test distribution when set.
    pub test_distribution: Option<Distribution>,
}

impl<T: Scalar> Default for SweepSettings<T> {
    fn default() -> Self {
        Self { n_f: 5, n_test: 5000, seed_train: 1, seed_test: 2, optimizer: OptimizationConfig::default(), test_distribution: None }
    }
}

/// Outcome of training then testing at one configuration.
#[derive(Clone, Debug)]
pub struct PointResult<T> {
    pub training: TrainingResult<T>,
    pub report: TestReport<T>,
}

/// Trains from the model's initial field on a grid with `grid_counts[g]`
/// points for tie group `g`, then runs the Monte-Carlo test.
pub fn train_and_test<T: Scalar>(model: &QubitModel<T>, grid_counts: &[usize], settings: &SweepSettings<T>) -> Result<PointResult<T>> {
    let ensemble = training_grid_per_group(model.fluctuations(), grid_counts)?;
    let training = train(model, &ensemble, &model.initial_field(), &settings.optimizer)?;
    let report = monte_carlo_fidelity(&training.field, model, settings.n_test, settings.seed_test)?;
    Ok(PointResult { training, report })
}

/// Which quantity a [`SweepTable`] varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweptParameter {
    Bound,
    SampleCount,
}

impl SweptParameter {
    pub fn column(self) -> &'static str {
        match self {
            SweptParameter::Bound => "theta",
            SweptParameter::SampleCount => "n_f",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow<T> {
    pub value: T,
    pub report: TestReport<T>,
    pub iterations: usize,
    pub final_objective: T,
    pub converged: bool,
}

/// One row per swept value, values strictly increasing.
#[derive(Clone, Debug)]
pub struct SweepTable<T> {
    pub parameter: SweptParameter,
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Scalar> SweepTable<T> {
    /// `theta,mean_fidelity,std_fidelity,min_fidelity,n,seed` (or `n_f,…`).
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", self.parameter.column(), REPORT_CSV_COLUMNS);
        for r in &self.rows {
            writeln!(out, "{},{}", r.value, r.report.csv_fields()).unwrap();
        }
        out
    }
}

fn prepare_model<T: Scalar>(family: ModelFamily, bound: T, settings: &SweepSettings<T>) -> Result<QubitModel<T>> {
    let model = family.build::<T>().with_bound(bound)?;
    Ok(match settings.test_distribution {
        Some(d) => model.with_test_distribution(d),
        None => model,
    })
}

fn row<T: Scalar>(value: T, point: PointResult<T>) -> SweepRow<T> {
    SweepRow {
        value,
        iterations: point.training.iterations,
        final_objective: point.training.final_objective(),
        converged: point.training.converged,
        report: point.report,
    }
}

/// For each bound: train on the `n_f`-per-group grid from the model's
/// initial field (no warm start), then test.
pub fn sweep_bound<T: Scalar>(family: ModelFamily, bounds: &[T], settings: &SweepSettings<T>) -> Result<SweepTable<T>> {
    if bounds.is_empty() {
        return Err(invalid("sweep needs at least one bound"));
    }
    if bounds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("sweep bounds must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(bounds.len());
    for &bound in bounds {
        let model = prepare_model(family, bound, settings)?;
        let counts = vec![settings.n_f; model.tie_groups().len()];
        rows.push(row(bound, train_and_test(&model, &counts, settings)?));
    }
    Ok(SweepTable { parameter: SweptParameter::Bound, rows })
}

/// For each grid size `N_f`: train on an `N_f`-per-group grid at fixed
/// `bound`, then test.
pub fn sweep_sample_count<T: Scalar>(family: ModelFamily, counts: &[usize], bound: T, settings: &SweepSettings<T>) -> Result<SweepTable<T>> {
    if counts.is_empty() || counts.contains(&0) {
        return Err(invalid("grid sizes must be at least 1"));
    }
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid sizes must be strictly increasing"));
    }
    let model = prepare_model(family, bound, settings)?;
    let groups = model.tie_groups().len();
    let mut rows = Vec::with_capacity(counts.len());
    for &n_f in counts {
        rows.push(row(T::from_usize_lossy(n_f), train_and_test(&model, &vec![n_f; groups], settings)?));
    }
    Ok(SweepTable { parameter: SweptParameter::SampleCount, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_statistics() {
        let r = TestReport::<f64>::from_fidelities(vec![1.0, 0.5, 0.995, 0.0], Vec::new(), 9).unwrap();
        assert_eq!(r.n_samples, 4);
        assert!((r.mean_fidelity - 0.62375).abs() < 1e-15);
        assert_eq!(r.min_fidelity, 0.0);
        assert_eq!(r.histogram.iter().sum::<u64>(), 4);
        assert_eq!(r.histogram[99], 2);
        assert_eq!(r.histogram[50], 1);
        assert_eq!(r.histogram[0], 1);
        assert!(TestReport::<f64>::from_fidelities(Vec::new(), Vec::new(), 0).is_err());
    }

    #[test]
    fn sweep_inputs_validated() {
        let s = SweepSettings::<f64>::default();
        assert!(sweep_bound(ModelFamily::SingleChargeExcited, &[], &s).is_err());
        assert!(sweep_bound(ModelFamily::SingleChargeExcited, &[0.2, 0.1], &s).is_err());
        assert!(sweep_sample_count(ModelFamily::SingleChargeExcited, &[0, 3], 0.1, &s).is_err());
    }

    #[test]
    fn csv_layout() {
        let report = TestReport::from_fidelities(vec![0.5, 1.0], Vec::new(), 3).unwrap();
        let table = SweepTable {
            parameter: SweptParameter::Bound,
            rows: vec![SweepRow { value: 0.25, report, iterations: 1, final_objective: 0.5, converged: true }],
        };
        assert_eq!(table.to_csv(), "theta,mean_fidelity,std_fidelity,min_fidelity,n,seed\n0.25,0.75,0.25,0.5,2,3\n");
    }
}
