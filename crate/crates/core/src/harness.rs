//! Evaluation harness: leave-one-well-out cross-validation, grid search
//! over detector hyperparameters, and the density-difference difficulty
//! analysis.
//!
//! The protocol trains on the pooled remaining wells and predicts the
//! hold-out well, so no within-well leakage can inflate the scores. Every
//! fold records which wells its training pool contained; the audit trail
//! is part of the result.

use rayon::prelude::*;

use crate::detect::{DetectorConfig, DetectorKind, EventSource};
use crate::error::{Error, Result};
use crate::gbdt::{predict_proba, train_gbdt, GbdtConfig, GbdtModel};
use crate::metrics::{
    evaluate_well, ChangeMatch, MetricParams, MetricReport, METRIC_NAMES,
};
use crate::num::Real;
use crate::preprocess::{derive_features, impute_missing, FeatureConfig, FeatureMatrix};
use crate::well::{Dataset, Lithotype, WellSeries};

/// Everything the pipeline needs to go from raw wells to a metric report.
#[derive(Debug, Clone)]
pub struct PipelineConfig<F> {
    pub features: FeatureConfig<F>,
    pub gbdt: GbdtConfig<F>,
    /// `None` evaluates the raw thresholded classifier labels.
    pub detector: Option<DetectorConfig<F>>,
    pub metrics: MetricParams<F>,
    /// Fold-level parallelism; 0 uses the global thread pool.
    pub workers: usize,
}

impl<F: Real> Default for PipelineConfig<F> {
    fn default() -> Self {
        PipelineConfig {
            features: FeatureConfig::default(),
            gbdt: GbdtConfig::default(),
            detector: None,
            metrics: MetricParams::default(),
            workers: 0,
        }
    }
}

/// An imputed well together with its design matrix.
#[derive(Debug, Clone)]
pub struct PreparedWell<F> {
    pub well: WellSeries<F>,
    pub matrix: FeatureMatrix<F>,
    pub coverage: F,
}

/// Imputes a well and derives its features.
pub fn prepare_well<F: Real>(
    well: &WellSeries<F>,
    features: &FeatureConfig<F>,
) -> Result<PreparedWell<F>> {
    let imputed = impute_missing(well);
    let matrix = derive_features(&imputed.well, features)?;
    Ok(PreparedWell {
        well: imputed.well,
        matrix,
        coverage: imputed.coverage,
    })
}

/// Turns a probability stream into raw and corrected label streams under
/// the configured detector. With no detector both streams are the plain
/// thresholded labels.
pub fn label_stream<F: Real>(
    probs: &[F],
    detector: Option<&DetectorConfig<F>>,
    fallback_threshold: F,
    start_depth: F,
    step: F,
) -> Result<(Vec<Lithotype>, Vec<Lithotype>)> {
    let l0 = detector.map(|d| d.l0).unwrap_or(fallback_threshold);
    let raw = crate::detect::labels_from_probs(probs, l0);
    let corrected = match detector {
        None => raw.clone(),
        Some(cfg) => match cfg.kind {
            DetectorKind::ThinLayer => crate::detect::drop_thin_layers(&raw, cfg.thin_w),
            _ => {
                // the classifier's own first opinion seeds the regime
                let initial = raw[0];
                crate::detect::detect_stream(probs, cfg, initial, start_depth, step)?.0
            }
        },
    };
    Ok((raw, corrected))
}

/// Outcome of one cross-validation fold.
#[derive(Debug, Clone)]
pub struct FoldOutcome<F> {
    pub well_id: String,
    pub report: Option<MetricReport<F>>,
    /// Populated when the fold failed (e.g. single-class training pool).
    pub error: Option<String>,
    /// Well ids the training pool was built from.
    pub train_wells: Vec<String>,
}

/// Median and mean/std of every metric over the defined per-well values,
/// indexed like [`METRIC_NAMES`].
#[derive(Debug, Clone)]
pub struct Aggregate<F> {
    pub median: [Option<F>; 11],
    pub mean: [Option<F>; 11],
    pub std: [Option<F>; 11],
}

/// Full cross-validation result.
#[derive(Debug, Clone)]
pub struct CvResult<F> {
    pub folds: Vec<FoldOutcome<F>>,
    pub aggregate: Aggregate<F>,
}

impl<F: Real> CvResult<F> {
    pub fn report_for(&self, well_id: &str) -> Option<&MetricReport<F>> {
        self.folds
            .iter()
            .find(|f| f.well_id == well_id)
            .and_then(|f| f.report.as_ref())
    }

    fn metric_index(name: &str) -> usize {
        METRIC_NAMES
            .iter()
            .position(|&m| m == name)
            .expect("known metric name")
    }

    pub fn median_of(&self, name: &str) -> Option<F> {
        self.aggregate.median[Self::metric_index(name)]
    }

    pub fn mean_of(&self, name: &str) -> Option<F> {
        self.aggregate.mean[Self::metric_index(name)]
    }
}

fn median<F: Real>(sorted: &[F]) -> F {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / F::from_f64_lossy(2.0)
    }
}

fn aggregate_folds<F: Real>(folds: &[FoldOutcome<F>]) -> Aggregate<F> {
    let mut agg = Aggregate {
        median: [None; 11],
        mean: [None; 11],
        std: [None; 11],
    };
    for k in 0..METRIC_NAMES.len() {
        let mut values: Vec<F> = folds
            .iter()
            .filter_map(|f| f.report.as_ref())
            .filter_map(|r| r.values()[k])
            .collect();
        if values.is_empty() {
            continue;
        }
        // sorted order keeps sums permutation-invariant
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite metric"));
        let n = F::from_f64_lossy(values.len() as f64);
        let sum = values.iter().fold(F::zero(), |a, &v| a + v);
        let mean = sum / n;
        agg.median[k] = Some(median(&values));
        agg.mean[k] = Some(mean);
        if values.len() >= 2 {
            let ss = values
                .iter()
                .fold(F::zero(), |a, &v| a + (v - mean) * (v - mean));
            agg.std[k] = Some((ss / (n - F::one())).sqrt());
        }
    }
    agg
}

/// Per-fold classifier output, cached so detector sweeps can reuse it.
struct FoldPrediction<F> {
    well_id: String,
    probs: Vec<F>,
    actual: Vec<Lithotype>,
    start_depth: F,
    step: F,
    train_wells: Vec<String>,
    error: Option<String>,
}

fn in_pool<'a, F: Real>(
    prepared: &'a [PreparedWell<F>],
    holdout: usize,
) -> (Vec<&'a [F]>, Vec<Lithotype>, Vec<String>) {
    let mut rows: Vec<&[F]> = Vec::new();
    let mut labels = Vec::new();
    let mut train_wells = Vec::new();
    for (j, p) in prepared.iter().enumerate() {
        if j == holdout {
            continue;
        }
        train_wells.push(p.matrix.well_id.clone());
        for row in &p.matrix.rows {
            rows.push(row.as_slice());
        }
        labels.extend_from_slice(&p.matrix.labels);
    }
    (rows, labels, train_wells)
}

fn run_with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        Ok(job())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Eval(format!("thread pool: {e}")))?;
        Ok(pool.install(job))
    }
}

fn predict_folds<F: Real>(
    dataset: &Dataset<F>,
    cfg: &PipelineConfig<F>,
) -> Result<Vec<FoldPrediction<F>>> {
    if dataset.len() < 2 {
        return Err(Error::Eval(
            "leave-one-well-out needs at least 2 wells".into(),
        ));
    }
    cfg.gbdt.validate()?;
    let prepared: Vec<PreparedWell<F>> = dataset
        .wells()
        .iter()
        .map(|w| prepare_well(w, &cfg.features))
        .collect::<Result<_>>()?;

    run_with_workers(cfg.workers, || {
        (0..prepared.len())
            .into_par_iter()
            .map(|i| {
                let (rows, labels, train_wells) = in_pool(&prepared, i);
                debug_assert!(!train_wells.contains(&prepared[i].matrix.well_id));
                let holdout = &prepared[i];
                let outcome = train_gbdt(
                    &rows,
                    &labels,
                    &holdout.matrix.feature_names,
                    &cfg.gbdt,
                )
                .and_then(|model: GbdtModel<F>| predict_proba(&model, &holdout.matrix.rows));
                match outcome {
                    Ok(probs) => FoldPrediction {
                        well_id: holdout.matrix.well_id.clone(),
                        probs,
                        actual: holdout.matrix.labels.clone(),
                        start_depth: holdout.well.start_depth(),
                        step: holdout.well.step(),
                        train_wells,
                        error: None,
                    },
                    Err(e) => FoldPrediction {
                        well_id: holdout.matrix.well_id.clone(),
                        probs: Vec::new(),
                        actual: Vec::new(),
                        start_depth: F::zero(),
                        step: F::zero(),
                        train_wells,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect()
    })
}

fn evaluate_fold<F: Real>(
    fold: &FoldPrediction<F>,
    detector: Option<&DetectorConfig<F>>,
    metrics: &MetricParams<F>,
) -> FoldOutcome<F> {
    if let Some(err) = &fold.error {
        return FoldOutcome {
            well_id: fold.well_id.clone(),
            report: None,
            error: Some(err.clone()),
            train_wells: fold.train_wells.clone(),
        };
    }
    let outcome = label_stream(
        &fold.probs,
        detector,
        metrics.threshold,
        fold.start_depth,
        fold.step,
    )
    .and_then(|(_, corrected)| evaluate_well(&fold.actual, &fold.probs, &corrected, metrics));
    match outcome {
        Ok(report) => FoldOutcome {
            well_id: fold.well_id.clone(),
            report: Some(report),
            error: None,
            train_wells: fold.train_wells.clone(),
        },
        Err(e) => FoldOutcome {
            well_id: fold.well_id.clone(),
            report: None,
            error: Some(e.to_string()),
            train_wells: fold.train_wells.clone(),
        },
    }
}

/// Leave-one-well-out cross-validation: for every well, train on all the
/// others, predict the hold-out, run the configured detector, and score.
/// Failed folds are excluded from the aggregates and carry their error.
pub fn leave_one_well_out<F: Real>(
    dataset: &Dataset<F>,
    cfg: &PipelineConfig<F>,
) -> Result<CvResult<F>> {
    let predictions = predict_folds(dataset, cfg)?;
    let folds: Vec<FoldOutcome<F>> = predictions
        .iter()
        .map(|fold| evaluate_fold(fold, cfg.detector.as_ref(), &cfg.metrics))
        .collect();
    let aggregate = aggregate_folds(&folds);
    Ok(CvResult { folds, aggregate })
}

/// Candidate values for one detector family's hyperparameters.
#[derive(Debug, Clone)]
pub struct GridSpec<F> {
    pub kind: DetectorKind,
    pub thresholds_to_shale: Vec<F>,
    pub thresholds_to_sand: Vec<F>,
    pub prior_ps: Vec<F>,
    pub thin_ws: Vec<usize>,
    /// Refuse to enumerate more combinations than this.
    pub max_combinations: usize,
}

impl<F: Real> GridSpec<F> {
    /// Grid holding just the shipped default operating point of a kind.
    pub fn default_cell(kind: DetectorKind) -> GridSpec<F> {
        let d = DetectorConfig::<F>::default_for(kind);
        GridSpec {
            kind,
            thresholds_to_shale: vec![d.threshold_to_shale],
            thresholds_to_sand: vec![d.threshold_to_sand],
            prior_ps: vec![d.prior_p],
            thin_ws: vec![d.thin_w],
            max_combinations: 4096,
        }
    }

    /// Expands the candidate lists into detector configs.
    pub fn cells(&self) -> Result<Vec<DetectorConfig<F>>> {
        let base = DetectorConfig::<F>::default_for(self.kind);
        let mut cells = Vec::new();
        match self.kind {
            DetectorKind::ThinLayer => {
                if self.thin_ws.is_empty() {
                    return Err(Error::Config("empty thin_w candidate list".into()));
                }
                for &w in &self.thin_ws {
                    cells.push(DetectorConfig {
                        thin_w: w,
                        ..base.clone()
                    });
                }
            }
            DetectorKind::Cusum | DetectorKind::ShiryaevRoberts => {
                if self.thresholds_to_shale.is_empty() || self.thresholds_to_sand.is_empty() {
                    return Err(Error::Config("empty threshold candidate list".into()));
                }
                for &w1 in &self.thresholds_to_shale {
                    for &w2 in &self.thresholds_to_sand {
                        cells.push(DetectorConfig {
                            threshold_to_shale: w1,
                            threshold_to_sand: w2,
                            ..base.clone()
                        });
                    }
                }
            }
            DetectorKind::Posterior => {
                if self.thresholds_to_shale.is_empty()
                    || self.thresholds_to_sand.is_empty()
                    || self.prior_ps.is_empty()
                {
                    return Err(Error::Config("empty candidate list".into()));
                }
                for &w1 in &self.thresholds_to_shale {
                    for &w2 in &self.thresholds_to_sand {
                        for &p in &self.prior_ps {
                            cells.push(DetectorConfig {
                                threshold_to_shale: w1,
                                threshold_to_sand: w2,
                                prior_p: p,
                                ..base.clone()
                            });
                        }
                    }
                }
            }
        }
        if cells.len() > self.max_combinations {
            return Err(Error::Config(format!(
                "{} grid combinations exceed the cap of {}",
                cells.len(),
                self.max_combinations
            )));
        }
        for c in &cells {
            c.validate()?;
        }
        Ok(cells)
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone)]
pub struct LeaderboardRow<F> {
    pub rank: usize,
    pub detector: DetectorConfig<F>,
    pub acc_n_median: Option<F>,
    pub fp_median: Option<F>,
    pub delay_mean: Option<F>,
    pub cv: CvResult<F>,
}

/// Exhaustive detector grid search ranked by median accuracy N, breaking
/// ties by fewer median false positives, then lower mean delay.
///
/// The classifier configuration stays fixed across the grid, so each fold
/// is trained once and its probabilities are reused by every cell; scores
/// for any cell equal a standalone [`leave_one_well_out`] run with that
/// detector.
pub fn grid_search<F: Real>(
    dataset: &Dataset<F>,
    grid: &GridSpec<F>,
    cfg: &PipelineConfig<F>,
) -> Result<(DetectorConfig<F>, Vec<LeaderboardRow<F>>)> {
    let cells = grid.cells()?;
    let predictions = predict_folds(dataset, cfg)?;

    let mut rows: Vec<LeaderboardRow<F>> = Vec::with_capacity(cells.len());
    for detector in cells {
        let folds: Vec<FoldOutcome<F>> = predictions
            .iter()
            .map(|fold| evaluate_fold(fold, Some(&detector), &cfg.metrics))
            .collect();
        let aggregate = aggregate_folds(&folds);
        let cv = CvResult { folds, aggregate };
        rows.push(LeaderboardRow {
            rank: 0,
            detector,
            acc_n_median: cv.median_of("accuracy_n"),
            fp_median: cv.median_of("fp_alarms"),
            delay_mean: cv.mean_of("mean_delay_m"),
            cv,
        });
    }
    if rows.iter().all(|r| r.acc_n_median.is_none()) {
        return Err(Error::Eval("every grid cell failed to evaluate".into()));
    }

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        leaderboard_order(&rows[a], &rows[b]).then(a.cmp(&b))
    });
    let mut ranked = Vec::with_capacity(rows.len());
    let mut rows: Vec<Option<LeaderboardRow<F>>> = rows.into_iter().map(Some).collect();
    for (rank, &idx) in order.iter().enumerate() {
        let mut row = rows[idx].take().expect("each row ranked once");
        row.rank = rank + 1;
        ranked.push(row);
    }
    Ok((ranked[0].detector.clone(), ranked))
}

/// Leaderboard ordering: higher accuracy N first, then fewer false
/// positives, then lower mean delay. Undefined values rank last.
fn leaderboard_order<F: Real>(
    a: &LeaderboardRow<F>,
    b: &LeaderboardRow<F>,
) -> std::cmp::Ordering {
    let acc = match (a.acc_n_median, b.acc_n_median) {
        (Some(x), Some(y)) => y.partial_cmp(&x).expect("finite metric"),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    };
    acc.then_with(|| cmp_opt(a.fp_median, b.fp_median))
        .then_with(|| cmp_opt(a.delay_mean, b.delay_mean))
}

// ascending with None last
fn cmp_opt<F: Real>(a: Option<F>, b: Option<F>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.partial_cmp(&y).expect("finite metric"),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    }
}

/// One histogram bin of the difficulty analysis.
#[derive(Debug, Clone, Copy)]
pub struct DifficultyBin<F> {
    pub lo: F,
    pub hi: F,
    pub identified: usize,
    pub unidentified: usize,
}

/// Density-difference histograms for identified vs unidentified changes.
#[derive(Debug, Clone)]
pub struct DifficultyTable<F> {
    pub bins: Vec<DifficultyBin<F>>,
    pub mean_identified: Option<F>,
    pub mean_unidentified: Option<F>,
    pub n_identified: usize,
    pub n_unidentified: usize,
}

/// Absolute density difference across each actual change, one entry per
/// [`ChangeMatch`], paired with whether the change was identified.
fn density_differences<F: Real>(
    well: &WellSeries<F>,
    matches: &[ChangeMatch<F>],
) -> Vec<(F, bool)> {
    let density = match well.density() {
        Some(d) => d,
        None => return Vec::new(),
    };
    let labels = well.labels();
    let changes: Vec<usize> = crate::metrics::change_points(
        labels,
        F::zero(),
        F::one(),
        EventSource::Actual,
    )
    .into_iter()
    .map(|e| e.index)
    .collect();

    let mut out = Vec::new();
    for m in matches {
        let Ok(pos) = changes.binary_search(&m.actual_index) else {
            continue;
        };
        let lo = if pos == 0 { 0 } else { changes[pos - 1] };
        let hi = if pos + 1 < changes.len() {
            changes[pos + 1]
        } else {
            labels.len()
        };
        let before = mean_density(&density[lo..m.actual_index]);
        let after = mean_density(&density[m.actual_index..hi]);
        if let (Some(b), Some(a)) = (before, after) {
            out.push(((b - a).abs(), m.predicted_index.is_some()));
        }
    }
    out
}

fn mean_density<F: Real>(cells: &[Option<F>]) -> Option<F> {
    let known: Vec<F> = cells.iter().flatten().copied().collect();
    if known.is_empty() {
        return None;
    }
    let sum = known.iter().fold(F::zero(), |a, &v| a + v);
    Some(sum / F::from_f64_lossy(known.len() as f64))
}

/// Buckets the density difference of every actual change into identified vs
/// unidentified histograms with shared bin edges. Returns `None` when no
/// well carries density.
pub fn difficulty_analysis<F: Real>(
    dataset: &Dataset<F>,
    cv: &CvResult<F>,
    n_bins: usize,
) -> Result<Option<DifficultyTable<F>>> {
    if n_bins == 0 {
        return Err(Error::Config("need at least one histogram bin".into()));
    }
    if dataset.wells().iter().all(|w| w.density().is_none()) {
        return Ok(None);
    }

    let mut diffs: Vec<(F, bool)> = Vec::new();
    for well in dataset.wells() {
        let Some(report) = cv.report_for(well.well_id()) else {
            continue;
        };
        // metrics ran on the imputed grid; mirror it
        let imputed = impute_missing(well);
        diffs.extend(density_differences(&imputed.well, &report.matches));
    }
    if diffs.is_empty() {
        return Ok(Some(DifficultyTable {
            bins: Vec::new(),
            mean_identified: None,
            mean_unidentified: None,
            n_identified: 0,
            n_unidentified: 0,
        }));
    }

    let max = diffs
        .iter()
        .map(|(d, _)| *d)
        .fold(F::zero(), |a, d| a.max(d));
    let width = if max > F::zero() {
        max / F::from_f64_lossy(n_bins as f64)
    } else {
        F::one()
    };
    let mut bins: Vec<DifficultyBin<F>> = (0..n_bins)
        .map(|i| DifficultyBin {
            lo: width * F::from_f64_lossy(i as f64),
            hi: width * F::from_f64_lossy((i + 1) as f64),
            identified: 0,
            unidentified: 0,
        })
        .collect();

    let (mut sum_id, mut n_id) = (F::zero(), 0usize);
    let (mut sum_un, mut n_un) = (F::zero(), 0usize);
    for &(d, identified) in &diffs {
        let idx = ((d / width).as_f64().floor() as usize).min(n_bins - 1);
        if identified {
            bins[idx].identified += 1;
            sum_id = sum_id + d;
            n_id += 1;
        } else {
            bins[idx].unidentified += 1;
            sum_un = sum_un + d;
            n_un += 1;
        }
    }

    Ok(Some(DifficultyTable {
        bins,
        mean_identified: (n_id > 0).then(|| sum_id / F::from_f64_lossy(n_id as f64)),
        mean_unidentified: (n_un > 0).then(|| sum_un / F::from_f64_lossy(n_un as f64)),
        n_identified: n_id,
        n_unidentified: n_un,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SynthConfig;

    fn small_field(n_wells: usize, seed: u64) -> Dataset<f64> {
        let cfg = SynthConfig {
            n_wells,
            well_length_m: 60.0,
            missing_rate: 0.01,
            seed,
            ..SynthConfig::default()
        };
        crate::synth::generate_field(&cfg).unwrap()
    }

    fn fast_cfg() -> PipelineConfig<f64> {
        PipelineConfig {
            gbdt: GbdtConfig {
                n_trees: 25,
                min_leaf: 5,
                ..GbdtConfig::default()
            },
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn one_report_per_well_and_no_leakage() {
        let field = small_field(3, 11);
        let cv = leave_one_well_out(&field, &fast_cfg()).unwrap();
        assert_eq!(cv.folds.len(), 3);
        for fold in &cv.folds {
            assert!(fold.report.is_some(), "fold failed: {:?}", fold.error);
            assert_eq!(fold.train_wells.len(), 2);
            assert!(!fold.train_wells.contains(&fold.well_id));
        }
    }

    #[test]
    fn near_identical_wells_give_near_identical_folds() {
        // three copies of the same generated well under different ids
        let one = crate::synth::generate_well::<f64>(
            &SynthConfig {
                well_length_m: 60.0,
                missing_rate: 0.0,
                seed: 5,
                ..SynthConfig::default()
            },
            0,
        )
        .unwrap();
        let csv = crate::well::write_well_csv(&one);
        let wells: Vec<_> = (0..3)
            .map(|i| crate::well::load_well_csv::<f64>(&csv, &format!("copy-{i}")).unwrap().0)
            .collect();
        let field = Dataset::new(wells).unwrap();
        let cv = leave_one_well_out(&field, &fast_cfg()).unwrap();
        let accs: Vec<f64> = cv
            .folds
            .iter()
            .map(|f| f.report.as_ref().unwrap().accuracy.unwrap())
            .collect();
        assert!((accs[0] - accs[1]).abs() < 1e-9);
        assert!((accs[1] - accs[2]).abs() < 1e-9);
    }

    #[test]
    fn needs_two_wells() {
        let field = small_field(1, 0);
        assert!(leave_one_well_out(&field, &fast_cfg()).is_err());
    }

    #[test]
    fn median_of_three() {
        let mk = |acc: f64| FoldOutcome {
            well_id: format!("w{acc}"),
            report: Some(MetricReport {
                accuracy: Some(acc),
                accuracy_l: None,
                accuracy_n: None,
                roc_auc: None,
                pr_auc: None,
                precision: None,
                recall: None,
                mean_delay_m: None,
                pct_within_20m: None,
                tp_alarms: 0,
                fp_alarms: 0,
                matches: vec![],
            }),
            error: None,
            train_wells: vec![],
        };
        let agg = aggregate_folds(&[mk(0.9), mk(0.2), mk(0.5)]);
        assert_eq!(agg.median[0], Some(0.5));
    }

    #[test]
    fn aggregates_permutation_invariant() {
        let field = small_field(4, 3);
        let cv = leave_one_well_out(&field, &fast_cfg()).unwrap();
        let mut shuffled = cv.folds.clone();
        shuffled.reverse();
        let again = aggregate_folds(&shuffled);
        for k in 0..METRIC_NAMES.len() {
            assert_eq!(cv.aggregate.median[k], again.median[k]);
            assert_eq!(cv.aggregate.mean[k], again.mean[k]);
            assert_eq!(cv.aggregate.std[k], again.std[k]);
        }
    }

    #[test]
    fn single_cell_grid_returns_that_cell() {
        let field = small_field(3, 7);
        let grid = GridSpec::default_cell(DetectorKind::ThinLayer);
        let (best, rows) = grid_search(&field, &grid, &fast_cfg()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(best.thin_w, 15);
        assert_eq!(rows[0].rank, 1);
    }

    #[test]
    fn grid_enumerates_thin_w_candidates() {
        let field = small_field(3, 7);
        let grid = GridSpec {
            thin_ws: vec![5, 15, 45],
            ..GridSpec::default_cell(DetectorKind::ThinLayer)
        };
        let (_, rows) = grid_search(&field, &grid, &fast_cfg()).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            assert!(row.acc_n_median.is_some());
        }
    }

    #[test]
    fn grid_matches_standalone_evaluation() {
        let field = small_field(3, 19);
        let mut cfg = fast_cfg();
        let detector = DetectorConfig::default_for(DetectorKind::ThinLayer);
        cfg.detector = Some(detector.clone());
        let standalone = leave_one_well_out(&field, &cfg).unwrap();

        let grid = GridSpec {
            thin_ws: vec![15, 30],
            ..GridSpec::default_cell(DetectorKind::ThinLayer)
        };
        let (_, rows) = grid_search(&field, &grid, &cfg).unwrap();
        let cell = rows
            .iter()
            .find(|r| r.detector.thin_w == 15)
            .expect("default cell present");
        for k in 0..METRIC_NAMES.len() {
            assert_eq!(cell.cv.aggregate.median[k], standalone.aggregate.median[k]);
        }
    }

    #[test]
    fn grid_tie_break_prefers_fewer_false_positives() {
        let mk_row = |acc: Option<f64>, fp: Option<f64>, delay: Option<f64>, w: usize| {
            LeaderboardRow {
                rank: 0,
                detector: DetectorConfig {
                    thin_w: w,
                    ..DetectorConfig::default_for(DetectorKind::ThinLayer)
                },
                acc_n_median: acc,
                fp_median: fp,
                delay_mean: delay,
                cv: CvResult {
                    folds: vec![],
                    aggregate: Aggregate {
                        median: [None; 11],
                        mean: [None; 11],
                        std: [None; 11],
                    },
                },
            }
        };
        let high_fp = mk_row(Some(0.6), Some(12.0), Some(1.0), 1);
        let low_fp = mk_row(Some(0.6), Some(6.0), Some(2.0), 2);
        assert_eq!(
            leaderboard_order(&low_fp, &high_fp),
            std::cmp::Ordering::Less
        );
        // higher accuracy N beats everything else
        let better_acc = mk_row(Some(0.7), Some(40.0), Some(9.0), 3);
        assert_eq!(
            leaderboard_order(&better_acc, &low_fp),
            std::cmp::Ordering::Less
        );
        // equal on accuracy and fp: lower delay wins
        let slow = mk_row(Some(0.6), Some(6.0), Some(5.0), 4);
        assert_eq!(leaderboard_order(&low_fp, &slow), std::cmp::Ordering::Less);
        // undefined accuracy ranks last
        let undefined = mk_row(None, Some(0.0), Some(0.0), 5);
        assert_eq!(
            leaderboard_order(&high_fp, &undefined),
            std::cmp::Ordering::Less
        );
    }

    #[test]
    fn difficulty_requires_density() {
        let cfg = SynthConfig {
            n_wells: 2,
            well_length_m: 40.0,
            with_density: false,
            ..SynthConfig::default()
        };
        let field = crate::synth::generate_field::<f64>(&cfg).unwrap();
        let cv = leave_one_well_out(&field, &fast_cfg()).unwrap();
        let table = difficulty_analysis(&field, &cv, 10).unwrap();
        assert!(table.is_none());
    }

    #[test]
    fn difficulty_hand_density_difference() {
        // one well evaluated against itself: single change, densities 2.30 / 2.65
        let text = {
            let mut t = String::from("depth,wob,rpm,trq,flow_in,flow_out,spp,rop,hook_load,density,lithotype\n");
            for i in 0..40 {
                let (d, lith) = if i < 20 { (2.30, "sand") } else { (2.65, "shale") };
                t.push_str(&format!(
                    "{:.1},8,120,5,2000,1985,150,25,90,{d},{lith}\n",
                    i as f64 * 0.1
                ));
            }
            t
        };
        let (w1, _) = crate::well::load_well_csv::<f64>(&text, "a").unwrap();
        let (w2, _) = crate::well::load_well_csv::<f64>(&text, "b").unwrap();
        let field = Dataset::new(vec![w1, w2]).unwrap();

        let matches = vec![ChangeMatch {
            actual_index: 20,
            direction: crate::detect::Direction::SandToShale,
            predicted_index: Some(22),
            delay_m: Some(0.2),
        }];
        let diffs = density_differences(&field.wells()[0], &matches);
        assert_eq!(diffs.len(), 1);
        assert!((diffs[0].0 - 0.35).abs() < 1e-9);
        assert!(diffs[0].1);
    }
}
