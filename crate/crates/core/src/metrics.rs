//! Evaluation metrics for lithotype labeling and change detection.
//!
//! Beyond pointwise accuracy and ranking scores, two boundary-aware
//! accuracies handle the fact that a drilling bit reacts to a new layer
//! with roughly 1.5 m of elongation lag:
//!
//! * accuracy L: pointwise accuracy with a 1.5 m neighborhood of every
//!   actual layer boundary excluded;
//! * accuracy N: after the same exclusion, the remaining depth axis is
//!   segmented by the union of actual and predicted change points, and the
//!   score is the share of segments whose predicted label matches the
//!   actual one.
//!
//! Change-detection quality is summarized by matching each actual change to
//! the earliest same-direction predicted change within 20 m downstream,
//! yielding mean delay, the share of changes identified within 20 m, true
//! positive alarms (matched within 3 m), and false positive alarms
//! (predicted changes with no same-direction actual change in the previous
//! 3 m).
//!
//! Metrics that cannot be computed (single-class input, zero surviving
//! intervals) are reported as `None`, never as a silent 0 or 1, so that
//! median aggregation can skip them explicitly.

use crate::detect::{ChangeEvent, Direction, EventSource};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::well::Lithotype;

/// Tunable windows, all in meters, plus the grid step they are resolved
/// against.
#[derive(Debug, Clone)]
pub struct MetricParams<F> {
    /// Half-width of the exclusion neighborhood around actual changes.
    pub boundary_window_m: F,
    /// Maximal downstream distance for matching a predicted change.
    pub match_window_m: F,
    /// Matched delay bound for a true positive alarm.
    pub tp_window_m: F,
    /// Look-back distance for the false-positive rule.
    pub fp_lookback_m: F,
    /// Probability cut used for thresholded metrics.
    pub threshold: F,
    /// Depth grid step.
    pub step: F,
}

impl<F: Real> Default for MetricParams<F> {
    fn default() -> Self {
        MetricParams {
            boundary_window_m: F::from_f64_lossy(1.5),
            match_window_m: F::from_f64_lossy(20.0),
            tp_window_m: F::from_f64_lossy(3.0),
            fp_lookback_m: F::from_f64_lossy(3.0),
            threshold: F::from_f64_lossy(0.5),
            step: F::from_f64_lossy(crate::well::GRID_STEP_M),
        }
    }
}

impl<F: Real> MetricParams<F> {
    fn samples(&self, meters: F) -> usize {
        (meters / self.step).as_f64().round() as usize
    }
}

/// Pairing of one actual change with its detected counterpart, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeMatch<F> {
    pub actual_index: usize,
    pub direction: Direction,
    pub predicted_index: Option<usize>,
    /// Downstream distance in meters when matched; in `[0, match_window_m]`.
    pub delay_m: Option<F>,
}

/// Change-detection side of the evaluation.
#[derive(Debug, Clone)]
pub struct ChangeDetectionSummary<F> {
    pub mean_delay_m: Option<F>,
    pub pct_within_window: Option<F>,
    pub tp_alarms: usize,
    pub fp_alarms: usize,
    pub matches: Vec<ChangeMatch<F>>,
}

/// Every per-well metric in one record.
#[derive(Debug, Clone)]
pub struct MetricReport<F> {
    pub accuracy: Option<F>,
    pub accuracy_l: Option<F>,
    pub accuracy_n: Option<F>,
    pub roc_auc: Option<F>,
    pub pr_auc: Option<F>,
    pub precision: Option<F>,
    pub recall: Option<F>,
    pub mean_delay_m: Option<F>,
    pub pct_within_20m: Option<F>,
    pub tp_alarms: usize,
    pub fp_alarms: usize,
    pub matches: Vec<ChangeMatch<F>>,
}

/// Names of the scalar metrics in report order; used by CSV emission and
/// aggregation.
pub const METRIC_NAMES: [&str; 11] = [
    "accuracy",
    "accuracy_l",
    "accuracy_n",
    "roc_auc",
    "pr_auc",
    "precision",
    "recall",
    "mean_delay_m",
    "pct_within_20m",
    "tp_alarms",
    "fp_alarms",
];

impl<F: Real> MetricReport<F> {
    /// Scalar metric values in [`METRIC_NAMES`] order.
    pub fn values(&self) -> [Option<F>; 11] {
        [
            self.accuracy,
            self.accuracy_l,
            self.accuracy_n,
            self.roc_auc,
            self.pr_auc,
            self.precision,
            self.recall,
            self.mean_delay_m,
            self.pct_within_20m,
            Some(F::from_f64_lossy(self.tp_alarms as f64)),
            Some(F::from_f64_lossy(self.fp_alarms as f64)),
        ]
    }
}

/// Lithotype transitions of a label stream, one event per index whose label
/// differs from its predecessor.
pub fn change_points<F: Real>(
    labels: &[Lithotype],
    start_depth: F,
    step: F,
    source: EventSource,
) -> Vec<ChangeEvent<F>> {
    let mut events = Vec::new();
    for t in 1..labels.len() {
        if labels[t] != labels[t - 1] {
            events.push(ChangeEvent {
                index: t,
                depth: start_depth + F::from_f64_lossy(t as f64) * step,
                direction: Direction::from_regimes(labels[t - 1], labels[t]),
                source,
            });
        }
    }
    events
}

fn change_indices(labels: &[Lithotype]) -> Vec<usize> {
    (1..labels.len())
        .filter(|&t| labels[t] != labels[t - 1])
        .collect()
}

/// `true` at indices inside the exclusion neighborhood of an actual change.
fn exclusion_mask(actual: &[Lithotype], radius: usize) -> Vec<bool> {
    let mut excluded = vec![false; actual.len()];
    for c in change_indices(actual) {
        let lo = c.saturating_sub(radius);
        let hi = (c + radius).min(actual.len() - 1);
        for e in excluded[lo..=hi].iter_mut() {
            *e = true;
        }
    }
    excluded
}

fn check_lengths(actual: &[Lithotype], n: usize, what: &str) -> Result<()> {
    if actual.is_empty() {
        return Err(Error::Eval("empty label stream".into()));
    }
    if actual.len() != n {
        return Err(Error::Eval(format!(
            "{what}: length mismatch ({} vs {n})",
            actual.len()
        )));
    }
    Ok(())
}

/// Plain pointwise accuracy.
pub fn accuracy<F: Real>(actual: &[Lithotype], predicted: &[Lithotype]) -> Result<F> {
    check_lengths(actual, predicted.len(), "accuracy")?;
    let correct = actual
        .iter()
        .zip(predicted)
        .filter(|(a, p)| a == p)
        .count();
    Ok(F::from_f64_lossy(correct as f64 / actual.len() as f64))
}

/// Pointwise accuracy with boundary neighborhoods of actual changes
/// excluded. `None` when every index is excluded.
pub fn accuracy_l<F: Real>(
    actual: &[Lithotype],
    predicted: &[Lithotype],
    params: &MetricParams<F>,
) -> Result<Option<F>> {
    check_lengths(actual, predicted.len(), "accuracy_l")?;
    let excluded = exclusion_mask(actual, params.samples(params.boundary_window_m));
    let mut kept = 0usize;
    let mut correct = 0usize;
    for t in 0..actual.len() {
        if !excluded[t] {
            kept += 1;
            if actual[t] == predicted[t] {
                correct += 1;
            }
        }
    }
    if kept == 0 {
        return Ok(None);
    }
    Ok(Some(F::from_f64_lossy(correct as f64 / kept as f64)))
}

/// Interval accuracy: excludes boundary neighborhoods of actual changes,
/// segments the surviving indices by the union of actual and predicted
/// change points, and returns the share of segments whose predicted label
/// matches the actual one. `None` when no segment survives.
pub fn accuracy_n<F: Real>(
    actual: &[Lithotype],
    predicted: &[Lithotype],
    params: &MetricParams<F>,
) -> Result<Option<F>> {
    check_lengths(actual, predicted.len(), "accuracy_n")?;
    let excluded = exclusion_mask(actual, params.samples(params.boundary_window_m));
    let boundary: Vec<bool> = (0..actual.len())
        .map(|t| t > 0 && (actual[t] != actual[t - 1] || predicted[t] != predicted[t - 1]))
        .collect();

    let mut intervals = 0usize;
    let mut correct = 0usize;
    let mut prev_kept: Option<usize> = None;
    for t in 0..actual.len() {
        if excluded[t] {
            continue;
        }
        // a gap always spans an actual change, so it always splits
        let fresh = match prev_kept {
            None => true,
            Some(p) => t != p + 1 || boundary[t],
        };
        if fresh {
            intervals += 1;
            if actual[t] == predicted[t] {
                correct += 1;
            }
        }
        prev_kept = Some(t);
    }
    if intervals == 0 {
        return Ok(None);
    }
    Ok(Some(F::from_f64_lossy(
        correct as f64 / intervals as f64,
    )))
}

/// Greedily matches actual changes to predicted ones: scanning actual
/// events in depth order, each takes the earliest unmatched predicted event
/// of the same direction lying `0..=match_window` downstream. Each
/// predicted event serves at most one actual event.
pub fn match_changes<F: Real>(
    actual_events: &[ChangeEvent<F>],
    predicted_events: &[ChangeEvent<F>],
    params: &MetricParams<F>,
) -> Vec<ChangeMatch<F>> {
    let window = params.samples(params.match_window_m);
    let mut taken = vec![false; predicted_events.len()];
    let mut matches = Vec::with_capacity(actual_events.len());

    for a in actual_events {
        let mut found = None;
        for (j, p) in predicted_events.iter().enumerate() {
            if taken[j] || p.direction != a.direction || p.index < a.index {
                continue;
            }
            if p.index - a.index <= window {
                found = Some(j);
            }
            // predicted events are depth-sorted; beyond the window nothing
            // closer follows
            break;
        }
        match found {
            Some(j) => {
                taken[j] = true;
                matches.push(ChangeMatch {
                    actual_index: a.index,
                    direction: a.direction,
                    predicted_index: Some(predicted_events[j].index),
                    delay_m: Some(
                        F::from_f64_lossy((predicted_events[j].index - a.index) as f64)
                            * params.step,
                    ),
                });
            }
            None => matches.push(ChangeMatch {
                actual_index: a.index,
                direction: a.direction,
                predicted_index: None,
                delay_m: None,
            }),
        }
    }
    matches
}

/// Delay, identification share, and alarm counts for one well.
pub fn change_detection_report<F: Real>(
    actual: &[Lithotype],
    predicted: &[Lithotype],
    params: &MetricParams<F>,
) -> Result<ChangeDetectionSummary<F>> {
    check_lengths(actual, predicted.len(), "change_detection_report")?;
    let zero = F::zero();
    let actual_events = change_points(actual, zero, params.step, EventSource::Actual);
    let predicted_events = change_points(predicted, zero, params.step, EventSource::Predicted);
    let matches = match_changes(&actual_events, &predicted_events, params);

    let tp_window = params.samples(params.tp_window_m);
    let fp_lookback = params.samples(params.fp_lookback_m);

    let delays: Vec<F> = matches.iter().filter_map(|m| m.delay_m).collect();
    let mean_delay_m = if delays.is_empty() {
        None
    } else {
        let sum = delays.iter().fold(zero, |a, &d| a + d);
        Some(sum / F::from_f64_lossy(delays.len() as f64))
    };
    let pct_within_window = if actual_events.is_empty() {
        None
    } else {
        Some(F::from_f64_lossy(
            delays.len() as f64 / actual_events.len() as f64,
        ))
    };

    let tp_alarms = matches
        .iter()
        .filter_map(|m| m.predicted_index.map(|p| p - m.actual_index))
        .filter(|&d| d <= tp_window)
        .count();

    let fp_alarms = predicted_events
        .iter()
        .filter(|p| {
            !actual_events.iter().any(|a| {
                a.direction == p.direction
                    && a.index <= p.index
                    && p.index - a.index <= fp_lookback
            })
        })
        .count();

    Ok(ChangeDetectionSummary {
        mean_delay_m,
        pct_within_window,
        tp_alarms,
        fp_alarms,
        matches,
    })
}

/// Threshold-free and thresholded classification scores:
/// `(roc_auc, pr_auc, precision, recall, accuracy)`. Shale is the positive
/// class. AUCs are `None` on single-class input; precision is `None` when
/// nothing is predicted positive.
pub fn ranking_metrics<F: Real>(
    actual: &[Lithotype],
    probs: &[F],
    threshold: F,
) -> Result<RankingMetrics<F>> {
    check_lengths(actual, probs.len(), "ranking_metrics")?;
    let n = actual.len();
    let positive: Vec<bool> = actual.iter().map(|&l| l == Lithotype::Shale).collect();
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = n - n_pos;

    let roc_auc = if n_pos == 0 || n_neg == 0 {
        None
    } else {
        Some(roc_auc_by_ranks(&positive, probs, n_pos, n_neg))
    };
    let pr_auc = if n_pos == 0 || n_neg == 0 {
        None
    } else {
        Some(pr_auc_step(&positive, probs, n_pos))
    };

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut correct = 0usize;
    for (t, &p) in probs.iter().enumerate() {
        let pred_pos = p >= threshold;
        if pred_pos && positive[t] {
            tp += 1;
        }
        if pred_pos && !positive[t] {
            fp += 1;
        }
        if pred_pos == positive[t] {
            correct += 1;
        }
    }
    let precision = if tp + fp == 0 {
        None
    } else {
        Some(F::from_f64_lossy(tp as f64 / (tp + fp) as f64))
    };
    let recall = if n_pos == 0 {
        None
    } else {
        Some(F::from_f64_lossy(tp as f64 / n_pos as f64))
    };
    let accuracy = F::from_f64_lossy(correct as f64 / n as f64);

    Ok(RankingMetrics {
        roc_auc,
        pr_auc,
        precision,
        recall,
        accuracy,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RankingMetrics<F> {
    pub roc_auc: Option<F>,
    pub pr_auc: Option<F>,
    pub precision: Option<F>,
    pub recall: Option<F>,
    pub accuracy: F,
}

/// Mann-Whitney rank form with average ranks for ties.
fn roc_auc_by_ranks<F: Real>(positive: &[bool], probs: &[F], n_pos: usize, n_neg: usize) -> F {
    let n = probs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| probs[a].partial_cmp(&probs[b]).expect("finite probs"));

    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && probs[order[j + 1]] == probs[order[i]] {
            j += 1;
        }
        // items i..=j share the average of ranks i+1..=j+1
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if positive[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let auc =
        (rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64);
    F::from_f64_lossy(auc)
}

/// Precision-recall step integral, sweeping the cut down the sorted scores
/// and processing tied scores as one block.
fn pr_auc_step<F: Real>(positive: &[bool], probs: &[F], n_pos: usize) -> F {
    let n = probs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).expect("finite probs"));

    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut prev_recall = 0.0f64;
    let mut area = 0.0f64;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && probs[order[j + 1]] == probs[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if positive[idx] {
                tp += 1;
            }
        }
        seen += j - i + 1;
        let recall = tp as f64 / n_pos as f64;
        let precision = tp as f64 / seen as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    F::from_f64_lossy(area)
}

/// Computes the full per-well report from actual labels, classifier
/// probabilities, and the (possibly detector-corrected) predicted labels.
pub fn evaluate_well<F: Real>(
    actual: &[Lithotype],
    probs: &[F],
    predicted: &[Lithotype],
    params: &MetricParams<F>,
) -> Result<MetricReport<F>> {
    let ranking = ranking_metrics(actual, probs, params.threshold)?;
    let acc = accuracy(actual, predicted)?;
    let acc_l = accuracy_l(actual, predicted, params)?;
    let acc_n = accuracy_n(actual, predicted, params)?;
    let changes = change_detection_report(actual, predicted, params)?;
    Ok(MetricReport {
        accuracy: Some(acc),
        accuracy_l: acc_l,
        accuracy_n: acc_n,
        roc_auc: ranking.roc_auc,
        pr_auc: ranking.pr_auc,
        precision: ranking.precision,
        recall: ranking.recall,
        mean_delay_m: changes.mean_delay_m,
        pct_within_20m: changes.pct_within_window,
        tp_alarms: changes.tp_alarms,
        fp_alarms: changes.fp_alarms,
        matches: changes.matches,
    })
}
