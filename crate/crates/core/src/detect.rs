//! Online change detection over per-depth shale probabilities.
//!
//! Three sequential statistics (CUSUM, Shiryaev-Roberts, and the posterior
//! statistic with a geometric prior) plus thin-layer dropping. A detector
//! watches the classifier's probability stream, accumulates evidence for
//! the opposite regime, and declares a change when its statistic crosses
//! the threshold configured for that direction. The statistic resets to
//! zero after each declared change and the regime flips immediately.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::well::Lithotype;

/// Statistic ceiling; multiplicative statistics saturate here instead of
/// overflowing.
pub const STAT_CEILING: f64 = 1e30;

/// Which direction a lithotype change runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    SandToShale,
    ShaleToSand,
}

impl Direction {
    pub fn from_regimes(before: Lithotype, after: Lithotype) -> Direction {
        match (before, after) {
            (Lithotype::Sand, Lithotype::Shale) => Direction::SandToShale,
            (Lithotype::Shale, Lithotype::Sand) => Direction::ShaleToSand,
            _ => panic!("no change between identical regimes"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::SandToShale => "sand_to_shale",
            Direction::ShaleToSand => "shale_to_sand",
        }
    }
}

/// Whether an event comes from ground truth or from a detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventSource {
    Actual,
    Predicted,
}

/// A lithotype change at one grid index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeEvent<F> {
    pub index: usize,
    pub depth: F,
    pub direction: Direction,
    pub source: EventSource,
}

/// Detector family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorKind {
    Cusum,
    ShiryaevRoberts,
    Posterior,
    ThinLayer,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Cusum => "cusum",
            DetectorKind::ShiryaevRoberts => "sr",
            DetectorKind::Posterior => "posterior",
            DetectorKind::ThinLayer => "ctl",
        }
    }
}

/// Detector hyperparameters. Shipped defaults per kind come from
/// [`DetectorConfig::default_for`].
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig<F> {
    pub kind: DetectorKind,
    /// Threshold watched while the regime is sand.
    pub threshold_to_shale: F,
    /// Threshold watched while the regime is shale.
    pub threshold_to_sand: F,
    /// Geometric prior parameter of the posterior statistic.
    pub prior_p: F,
    /// Maximal run length dropped by the thin-layer pass, in samples.
    pub thin_w: usize,
    /// Probability cut for direct labeling.
    pub l0: F,
    /// Clamp on |log likelihood ratio|.
    pub lr_clip: F,
}

impl<F: Real> DetectorConfig<F> {
    /// Shipped operating point for a detector kind.
    pub fn default_for(kind: DetectorKind) -> DetectorConfig<F> {
        let (w1, w2) = match kind {
            DetectorKind::Cusum => (25.0, 50.0),
            DetectorKind::ShiryaevRoberts => (1.158e12, 1.158e12),
            DetectorKind::Posterior => (8e5, 7e5),
            DetectorKind::ThinLayer => (1.0, 1.0),
        };
        DetectorConfig {
            kind,
            threshold_to_shale: F::from_f64_lossy(w1),
            threshold_to_sand: F::from_f64_lossy(w2),
            prior_p: F::from_f64_lossy(0.1),
            thin_w: 15,
            l0: F::from_f64_lossy(0.5),
            lr_clip: F::from_f64_lossy(10.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_to_shale > F::zero()) || !(self.threshold_to_sand > F::zero()) {
            return Err(Error::Config("detector thresholds must be positive".into()));
        }
        if !(self.prior_p > F::zero() && self.prior_p < F::one()) {
            return Err(Error::Config("prior_p must lie in (0, 1)".into()));
        }
        if self.thin_w < 1 {
            return Err(Error::Config("thin_w must be at least 1".into()));
        }
        if !(self.l0 >= F::zero() && self.l0 <= F::one()) {
            return Err(Error::Config("l0 must lie in [0, 1]".into()));
        }
        if !(self.lr_clip > F::zero()) {
            return Err(Error::Config("lr_clip must be positive".into()));
        }
        Ok(())
    }

    fn threshold_for(&self, regime: Lithotype) -> F {
        match regime {
            Lithotype::Sand => self.threshold_to_shale,
            Lithotype::Shale => self.threshold_to_sand,
        }
    }
}

/// Running state of one detector over one stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorState<F> {
    pub regime: Lithotype,
    pub stat: F,
    pub t: usize,
    /// Set once the statistic hit [`STAT_CEILING`].
    pub saturated: bool,
}

impl<F: Real> DetectorState<F> {
    pub fn new(initial_regime: Lithotype) -> DetectorState<F> {
        DetectorState {
            regime: initial_regime,
            stat: F::zero(),
            t: 0,
            saturated: false,
        }
    }
}

/// Log likelihood ratio of the opposite regime given the shale probability
/// `l`, clamped to `[-clip, clip]`.
pub fn log_likelihood_ratio<F: Real>(l: F, regime: Lithotype, clip: F) -> F {
    let one = F::one();
    let z = match regime {
        Lithotype::Sand => (l / (one - l)).ln(),
        Lithotype::Shale => ((one - l) / l).ln(),
    };
    // ln of 0 or inf falls out of the clamp
    if z.is_nan() {
        F::zero()
    } else {
        z.max(-clip).min(clip)
    }
}

/// One CUSUM update: `max(0, s + z)`.
pub fn step_cusum<F: Real>(s: F, z: F) -> F {
    (s + z).max(F::zero())
}

/// One Shiryaev-Roberts update: `(1 + r) * lambda`, saturating at the
/// statistic ceiling.
pub fn step_shiryaev_roberts<F: Real>(r: F, lambda: F) -> F {
    ((F::one() + r) * lambda).min(F::from_f64_lossy(STAT_CEILING))
}

/// One posterior-statistic update: `(1 + r) * lambda / (1 - p)`, the
/// Shiryaev recursion under a geometric prior with parameter `p`.
pub fn step_posterior<F: Real>(r: F, lambda: F, p: F) -> F {
    ((F::one() + r) * lambda / (F::one() - p)).min(F::from_f64_lossy(STAT_CEILING))
}

/// Runs one statistic detector left to right over a probability stream.
///
/// At each index the statistic accumulates evidence against the current
/// regime; crossing the direction's threshold emits a [`ChangeEvent`],
/// flips the regime, and resets the statistic. `labels[t]` is the regime
/// after index `t` was processed. Depths are reported as
/// `start_depth + index * step`.
pub fn detect_stream<F: Real>(
    probs: &[F],
    cfg: &DetectorConfig<F>,
    initial_regime: Lithotype,
    start_depth: F,
    step: F,
) -> Result<(Vec<Lithotype>, Vec<ChangeEvent<F>>)> {
    cfg.validate()?;
    if probs.is_empty() {
        return Err(Error::Eval("empty probability stream".into()));
    }
    if cfg.kind == DetectorKind::ThinLayer {
        return Err(Error::Config(
            "thin-layer dropping is a label pass, not a statistic; use drop_thin_layers".into(),
        ));
    }

    let mut state = DetectorState::new(initial_regime);
    let mut labels = Vec::with_capacity(probs.len());
    let mut events = Vec::new();

    for (t, &l) in probs.iter().enumerate() {
        state.t = t;
        let z = log_likelihood_ratio(l, state.regime, cfg.lr_clip);
        state.stat = match cfg.kind {
            DetectorKind::Cusum => step_cusum(state.stat, z),
            DetectorKind::ShiryaevRoberts => step_shiryaev_roberts(state.stat, z.exp()),
            DetectorKind::Posterior => step_posterior(state.stat, z.exp(), cfg.prior_p),
            DetectorKind::ThinLayer => unreachable!(),
        };
        if state.stat >= F::from_f64_lossy(STAT_CEILING) {
            state.saturated = true;
        }
        if state.stat >= cfg.threshold_for(state.regime) {
            let new_regime = state.regime.opposite();
            events.push(ChangeEvent {
                index: t,
                depth: start_depth + F::from_f64_lossy(t as f64) * step,
                direction: Direction::from_regimes(state.regime, new_regime),
                source: EventSource::Predicted,
            });
            state.regime = new_regime;
            state.stat = F::zero();
        }
        labels.push(state.regime);
    }

    Ok((labels, events))
}

/// Thresholds a probability stream into labels: shale iff `prob >= l0`.
pub fn labels_from_probs<F: Real>(probs: &[F], l0: F) -> Vec<Lithotype> {
    probs
        .iter()
        .map(|&p| {
            if p >= l0 {
                Lithotype::Shale
            } else {
                Lithotype::Sand
            }
        })
        .collect()
}

/// Removes interior label runs of length `<= w`, merging each into the run
/// before it. The first run is never altered, and the final run is kept
/// even when short: in a live stream it may still be growing.
pub fn drop_thin_layers(labels: &[Lithotype], w: usize) -> Vec<Lithotype> {
    assert!(w >= 1, "thin-layer bound must be at least 1");
    if labels.is_empty() {
        return Vec::new();
    }

    let mut runs: Vec<(Lithotype, usize)> = Vec::new();
    for &l in labels {
        match runs.last_mut() {
            Some((label, len)) if *label == l => *len += 1,
            _ => runs.push((l, 1)),
        }
    }

    let n_runs = runs.len();
    let mut out: Vec<(Lithotype, usize)> = Vec::with_capacity(n_runs);
    for (i, (label, len)) in runs.into_iter().enumerate() {
        let interior = i > 0 && i + 1 < n_runs;
        if interior && len <= w {
            // absorbed by the preceding, already-corrected run
            out.last_mut().expect("interior run has a predecessor").1 += len;
        } else {
            match out.last_mut() {
                Some((prev, prev_len)) if *prev == label => *prev_len += len,
                _ => out.push((label, len)),
            }
        }
    }

    let mut corrected = Vec::with_capacity(labels.len());
    for (label, len) in out {
        corrected.extend(std::iter::repeat(label).take(len));
    }
    corrected
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: Lithotype = Lithotype::Sand;
    const SH: Lithotype = Lithotype::Shale;

    fn cusum_cfg(w1: f64, w2: f64) -> DetectorConfig<f64> {
        DetectorConfig {
            threshold_to_shale: w1,
            threshold_to_sand: w2,
            ..DetectorConfig::default_for(DetectorKind::Cusum)
        }
    }

    #[test]
    fn llr_symmetric_point() {
        assert_eq!(log_likelihood_ratio(0.5, S, 10.0), 0.0);
        assert_eq!(log_likelihood_ratio(0.5, SH, 10.0), 0.0);
    }

    #[test]
    fn llr_hand_value() {
        let z = log_likelihood_ratio(0.9, S, 10.0);
        assert!((z - 9.0f64.ln()).abs() < 1e-12);
        assert!((z - 2.1972).abs() < 1e-4);
        let z = log_likelihood_ratio(0.9, SH, 10.0);
        assert!((z + 9.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn llr_clamps_extremes() {
        assert_eq!(log_likelihood_ratio(1.0, S, 10.0), 10.0);
        assert_eq!(log_likelihood_ratio(0.0, S, 10.0), -10.0);
        assert_eq!(log_likelihood_ratio(1.0, SH, 10.0), -10.0);
    }

    #[test]
    fn cusum_reflects_at_zero() {
        assert_eq!(step_cusum(5.0, -7.0), 0.0);
        assert_eq!(step_cusum(0.0, -1.0), 0.0);
        assert_eq!(step_cusum(1.0, 2.0), 3.0);
    }

    #[test]
    fn cusum_alarm_after_three_unit_steps() {
        let mut s = 0.0;
        let mut alarm_at = None;
        for (t, z) in [1.0, 1.0, 1.0].into_iter().enumerate() {
            s = step_cusum(s, z);
            if s >= 2.5 {
                alarm_at = Some(t);
                break;
            }
        }
        assert_eq!(alarm_at, Some(2));
        assert_eq!(s, 3.0);
    }

    #[test]
    fn shiryaev_roberts_hand_recursion() {
        let r1: f64 = step_shiryaev_roberts(0.0, 2.0);
        let r2 = step_shiryaev_roberts(r1, 2.0);
        assert_eq!(r1, 2.0);
        assert_eq!(r2, 6.0);
        assert!(r1 < 5.0 && r2 >= 5.0, "threshold 5 fires at step 2");
    }

    #[test]
    fn shiryaev_roberts_unit_lambda_counts_steps() {
        let mut r: f64 = 0.0;
        for t in 1..=20 {
            r = step_shiryaev_roberts(r, 1.0);
            assert!((r - t as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn shiryaev_roberts_stays_positive() {
        let r: f64 = step_shiryaev_roberts(3.0, 1e-12);
        assert!(r > 0.0);
    }

    #[test]
    fn posterior_hand_recursion() {
        let r1: f64 = step_posterior(0.0, 1.0, 0.1);
        let r2 = step_posterior(r1, 1.0, 0.1);
        assert!((r1 - 1.0 / 0.9).abs() < 1e-12);
        assert!((r2 - (1.0 + 1.0 / 0.9) / 0.9).abs() < 1e-12);
        assert!((r2 - 2.3457).abs() < 1e-4);
    }

    #[test]
    fn posterior_unit_multiplier() {
        // 0.9 / (1 - 0.1) = 1 exactly
        let r: f64 = step_posterior(4.0, 0.9, 0.1);
        assert!((r - 5.0).abs() < 1e-12);
    }

    #[test]
    fn posterior_small_p_approaches_shiryaev_roberts() {
        let lambdas = [1.3, 0.7, 2.0, 0.9, 1.1];
        let (mut r_sr, mut r_post): (f64, f64) = (0.0, 0.0);
        for &l in &lambdas {
            r_sr = step_shiryaev_roberts(r_sr, l);
            r_post = step_posterior(r_post, l, 1e-12);
        }
        assert!((r_post - r_sr).abs() / r_sr < 1e-9);
    }

    #[test]
    fn detect_stream_zero_evidence() {
        let probs = vec![0.5; 40];
        let cfg = cusum_cfg(2.5, 2.5);
        let (labels, events) = detect_stream(&probs, &cfg, S, 0.0, 0.1).unwrap();
        assert!(events.is_empty());
        assert!(labels.iter().all(|&l| l == S));
    }

    #[test]
    fn detect_stream_fires_on_second_sample() {
        // z = ln 9 = 2.197 per sample against threshold 2.5
        let probs = vec![0.9; 6];
        let cfg = cusum_cfg(2.5, 2.5);
        let (labels, events) = detect_stream(&probs, &cfg, S, 100.0, 0.1).unwrap();
        assert_eq!(events[0].index, 1);
        assert_eq!(events[0].direction, Direction::SandToShale);
        assert!((events[0].depth - 100.1).abs() < 1e-12);
        assert_eq!(labels[0], S);
        assert_eq!(labels[1], SH);
    }

    #[test]
    fn detect_stream_single_flip() {
        let mut probs = vec![0.05; 60];
        probs.extend(vec![0.95; 60]);
        let cfg = cusum_cfg(5.0, 5.0);
        let (labels, events) = detect_stream(&probs, &cfg, S, 0.0, 0.1).unwrap();
        assert_eq!(events.len(), 1);
        assert!(events[0].index >= 60);
        let runs = 1 + labels.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(runs, 2);
    }

    #[test]
    fn detect_stream_rejects_thin_layer_kind() {
        let cfg = DetectorConfig::<f64>::default_for(DetectorKind::ThinLayer);
        assert!(detect_stream(&[0.5], &cfg, S, 0.0, 0.1).is_err());
    }

    #[test]
    fn labels_threshold_inclusive() {
        let labels = labels_from_probs(&[0.4, 0.6, 0.5], 0.5);
        assert_eq!(labels, vec![S, SH, SH]);
        let labels = labels_from_probs(&[0.99, 1.0], 1.0);
        assert_eq!(labels, vec![S, SH]);
    }

    #[test]
    fn thin_layers_keeps_long_interior_run() {
        let labels = [S, S, SH, SH, SH, S, S];
        assert_eq!(drop_thin_layers(&labels, 2), labels.to_vec());
    }

    #[test]
    fn thin_layers_drops_short_interior_run() {
        let labels = [S, S, SH, SH, S, S, S];
        assert_eq!(drop_thin_layers(&labels, 2), vec![S; 7]);
    }

    #[test]
    fn thin_layers_constant_stream_unchanged() {
        let labels = [SH; 9];
        for w in 1..5 {
            assert_eq!(drop_thin_layers(&labels, w), labels.to_vec());
        }
    }

    #[test]
    fn thin_layers_first_and_last_runs_survive() {
        let labels = [S, SH, SH, SH, SH, S];
        // first run (len 1) and last run (len 1) both short, both kept
        assert_eq!(drop_thin_layers(&labels, 2), labels.to_vec());
    }

    #[test]
    fn thin_layers_cascading_merge() {
        let labels = [S, S, S, SH, S, SH, SH, SH, SH, SH];
        // interior runs of length 1 collapse into the leading sand run
        assert_eq!(
            drop_thin_layers(&labels, 1),
            vec![S, S, S, S, S, SH, SH, SH, SH, SH]
        );
    }
}
