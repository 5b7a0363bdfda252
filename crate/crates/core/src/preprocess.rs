//! Missing-value imputation and model feature derivation.
//!
//! Imputation works per maximal constant-lithotype interval: a channel's
//! missing cells take the mean of that interval's known values; an interval
//! with no known value falls back to the latest known value from earlier
//! depth. Cells at the head of a well with nothing to fall back on stay
//! missing and their rows are excluded from modeling.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::well::{Channel, Dataset, Lithotype, WellSeries, CHANNELS};

/// Imputation result: the recoverable suffix of the well plus the fraction
/// of rows kept.
#[derive(Debug, Clone)]
pub struct ImputeOutcome<F> {
    pub well: WellSeries<F>,
    /// Kept rows / original rows.
    pub coverage: F,
    /// Set when coverage drops below one half.
    pub low_coverage_warning: bool,
}

/// Fills missing cells per the interval rule and trims the unrecoverable
/// head of the well. Present values are never altered.
pub fn impute_missing<F: Real>(well: &WellSeries<F>) -> ImputeOutcome<F> {
    let n = well.len();
    let labels = well.labels();

    // maximal constant-label intervals as (start, end) half-open
    let mut intervals = Vec::new();
    let mut start = 0;
    for t in 1..n {
        if labels[t] != labels[t - 1] {
            intervals.push((start, t));
            start = t;
        }
    }
    intervals.push((start, n));

    let mut filled: Vec<Vec<Option<F>>> = Vec::with_capacity(CHANNELS.len());
    // first grid index from which every channel is determined
    let mut first_included = 0usize;

    for &ch in &CHANNELS {
        let col = well.channel(ch);
        let mut out = col.to_vec();
        let mut last_known: Option<F> = None;
        let mut determined_from: Option<usize> = None;

        for &(lo, hi) in &intervals {
            let known: Vec<F> = col[lo..hi].iter().flatten().copied().collect();
            if !known.is_empty() {
                let sum = known.iter().fold(F::zero(), |a, &v| a + v);
                let mean = sum / F::from_f64_lossy(known.len() as f64);
                for cell in out[lo..hi].iter_mut() {
                    if cell.is_none() {
                        *cell = Some(mean);
                    }
                }
                last_known = col[lo..hi].iter().flatten().last().copied();
                determined_from.get_or_insert(lo);
            } else if let Some(fallback) = last_known {
                for cell in out[lo..hi].iter_mut() {
                    *cell = Some(fallback);
                }
            }
            // no known value and nothing preceding: cells stay missing
        }

        match determined_from {
            Some(from) => first_included = first_included.max(from),
            // channel entirely absent: every row is unrecoverable
            None => first_included = n,
        }
        filled.push(out);
    }

    let kept = n - first_included;
    let coverage = F::from_f64_lossy(kept as f64 / n as f64);
    let trimmed: Vec<Vec<Option<F>>> = filled
        .into_iter()
        .map(|col| col[first_included..].to_vec())
        .collect();
    let labels = labels[first_included..].to_vec();
    let density = well
        .density()
        .map(|d| d[first_included..].to_vec());

    let well = if kept == 0 {
        // keep the untouched well rather than manufacture an empty one
        well.clone()
    } else {
        well.with_columns(trimmed, labels, density, well.depth_at(first_included))
    };

    ImputeOutcome {
        well,
        coverage,
        low_coverage_warning: coverage.as_f64() < 0.5,
    }
}

/// Feature derivation settings.
#[derive(Debug, Clone)]
pub struct FeatureConfig<F> {
    /// Include the adjusted penetration rate feature.
    pub use_apr: bool,
    /// Include the specific energy of drilling feature.
    pub use_sed: bool,
    /// Borehole cross-section area, m^2. Default matches a 215.9 mm bit.
    pub area: F,
    /// Clamp floor for denominators, in channel units.
    pub eps: F,
}

impl<F: Real> Default for FeatureConfig<F> {
    fn default() -> Self {
        FeatureConfig {
            use_apr: true,
            use_sed: true,
            area: F::from_f64_lossy(0.0366),
            eps: F::from_f64_lossy(1e-6),
        }
    }
}

impl<F: Real> FeatureConfig<F> {
    /// Feature column names in matrix order.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = CHANNELS.iter().map(|c| c.name().to_string()).collect();
        if self.use_apr {
            names.push("apr".into());
        }
        if self.use_sed {
            names.push("sed".into());
        }
        names
    }
}

/// Dense per-well design matrix; rows align with the (imputed) well grid.
#[derive(Debug, Clone)]
pub struct FeatureMatrix<F> {
    pub well_id: String,
    pub feature_names: Vec<String>,
    /// Row-major values, `rows.len() == labels.len()`.
    pub rows: Vec<Vec<F>>,
    pub labels: Vec<Lithotype>,
}

impl<F: Real> FeatureMatrix<F> {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

/// Adjusted penetration rate: `rop / (wob * sqrt(trq))` with clamped
/// denominators.
pub fn apr<F: Real>(rop: F, wob: F, trq: F, eps: F) -> F {
    let rop = rop.max(eps);
    let wob = wob.max(eps);
    let trq = trq.max(eps);
    rop / (wob * trq.sqrt())
}

/// Specific energy of drilling: `wob/area + 2*pi*rpm*trq / (area*rop)` with
/// clamped denominators.
pub fn sed<F: Real>(rop: F, wob: F, trq: F, rpm: F, area: F, eps: F) -> F {
    let rop = rop.max(eps);
    let wob = wob.max(eps);
    let trq = trq.max(eps);
    let two_pi = F::from_f64_lossy(std::f64::consts::TAU);
    wob / area + two_pi * rpm * trq / (area * rop)
}

/// Builds the design matrix for an imputed well.
///
/// Every included row must be fully populated; rows violating that indicate
/// the well skipped imputation and produce an error.
pub fn derive_features<F: Real>(
    well: &WellSeries<F>,
    cfg: &FeatureConfig<F>,
) -> Result<FeatureMatrix<F>> {
    let n = well.len();
    let names = cfg.feature_names();
    let mut rows = Vec::with_capacity(n);

    for t in 0..n {
        let s = well.sample(t);
        let mut row = Vec::with_capacity(names.len());
        for &ch in &CHANNELS {
            let v = s.get(ch).ok_or_else(|| {
                Error::Eval(format!(
                    "well '{}' row {t} has missing {}; impute before deriving features",
                    well.well_id(),
                    ch.name()
                ))
            })?;
            row.push(v);
        }
        let (wob, rpm, trq, rop) = (
            row[Channel::Wob.index()],
            row[Channel::Rpm.index()],
            row[Channel::Trq.index()],
            row[Channel::Rop.index()],
        );
        if cfg.use_apr {
            row.push(apr(rop, wob, trq, cfg.eps));
        }
        if cfg.use_sed {
            row.push(sed(rop, wob, trq, rpm, cfg.area, cfg.eps));
        }
        rows.push(row);
    }

    Ok(FeatureMatrix {
        well_id: well.well_id().to_string(),
        feature_names: names,
        rows,
        labels: well.labels().to_vec(),
    })
}

/// Pooled per-sample class fractions over a dataset: `(shale, sand)`.
pub fn class_balance<F: Real>(dataset: &Dataset<F>) -> Result<(F, F)> {
    let mut shale = 0usize;
    let mut total = 0usize;
    for well in dataset.wells() {
        total += well.len();
        shale += well
            .labels()
            .iter()
            .filter(|&&l| l == Lithotype::Shale)
            .count();
    }
    if total == 0 {
        return Err(Error::Eval("empty dataset".into()));
    }
    let shale_frac = F::from_f64_lossy(shale as f64 / total as f64);
    Ok((shale_frac, F::one() - shale_frac))
}
