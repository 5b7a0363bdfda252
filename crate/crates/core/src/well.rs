//! Depth-gridded well data model and CSV ingestion.
//!
//! A well is a sequence of MWD samples on a uniform 0.1 m depth grid with a
//! lithotype label per sample. Raw rig exports arrive on an irregular depth
//! sequence ([`RawWell`]) and are snapped to the grid with [`bin_to_grid`].
//!
//! CSV schema (UTF-8, comma-separated, `.` decimal point):
//! `depth, wob, rpm, trq, flow_in, flow_out, spp, rop, hook_load, density, lithotype`.
//! `depth` and `lithotype` are required; any subset of the remaining columns
//! may be present, and empty cells mark missing measurements. Some rig
//! exports label the hook load column `hook_land`; that spelling is accepted
//! as an alias.

use std::fmt;

use crate::error::{Error, Result};
use crate::num::Real;

/// Default depth grid step in meters.
pub const GRID_STEP_M: f64 = 0.1;

/// Rock-type class. `Shale` also covers hard-rocks and is the positive
/// (minority) class for every ranking metric; `Sand` is the oil-bearing
/// class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lithotype {
    Sand,
    Shale,
}

impl Lithotype {
    /// Parses a label token, case-insensitively.
    pub fn parse(token: &str) -> Option<Lithotype> {
        match token.trim().to_ascii_lowercase().as_str() {
            "sand" => Some(Lithotype::Sand),
            "shale" => Some(Lithotype::Shale),
            _ => None,
        }
    }

    pub fn opposite(self) -> Lithotype {
        match self {
            Lithotype::Sand => Lithotype::Shale,
            Lithotype::Shale => Lithotype::Sand,
        }
    }
}

impl fmt::Display for Lithotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lithotype::Sand => write!(f, "sand"),
            Lithotype::Shale => write!(f, "shale"),
        }
    }
}

/// The eight MWD channels measured at or near the bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Weight on bit.
    Wob,
    /// Rotary speed, rev/min.
    Rpm,
    /// Torque.
    Trq,
    /// Input flow rate.
    FlowIn,
    /// Output flow rate.
    FlowOut,
    /// Standpipe pressure.
    Spp,
    /// Rate of penetration, m/h.
    Rop,
    /// Hook load.
    HookLoad,
}

pub const CHANNELS: [Channel; 8] = [
    Channel::Wob,
    Channel::Rpm,
    Channel::Trq,
    Channel::FlowIn,
    Channel::FlowOut,
    Channel::Spp,
    Channel::Rop,
    Channel::HookLoad,
];

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Wob => "wob",
            Channel::Rpm => "rpm",
            Channel::Trq => "trq",
            Channel::FlowIn => "flow_in",
            Channel::FlowOut => "flow_out",
            Channel::Spp => "spp",
            Channel::Rop => "rop",
            Channel::HookLoad => "hook_load",
        }
    }

    pub fn index(self) -> usize {
        CHANNELS.iter().position(|c| *c == self).unwrap()
    }

    fn from_column(name: &str) -> Option<Channel> {
        match name {
            "wob" => Some(Channel::Wob),
            "rpm" => Some(Channel::Rpm),
            "trq" => Some(Channel::Trq),
            "flow_in" => Some(Channel::FlowIn),
            "flow_out" => Some(Channel::FlowOut),
            "spp" => Some(Channel::Spp),
            "rop" => Some(Channel::Rop),
            // accepted alias; some exports misname the hook load channel
            "hook_load" | "hook_land" => Some(Channel::HookLoad),
            _ => None,
        }
    }
}

/// One row of MWD measurements; `None` marks a missing cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwdSample<F> {
    pub wob: Option<F>,
    pub rpm: Option<F>,
    pub trq: Option<F>,
    pub flow_in: Option<F>,
    pub flow_out: Option<F>,
    pub spp: Option<F>,
    pub rop: Option<F>,
    pub hook_load: Option<F>,
}

impl<F> Default for MwdSample<F> {
    fn default() -> Self {
        MwdSample {
            wob: None,
            rpm: None,
            trq: None,
            flow_in: None,
            flow_out: None,
            spp: None,
            rop: None,
            hook_load: None,
        }
    }
}

impl<F: Real> MwdSample<F> {
    pub fn get(&self, ch: Channel) -> Option<F> {
        match ch {
            Channel::Wob => self.wob,
            Channel::Rpm => self.rpm,
            Channel::Trq => self.trq,
            Channel::FlowIn => self.flow_in,
            Channel::FlowOut => self.flow_out,
            Channel::Spp => self.spp,
            Channel::Rop => self.rop,
            Channel::HookLoad => self.hook_load,
        }
    }

    pub fn set(&mut self, ch: Channel, value: Option<F>) {
        match ch {
            Channel::Wob => self.wob = value,
            Channel::Rpm => self.rpm = value,
            Channel::Trq => self.trq = value,
            Channel::FlowIn => self.flow_in = value,
            Channel::FlowOut => self.flow_out = value,
            Channel::Spp => self.spp = value,
            Channel::Rop => self.rop = value,
            Channel::HookLoad => self.hook_load = value,
        }
    }
}

/// One raw (pre-gridding) record.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow<F> {
    pub depth: F,
    pub sample: MwdSample<F>,
    pub label: Lithotype,
    pub density: Option<F>,
}

/// A well as parsed from CSV: rows sorted by depth, possibly irregular.
#[derive(Debug, Clone, PartialEq)]
pub struct RawWell<F> {
    pub well_id: String,
    pub rows: Vec<RawRow<F>>,
    /// Whether the source carried a density column at all.
    pub has_density: bool,
}

/// One well on a uniform depth grid. Parallel arrays: channel columns,
/// labels, and optionally density, all of equal length. Depth of sample `t`
/// is `start_depth + t * step`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WellSeries<F> {
    well_id: String,
    start_depth: F,
    step: F,
    channels: Vec<Vec<Option<F>>>,
    labels: Vec<Lithotype>,
    density: Option<Vec<Option<F>>>,
}

impl<F: Real> WellSeries<F> {
    /// Assembles a series from parallel columns, checking the length
    /// invariants.
    pub fn new(
        well_id: impl Into<String>,
        start_depth: F,
        step: F,
        channels: Vec<Vec<Option<F>>>,
        labels: Vec<Lithotype>,
        density: Option<Vec<Option<F>>>,
    ) -> Result<WellSeries<F>> {
        let well_id = well_id.into();
        if well_id.is_empty() {
            return Err(Error::Schema("well id must be non-empty".into()));
        }
        if labels.is_empty() {
            return Err(Error::EmptyWell(well_id));
        }
        if channels.len() != CHANNELS.len() {
            return Err(Error::Schema(format!(
                "expected {} channel columns, got {}",
                CHANNELS.len(),
                channels.len()
            )));
        }
        let n = labels.len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::Schema("channel column length mismatch".into()));
        }
        if let Some(d) = &density {
            if d.len() != n {
                return Err(Error::Schema("density column length mismatch".into()));
            }
        }
        if !(step > F::zero()) {
            return Err(Error::Config("grid step must be positive".into()));
        }
        Ok(WellSeries {
            well_id,
            start_depth,
            step,
            channels,
            labels,
            density,
        })
    }

    pub fn well_id(&self) -> &str {
        &self.well_id
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn start_depth(&self) -> F {
        self.start_depth
    }

    pub fn step(&self) -> F {
        self.step
    }

    /// Depth of grid index `t`.
    pub fn depth_at(&self, t: usize) -> F {
        self.start_depth + F::from_f64_lossy(t as f64) * self.step
    }

    pub fn channel(&self, ch: Channel) -> &[Option<F>] {
        &self.channels[ch.index()]
    }

    pub fn labels(&self) -> &[Lithotype] {
        &self.labels
    }

    pub fn density(&self) -> Option<&[Option<F>]> {
        self.density.as_deref()
    }

    /// Row view of grid index `t`.
    pub fn sample(&self, t: usize) -> MwdSample<F> {
        let mut s = MwdSample::default();
        for &ch in &CHANNELS {
            s.set(ch, self.channels[ch.index()][t]);
        }
        s
    }

    pub(crate) fn with_columns(
        &self,
        channels: Vec<Vec<Option<F>>>,
        labels: Vec<Lithotype>,
        density: Option<Vec<Option<F>>>,
        start_depth: F,
    ) -> WellSeries<F> {
        WellSeries {
            well_id: self.well_id.clone(),
            start_depth,
            step: self.step,
            channels,
            labels,
            density,
        }
    }

    /// The well re-expressed as raw rows on its own grid.
    pub fn to_raw(&self) -> RawWell<F> {
        let rows = (0..self.len())
            .map(|t| RawRow {
                depth: self.depth_at(t),
                sample: self.sample(t),
                label: self.labels[t],
                density: self.density.as_ref().and_then(|d| d[t]),
            })
            .collect();
        RawWell {
            well_id: self.well_id.clone(),
            rows,
            has_density: self.density.is_some(),
        }
    }
}

/// A collection of wells with pairwise-distinct ids.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    wells: Vec<WellSeries<F>>,
}

impl<F: Real> Dataset<F> {
    pub fn new(wells: Vec<WellSeries<F>>) -> Result<Dataset<F>> {
        let mut seen = std::collections::HashSet::new();
        for w in &wells {
            if !seen.insert(w.well_id().to_string()) {
                return Err(Error::Schema(format!(
                    "duplicate well id '{}'",
                    w.well_id()
                )));
            }
        }
        Ok(Dataset { wells })
    }

    pub fn wells(&self) -> &[WellSeries<F>] {
        &self.wells
    }

    pub fn len(&self) -> usize {
        self.wells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wells.is_empty()
    }
}

/// Non-fatal observations made while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub message: String,
}

/// Parses one well from CSV text. Rows are sorted by depth; missing cells
/// stay flagged. Unknown columns are skipped with a warning.
pub fn parse_well_csv<F: Real>(
    text: &str,
    well_id: &str,
) -> Result<(RawWell<F>, Vec<ParseWarning>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());

    let headers = reader.headers()?.clone();
    let mut warnings = Vec::new();

    let mut depth_col = None;
    let mut litho_col = None;
    let mut density_col = None;
    let mut channel_cols: Vec<(usize, Channel)> = Vec::new();
    for (i, name) in headers.iter().enumerate() {
        let name = name.trim().to_ascii_lowercase();
        match name.as_str() {
            "depth" => depth_col = Some(i),
            "lithotype" => litho_col = Some(i),
            "density" => density_col = Some(i),
            other => {
                if let Some(ch) = Channel::from_column(other) {
                    if other == "hook_land" {
                        warnings.push(ParseWarning {
                            message: "column 'hook_land' read as hook_load".into(),
                        });
                    }
                    channel_cols.push((i, ch));
                } else {
                    warnings.push(ParseWarning {
                        message: format!("unknown column '{other}' ignored"),
                    });
                }
            }
        }
    }
    let depth_col = depth_col.ok_or_else(|| Error::Schema("missing 'depth' column".into()))?;
    let litho_col = litho_col.ok_or_else(|| Error::Schema("missing 'lithotype' column".into()))?;

    let mut rows: Vec<RawRow<F>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);

        let depth = parse_cell::<F>(record.get(depth_col), line, "depth")?
            .ok_or_else(|| Error::Row {
                line,
                message: "empty depth cell".into(),
            })?;

        let token = record.get(litho_col).unwrap_or("");
        let label = Lithotype::parse(token).ok_or_else(|| Error::Value {
            line,
            message: format!("lithotype token '{}' not in {{sand, shale}}", token.trim()),
        })?;

        let mut sample = MwdSample::default();
        for &(col, ch) in &channel_cols {
            sample.set(ch, parse_cell::<F>(record.get(col), line, ch.name())?);
        }
        let density = match density_col {
            Some(col) => parse_cell::<F>(record.get(col), line, "density")?,
            None => None,
        };

        rows.push(RawRow {
            depth,
            sample,
            label,
            density,
        });
    }

    if rows.is_empty() {
        return Err(Error::EmptyWell(well_id.to_string()));
    }
    rows.sort_by(|a, b| a.depth.partial_cmp(&b.depth).expect("finite depths"));

    Ok((
        RawWell {
            well_id: well_id.to_string(),
            rows,
            has_density: density_col.is_some(),
        },
        warnings,
    ))
}

fn parse_cell<F: Real>(cell: Option<&str>, line: u64, column: &str) -> Result<Option<F>> {
    let cell = cell.unwrap_or("").trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let v: f64 = cell.parse().map_err(|_| Error::Row {
        line,
        message: format!("unparseable numeric cell '{cell}' in column '{column}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::Value {
            line,
            message: format!("non-finite value in column '{column}'"),
        });
    }
    Ok(Some(F::from_f64_lossy(v)))
}

/// Serializes a gridded well back to the CSV schema. Density is emitted only
/// when the well carries it.
pub fn write_well_csv<F: Real>(well: &WellSeries<F>) -> String {
    let mut out = String::new();
    out.push_str("depth");
    for &ch in &CHANNELS {
        out.push(',');
        out.push_str(ch.name());
    }
    if well.density().is_some() {
        out.push_str(",density");
    }
    out.push_str(",lithotype\n");

    for t in 0..well.len() {
        write_cell(&mut out, Some(well.depth_at(t)), true);
        for &ch in &CHANNELS {
            out.push(',');
            write_cell(&mut out, well.channel(ch)[t], false);
        }
        if let Some(d) = well.density() {
            out.push(',');
            write_cell(&mut out, d[t], false);
        }
        out.push(',');
        out.push_str(&well.labels()[t].to_string());
        out.push('\n');
    }
    out
}

fn write_cell<F: Real>(out: &mut String, v: Option<F>, first: bool) {
    let _ = first;
    if let Some(v) = v {
        out.push_str(&format!("{v}"));
    }
}

/// Snaps raw rows onto a uniform grid of the given step.
///
/// The grid starts at `floor(min_depth / step) * step` and ends at the last
/// bin containing a raw sample. Each bin's channel value is the mean of the
/// raw values falling in it; empty bins keep all channels missing. A bin's
/// label is the majority lithotype of its rows, ties going to the deepest
/// row; bins without rows inherit the previous bin's label.
pub fn bin_to_grid<F: Real>(raw: &RawWell<F>, step: F) -> Result<WellSeries<F>> {
    if raw.rows.is_empty() {
        return Err(Error::EmptyWell(raw.well_id.clone()));
    }
    if !(step > F::zero()) {
        return Err(Error::Config("grid step must be positive".into()));
    }

    let step_f = step.as_f64();
    let min_depth = raw.rows[0].depth.as_f64();
    let max_depth = raw.rows.last().unwrap().depth.as_f64();

    let start_bin = floor_bin::<F>(min_depth, 0.0, step_f);
    let grid_start = start_bin as f64 * step_f;
    let last_bin = floor_bin::<F>(max_depth, grid_start, step_f);
    let n = usize::try_from(last_bin + 1)
        .map_err(|_| Error::Config("grid does not fit in memory".into()))?;

    let mut sums = vec![[0.0f64; 8]; n];
    let mut counts = vec![[0u32; 8]; n];
    let mut density_sum = vec![0.0f64; n];
    let mut density_count = vec![0u32; n];
    // per bin: (sand rows, shale rows, label of deepest row)
    let mut label_votes: Vec<(u32, u32, Lithotype)> = vec![(0, 0, Lithotype::Sand); n];

    for row in &raw.rows {
        let b = floor_bin::<F>(row.depth.as_f64(), grid_start, step_f) as usize;
        let b = b.min(n - 1);
        for &ch in &CHANNELS {
            if let Some(v) = row.sample.get(ch) {
                sums[b][ch.index()] += v.as_f64();
                counts[b][ch.index()] += 1;
            }
        }
        if let Some(d) = row.density {
            density_sum[b] += d.as_f64();
            density_count[b] += 1;
        }
        let votes = &mut label_votes[b];
        match row.label {
            Lithotype::Sand => votes.0 += 1,
            Lithotype::Shale => votes.1 += 1,
        }
        votes.2 = row.label; // rows arrive depth-sorted, so this is the deepest
    }

    let mut channels: Vec<Vec<Option<F>>> = vec![vec![None; n]; CHANNELS.len()];
    let mut labels = Vec::with_capacity(n);
    let mut density = if raw.has_density {
        Some(vec![None; n])
    } else {
        None
    };
    let mut prev_label = label_votes[0].2;
    for b in 0..n {
        for &ch in &CHANNELS {
            let c = counts[b][ch.index()];
            if c > 0 {
                channels[ch.index()][b] =
                    Some(F::from_f64_lossy(sums[b][ch.index()] / c as f64));
            }
        }
        if let Some(dens) = density.as_mut() {
            if density_count[b] > 0 {
                dens[b] = Some(F::from_f64_lossy(
                    density_sum[b] / density_count[b] as f64,
                ));
            }
        }
        let (sand, shale, deepest) = label_votes[b];
        let label = if sand + shale == 0 {
            prev_label
        } else if sand > shale {
            Lithotype::Sand
        } else if shale > sand {
            Lithotype::Shale
        } else {
            deepest
        };
        labels.push(label);
        prev_label = label;
    }

    WellSeries::new(
        raw.well_id.clone(),
        F::from_f64_lossy(grid_start),
        step,
        channels,
        labels,
        density,
    )
}

/// Bin index of `depth` relative to `origin`, with a guard absorbing the
/// representation error of grid-aligned decimals so boundary samples land in
/// the bin they name.
fn floor_bin<F: Real>(depth: f64, origin: f64, step: f64) -> i64 {
    let q = (depth - origin) / step;
    let eps = F::epsilon().as_f64();
    let guard = (depth.abs() + origin.abs()).max(1.0) / step * eps * 4.0 + 1e-9;
    (q + guard).floor() as i64
}

/// Parses CSV text and snaps it to the default 0.1 m grid in one step.
pub fn load_well_csv<F: Real>(
    text: &str,
    well_id: &str,
) -> Result<(WellSeries<F>, Vec<ParseWarning>)> {
    let (raw, warnings) = parse_well_csv::<F>(text, well_id)?;
    let well = bin_to_grid(&raw, F::from_f64_lossy(GRID_STEP_M))?;
    Ok((well, warnings))
}

/// Health report for one well; informational only.
#[derive(Debug, Clone)]
pub struct ValidationReport<F> {
    /// Missing fraction per MWD channel, indexed like [`CHANNELS`].
    pub missing_fraction: Vec<F>,
    /// Missing fraction of the density column, when present.
    pub density_missing_fraction: Option<F>,
    /// Number of maximal constant-label runs.
    pub label_runs: usize,
    /// Uniform grid implies monotone depth; recorded for audit output.
    pub depth_monotone: bool,
    /// Fraction of rows recoverable by imputation.
    pub coverage: F,
    /// Whether coverage clears the 99.8% bar.
    pub passes_coverage: bool,
}

/// Coverage threshold a well must clear to count as fully recoverable.
pub const COVERAGE_PASS: f64 = 0.998;

/// Summarizes missing data, label structure, and imputation coverage.
pub fn validate_well<F: Real>(well: &WellSeries<F>) -> ValidationReport<F> {
    let n = well.len();
    let missing_fraction = CHANNELS
        .iter()
        .map(|&ch| {
            let missing = well.channel(ch).iter().filter(|v| v.is_none()).count();
            F::from_f64_lossy(missing as f64 / n as f64)
        })
        .collect();
    let density_missing_fraction = well.density().map(|d| {
        let missing = d.iter().filter(|v| v.is_none()).count();
        F::from_f64_lossy(missing as f64 / n as f64)
    });

    let labels = well.labels();
    let label_runs = 1 + labels.windows(2).filter(|w| w[0] != w[1]).count();

    let coverage = crate::preprocess::impute_missing(well).coverage;

    ValidationReport {
        missing_fraction,
        density_missing_fraction,
        label_runs,
        depth_monotone: true,
        coverage,
        passes_coverage: coverage.as_f64() >= COVERAGE_PASS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rop_csv() -> &'static str {
        "depth,rop,lithotype\n1800.0,12.0,sand\n1800.1,11.5,shale\n"
    }

    #[test]
    fn parse_maps_fields_directly() {
        let (raw, warnings) = parse_well_csv::<f64>(rop_csv(), "w1").unwrap();
        assert!(warnings.is_empty());
        assert_eq!(raw.rows.len(), 2);
        assert_eq!(raw.rows[0].sample.rop, Some(12.0));
        assert_eq!(raw.rows[1].sample.rop, Some(11.5));
        assert_eq!(raw.rows[0].label, Lithotype::Sand);
        assert_eq!(raw.rows[1].label, Lithotype::Shale);

        let well = bin_to_grid(&raw, 0.1).unwrap();
        assert_eq!(well.len(), 2);
        assert_eq!(well.channel(Channel::Rop), &[Some(12.0), Some(11.5)]);
    }

    #[test]
    fn parse_flags_empty_cell_missing() {
        let text = "depth,rop,lithotype\n1800.0,,sand\n";
        let (raw, _) = parse_well_csv::<f64>(text, "w1").unwrap();
        assert_eq!(raw.rows[0].sample.rop, None);
    }

    #[test]
    fn parse_label_case_insensitive() {
        let text = "depth,rop,lithotype\n1800.0,1.0,SAND\n1800.1,1.0,Shale\n";
        let (raw, _) = parse_well_csv::<f64>(text, "w1").unwrap();
        assert_eq!(raw.rows[0].label, Lithotype::Sand);
        assert_eq!(raw.rows[1].label, Lithotype::Shale);
    }

    #[test]
    fn parse_missing_required_column_is_schema_error() {
        let text = "rop,lithotype\n1.0,sand\n";
        assert!(matches!(
            parse_well_csv::<f64>(text, "w1"),
            Err(Error::Schema(_))
        ));
        let text = "depth,rop\n1.0,2.0\n";
        assert!(matches!(
            parse_well_csv::<f64>(text, "w1"),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn parse_bad_numeric_reports_line() {
        let text = "depth,rop,lithotype\n1800.0,12.0,sand\n1800.1,oops,sand\n";
        match parse_well_csv::<f64>(text, "w1") {
            Err(Error::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn parse_unknown_lithotype_is_value_error() {
        let text = "depth,rop,lithotype\n1800.0,12.0,granite\n";
        assert!(matches!(
            parse_well_csv::<f64>(text, "w1"),
            Err(Error::Value { .. })
        ));
    }

    #[test]
    fn parse_unknown_column_warns() {
        let text = "depth,rop,gamma,lithotype\n1800.0,12.0,89.1,sand\n";
        let (_, warnings) = parse_well_csv::<f64>(text, "w1").unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].message.contains("gamma"));
    }

    #[test]
    fn parse_hook_land_alias() {
        let text = "depth,hook_land,lithotype\n1800.0,91.0,sand\n";
        let (raw, warnings) = parse_well_csv::<f64>(text, "w1").unwrap();
        assert_eq!(raw.rows[0].sample.hook_load, Some(91.0));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn bin_means_per_bin() {
        let text = "depth,rop,lithotype\n1800.00,10,sand\n1800.04,14,sand\n1800.12,8,sand\n";
        let (raw, _) = parse_well_csv::<f64>(text, "w1").unwrap();
        let well = bin_to_grid(&raw, 0.1).unwrap();
        assert_eq!(well.len(), 2);
        assert_eq!(well.channel(Channel::Rop), &[Some(12.0), Some(8.0)]);
        assert!((well.depth_at(0) - 1800.0).abs() < 1e-9);
    }

    #[test]
    fn bin_on_grid_is_identity() {
        let text = "depth,rop,lithotype\n1800.0,10,sand\n1800.1,14,shale\n1800.2,8,sand\n";
        let (raw, _) = parse_well_csv::<f64>(text, "w1").unwrap();
        let well = bin_to_grid(&raw, 0.1).unwrap();
        assert_eq!(well.len(), 3);
        assert_eq!(
            well.channel(Channel::Rop),
            &[Some(10.0), Some(14.0), Some(8.0)]
        );
        assert_eq!(
            well.labels(),
            &[Lithotype::Sand, Lithotype::Shale, Lithotype::Sand]
        );
        for (t, row) in raw.rows.iter().enumerate() {
            assert!((well.depth_at(t) - row.depth).abs() < 1e-9);
        }
    }

    #[test]
    fn bin_label_tie_takes_deepest() {
        let text = "depth,rop,lithotype\n1800.01,1,sand\n1800.05,1,shale\n";
        let (raw, _) = parse_well_csv::<f64>(text, "w1").unwrap();
        let well = bin_to_grid(&raw, 0.1).unwrap();
        assert_eq!(well.len(), 1);
        assert_eq!(well.labels(), &[Lithotype::Shale]);
    }

    #[test]
    fn bin_empty_bins_missing_with_carried_label() {
        let text = "depth,rop,lithotype\n1800.0,10,shale\n1800.35,8,sand\n";
        let (raw, _) = parse_well_csv::<f64>(text, "w1").unwrap();
        let well = bin_to_grid(&raw, 0.1).unwrap();
        assert_eq!(well.len(), 4);
        assert_eq!(well.channel(Channel::Rop)[1], None);
        assert_eq!(well.channel(Channel::Rop)[2], None);
        assert_eq!(
            well.labels(),
            &[
                Lithotype::Shale,
                Lithotype::Shale,
                Lithotype::Shale,
                Lithotype::Sand
            ]
        );
    }

    #[test]
    fn bin_empty_input_is_error() {
        let raw = RawWell::<f64> {
            well_id: "w1".into(),
            rows: vec![],
            has_density: false,
        };
        assert!(matches!(bin_to_grid(&raw, 0.1), Err(Error::EmptyWell(_))));
    }

    #[test]
    fn bin_is_idempotent() {
        let text = "depth,rop,wob,lithotype\n1800.00,10,4,sand\n1800.04,14,,sand\n1800.13,8,5,shale\n1800.31,7,3,shale\n";
        let (raw, _) = parse_well_csv::<f64>(text, "w1").unwrap();
        let once = bin_to_grid(&raw, 0.1).unwrap();
        let twice = bin_to_grid(&once.to_raw(), 0.1).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn grid_spacing_is_exact() {
        let text = "depth,rop,lithotype\n1799.97,10,sand\n1800.52,8,sand\n";
        let (raw, _) = parse_well_csv::<f64>(text, "w1").unwrap();
        let well = bin_to_grid(&raw, 0.1).unwrap();
        for t in 1..well.len() {
            let d = well.depth_at(t) - well.depth_at(t - 1);
            assert!((d - 0.1).abs() <= f64::EPSILON * well.depth_at(t).abs());
        }
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let text = "depth,wob,rpm,trq,flow_in,flow_out,spp,rop,hook_load,density,lithotype\n\
                    1800.0,8.25,120,5.5,2000,1980,150.125,25.5,90,2.31,sand\n\
                    1800.1,,119,5.25,,1990,151,24.75,89,,shale\n";
        let (well, _) = load_well_csv::<f64>(text, "w1").unwrap();
        let serialized = write_well_csv(&well);
        let (reparsed, _) = load_well_csv::<f64>(&serialized, "w1").unwrap();
        assert_eq!(well, reparsed);
    }

    #[test]
    fn dataset_rejects_duplicate_ids() {
        let (w, _) = load_well_csv::<f64>(rop_csv(), "w1").unwrap();
        assert!(Dataset::new(vec![w.clone(), w]).is_err());
    }

    #[test]
    fn validate_counts_runs_and_missing() {
        let text = "depth,rop,wob,lithotype\n\
                    1800.0,10,1,sand\n1800.1,11,1,sand\n1800.2,12,1,sand\n1800.3,13,1,sand\n1800.4,14,1,sand\n\
                    1800.5,20,1,shale\n1800.6,21,1,shale\n1800.7,22,1,shale\n";
        let (well, _) = load_well_csv::<f64>(text, "w1").unwrap();
        let report = validate_well(&well);
        assert_eq!(report.label_runs, 2);
        assert!(report.missing_fraction.iter().all(|&f| {
            let f: f64 = f;
            f == 0.0 || f == 1.0 // absent columns are fully missing
        }));
        assert_eq!(report.missing_fraction[Channel::Rop.index()], 0.0);
        assert!(report.depth_monotone);
    }

    #[test]
    fn validate_all_missing_channel_fraction_one() {
        let text = "depth,rop,lithotype\n1800.0,10,sand\n1800.1,11,sand\n";
        let (well, _) = load_well_csv::<f64>(text, "w1").unwrap();
        let report = validate_well(&well);
        assert_eq!(report.missing_fraction[Channel::Wob.index()], 1.0);
        assert_eq!(report.missing_fraction[Channel::Rop.index()], 0.0);
    }
}
