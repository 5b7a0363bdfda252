//! Synthetic well generator: a desk-scale stand-in for a real field.
//!
//! Wells are alternating sand/shale layers with lognormal thicknesses,
//! scaled so the expected shale share hits a target fraction. Each MWD
//! channel draws around a per-lithotype mean with white noise, plus a
//! per-well offset that models the domain shift between wells: with the
//! default settings, cross-well shift exceeds within-well noise, so a
//! model trained on other wells faces a harder task than one trained on
//! the same well. Channel values ramp linearly across a short transition
//! zone at each layer boundary, which is what makes boundary samples
//! genuinely ambiguous. Missing cells are injected independently per
//! channel.
//!
//! Generation is deterministic per `(seed, well_index)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::well::{Dataset, Lithotype, WellSeries, CHANNELS, GRID_STEP_M};

/// Per-lithotype channel model: mean per channel plus a shared noise scale
/// per channel.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    /// Means for the eight MWD channels, indexed like [`CHANNELS`].
    pub sand_means: [f64; 8],
    pub shale_means: [f64; 8],
    /// Per-channel noise scale shared by both lithotypes.
    pub stds: [f64; 8],
}

impl Default for ChannelModel {
    fn default() -> Self {
        // wob, rpm, trq, flow_in, flow_out, spp, rop, hook_load
        ChannelModel {
            sand_means: [8.0, 120.0, 5.0, 2000.0, 1985.0, 150.0, 25.0, 90.0],
            shale_means: [10.5, 120.0, 6.8, 2000.0, 1970.0, 163.0, 14.0, 94.0],
            stds: [1.6, 6.0, 1.1, 40.0, 40.0, 8.0, 6.5, 3.0],
        }
    }
}

/// Generator settings. The defaults produce a field on which a cross-well
/// classifier is clearly better than chance but far from perfect, leaving
/// room for change-detection post-processing to matter.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_wells: usize,
    /// Well length in meters.
    pub well_length_m: f64,
    /// Target expected shale share of the depth axis.
    pub shale_fraction_target: f64,
    /// Lognormal (mu, sigma) of sand layer thickness in meters.
    pub sand_thickness: (f64, f64),
    /// Lognormal (mu, sigma) of shale layer thickness in meters, before the
    /// scaling that enforces the target shale fraction.
    pub shale_thickness: (f64, f64),
    pub channels: ChannelModel,
    /// Per-well channel offset scale, as a multiple of each channel std.
    pub well_offset_std: f64,
    /// Within-well noise scale, as a multiple of each channel std.
    pub noise_std: f64,
    /// Linear ramp length at each layer boundary, meters.
    pub transition_m: f64,
    /// Density mean per lithotype (sand, shale) and its noise std, g/cc.
    pub density_means: (f64, f64),
    pub density_std: f64,
    /// Attach the density column at all.
    pub with_density: bool,
    /// Independent missing-cell probability per channel.
    pub missing_rate: f64,
    /// Per-layer contrast factor range. Each shale layer draws a factor
    /// from this range and interpolates its channel means *and* density
    /// between the sand and shale models, tying how visible a layer is in
    /// MWD to how visible it is in density. `(1.0, 1.0)` disables it.
    pub layer_contrast_range: (f64, f64),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_wells: 20,
            well_length_m: 800.0,
            shale_fraction_target: 0.165,
            sand_thickness: (2.816, 0.6),
            shale_thickness: (1.194, 0.6),
            channels: ChannelModel::default(),
            well_offset_std: 1.3,
            noise_std: 1.0,
            transition_m: 0.7,
            density_means: (2.25, 2.55),
            density_std: 0.03,
            with_density: true,
            missing_rate: 0.02,
            layer_contrast_range: (1.0, 1.0),
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_wells < 1 {
            return Err(Error::Config("n_wells must be at least 1".into()));
        }
        if self.well_length_m < 1.0 {
            return Err(Error::Config("well must be at least one meter long".into()));
        }
        if !(0.0..1.0).contains(&self.shale_fraction_target) || self.shale_fraction_target <= 0.0 {
            return Err(Error::Config("shale fraction target must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.missing_rate) {
            return Err(Error::Config("missing_rate must lie in [0, 1]".into()));
        }
        if self.sand_thickness.1 <= 0.0 || self.shale_thickness.1 <= 0.0 {
            return Err(Error::Config("thickness sigma must be positive".into()));
        }
        let (lo, hi) = self.layer_contrast_range;
        if lo > hi || lo < 0.0 {
            return Err(Error::Config("bad layer contrast range".into()));
        }
        Ok(())
    }

    /// Multiplier applied to shale thickness draws so the expected shale
    /// share equals the target.
    fn shale_scale(&self) -> f64 {
        let mean = |(mu, sigma): (f64, f64)| (mu + sigma * sigma / 2.0).exp();
        let e_sand = mean(self.sand_thickness);
        let e_shale = mean(self.shale_thickness);
        let f = self.shale_fraction_target;
        f * e_sand / ((1.0 - f) * e_shale)
    }
}

fn well_rng(seed: u64, well_index: usize) -> ChaCha12Rng {
    // distinct, stable stream per well
    ChaCha12Rng::seed_from_u64(seed ^ (well_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct Layer {
    label: Lithotype,
    len: usize,
    /// 0 = indistinguishable from sand, 1 = full shale contrast.
    contrast: f64,
}

fn draw_layers(cfg: &SynthConfig, rng: &mut ChaCha12Rng, n_samples: usize) -> Vec<Layer> {
    let sand = LogNormal::new(cfg.sand_thickness.0, cfg.sand_thickness.1).expect("valid sigma");
    let shale =
        LogNormal::new(cfg.shale_thickness.0, cfg.shale_thickness.1).expect("valid sigma");
    let scale = cfg.shale_scale();
    let (c_lo, c_hi) = cfg.layer_contrast_range;

    let mut layers = Vec::new();
    let mut total = 0usize;
    let mut label = Lithotype::Sand;
    while total < n_samples {
        let thickness_m = match label {
            Lithotype::Sand => sand.sample(rng),
            Lithotype::Shale => shale.sample(rng) * scale,
        };
        let len = ((thickness_m / GRID_STEP_M).round() as usize).max(1);
        let len = len.min(n_samples - total);
        let contrast = match label {
            Lithotype::Sand => 1.0,
            Lithotype::Shale => {
                if c_lo == c_hi {
                    c_hi
                } else {
                    rng.gen_range(c_lo..c_hi)
                }
            }
        };
        layers.push(Layer {
            label,
            len,
            contrast,
        });
        total += len;
        label = label.opposite();
    }
    layers
}

/// Generates one well deterministically from `(cfg.seed, well_index)`.
pub fn generate_well<F: Real>(cfg: &SynthConfig, well_index: usize) -> Result<WellSeries<F>> {
    cfg.validate()?;
    let mut rng = well_rng(cfg.seed, well_index);
    let n = (cfg.well_length_m / GRID_STEP_M).round() as usize;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    // per-well channel offsets: the domain shift between wells
    let offsets: Vec<f64> = cfg
        .channels
        .stds
        .iter()
        .map(|s| unit.sample(&mut rng) * s * cfg.well_offset_std)
        .collect();

    let layers = draw_layers(cfg, &mut rng, n);

    // per-sample lithotype and effective contrast (sand contributes 0)
    let mut labels = Vec::with_capacity(n);
    let mut mix = Vec::with_capacity(n); // 0 = pure sand signature, 1 = pure shale
    for layer in &layers {
        let level = match layer.label {
            Lithotype::Sand => 0.0,
            Lithotype::Shale => layer.contrast,
        };
        for _ in 0..layer.len {
            labels.push(layer.label);
            mix.push(level);
        }
    }

    // linear ramp across boundaries
    let ramp = (cfg.transition_m / GRID_STEP_M).round() as usize;
    let smoothed: Vec<f64> = if ramp < 2 {
        mix.clone()
    } else {
        let half = (ramp / 2) as isize;
        (0..n as isize)
            .map(|t| {
                let mut acc = 0.0;
                let mut cnt = 0usize;
                for k in (t - half)..=(t + half) {
                    let k = k.clamp(0, n as isize - 1) as usize;
                    acc += mix[k];
                    cnt += 1;
                }
                acc / cnt as f64
            })
            .collect()
    };

    let mut channels: Vec<Vec<Option<F>>> = vec![Vec::with_capacity(n); CHANNELS.len()];
    let mut density: Vec<Option<F>> = Vec::with_capacity(n);
    for t in 0..n {
        let m = smoothed[t];
        for (c, col) in channels.iter_mut().enumerate() {
            let base = cfg.channels.sand_means[c]
                + m * (cfg.channels.shale_means[c] - cfg.channels.sand_means[c]);
            let noise = unit.sample(&mut rng) * cfg.channels.stds[c] * cfg.noise_std;
            let value = base + offsets[c] + noise;
            let missing = cfg.missing_rate > 0.0 && rng.gen_bool(cfg.missing_rate);
            col.push(if missing {
                None
            } else {
                Some(F::from_f64_lossy(value))
            });
        }
        let d = cfg.density_means.0 + m * (cfg.density_means.1 - cfg.density_means.0)
            + unit.sample(&mut rng) * cfg.density_std;
        density.push(Some(F::from_f64_lossy(d)));
    }

    WellSeries::new(
        format!("synth-{well_index:03}"),
        F::from_f64_lossy(1800.0),
        F::from_f64_lossy(GRID_STEP_M),
        channels,
        labels,
        cfg.with_density.then_some(density),
    )
}

/// Generates the whole field.
pub fn generate_field<F: Real>(cfg: &SynthConfig) -> Result<Dataset<F>> {
    cfg.validate()?;
    let wells = (0..cfg.n_wells)
        .map(|i| generate_well(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(wells)
}
