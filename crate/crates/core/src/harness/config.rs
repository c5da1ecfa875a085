//! Experiment configuration, read from TOML. Every section is optional and
//! falls back to the defaults below.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trainer::TrainConfig;

/// Epoch budgets: the configured count, or a named preset that overrides it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpochPreset {
    /// Use `train.epochs` as given.
    #[default]
    #[serde(rename = "explicit")]
    Explicit,
    /// 20000 epochs.
    #[serde(rename = "appendix-A1")]
    AppendixA1,
    /// `η × epochs = 10000`.
    #[serde(rename = "appendix-A2")]
    AppendixA2,
}

impl EpochPreset {
    /// Epoch count for step size `eta`; `explicit` returns `configured`.
    pub fn epochs(self, eta: f64, configured: usize) -> usize {
        match self {
            Self::Explicit => configured,
            Self::AppendixA1 => 20_000,
            Self::AppendixA2 => (10_000.0 / eta).round() as usize,
        }
    }
}

/// `train` with its epoch count set by `preset`.
pub fn with_preset(train: &TrainConfig, preset: EpochPreset) -> TrainConfig {
    let mut out = train.clone();
    out.epochs = preset.epochs(train.eta, train.epochs);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MseMode {
    InSampleVsF0,
    HoldoutVsF0,
    Both,
}

impl MseMode {
    pub fn in_sample(self) -> bool {
        matches!(self, Self::InSampleVsF0 | Self::Both)
    }

    pub fn holdout(self) -> bool {
        matches!(self, Self::HoldoutVsF0 | Self::Both)
    }
}

/// One training run on a fresh regression dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: usize,
    pub n: usize,
    /// Network width; defaults to `4n`.
    pub width: Option<usize>,
    pub sigma: f64,
    pub train: TrainConfig,
    pub preset: EpochPreset,
    pub holdout_size: usize,
    pub mse_mode: MseMode,
    /// Measure `λ_max` at the final point.
    pub record_sharpness: bool,
    pub sparse_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 5,
            n: 128,
            width: None,
            sigma: 1.0,
            train: TrainConfig::default(),
            preset: EpochPreset::Explicit,
            holdout_size: 10_000,
            mse_mode: MseMode::Both,
            record_sharpness: true,
            sparse_threshold: crate::shattering::DEFAULT_SPARSE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub sample_sizes: Vec<usize>,
    pub seeds_per_cell: usize,
    pub sigma: f64,
    /// Width is `width_multiplier × n`.
    pub width_multiplier: usize,
    pub train: TrainConfig,
    pub preset: EpochPreset,
    pub mse_mode: MseMode,
    pub holdout_size: usize,
    pub record_sharpness: bool,
    pub sparse_threshold: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3, 4, 5],
            sample_sizes: vec![32, 64, 128, 256, 512],
            seeds_per_cell: 5,
            sigma: 1.0,
            width_multiplier: 4,
            train: TrainConfig {
                eta: 0.2,
                ..TrainConfig::default()
            },
            preset: EpochPreset::AppendixA1,
            mse_mode: MseMode::Both,
            holdout_size: 10_000,
            record_sharpness: false,
            sparse_threshold: crate::shattering::DEFAULT_SPARSE_THRESHOLD,
        }
    }
}

/// The large-step versus weight-decay comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShatterConfig {
    pub d: usize,
    pub n: usize,
    pub width: usize,
    pub sigma: f64,
    pub large_step: TrainConfig,
    pub large_step_preset: EpochPreset,
    pub weight_decay: TrainConfig,
    pub weight_decay_preset: EpochPreset,
    pub holdout_size: usize,
    pub sparse_threshold: f64,
}

impl Default for ShatterConfig {
    fn default() -> Self {
        Self {
            d: 10,
            n: 512,
            width: 2048,
            sigma: 1.0,
            large_step: TrainConfig {
                eta: 0.9,
                sharpness_every: 500,
                ..TrainConfig::default()
            },
            large_step_preset: EpochPreset::AppendixA2,
            weight_decay: TrainConfig {
                eta: 0.01,
                weight_decay: 0.1,
                ..TrainConfig::default()
            },
            weight_decay_preset: EpochPreset::AppendixA1,
            holdout_size: 10_000,
            sparse_threshold: crate::shattering::DEFAULT_SPARSE_THRESHOLD,
        }
    }
}

/// Sharpness, stability and certificate at a trained (or loaded) network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessConfig {
    pub run: RunConfig,
    /// Evaluate this checkpoint instead of training; the dataset is still
    /// generated from `run` and the seed.
    pub checkpoint: Option<PathBuf>,
    pub rel_tol: f64,
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        Self {
            run: RunConfig {
                d: 2,
                n: 64,
                ..RunConfig::default()
            },
            checkpoint: None,
            rel_tol: 1e-8,
        }
    }
}

/// Path norms of a trained (or loaded) network under every weight variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VgNormConfig {
    pub run: RunConfig,
    pub checkpoint: Option<PathBuf>,
    pub radius: f64,
}

impl Default for VgNormConfig {
    fn default() -> Self {
        Self {
            run: RunConfig {
                d: 2,
                n: 64,
                record_sharpness: false,
                ..RunConfig::default()
            },
            checkpoint: None,
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardFnConfig {
    pub d: usize,
    pub eps: f64,
    pub amplitude: f64,
    pub mc_samples: usize,
    /// Sample size and trial count of the indistinguishability check.
    pub n: usize,
    pub trials: usize,
    pub sigma: f64,
}

impl Default for HardFnConfig {
    fn default() -> Self {
        Self {
            d: 3,
            eps: 0.2,
            amplitude: 1.0,
            mc_samples: 1_000_000,
            n: 50,
            trials: 10_000,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    pub dims: Vec<u64>,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self { dims: (1..=10).collect() }
    }
}

/// Whole configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub train: RunConfig,
    pub sweep: SweepConfig,
    pub shatter: ShatterConfig,
    pub sharpness: SharpnessConfig,
    pub vgnorm: VgNormConfig,
    pub hardfn: HardFnConfig,
    pub rates: RatesConfig,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn check_train(train: &TrainConfig, what: &str) -> Result<()> {
    train.validate().map_err(|e| bad(format!("{what}: {e}")))
}

impl RunConfig {
    pub fn width(&self) -> usize {
        self.width.unwrap_or(4 * self.n)
    }

    pub fn effective_train(&self) -> TrainConfig {
        with_preset(&self.train, self.preset)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 || self.width() == 0 {
            return Err(bad("run needs d, n and width >= 1"));
        }
        if !(self.sigma >= 0.0) {
            return Err(bad("sigma must be non-negative"));
        }
        if self.mse_mode.holdout() && self.holdout_size == 0 {
            return Err(bad("holdout MSE needs holdout_size >= 1"));
        }
        if !(0.0..=1.0).contains(&self.sparse_threshold) {
            return Err(bad("sparse_threshold must lie in [0, 1]"));
        }
        check_train(&self.train, "train")
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.sample_sizes.is_empty() {
            return Err(bad("sweep needs non-empty dims and sample_sizes"));
        }
        if self.dims.contains(&0) || self.sample_sizes.contains(&0) {
            return Err(bad("dims and sample sizes must be positive"));
        }
        if self.seeds_per_cell == 0 || self.width_multiplier == 0 {
            return Err(bad("seeds_per_cell and width_multiplier must be positive"));
        }
        if !(self.sigma >= 0.0) {
            return Err(bad("sigma must be non-negative"));
        }
        if self.mse_mode.holdout() && self.holdout_size == 0 {
            return Err(bad("holdout MSE needs holdout_size >= 1"));
        }
        check_train(&self.train, "sweep.train")
    }

    /// Settings of one cell.
    pub fn cell(&self, d: usize, n: usize) -> RunConfig {
        RunConfig {
            d,
            n,
            width: Some(self.width_multiplier * n),
            sigma: self.sigma,
            train: self.train.clone(),
            preset: self.preset,
            holdout_size: self.holdout_size,
            mse_mode: self.mse_mode,
            record_sharpness: self.record_sharpness,
            sparse_threshold: self.sparse_threshold,
        }
    }
}

impl ShatterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 || self.width == 0 {
            return Err(bad("shatter needs d, n and width >= 1"));
        }
        if !(self.sigma >= 0.0) {
            return Err(bad("sigma must be non-negative"));
        }
        check_train(&self.large_step, "shatter.large_step")?;
        check_train(&self.weight_decay, "shatter.weight_decay")
    }

    /// The two runs as `(label, settings)`.
    pub fn runs(&self) -> [(&'static str, RunConfig); 2] {
        let base = |train: &TrainConfig, preset| RunConfig {
            d: self.d,
            n: self.n,
            width: Some(self.width),
            sigma: self.sigma,
            train: train.clone(),
            preset,
            holdout_size: self.holdout_size,
            mse_mode: MseMode::Both,
            record_sharpness: true,
            sparse_threshold: self.sparse_threshold,
        };
        [
            ("large_step", base(&self.large_step, self.large_step_preset)),
            ("weight_decay", base(&self.weight_decay, self.weight_decay_preset)),
        ]
    }
}

impl HardFnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(bad("hard families need d >= 2"));
        }
        if !(self.eps > 0.0 && self.eps <= 0.5) {
            return Err(bad("eps must lie in (0, 1/2]"));
        }
        if !(self.amplitude > 0.0) || !(self.sigma > 0.0) {
            return Err(bad("amplitude and sigma must be positive"));
        }
        if self.mc_samples < 2 || self.trials == 0 {
            return Err(bad("need at least 2 Monte Carlo samples and 1 trial"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        assert_eq!(EpochPreset::Explicit.epochs(0.5, 7), 7);
        assert_eq!(EpochPreset::AppendixA1.epochs(0.5, 7), 20_000);
        assert_eq!(EpochPreset::AppendixA2.epochs(0.2, 7), 50_000);
        assert_eq!(EpochPreset::AppendixA2.epochs(0.9, 7), 11_111);
    }

    #[test]
    fn parses_partial_files() {
        let cfg = FileConfig::from_toml(
            r#"
seed = 7
[sweep]
dims = [1, 5]
preset = "appendix-A2"
mse_mode = "in_sample_vs_f0"
[sweep.train]
eta = 0.5
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.sweep.dims, vec![1, 5]);
        assert_eq!(cfg.sweep.preset, EpochPreset::AppendixA2);
        assert_eq!(cfg.sweep.train.eta, 0.5);
        assert_eq!(cfg.sweep.train.clip_threshold, 50.0);
        assert_eq!(cfg.sweep.cell(5, 64).effective_train().epochs, 20_000);
        assert_eq!(cfg.shatter, ShatterConfig::default());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(FileConfig::from_toml("bogus = 1"), Err(Error::Config(_))));
        assert!(FileConfig::from_toml("[sweep]\nmse_mode = \"sometimes\"").is_err());
        let mut sweep = SweepConfig::default();
        sweep.dims.clear();
        assert!(sweep.validate().is_err());
        let mut run = RunConfig::default();
        run.train.eta = -1.0;
        assert!(run.validate().is_err());
    }
}
