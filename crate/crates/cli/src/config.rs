//! Run settings merged from an optional TOML file and command-line flags;
//! flags always win.

use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;

/// How the decision threshold is chosen at training time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ThresholdMode {
    /// Use the fixed `--threshold` value.
    Fixed,
    /// Place the threshold at the mode of the positive class's
    /// predicted-probability density.
    DensityMode,
}

/// Fully resolved settings shared by the subcommands.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub stride: usize,
    pub train_fraction: Option<f64>,
    pub folds: usize,
    pub stratified: bool,
    pub threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub ridge: f64,
    pub grid_points: usize,
    pub ci_level: f64,
    pub threads: Option<usize>,
}

/// The subset of settings a config file may provide.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub stride: Option<usize>,
    pub train_fraction: Option<f64>,
    pub folds: Option<usize>,
    pub stratified: Option<bool>,
    pub threshold: Option<f64>,
    pub threshold_mode: Option<String>,
    pub ridge: Option<f64>,
    pub grid_points: Option<usize>,
    pub ci_level: Option<f64>,
    pub threads: Option<usize>,
    pub out_dir: Option<std::path::PathBuf>,
    pub log_level: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    pub fn threshold_mode(&self) -> anyhow::Result<Option<ThresholdMode>> {
        match self.threshold_mode.as_deref() {
            None => Ok(None),
            Some("fixed") => Ok(Some(ThresholdMode::Fixed)),
            Some("density-mode") => Ok(Some(ThresholdMode::DensityMode)),
            Some(other) => bail!("threshold_mode must be `fixed` or `density-mode`, got `{other}`"),
        }
    }
}

/// Flag values (all optional) merged over file values and defaults.
#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Optional TOML config file; explicit flags override its values
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,

    /// Output directory for artifacts
    #[arg(long)]
    pub out_dir: Option<std::path::PathBuf>,

    /// Seed for every shuffle and split
    #[arg(long)]
    pub seed: Option<u64>,

    /// Keep every n-th pixel when flattening images (1 = all pixels)
    #[arg(long)]
    pub stride: Option<usize>,

    /// Train share in (0, 1); for `train`, omitting it fits on every row
    #[arg(long)]
    pub train_fraction: Option<f64>,

    /// Cross-validation fold count
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: Option<u64>,

    /// Stratify splits and folds by class
    #[arg(long)]
    pub stratified: Option<bool>,

    /// Fixed decision threshold in (0, 1)
    #[arg(long)]
    pub threshold: Option<f64>,

    /// How the trained model's threshold is chosen
    #[arg(long, value_enum)]
    pub threshold_mode: Option<ThresholdMode>,

    /// Ridge penalty on the feature weights (0 = plain maximum likelihood)
    #[arg(long)]
    pub ridge: Option<f64>,

    /// Grid resolution for densities and threshold search
    #[arg(long)]
    pub grid_points: Option<usize>,

    /// Confidence level for coefficient intervals
    #[arg(long)]
    pub ci_level: Option<f64>,

    /// Worker threads for extraction (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,

    /// Log verbosity: error, warn, info, debug, trace
    #[arg(long)]
    pub log_level: Option<String>,
}

impl CommonArgs {
    /// Resolve flags over the config file over built-in defaults.
    pub fn resolve(&self) -> anyhow::Result<(Settings, std::path::PathBuf, String)> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let settings = Settings {
            seed: self.seed.or(file.seed).unwrap_or(0),
            stride: self.stride.or(file.stride).unwrap_or(1),
            train_fraction: self.train_fraction.or(file.train_fraction),
            folds: self.folds.map(|f| f as usize).or(file.folds).unwrap_or(10),
            stratified: self.stratified.or(file.stratified).unwrap_or(true),
            threshold: self.threshold.or(file.threshold).unwrap_or(0.5),
            threshold_mode: self
                .threshold_mode
                .or(file.threshold_mode()?)
                .unwrap_or(ThresholdMode::Fixed),
            ridge: self.ridge.or(file.ridge).unwrap_or(0.0),
            grid_points: self.grid_points.or(file.grid_points).unwrap_or(512),
            ci_level: self.ci_level.or(file.ci_level).unwrap_or(0.95),
            threads: self.threads.or(file.threads),
        };
        if settings.stride == 0 {
            bail!("--stride must be at least 1");
        }
        if let Some(f) = settings.train_fraction {
            if !(f > 0.0 && f < 1.0) {
                bail!("--train-fraction must lie strictly inside (0, 1)");
            }
        }
        if !(settings.threshold > 0.0 && settings.threshold < 1.0) {
            bail!("--threshold must lie strictly inside (0, 1)");
        }
        if !(settings.ci_level > 0.0 && settings.ci_level < 1.0) {
            bail!("--ci-level must lie strictly inside (0, 1)");
        }
        if settings.folds < 2 {
            bail!("--folds must be at least 2");
        }
        if settings.grid_points < 2 {
            bail!("--grid-points must be at least 2");
        }
        let out_dir = self
            .out_dir
            .clone()
            .or(file.out_dir)
            .unwrap_or_else(|| std::path::PathBuf::from("."));
        let log_level = self
            .log_level
            .clone()
            .or(file.log_level)
            .unwrap_or_else(|| "info".to_owned());
        Ok((settings, out_dir, log_level))
    }
}
