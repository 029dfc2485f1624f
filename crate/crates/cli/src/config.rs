//! JSON configuration files for the `simulate` and `estimate-constants` commands.

use std::fs;
use std::path::{Path, PathBuf};

use mixbound::bounds::BoundKind;
use mixbound::{BmoConfig, EnsembleSpec, Grid, ScenarioSpec, StepControl};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Optional overrides of the default BMO sweep.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmoSettings {
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub center_stride: Option<usize>,
}

impl BmoSettings {
    pub fn resolve(&self, grid: &Grid) -> Result<BmoConfig, CliError> {
        let stride = self.center_stride.unwrap_or(BmoConfig::DEFAULT_STRIDE);
        let cfg = match &self.radii {
            Some(r) => BmoConfig {
                radii: r.clone(),
                center_stride: stride,
            },
            None => BmoConfig::doubling_with_stride(grid, stride),
        };
        cfg.validate(grid).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSettings {
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
}

fn default_dt_max() -> f64 {
    StepControl::default().dt_max
}

fn default_dt_min() -> f64 {
    StepControl::default().dt_min
}

impl Default for StepSettings {
    fn default() -> Self {
        StepSettings {
            dt_max: default_dt_max(),
            dt_min: default_dt_min(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output directory; relative paths are taken from the config file's directory.
    pub dir: PathBuf,
    #[serde(default = "default_records")]
    pub records: String,
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_report")]
    pub report: String,
}

fn default_records() -> String {
    "records.ndjson".into()
}

fn default_csv() -> String {
    "records.csv".into()
}

fn default_report() -> String {
    "report.json".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub bmo: BmoSettings,
    #[serde(default)]
    pub step: StepSettings,
    pub outputs: OutputSpec,
    #[serde(default = "all_checks")]
    pub checks: Vec<BoundKind>,
}

fn all_checks() -> Vec<BoundKind> {
    BoundKind::ALL.to_vec()
}

impl RunConfig {
    pub fn step_control(&self) -> Result<StepControl, CliError> {
        StepControl::new(self.scenario.cfl, self.step.dt_max, self.step.dt_min)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub bmo: BmoSettings,
    /// Output file; relative paths are taken from the config file's directory.
    pub output: PathBuf,
}

fn default_resolutions() -> Vec<usize> {
    vec![64, 128, 256]
}

/// Parsed config together with the directory relative paths resolve against.
pub struct Loaded<T> {
    pub config: T,
    pub base: PathBuf,
}

impl<T> Loaded<T> {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Loaded<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let config = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, base })
}
