//! JSON reports written by the commands.

use mixbound::scenarios::BuildInfo;
use mixbound::{BoundReport, ConstantEstimate};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub n: usize,
    pub final_time: f64,
    pub samples: usize,
    /// Set when any sample exceeded the spectral-tail threshold.
    pub under_resolved: bool,
    pub max_resolved_fraction: f64,
    pub build: BuildInfo,
    pub checks: Vec<BoundReport>,
    pub all_hold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub n: usize,
    pub jacobian_bmo: ConstantEstimate,
    pub riesz_bmo: ConstantEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub ensemble: mixbound::EnsembleSpec,
    pub center_stride: usize,
    pub resolutions: Vec<ConstantsRow>,
}
