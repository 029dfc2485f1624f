//! The `simulate` and `estimate-constants` commands.

use std::fs;
use std::io::Write;
use std::path::Path;

use mixbound::bounds::{self, estimate_jacobian_bmo_constant, estimate_riesz_bmo_constant};
use mixbound::{dynamics, scenarios, Grid};

use crate::config::{self, ConstantsConfig, RunConfig};
use crate::error::CliError;
use crate::report::{ConstantsReport, ConstantsRow, RunReport};
use crate::sink::RecordWriter;

/// Result of a completed simulation.
#[derive(Debug)]
pub struct SimulateOutcome {
    pub report: RunReport,
    pub report_path: std::path::PathBuf,
}

impl SimulateOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_hold {
            0
        } else {
            1
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Records(e.to_string()))?;
    bytes.push(b'\n');
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&bytes).map_err(io_err(path))
}

pub fn simulate(config_path: &Path) -> Result<SimulateOutcome, CliError> {
    let loaded = config::load::<RunConfig>(config_path)?;
    let cfg = &loaded.config;
    let grid = cfg.scenario.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let bmo = cfg.bmo.resolve(&grid)?;
    let ctl = cfg.step_control()?;

    let dir = loaded.resolve(&cfg.outputs.dir);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut sink = RecordWriter::create(&dir.join(&cfg.outputs.records), &dir.join(&cfg.outputs.csv))?;

    let (state0, build) = scenarios::build_with_info(&cfg.scenario)?;
    let last = dynamics::run(
        &state0,
        &ctl,
        cfg.scenario.t_end,
        cfg.scenario.sample_every,
        &bmo,
        &mut sink,
    )?;
    let records = sink.finish().map_err(io_err(&dir))?;

    let checks = cfg
        .checks
        .iter()
        .map(|&k| bounds::check(&records, k))
        .collect::<Result<Vec<_>, _>>()?;
    let all_hold = checks.iter().all(|c| c.holds);
    let report = RunReport {
        scenario: cfg.scenario.name.clone(),
        n: grid.n(),
        final_time: last.t,
        samples: records.len(),
        under_resolved: bounds::any_under_resolved(&records),
        max_resolved_fraction: records.iter().map(|r| r.resolved_fraction).fold(0.0, f64::max),
        build,
        checks,
        all_hold,
    };
    let report_path = dir.join(&cfg.outputs.report);
    write_json(&report_path, &report)?;
    Ok(SimulateOutcome { report, report_path })
}

pub fn estimate_constants(config_path: &Path) -> Result<ConstantsReport, CliError> {
    let loaded = config::load::<ConstantsConfig>(config_path)?;
    let cfg = &loaded.config;
    if cfg.resolutions.is_empty() {
        return Err(CliError::Config("resolutions must not be empty".into()));
    }
    let grids = cfg
        .resolutions
        .iter()
        .map(|&n| Grid::new(n).map_err(|e| CliError::Config(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let configs = grids
        .iter()
        .map(|g| cfg.bmo.resolve(g))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(grids.len());
    for (grid, bmo) in grids.iter().zip(&configs) {
        let jacobian_bmo = estimate_jacobian_bmo_constant(&cfg.ensemble, grid, bmo).map_err(config_or_solver)?;
        let riesz_bmo = estimate_riesz_bmo_constant(&cfg.ensemble, grid, bmo).map_err(config_or_solver)?;
        rows.push(ConstantsRow {
            n: grid.n(),
            jacobian_bmo,
            riesz_bmo,
        });
    }
    let report = ConstantsReport {
        ensemble: cfg.ensemble.clone(),
        center_stride: configs[0].center_stride,
        resolutions: rows,
    };
    let out = loaded.resolve(&cfg.output);
    if let Some(parent) = out.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    write_json(&out, &report)?;
    Ok(report)
}

fn config_or_solver(e: mixbound::Error) -> CliError {
    match e {
        mixbound::Error::InvalidEnsemble(m) => CliError::Config(m),
        other => CliError::Solver(other),
    }
}
