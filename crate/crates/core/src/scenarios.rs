//! Named initial conditions and experiment presets.
//!
//! Random fields are drawn per integer wavevector in an order that does not
//! depend on the grid, so the same seed yields the same continuous field at
//! every resolution that can represent it.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::FlowState;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::norms::sobolev_norm;
use crate::spectral::SpectralField;

const STREAM_OMEGA: u64 = 1;
const STREAM_THETA: u64 = 2;
const STREAM_PERTURBATION: u64 = 3;

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

fn default_band() -> [f64; 2] {
    [1.0, 4.0]
}

/// Vorticity initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum VorticityIc {
    Rest,
    /// `ω = A cos(2π m y)`.
    Shear {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
    },
    /// `ψ = A sin(2π m x) sin(2π m y)`, optionally plus a random band
    /// perturbation whose L² norm is `perturbation · |ω_TG|_{L²}`.
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
        #[serde(default)]
        perturbation: f64,
        #[serde(default = "default_band")]
        perturbation_band: [f64; 2],
    },
    /// Random phases on `k_min ≤ |k| ≤ k_max`, amplitudes `∝ |k|^{-slope}`,
    /// scaled to enstrophy `½|ω|²_{L²} = enstrophy`.
    RandomBand {
        k_min: f64,
        k_max: f64,
        enstrophy: f64,
        #[serde(default)]
        slope: f64,
    },
}

/// Passive scalar initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarIc {
    /// `θ = A cos(2π (kx x + ky y))`.
    SingleMode {
        #[serde(default = "one")]
        amplitude: f64,
        kx: i64,
        ky: i64,
    },
    /// `θ = A cos(2π m x) cos(2π m y)`.
    Checkerboard {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one_u32")]
        mode: u32,
    },
    /// Random phases on a shell, scaled to `|θ|_{L²} = l2`.
    RandomBand {
        k_min: f64,
        k_max: f64,
        #[serde(default = "one")]
        l2: f64,
        #[serde(default)]
        slope: f64,
    },
    /// Periodised Gaussian `A exp(−|x − c|²/(2σ²))`, truncated to the band
    /// limit and mean-removed.
    GaussianBlob {
        #[serde(default = "one")]
        amplitude: f64,
        center: [f64; 2],
        sigma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub omega0: VorticityIc,
    pub theta0: ScalarIc,
    pub n: usize,
    pub t_end: f64,
    pub cfl: f64,
    pub sample_every: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Quantities reported alongside a built state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub linf_omega0: f64,
    /// Relative L² norm of the Gaussian blob modes discarded by truncation.
    pub truncation_error: Option<f64>,
    pub max_wavenumber: i64,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Random-phase field on the shell `k_min ≤ |k| ≤ k_max`, amplitudes
/// `|k|^{-slope}`, normalised to unit L² norm.
pub fn random_band_field(grid: &Grid, k_min: f64, k_max: f64, slope: f64, seed: u64) -> SpectralField {
    random_band_field_stream(grid, k_min, k_max, slope, seed, 0)
}

/// [`random_band_field`] on an independent RNG stream.
pub fn random_band_field_stream(
    grid: &Grid,
    k_min: f64,
    k_max: f64,
    slope: f64,
    seed: u64,
    stream: u64,
) -> SpectralField {
    let mut r = rng(seed, stream);
    let reach = k_max.floor() as i64;
    let lo2 = k_min * k_min - 1e-9;
    let hi2 = k_max * k_max + 1e-9;
    let mut modes = Vec::new();
    for kx in -reach..=reach {
        for ky in 0..=reach {
            if ky == 0 && kx <= 0 {
                continue;
            }
            let k2 = (kx * kx + ky * ky) as f64;
            if k2 < lo2 || k2 > hi2 {
                continue;
            }
            let phase: f64 = r.random_range(0.0..TAU);
            let amp = k2.sqrt().powf(-slope);
            modes.push((kx, ky, Complex64::from_polar(amp, phase)));
        }
    }
    let field = SpectralField::from_modes(grid, &modes);
    let norm = sobolev_norm(&field, 0.0);
    if norm > 0.0 {
        field.scaled(1.0 / norm)
    } else {
        field
    }
}

fn band_limit(n: usize) -> i64 {
    (n / 4) as i64
}

fn check_band(name: &str, kmax: i64, n: usize) -> Result<()> {
    if kmax > band_limit(n) {
        return Err(Error::InvalidScenario(format!(
            "{name}: wavenumber {kmax} exceeds band limit n/4 = {} at n = {n}",
            band_limit(n)
        )));
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidScenario(format!("{name} must be finite")));
    }
    Ok(())
}

impl VorticityIc {
    fn build(&self, grid: &Grid, seed: u64) -> Result<(SpectralField, i64)> {
        let n = grid.n();
        match *self {
            VorticityIc::Rest => Ok((SpectralField::zeros(grid), 0)),
            VorticityIc::Shear { amplitude, mode } => {
                finite("shear amplitude", amplitude)?;
                let m = mode as i64;
                check_band("shear", m, n)?;
                let f = SpectralField::from_modes(grid, &[(0, m, Complex64::new(0.5 * amplitude, 0.0))]);
                Ok((f, m))
            }
            VorticityIc::TaylorGreen {
                amplitude,
                mode,
                perturbation,
                perturbation_band,
            } => {
                finite("taylor_green amplitude", amplitude)?;
                finite("taylor_green perturbation", perturbation)?;
                let m = mode as i64;
                check_band("taylor_green", m, n)?;
                // sin(2πmx) sin(2πmy) = −¼ Σ± ± e^{2πi m(±x ± y)}
                let c = Complex64::new(-0.25 * amplitude, 0.0);
                let psi = SpectralField::from_modes(grid, &[(m, m, c), (m, -m, -c)]);
                let mut omega = psi.laplacian();
                let mut kmax = m;
                if perturbation != 0.0 {
                    let [k1, k2] = perturbation_band;
                    if !(k1 >= 1.0 && k2 >= k1) {
                        return Err(Error::InvalidScenario(format!(
                            "perturbation band [{k1}, {k2}] must satisfy 1 <= k_min <= k_max"
                        )));
                    }
                    check_band("taylor_green perturbation", k2.floor() as i64, n)?;
                    kmax = kmax.max(k2.floor() as i64);
                    let noise = random_band_field_stream(grid, k1, k2, 0.0, seed, STREAM_PERTURBATION);
                    omega.axpy(perturbation * sobolev_norm(&omega, 0.0), &noise)?;
                }
                Ok((omega, kmax))
            }
            VorticityIc::RandomBand {
                k_min,
                k_max,
                enstrophy,
                slope,
            } => {
                random_band_args("random_band", k_min, k_max, slope)?;
                if !(enstrophy >= 0.0 && enstrophy.is_finite()) {
                    return Err(Error::InvalidScenario("enstrophy must be non-negative".into()));
                }
                check_band("random_band", k_max.floor() as i64, n)?;
                let f = random_band_field_stream(grid, k_min, k_max, slope, seed, STREAM_OMEGA);
                Ok((f.scaled((2.0 * enstrophy).sqrt()), k_max.floor() as i64))
            }
        }
    }
}

fn random_band_args(name: &str, k_min: f64, k_max: f64, slope: f64) -> Result<()> {
    if !(k_min >= 1.0 && k_max >= k_min && slope.is_finite()) {
        return Err(Error::InvalidScenario(format!(
            "{name}: need 1 <= k_min <= k_max and finite slope"
        )));
    }
    Ok(())
}

/// `Σ_{|k| ≤ reach} exp(−4π²σ²k²)` over integers.
fn gaussian_shell_sum(sigma: f64, reach: i64) -> f64 {
    let a = 4.0 * PI * PI * sigma * sigma;
    let mut s = 1.0;
    for k in 1..=reach {
        let term = (-a * (k * k) as f64).exp();
        s += 2.0 * term;
        if term < 1e-300 {
            break;
        }
    }
    s
}

impl ScalarIc {
    fn build(&self, grid: &Grid, seed: u64) -> Result<(SpectralField, i64, Option<f64>)> {
        let n = grid.n();
        match *self {
            ScalarIc::SingleMode { amplitude, kx, ky } => {
                finite("single_mode amplitude", amplitude)?;
                if kx == 0 && ky == 0 {
                    return Err(Error::InvalidScenario("single_mode needs a nonzero wavevector".into()));
                }
                let kmax = kx.abs().max(ky.abs());
                check_band("single_mode", kmax, n)?;
                let f = SpectralField::from_modes(grid, &[(kx, ky, Complex64::new(0.5 * amplitude, 0.0))]);
                Ok((f, kmax, None))
            }
            ScalarIc::Checkerboard { amplitude, mode } => {
                finite("checkerboard amplitude", amplitude)?;
                let m = mode as i64;
                check_band("checkerboard", m, n)?;
                let c = Complex64::new(0.25 * amplitude, 0.0);
                Ok((SpectralField::from_modes(grid, &[(m, m, c), (m, -m, c)]), m, None))
            }
            ScalarIc::RandomBand { k_min, k_max, l2, slope } => {
                random_band_args("scalar random_band", k_min, k_max, slope)?;
                finite("scalar l2", l2)?;
                check_band("scalar random_band", k_max.floor() as i64, n)?;
                let f = random_band_field_stream(grid, k_min, k_max, slope, seed, STREAM_THETA);
                Ok((f.scaled(l2), k_max.floor() as i64, None))
            }
            ScalarIc::GaussianBlob {
                amplitude,
                center,
                sigma,
            } => {
                finite("blob amplitude", amplitude)?;
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidScenario("blob sigma must be positive".into()));
                }
                let reach = band_limit(n);
                let scale = amplitude * TAU * sigma * sigma;
                let decay = 2.0 * PI * PI * sigma * sigma;
                let mut modes = Vec::new();
                for kx in -reach..=reach {
                    for ky in 0..=reach {
                        if ky == 0 && kx <= 0 {
                            continue;
                        }
                        let k2 = (kx * kx + ky * ky) as f64;
                        let phase = -TAU * (kx as f64 * center[0] + ky as f64 * center[1]);
                        modes.push((kx, ky, Complex64::from_polar(scale * (-decay * k2).exp(), phase)));
                    }
                }
                let kept = gaussian_shell_sum(sigma, reach).powi(2) - 1.0;
                let total = gaussian_shell_sum(sigma, 1_000_000).powi(2) - 1.0;
                let err = if total > 0.0 {
                    ((total - kept).max(0.0) / total).sqrt()
                } else {
                    0.0
                };
                Ok((SpectralField::from_modes(grid, &modes), reach, Some(err)))
            }
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<Grid> {
        let grid = Grid::new(self.n)?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidScenario(format!("t_end = {} must be >= 0", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidScenario(format!("cfl = {} not in (0, 1]", self.cfl)));
        }
        if !(self.sample_every > 0.0 && self.sample_every.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "sample_every = {} must be positive",
                self.sample_every
            )));
        }
        Ok(grid)
    }

    /// Named presets used by the shipped configs and the acceptance suite.
    pub fn preset(name: &str, n: usize) -> Result<ScenarioSpec> {
        let (omega0, theta0, t_end) = match name {
            "rest" => (VorticityIc::Rest, ScalarIc::SingleMode { amplitude: 1.0, kx: 1, ky: 0 }, 1.0),
            "shear" => (
                VorticityIc::Shear { amplitude: 1.0, mode: 1 },
                ScalarIc::SingleMode { amplitude: 1.0, kx: 1, ky: 0 },
                5.0,
            ),
            "taylor_green" => (
                VorticityIc::TaylorGreen {
                    amplitude: 1.0 / (8.0 * PI * PI),
                    mode: 1,
                    perturbation: 0.0,
                    perturbation_band: default_band(),
                },
                ScalarIc::SingleMode { amplitude: 1.0, kx: 1, ky: 0 },
                2.0,
            ),
            "taylor_green_perturbed" => (
                VorticityIc::TaylorGreen {
                    amplitude: 1.0 / (2.0 * PI * PI),
                    mode: 1,
                    perturbation: 0.1,
                    perturbation_band: [1.0, 4.0],
                },
                ScalarIc::SingleMode { amplitude: 1.0, kx: 1, ky: 0 },
                2.0,
            ),
            "random" => (
                VorticityIc::RandomBand {
                    k_min: 2.0,
                    k_max: 5.0,
                    enstrophy: 2.0,
                    slope: 0.0,
                },
                ScalarIc::RandomBand {
                    k_min: 1.0,
                    k_max: 3.0,
                    l2: 1.0,
                    slope: 0.0,
                },
                2.0,
            ),
            other => return Err(Error::InvalidScenario(format!("unknown scenario preset `{other}`"))),
        };
        Ok(ScenarioSpec {
            name: name.to_string(),
            omega0,
            theta0,
            n,
            t_end,
            cfl: 0.4,
            sample_every: 0.02,
            seed: 1,
        })
    }
}

/// Builds the initial state; deterministic in `(spec, seed)`.
pub fn build(spec: &ScenarioSpec) -> Result<FlowState> {
    build_with_info(spec).map(|(s, _)| s)
}

pub fn build_with_info(spec: &ScenarioSpec) -> Result<(FlowState, BuildInfo)> {
    let grid = spec.validate()?;
    let (omega, kw) = spec.omega0.build(&grid, spec.seed)?;
    let (theta, kt, truncation_error) = spec.theta0.build(&grid, spec.seed)?;
    let info = BuildInfo {
        linf_omega0: omega.to_physical().max_abs(),
        truncation_error,
        max_wavenumber: kw.max(kt),
    };
    Ok((FlowState::new(omega, theta, 0.0)?, info))
}
