//! Trajectory diagnostics, bound checks with fitted rate constants, and
//! ensemble estimates of the constants in the Jacobian and velocity-gradient
//! BMO inequalities.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::FlowState;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::norms::{bmo_seminorm, sobolev_norm, sobolev_norm_sq, BmoConfig};
use crate::scenarios::random_band_field_stream;
use crate::spectral::{to_physical_pair, Axis, PhysicalField, SpectralField};

/// Spectral-tail enstrophy fraction above which a sample counts as under-resolved.
pub const UNDER_RESOLVED_FRACTION: f64 = 0.01;

/// Relative inflation of the fitted constant at which `holds` is evaluated.
pub const FIT_INFLATION: f64 = 1e-9;

/// Denominators at or below this make an ensemble member degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// One time sample of the norms tracked along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub hm1_theta: f64,
    pub hm12_theta: f64,
    pub grad_l2_theta: f64,
    pub grad_l2_omega: f64,
    pub linf_omega: f64,
    pub bmo_omega: f64,
    pub energy: f64,
    pub enstrophy: f64,
    pub l2_theta: f64,
    pub resolved_fraction: f64,
}

impl DiagnosticRecord {
    pub fn measure(state: &FlowState, bmo: &BmoConfig) -> Result<Self> {
        let omega = state.omega.to_physical();
        let z = sobolev_norm_sq(&state.omega, 0.0);
        let cut = 2 * state.grid().dealias_cutoff() / 3;
        let resolved_fraction = if z > 0.0 {
            state.omega.energy_above(cut) / z
        } else {
            0.0
        };
        Ok(DiagnosticRecord {
            t: state.t,
            hm1_theta: sobolev_norm(&state.theta, -1.0),
            hm12_theta: sobolev_norm(&state.theta, -0.5),
            grad_l2_theta: TAU * sobolev_norm(&state.theta, 1.0),
            grad_l2_omega: TAU * sobolev_norm(&state.omega, 1.0),
            linf_omega: omega.max_abs(),
            bmo_omega: bmo_seminorm(&omega, bmo)?,
            energy: 0.5 * sobolev_norm_sq(&state.omega, -1.0) / (TAU * TAU),
            enstrophy: 0.5 * z,
            l2_theta: sobolev_norm(&state.theta, 0.0),
            resolved_fraction,
        })
    }

    pub fn is_under_resolved(&self) -> bool {
        self.resolved_fraction > UNDER_RESOLVED_FRACTION
    }
}

pub fn any_under_resolved(records: &[DiagnosticRecord]) -> bool {
    records.iter().any(DiagnosticRecord::is_under_resolved)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `|θ(t)|²_{H⁻¹} ≥ |θ(0)|²_{H⁻¹} exp(−λ ∫₀ᵗ |ω|_BMO)`
    MixingBmo,
    /// `|θ(t)|²_{H⁻¹} ≥ |θ(0)|²_{H⁻¹} exp(−λ t |ω(0)|_∞)`
    MixingSup,
    /// `|∇θ(t)|²_{L²} ≤ |∇θ(0)|²_{L²} exp(λ t |ω(0)|_∞)`
    GradientTheta,
    /// Same as `GradientTheta` with ω in place of θ.
    GradientOmega,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [
        BoundKind::MixingBmo,
        BoundKind::MixingSup,
        BoundKind::GradientTheta,
        BoundKind::GradientOmega,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::MixingBmo => "mixing_bmo",
            BoundKind::MixingSup => "mixing_sup",
            BoundKind::GradientTheta => "gradient_theta",
            BoundKind::GradientOmega => "gradient_omega",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub t: f64,
    /// Slack of the bound in log space at `lambda_ref`; non-negative when it holds.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    /// Smallest constant for which the bound holds on every sample.
    pub lambda_fit: f64,
    /// `lambda_fit · (1 + 1e-9)`, where `holds` and the margins are evaluated.
    pub lambda_ref: f64,
    /// Sample time attaining the fit, if any sample binds.
    pub binding_time: Option<f64>,
    pub margin_series: Vec<Margin>,
    pub holds: bool,
}

fn validate(records: &[DiagnosticRecord]) -> Result<()> {
    if records.len() < 2 {
        return Err(Error::TooFewRecords(records.len()));
    }
    for (i, w) in records.windows(2).enumerate() {
        if !(w[1].t > w[0].t) {
            return Err(Error::NonMonotoneTime { index: i + 1 });
        }
    }
    Ok(())
}

/// Cumulative trapezoid integral of `∫₀ᵗ |ω|_BMO` at each sample.
pub fn bmo_integral(records: &[DiagnosticRecord]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(records.len());
    out.push(0.0);
    for w in records.windows(2) {
        acc += 0.5 * (w[1].t - w[0].t) * (w[0].bmo_omega + w[1].bmo_omega);
        out.push(acc);
    }
    out
}

/// `t · |ω(0)|_∞` at each sample, measured from the first record.
pub fn sup_integral(records: &[DiagnosticRecord]) -> Vec<f64> {
    let t0 = records.first().map_or(0.0, |r| r.t);
    let l = records.first().map_or(0.0, |r| r.linf_omega);
    records.iter().map(|r| (r.t - t0) * l).collect()
}

/// Fits `λ = max_t loss(t) / budget(t)` over samples after the first and
/// evaluates the margins `λ_ref · budget − loss`.
fn fit(kind: BoundKind, times: &[f64], loss: &[f64], budget: &[f64]) -> BoundReport {
    let mut lambda = 0.0f64;
    let mut binding = None;
    for i in 1..times.len() {
        if loss[i] > 0.0 {
            let rate = if budget[i] > 0.0 { loss[i] / budget[i] } else { f64::INFINITY };
            if rate > lambda {
                lambda = rate;
                binding = Some(times[i]);
            }
        }
    }
    let lambda_ref = lambda * (1.0 + FIT_INFLATION);
    let margin_series: Vec<Margin> = (0..times.len())
        .map(|i| Margin {
            t: times[i],
            margin: if budget[i] > 0.0 {
                lambda_ref * budget[i] - loss[i]
            } else {
                -loss[i]
            },
        })
        .collect();
    let holds = lambda.is_finite() && margin_series.iter().all(|m| m.margin >= 0.0);
    BoundReport {
        kind,
        lambda_fit: lambda,
        lambda_ref,
        binding_time: binding,
        margin_series,
        holds,
    }
}

fn mixing_loss(records: &[DiagnosticRecord]) -> Result<Vec<f64>> {
    let h0 = records[0].hm1_theta;
    if !(h0 > 0.0) {
        return Err(Error::ZeroInitialNorm("hm1_theta"));
    }
    // ln(|θ(0)|²/|θ(t)|²); a ratio keeps power-of-two rescalings of θ exact
    Ok(records.iter().map(|r| ((h0 / r.hm1_theta).powi(2)).ln()).collect())
}

pub fn check_mixing_bmo(records: &[DiagnosticRecord]) -> Result<BoundReport> {
    validate(records)?;
    let loss = mixing_loss(records)?;
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    Ok(fit(BoundKind::MixingBmo, &times, &loss, &bmo_integral(records)))
}

pub fn check_mixing_sup(records: &[DiagnosticRecord]) -> Result<BoundReport> {
    validate(records)?;
    let loss = mixing_loss(records)?;
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    Ok(fit(BoundKind::MixingSup, &times, &loss, &sup_integral(records)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientOf {
    Theta,
    Omega,
}

pub fn check_gradient_growth(records: &[DiagnosticRecord], which: GradientOf) -> Result<BoundReport> {
    validate(records)?;
    let (kind, g0, pick): (_, _, fn(&DiagnosticRecord) -> f64) = match which {
        GradientOf::Theta => (BoundKind::GradientTheta, records[0].grad_l2_theta, |r| r.grad_l2_theta),
        GradientOf::Omega => (BoundKind::GradientOmega, records[0].grad_l2_omega, |r| r.grad_l2_omega),
    };
    let series: Vec<f64> = records.iter().map(pick).collect();
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    if g0 == 0.0 && series.iter().all(|&g| g == 0.0) {
        // identically flat field: the bound holds with any constant
        let zeros = vec![0.0; records.len()];
        return Ok(fit(kind, &times, &zeros, &sup_integral(records)));
    }
    if !(g0 > 0.0) {
        return Err(Error::ZeroInitialNorm(match which {
            GradientOf::Theta => "grad_l2_theta",
            GradientOf::Omega => "grad_l2_omega",
        }));
    }
    let loss: Vec<f64> = series.iter().map(|g| ((g / g0).powi(2)).ln()).collect();
    Ok(fit(kind, &times, &loss, &sup_integral(records)))
}

pub fn check(records: &[DiagnosticRecord], kind: BoundKind) -> Result<BoundReport> {
    match kind {
        BoundKind::MixingBmo => check_mixing_bmo(records),
        BoundKind::MixingSup => check_mixing_sup(records),
        BoundKind::GradientTheta => check_gradient_growth(records, GradientOf::Theta),
        BoundKind::GradientOmega => check_gradient_growth(records, GradientOf::Omega),
    }
}

/// Random band-limited ensemble for the constant estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub size: usize,
    pub seed: u64,
    pub k_min: f64,
    pub k_max: f64,
    #[serde(default)]
    pub slope: f64,
    /// Scale of the `ζ` member of each pair; `0` makes every pair degenerate.
    #[serde(default = "unit")]
    pub zeta_amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            size: 100,
            seed: 2024,
            k_min: 1.0,
            k_max: 8.0,
            slope: 1.0,
            zeta_amplitude: 1.0,
        }
    }
}

impl EnsembleSpec {
    fn validate(&self, grid: &Grid) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidEnsemble("size must be positive".into()));
        }
        if !(self.k_min >= 1.0 && self.k_max >= self.k_min) {
            return Err(Error::InvalidEnsemble("need 1 <= k_min <= k_max".into()));
        }
        if self.k_max.floor() as i64 > (grid.n() / 4) as i64 {
            return Err(Error::InvalidEnsemble(format!(
                "k_max = {} exceeds n/4 at n = {}",
                self.k_max,
                grid.n()
            )));
        }
        if !self.zeta_amplitude.is_finite() || !self.slope.is_finite() {
            return Err(Error::InvalidEnsemble("amplitudes must be finite".into()));
        }
        Ok(())
    }

    fn member(&self, grid: &Grid, index: usize, role: u64) -> SpectralField {
        random_band_field_stream(grid, self.k_min, self.k_max, self.slope, self.seed, 4 * index as u64 + role)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub n: usize,
    pub members: usize,
    pub skipped: usize,
    pub max_ratio: Option<f64>,
    pub quantiles: Option<Quantiles>,
    /// How vector and tensor BMO norms are formed from scalar components.
    pub component_norm: String,
    /// Largest relative disagreement between the direct and Riesz routes to `∇v`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_path_discrepancy: Option<f64>,
}

pub const COMPONENT_NORM: &str = "max over scalar components";

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(n: usize, members: usize, ratios: &[Option<f64>], discrepancy: Option<f64>) -> ConstantEstimate {
    let mut valid: Vec<f64> = ratios.iter().flatten().copied().collect();
    valid.sort_by(f64::total_cmp);
    let skipped = members - valid.len();
    let (max_ratio, quantiles) = if valid.is_empty() {
        (None, None)
    } else {
        (
            valid.last().copied(),
            Some(Quantiles {
                p50: quantile(&valid, 0.5),
                p90: quantile(&valid, 0.9),
                p99: quantile(&valid, 0.99),
            }),
        )
    };
    ConstantEstimate {
        n,
        members,
        skipped,
        max_ratio,
        quantiles,
        component_norm: COMPONENT_NORM.to_string(),
        max_path_discrepancy: discrepancy,
    }
}

/// `|∂(ζ, φ)|_{L²} / (max_j |∂_j ζ|_BMO · |∇φ|_{L²})`, or `None` when the
/// denominator is degenerate.
pub fn jacobian_bmo_ratio(zeta: &SpectralField, phi: &SpectralField, bmo: &BmoConfig) -> Result<Option<f64>> {
    let jac = zeta.jacobian(phi)?;
    let num = sobolev_norm(&jac, 0.0);
    let grad_phi = TAU * sobolev_norm(phi, 1.0);
    let (zx, zy) = to_physical_pair(&zeta.derivative(Axis::X), &zeta.derivative(Axis::Y))?;
    let bmo_grad = bmo_seminorm(&zx, bmo)?.max(bmo_seminorm(&zy, bmo)?);
    let denom = bmo_grad * grad_phi;
    if !(denom > DEGENERATE_DENOMINATOR) {
        return Ok(None);
    }
    Ok(Some(num / denom))
}

pub fn estimate_jacobian_bmo_constant(spec: &EnsembleSpec, grid: &Grid, bmo: &BmoConfig) -> Result<ConstantEstimate> {
    spec.validate(grid)?;
    bmo.validate(grid)?;
    let ratios = grid.execution().map_indexed(spec.size, |i| {
        let zeta = spec.member(grid, i, 0).scaled(spec.zeta_amplitude);
        let phi = spec.member(grid, i, 1);
        jacobian_bmo_ratio(&zeta, &phi, bmo)
    });
    let ratios = ratios.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(summarize(grid.n(), spec.size, &ratios, None))
}

/// Entries `(∂_x u, ∂_y u, ∂_x v, ∂_y v)` of `∇v` for `v = ∇^⊥Δ⁻¹ω`.
pub fn velocity_gradient_direct(omega: &SpectralField) -> Result<[SpectralField; 4]> {
    let (u, v) = omega.invert_laplacian()?.perp_gradient();
    Ok([
        u.derivative(Axis::X),
        u.derivative(Axis::Y),
        v.derivative(Axis::X),
        v.derivative(Axis::Y),
    ])
}

/// The same entries as `(R_x, R_y) ⊗ (R_y, −R_x) ω`.
pub fn velocity_gradient_riesz(omega: &SpectralField) -> [SpectralField; 4] {
    let ry = omega.riesz(Axis::Y);
    let mrx = omega.riesz(Axis::X).scaled(-1.0);
    [
        ry.riesz(Axis::X),
        ry.riesz(Axis::Y),
        mrx.riesz(Axis::X),
        mrx.riesz(Axis::Y),
    ]
}

/// Ratio `max_entries |∂_j v_i|_BMO / |ω|_BMO` and the relative disagreement
/// of the two `∇v` routes.
pub fn riesz_bmo_ratio(omega: &SpectralField, bmo: &BmoConfig) -> Result<(Option<f64>, f64)> {
    let direct = velocity_gradient_direct(omega)?;
    let riesz = velocity_gradient_riesz(omega);
    let mut worst = 0.0f64;
    let mut grads: Vec<PhysicalField> = Vec::with_capacity(4);
    for pair in [(0, 1), (2, 3)] {
        let (d0, d1) = to_physical_pair(&direct[pair.0], &direct[pair.1])?;
        let (r0, r1) = to_physical_pair(&riesz[pair.0], &riesz[pair.1])?;
        for (d, r) in [(&d0, &r0), (&d1, &r1)] {
            let scale = d.max_abs();
            let diff = d
                .values()
                .iter()
                .zip(r.values())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if scale > 0.0 {
                worst = worst.max(diff / scale);
            } else {
                worst = worst.max(diff);
            }
        }
        grads.push(d0);
        grads.push(d1);
    }
    let bmo_omega = bmo_seminorm(&omega.to_physical(), bmo)?;
    if !(bmo_omega > DEGENERATE_DENOMINATOR) {
        return Ok((None, worst));
    }
    let mut top = 0.0f64;
    for g in &grads {
        top = top.max(bmo_seminorm(g, bmo)?);
    }
    Ok((Some(top / bmo_omega), worst))
}

pub fn estimate_riesz_bmo_constant(spec: &EnsembleSpec, grid: &Grid, bmo: &BmoConfig) -> Result<ConstantEstimate> {
    spec.validate(grid)?;
    bmo.validate(grid)?;
    let out = grid.execution().map_indexed(spec.size, |i| {
        let omega = spec.member(grid, i, 2).scaled(spec.zeta_amplitude);
        riesz_bmo_ratio(&omega, bmo)
    });
    let out = out.into_iter().collect::<Result<Vec<_>>>()?;
    let ratios: Vec<Option<f64>> = out.iter().map(|o| o.0).collect();
    let discrepancy = out.iter().map(|o| o.1).fold(0.0, f64::max);
    Ok(summarize(grid.n(), spec.size, &ratios, Some(discrepancy)))
}
