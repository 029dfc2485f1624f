//! Inviscid vorticity transport with a passive scalar, advanced by classical
//! RK4 on the dealiased pseudospectral tendency.

use serde::{Deserialize, Serialize};

use crate::bounds::DiagnosticRecord;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::norms::BmoConfig;
use crate::spectral::{to_physical_pair, SpectralField};

/// Floor on the velocity scale in the CFL rule, so the rest state gets `dt_max`.
pub const VELOCITY_FLOOR: f64 = 1e-12;

/// Spectral vorticity `ω̂`, spectral scalar `θ̂` and time.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub omega: SpectralField,
    pub theta: SpectralField,
    pub t: f64,
}

impl FlowState {
    pub fn new(omega: SpectralField, theta: SpectralField, t: f64) -> Result<Self> {
        omega.same_grid(&theta)?;
        Ok(FlowState { omega, theta, t })
    }

    pub fn grid(&self) -> &Grid {
        self.omega.grid()
    }

    /// `ψ = Δ⁻¹ω`.
    pub fn streamfunction(&self) -> SpectralField {
        self.omega
            .invert_laplacian()
            .expect("spectral fields carry a zero mean mode")
    }

    /// Velocity `(u, v) = ∇^⊥ψ` in spectral form.
    pub fn velocity(&self) -> (SpectralField, SpectralField) {
        self.streamfunction().perp_gradient()
    }

    /// Same state with vorticity negated: the velocity reverses.
    pub fn reversed(&self) -> FlowState {
        FlowState {
            omega: self.omega.scaled(-1.0),
            theta: self.theta.clone(),
            t: self.t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    /// Steps below this abort the run.
    pub dt_min: f64,
}

impl StepControl {
    pub fn new(cfl: f64, dt_max: f64, dt_min: f64) -> Result<Self> {
        let ctl = StepControl { cfl, dt_max, dt_min };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidStepControl(format!("cfl = {} not in (0, 1]", self.cfl)));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max && self.dt_max.is_finite()) {
            return Err(Error::InvalidStepControl(format!(
                "need 0 < dt_min < dt_max, got dt_min = {}, dt_max = {}",
                self.dt_min, self.dt_max
            )));
        }
        Ok(())
    }
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            cfl: 0.4,
            dt_max: 0.05,
            dt_min: 1e-9,
        }
    }
}

/// `(∂_t ω, ∂_t θ) = (−∂(ψ, ω), −∂(ψ, θ))`.
pub fn tendency(state: &FlowState) -> (SpectralField, SpectralField) {
    let psi = state.streamfunction();
    let (jw, jt) = psi
        .jacobian_shared(&state.omega, &state.theta)
        .expect("state fields share a grid");
    (jw.scaled(-1.0), jt.scaled(-1.0))
}

fn stage(state: &FlowState, a: f64, k: &(SpectralField, SpectralField)) -> FlowState {
    FlowState {
        omega: state.omega.plus_scaled(a, &k.0).expect("same grid"),
        theta: state.theta.plus_scaled(a, &k.1).expect("same grid"),
        t: state.t,
    }
}

/// One classical RK4 step of size `dt`.
pub fn step(state: &FlowState, dt: f64) -> FlowState {
    let k1 = tendency(state);
    let k2 = tendency(&stage(state, 0.5 * dt, &k1));
    let k3 = tendency(&stage(state, 0.5 * dt, &k2));
    let k4 = tendency(&stage(state, dt, &k3));

    let mut omega = state.omega.clone();
    let mut theta = state.theta.clone();
    let w = dt / 6.0;
    for (k, c) in [(&k1, w), (&k2, 2.0 * w), (&k3, 2.0 * w), (&k4, w)] {
        omega.axpy(c, &k.0).expect("same grid");
        theta.axpy(c, &k.1).expect("same grid");
    }
    FlowState {
        omega,
        theta,
        t: state.t + dt,
    }
}

/// Largest collocation speed component `max(|u|_∞, |v|_∞)`.
pub fn max_velocity(state: &FlowState) -> f64 {
    let (u, v) = state.velocity();
    let (u, v) = to_physical_pair(&u, &v).expect("same grid");
    u.max_abs().max(v.max_abs())
}

/// `min(dt_max, cfl · h / max(|u|_∞, |v|_∞, ε))`.
pub fn cfl_dt(state: &FlowState, ctl: &StepControl) -> Result<f64> {
    let speed = max_velocity(state).max(VELOCITY_FLOOR);
    let dt = (ctl.cfl * state.grid().h() / speed).min(ctl.dt_max);
    if dt < ctl.dt_min {
        return Err(Error::TimeStepCollapse { t: state.t, dt });
    }
    Ok(dt)
}

/// Consumer of diagnostic records, fed sequentially by one run.
pub trait DiagnosticSink {
    fn accept(&mut self, record: &DiagnosticRecord) -> std::io::Result<()>;
}

impl DiagnosticSink for Vec<DiagnosticRecord> {
    fn accept(&mut self, record: &DiagnosticRecord) -> std::io::Result<()> {
        self.push(record.clone());
        Ok(())
    }
}

impl<S: DiagnosticSink + ?Sized> DiagnosticSink for &mut S {
    fn accept(&mut self, record: &DiagnosticRecord) -> std::io::Result<()> {
        (**self).accept(record)
    }
}

/// Sampling instants `t0, t0 + Δ, …, t_end` (the last one always `t_end`).
pub fn sample_times(t0: f64, t_end: f64, every: f64) -> Vec<f64> {
    let intervals = ((t_end - t0) / every - 1e-9).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(intervals + 1);
    out.push(t0);
    for k in 1..=intervals {
        out.push(if k == intervals { t_end } else { t0 + k as f64 * every });
    }
    out
}

/// Integrates from `state0.t` to `t_end` with adaptive CFL steps that land
/// exactly on every sampling instant, emitting one record per instant.
pub fn run(
    state0: &FlowState,
    ctl: &StepControl,
    t_end: f64,
    sample_every: f64,
    bmo: &BmoConfig,
    mut sink: impl DiagnosticSink,
) -> Result<FlowState> {
    ctl.validate()?;
    if !(t_end >= state0.t) || !t_end.is_finite() {
        return Err(Error::InvalidInterval(format!(
            "t_end = {t_end} precedes start time {}",
            state0.t
        )));
    }
    if !(sample_every > 0.0) {
        return Err(Error::InvalidInterval(format!("sample_every = {sample_every} must be positive")));
    }
    bmo.validate(state0.grid())?;

    let mut state = state0.clone();
    let times = sample_times(state0.t, t_end, sample_every);
    sink.accept(&DiagnosticRecord::measure(&state, bmo)?)?;
    for &target in &times[1..] {
        while state.t < target {
            let dt = cfl_dt(&state, ctl)?;
            let remaining = target - state.t;
            if dt >= remaining {
                state = step(&state, remaining);
                state.t = target;
            } else {
                state = step(&state, dt);
            }
        }
        sink.accept(&DiagnosticRecord::measure(&state, bmo)?)?;
    }
    Ok(state)
}
