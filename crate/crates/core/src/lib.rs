//! Pseudospectral 2D incompressible Euler on the unit torus with passive-scalar
//! transport, plus diagnostics that check mixing-rate and gradient-growth
//! bounds along simulated trajectories.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`] and [`spectral`]: collocation grid, FFTs, Fourier multipliers,
//!   dealiased Jacobian, Riesz transforms.
//! - [`norms`]: `L^p`, `H^s` and a discrete BMO seminorm.
//! - [`dynamics`]: RK4 time stepping of vorticity and scalar.
//! - [`bounds`]: diagnostic records, fitted bound checks and ensemble constant
//!   estimates.
//! - [`scenarios`]: initial-condition library.
//!
//! Data-parallel loops run on rayon when the `parallel` feature is enabled
//! (the default); see [`Execution`].

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod norms;
pub mod scenarios;
pub mod spectral;

pub use bounds::{BoundKind, BoundReport, ConstantEstimate, DiagnosticRecord, EnsembleSpec};
pub use dynamics::{DiagnosticSink, FlowState, StepControl};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::Grid;
pub use norms::{BmoConfig, MixOrder};
pub use scenarios::{ScalarIc, ScenarioSpec, VorticityIc};
pub use spectral::{Axis, PhysicalField, SpectralField};
