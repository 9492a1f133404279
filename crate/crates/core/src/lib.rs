//! Simulation, boundary control synthesis and spectral certificates for the
//! Gear–Grimshaw system of coupled KdV equations on a bounded interval.

pub mod banded;
pub mod error;
pub mod hum;
pub mod io;
pub mod model;
pub mod pde;
pub mod sobolev;
pub mod ucp;

pub use error::{KdvError, Result};
pub use model::{
    diagonalize, validate_params, x_inner, x_norm, ConfigKind, ControlConfig, DiagonalForm, Grid,
    Parameters, StatePair,
};
pub use pde::{
    solve_adjoint_backward, solve_linear_forward, solve_nonlinear, BoundarySignals, Forcing,
    LinearSolver, SchemeConfig, TraceBundle, Trajectory,
};
pub use sobolev::sobolev_trace_norm;
