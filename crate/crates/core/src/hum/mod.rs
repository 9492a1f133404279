//! Control synthesis by duality (HUM): controls from adjoint traces, the
//! Gramian and its Krylov inversion, observability sampling, and the
//! nonlinear fixed-point loop.

mod controls;
mod gramian;
pub mod krylov;
mod nonlinear_control;
mod observability;

pub use controls::{
    active_norms_squared, adjoint_combinations, controls_from_adjoint, duality_boundary_term, signal_norms,
    ControlBundle, COMBINATION_EXPONENTS, SIGNAL_EXPONENTS,
};
pub use gramian::{check_feasibility, gramian_apply, solve_control, solve_control_with, ControlOptions, ControlOutcome, Gramian};
pub use krylov::KrylovMethod;
pub use nonlinear_control::{solve_nonlinear_control, solve_nonlinear_control_with, NonlinearControlOutcome};
pub use observability::{
    estimate_observability, observability_quotient, random_final_data, sample_rng, ObservabilityReport,
};
