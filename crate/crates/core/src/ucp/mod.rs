//! Spectral certificates for unique continuation: the characteristic sextic,
//! its roots, Lambert-W branches, per-case verdicts, degree arguments for
//! alternative configurations and the r = 0 eigenproblem.

mod certificate;
mod degree;
mod lambert;
mod poly;
mod r0;

pub use certificate::{
    sweep_sample, ucp_certificate, ucp_sweep, CaseTag, UcpVerdict, Verdict, DEFAULT_DISPERSION_TOL, MULTIPLICITY_TOL,
};
pub use degree::{degree_certificate, DegreeConfig, DegreeReport, TRACE_UNKNOWNS};
pub use lambert::{branch_index, lambert_solve};
pub use poly::{build_p, elementary_symmetric, eval_with_derivative, girard_residuals, roots_of, roots_p, PolyP, RootSet};
pub use r0::{boundary_matrix, cube_roots, r0_eigencheck, r0_sweep, sigma_min, R0Report};
