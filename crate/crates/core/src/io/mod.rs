//! Scenario files, the expression mini-language and artifact output.

mod expr;
mod run;
mod scenario;

pub use expr::{expression_eval, Expr};
pub use run::{controls_csv, execute, exit_code, run_scenario, traces_csv, trajectory_csv, write_artifacts, RunOutput};
pub use scenario::{
    BoundarySpec, Command, ConfigSpec, ControlSection, DataSpec, ForcingSpec, ObserveSection, R0Section, Scenario,
    SimulateSection, StateSpec, UcpSection,
};
