//! TOML scenario files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::error::{KdvError, Result};
use crate::hum::{ControlOptions, KrylovMethod};
use crate::model::{ConfigKind, ControlConfig, Grid, Parameters, StatePair};
use crate::pde::{BoundarySignals, Forcing, SchemeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Adjoint,
    Control,
    NonlinearControl,
    Observe,
    UcpSweep,
    R0Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Adjoint => "adjoint",
            Command::Control => "control",
            Command::NonlinearControl => "nonlinear-control",
            Command::Observe => "observe",
            Command::UcpSweep => "ucp-sweep",
            Command::R0Check => "r0-check",
        }
    }
}

/// Either an expression in x (or t for boundary signals) or a file with one
/// value per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Expr(String),
    File { file: PathBuf },
}

impl DataSpec {
    fn sample(&self, points: &[f64], in_time: bool, base: &Path, what: &str) -> Result<Vec<f64>> {
        match self {
            DataSpec::Expr(s) => {
                let e = Expr::parse(s).map_err(|e| KdvError::Parse(format!("{what}: {e}")))?;
                if in_time {
                    e.sample_t(points)
                } else {
                    e.sample_x(points)
                }
                .map_err(|e| KdvError::Parse(format!("{what}: {e}")))
            }
            DataSpec::File { file } => {
                let path = base.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| KdvError::Io(format!("{what}: cannot read {}: {e}", path.display())))?;
                let mut values = Vec::new();
                for (n, line) in text.lines().enumerate() {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    let v: f64 = line.parse().map_err(|_| {
                        KdvError::Parse(format!("{what}: {} line {}: not a number: '{line}'", path.display(), n + 1))
                    })?;
                    values.push(v);
                }
                if values.len() != points.len() {
                    return Err(KdvError::DimensionMismatch {
                        what: format!("{what} samples in {}", path.display()),
                        expected: points.len(),
                        found: values.len(),
                    });
                }
                Ok(values)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub u: DataSpec,
    pub v: DataSpec,
}

impl StateSpec {
    pub fn zero() -> Self {
        Self {
            u: DataSpec::Expr("0".into()),
            v: DataSpec::Expr("0".into()),
        }
    }

    pub fn sample(&self, g: &Grid, base: &Path, what: &str) -> Result<StatePair> {
        let xs = g.xs();
        Ok(StatePair::new(
            self.u.sample(&xs, false, base, &format!("{what}.u"))?,
            self.v.sample(&xs, false, base, &format!("{what}.v"))?,
        ))
    }
}

/// Boundary signals as functions of t; missing entries are zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h0: Option<DataSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h1: Option<DataSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h2: Option<DataSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<DataSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1: Option<DataSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g2: Option<DataSpec>,
}

impl BoundarySpec {
    pub fn sample(&self, g: &Grid, base: &Path) -> Result<BoundarySignals> {
        let ts = g.ts();
        let specs = [&self.h0, &self.h1, &self.h2, &self.g0, &self.g1, &self.g2];
        let mut out = BoundarySignals::zeros(g.levels());
        for ((spec, slot), name) in specs.into_iter().zip(out.as_array_mut()).zip(crate::model::SIGNAL_NAMES) {
            if let Some(s) = spec {
                *slot = s.sample(&ts, true, base, &format!("boundary.{name}"))?;
            }
        }
        Ok(out)
    }
}

/// Source terms p(t, x), q(t, x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub p: String,
    pub q: String,
}

impl ForcingSpec {
    pub fn sample(&self, g: &Grid) -> Result<Forcing> {
        let ep = Expr::parse(&self.p).map_err(|e| KdvError::Parse(format!("forcing.p: {e}")))?;
        let eq = Expr::parse(&self.q).map_err(|e| KdvError::Parse(format!("forcing.q: {e}")))?;
        let xs = g.xs();
        let mut f = Forcing::zeros(g);
        for (n, t) in g.ts().into_iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                f.p[n][i] = ep.eval(x, t)?;
                f.q[n][i] = eq.eval(x, t)?;
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub kind: ConfigKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<[bool; 6]>,
}

impl ConfigSpec {
    pub fn resolve(&self) -> Result<ControlConfig> {
        match (self.kind.pattern(), self.mask) {
            (Some(_), None) => Ok(ControlConfig::named(self.kind)),
            (_, Some(mask)) => ControlConfig::new(self.kind, mask),
            (None, None) => Err(KdvError::ConfigMismatch("CUSTOM configuration needs a mask".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// Solve the nonlinear system by Picard iteration instead of the linear one.
    pub nonlinear: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlSection {
    /// Relative Krylov tolerance.
    pub tol: f64,
    pub method: KrylovMethod,
    pub max_iter: usize,
    /// Known hidden-regularity constant; estimated by sampling when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    pub feasibility_samples: usize,
    /// Smallness radius for nonlinear control; unchecked when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Default for ControlSection {
    fn default() -> Self {
        let o = ControlOptions::default();
        Self {
            tol: 1e-3,
            method: o.method,
            max_iter: o.max_iter,
            c1: None,
            feasibility_samples: o.feasibility_samples,
            delta: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObserveSection {
    pub samples: usize,
}

impl Default for ObserveSection {
    fn default() -> Self {
        Self { samples: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UcpSection {
    pub count: usize,
    pub l_max: f64,
    pub tol: f64,
    /// Spectral parameter used for the degree certificates, as [re, im].
    pub degree_p: [f64; 2],
}

impl Default for UcpSection {
    fn default() -> Self {
        Self {
            count: 200,
            l_max: 10.0,
            tol: crate::ucp::DEFAULT_DISPERSION_TOL,
            degree_p: [1.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct R0Section {
    pub lengths: Vec<f64>,
    /// Points per axis of the s-lattice on [−10, 10]².
    pub grid_points: usize,
    pub tol: f64,
}

impl Default for R0Section {
    fn default() -> Self {
        Self {
            lengths: vec![0.5, 1.0, std::f64::consts::PI, 5.0],
            grid_points: 21,
            tol: 1e-8,
        }
    }
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Parameters>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub scheme: SchemeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<StateSpec>,
    /// Terminal state to reach; for `adjoint` the final data (φ_T, ψ_T).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<ForcingSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub simulate: SimulateSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub control: ControlSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub observe: ObserveSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub ucp: UcpSection,
    #[serde(default, skip_serializing_if = "is_default")]
    pub r0: R0Section,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| KdvError::Parse(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| KdvError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| KdvError::Parse(format!("cannot serialize scenario: {e}")))
    }

    pub fn params(&self) -> Result<Parameters> {
        let p = self
            .params
            .ok_or_else(|| KdvError::Parse(format!("command '{}' requires a [params] table", self.command.name())))?;
        crate::model::validate_params(p)
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = self
            .grid
            .ok_or_else(|| KdvError::Parse(format!("command '{}' requires a [grid] table", self.command.name())))?;
        g.validate()?;
        Ok(g)
    }

    pub fn control_config(&self) -> Result<ControlConfig> {
        self.config
            .as_ref()
            .ok_or_else(|| KdvError::Parse(format!("command '{}' requires a [config] table", self.command.name())))?
            .resolve()
    }

    pub fn control_options(&self) -> ControlOptions {
        ControlOptions {
            method: self.control.method,
            max_iter: self.control.max_iter,
            theta: self.scheme.theta,
            c1: self.control.c1,
            feasibility_samples: self.control.feasibility_samples,
            seed: self.seed,
        }
    }

    /// Checks that every table the command needs is present and valid,
    /// without running anything.
    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        match self.command {
            Command::Simulate | Command::Adjoint => {
                self.params()?;
                self.grid()?;
            }
            Command::Control | Command::NonlinearControl => {
                self.params()?;
                self.grid()?;
                self.control_config()?;
                if !(self.control.tol.is_finite() && self.control.tol > 0.0) {
                    return Err(KdvError::ConstraintViolation("control.tol must be > 0".into()));
                }
                if self.target.is_none() {
                    return Err(KdvError::Parse(format!("command '{}' requires a [target] table", self.command.name())));
                }
            }
            Command::Observe => {
                self.params()?;
                self.grid()?;
                self.control_config()?;
                if self.observe.samples == 0 {
                    return Err(KdvError::ConstraintViolation("observe.samples must be >= 1".into()));
                }
            }
            Command::UcpSweep => {
                self.params()?;
                if !(self.ucp.l_max > 0.0 && self.ucp.tol > 0.0) {
                    return Err(KdvError::ConstraintViolation("ucp.l_max and ucp.tol must be > 0".into()));
                }
            }
            Command::R0Check => {
                if self.r0.lengths.is_empty() || self.r0.lengths.iter().any(|l| !(*l > 0.0)) || self.r0.grid_points == 0 {
                    return Err(KdvError::ConstraintViolation(
                        "r0.lengths must be nonempty and positive, r0.grid_points >= 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTROL: &str = r#"
command = "control"
seed = 3

[params]
a = 0.2
b = 1.0
c = 1.0
r = 1.0

[grid]
length = 1.0
interior = 32
horizon = 1.0
steps = 64

[config]
kind = "FOUR_I"

[target]
u = "1e-2 * gaussian(0.5, 0.1)"
v = { file = "v.txt" }

[control]
tol = 1e-3
method = "cg"
"#;

    #[test]
    fn parses_and_round_trips() {
        let s = Scenario::from_toml_str(CONTROL).unwrap();
        assert_eq!(s.command, Command::Control);
        assert_eq!(s.control.method, KrylovMethod::Cg);
        assert_eq!(s.target.as_ref().unwrap().v, DataSpec::File { file: "v.txt".into() });
        let text = s.to_toml_string().unwrap();
        assert_eq!(Scenario::from_toml_str(&text).unwrap(), s);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = CONTROL.replace("[params]", "[paramss]");
        let msg = Scenario::from_toml_str(&bad).unwrap_err().to_string();
        assert!(msg.contains("paramss"), "{msg}");
        let bad = CONTROL.replace("tol = 1e-3", "tool = 1e-3");
        assert!(Scenario::from_toml_str(&bad).unwrap_err().to_string().contains("tool"));
    }

    #[test]
    fn missing_tables_reported() {
        let s = CONTROL.replace("[config]\nkind = \"FOUR_I\"", "");
        assert!(Scenario::from_toml_str(&s).unwrap_err().to_string().contains("[config]"));
    }

    #[test]
    fn custom_needs_mask() {
        let s = CONTROL.replace("kind = \"FOUR_I\"", "kind = \"CUSTOM\"");
        assert!(Scenario::from_toml_str(&s).is_err());
        let s = CONTROL.replace("kind = \"FOUR_I\"", "kind = \"CUSTOM\"\nmask = [true, true, false, false, true, false]");
        assert!(Scenario::from_toml_str(&s).is_ok());
    }
}
