//! Finite-difference solvers for the linear forward problem, the backward
//! adjoint problem and the nonlinear system, plus boundary traces.

mod linear;
mod nonlinear;
pub mod stencils;
mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, KdvError, Result};
use crate::model::{Grid, Parameters, StatePair};

pub use linear::{solve_adjoint_backward, solve_linear_forward, LinearSolver};
pub use nonlinear::{nonlinear_forcing, solve_nonlinear, NonlinearSolution};
pub use trace::{extract_traces, ComponentTraces, TraceBundle, TRACE_COLUMNS};

/// The six boundary inputs sampled on the time grid (M + 1 values each).
///
/// `h0`, `g0` prescribe u(t,0), v(t,0); `h1`, `g1` prescribe u_x(t,L), v_x(t,L);
/// `h2`, `g2` prescribe u_xx(t,L), v_xx(t,L).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySignals {
    pub h0: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub g0: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

impl BoundarySignals {
    pub fn zeros(levels: usize) -> Self {
        Self::from_array(std::array::from_fn(|_| vec![0.0; levels]))
    }

    /// Build from six series in the order h0, h1, h2, g0, g1, g2.
    pub fn from_array(s: [Vec<f64>; 6]) -> Self {
        let [h0, h1, h2, g0, g1, g2] = s;
        Self { h0, h1, h2, g0, g1, g2 }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize, f64) -> f64) -> Self {
        let ts = grid.ts();
        Self::from_array(std::array::from_fn(|k| ts.iter().map(|&t| f(k, t)).collect()))
    }

    pub fn as_array(&self) -> [&Vec<f64>; 6] {
        [&self.h0, &self.h1, &self.h2, &self.g0, &self.g1, &self.g2]
    }

    pub fn as_array_mut(&mut self) -> [&mut Vec<f64>; 6] {
        [
            &mut self.h0,
            &mut self.h1,
            &mut self.h2,
            &mut self.g0,
            &mut self.g1,
            &mut self.g2,
        ]
    }

    pub fn levels(&self) -> usize {
        self.h0.len()
    }

    /// Zeroes every signal whose mask entry is false.
    pub fn masked(mut self, mask: [bool; 6]) -> Self {
        for (sig, on) in self.as_array_mut().into_iter().zip(mask) {
            if !on {
                sig.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.as_array().iter().all(|s| s.iter().all(|&x| x == 0.0))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_array(self.as_array().map(|s| s.iter().map(|x| alpha * x).collect()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let a = self.as_array();
        let b = other.as_array();
        Self::from_array(std::array::from_fn(|k| {
            a[k].iter().zip(b[k]).map(|(x, y)| x + y).collect()
        }))
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        for (name, s) in crate::model::SIGNAL_NAMES.iter().zip(self.as_array()) {
            if s.len() != grid.levels() {
                return Err(KdvError::DimensionMismatch {
                    what: format!("boundary signal {name}"),
                    expected: grid.levels(),
                    found: s.len(),
                });
            }
            ensure_finite(s, name)?;
        }
        Ok(())
    }
}

/// Source terms (p, q), one spatial profile per time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

impl Forcing {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            p: vec![vec![0.0; grid.nodes()]; grid.levels()],
            q: vec![vec![0.0; grid.nodes()]; grid.levels()],
        }
    }

    pub fn from_fn(grid: &Grid, fp: impl Fn(f64, f64) -> f64, fq: impl Fn(f64, f64) -> f64) -> Self {
        let xs = grid.xs();
        let ts = grid.ts();
        Self {
            p: ts.iter().map(|&t| xs.iter().map(|&x| fp(t, x)).collect()).collect(),
            q: ts.iter().map(|&t| xs.iter().map(|&x| fq(t, x)).collect()).collect(),
        }
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        for (name, f) in [("p", &self.p), ("q", &self.q)] {
            if f.len() != grid.levels() {
                return Err(KdvError::DimensionMismatch {
                    what: format!("forcing {name} (time levels)"),
                    expected: grid.levels(),
                    found: f.len(),
                });
            }
            for row in f {
                if row.len() != grid.nodes() {
                    return Err(KdvError::DimensionMismatch {
                        what: format!("forcing {name} (nodes)"),
                        expected: grid.nodes(),
                        found: row.len(),
                    });
                }
                ensure_finite(row, name)?;
            }
        }
        Ok(())
    }
}

/// Time-stepping options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    /// Implicitness weight, 1/2 = Crank–Nicolson.
    pub theta: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Include the u u_x and v v_x terms. Disabling them together with
    /// a1 = a2 = 0 reduces the nonlinear solver to the linear one.
    pub self_interaction: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            picard_tol: 1e-8,
            picard_max: 60,
            self_interaction: true,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(KdvError::ConstraintViolation(format!(
                "theta must lie in [1/2, 1], got {}",
                self.theta
            )));
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return Err(KdvError::ConstraintViolation(format!(
                "picard_tol must be > 0, got {}",
                self.picard_tol
            )));
        }
        if self.picard_max == 0 {
            return Err(KdvError::ConstraintViolation("picard_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// One state per time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub states: Vec<StatePair>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StatePair {
        self.states.last().expect("trajectory has M + 1 states")
    }

    pub fn x_norms(&self, p: &Parameters) -> Vec<f64> {
        let w = p.b / p.c;
        let dx = self.grid.dx();
        self.states
            .iter()
            .map(|s| crate::model::x_inner_unchecked(s, s, w, dx).max(0.0).sqrt())
            .collect()
    }

    /// max over time levels of ‖self(t) - other(t)‖_X
    pub fn sup_distance(&self, other: &Trajectory, p: &Parameters) -> f64 {
        let w = p.b / p.c;
        let dx = self.grid.dx();
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| {
                let d = a.sub(b);
                crate::model::x_inner_unchecked(&d, &d, w, dx).max(0.0).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self, p: &Parameters) -> f64 {
        self.x_norms(p).into_iter().fold(0.0, f64::max)
    }
}
