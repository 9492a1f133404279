use serde::{Deserialize, Serialize};

use super::controls::{controls_from_adjoint, ControlBundle};
use super::krylov::{conjugate_gradient, gmres, KrylovMethod, KrylovOutcome};
use super::observability::estimate_observability;
use crate::error::{KdvError, Result};
use crate::model::{validate_params, x_inner_unchecked, ControlConfig, Grid, Parameters, StatePair};
use crate::pde::{BoundarySignals, LinearSolver};

/// Γ: adjoint data at t = T ↦ state at t = T reached from rest under the HUM controls.
pub struct Gramian {
    solver: LinearSolver,
    cfg: ControlConfig,
}

impl Gramian {
    pub fn new(cfg: &ControlConfig, p: &Parameters, g: &Grid, theta: f64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            solver: LinearSolver::new(p, g, theta)?,
            cfg: *cfg,
        })
    }

    pub fn from_solver(cfg: &ControlConfig, solver: LinearSolver) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { solver, cfg: *cfg })
    }

    pub fn solver(&self) -> &LinearSolver {
        &self.solver
    }

    pub fn config(&self) -> &ControlConfig {
        &self.cfg
    }

    pub fn controls(&self, final_state: &StatePair) -> Result<ControlBundle> {
        let tr = self.solver.adjoint_traces(final_state)?;
        controls_from_adjoint(&self.cfg, &tr, self.solver.params(), self.solver.grid())
    }

    pub fn apply(&self, final_state: &StatePair) -> Result<StatePair> {
        let g = self.solver.grid();
        if final_state.is_zero() {
            final_state.check(g, "adjoint final state")?;
            return Ok(StatePair::zeros(g.nodes()));
        }
        let cb = self.controls(final_state)?;
        self.solver.forward_final(&StatePair::zeros(g.nodes()), &cb.signals, None)
    }

    /// X inner product on this grid.
    pub fn inner(&self, a: &StatePair, b: &StatePair) -> f64 {
        let p = self.solver.params();
        x_inner_unchecked(a, b, p.b / p.c, self.solver.grid().dx())
    }
}

pub fn gramian_apply(cfg: &ControlConfig, final_state: &StatePair, p: &Parameters, g: &Grid) -> Result<StatePair> {
    Gramian::new(cfg, p, g, 0.5)?.apply(final_state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlOptions {
    pub method: KrylovMethod,
    pub max_iter: usize,
    pub theta: f64,
    /// Hidden-regularity constant for the three-control feasibility check;
    /// estimated by sampling when absent.
    pub c1: Option<f64>,
    pub feasibility_samples: usize,
    pub seed: u64,
}

impl Default for ControlOptions {
    fn default() -> Self {
        Self {
            method: KrylovMethod::Gmres,
            max_iter: 500,
            theta: 0.5,
            c1: None,
            feasibility_samples: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ControlOutcome {
    pub controls: ControlBundle,
    pub achieved: StatePair,
    pub iterations: usize,
    /// Adjoint data (φ_T, ψ_T) generating the controls.
    pub adjoint_data: StatePair,
    pub residuals: Vec<f64>,
    /// ‖achieved - target‖_X / ‖target‖_X (absolute when the target is zero).
    pub terminal_error: f64,
    /// C1 used by the three-control check, if one was made.
    pub c1: Option<f64>,
}

/// Three-control condition 0 < C1 (1 - a²b) < c.
pub fn check_feasibility(c1: f64, p: &Parameters) -> Result<()> {
    let lhs = c1 * p.defect();
    if lhs > 0.0 && lhs < p.c {
        Ok(())
    } else {
        Err(KdvError::Infeasible { lhs, c: p.c })
    }
}

pub(crate) fn krylov_solve(gram: &Gramian, rhs: &StatePair, tol: f64, opts: &ControlOptions) -> Result<KrylovOutcome> {
    let op = |x: &StatePair| gram.apply(x);
    let ip = |a: &StatePair, b: &StatePair| gram.inner(a, b);
    match opts.method {
        KrylovMethod::Gmres => gmres(op, rhs, ip, tol, opts.max_iter),
        KrylovMethod::Cg => conjugate_gradient(op, rhs, ip, tol, opts.max_iter),
    }
}

pub(crate) fn feasibility(cfg: &ControlConfig, p: &Parameters, g: &Grid, opts: &ControlOptions) -> Result<Option<f64>> {
    if !cfg.kind.is_three_control() {
        return Ok(None);
    }
    let c1 = match opts.c1 {
        Some(c1) => c1,
        None => estimate_observability(cfg, opts.feasibility_samples.max(1), p, g, opts.seed)?.feasibility_constant(),
    };
    check_feasibility(c1, p)?;
    Ok(Some(c1))
}

/// Steers `init` to `target` at t = T with HUM controls of configuration `cfg`.
pub fn solve_control(
    cfg: &ControlConfig,
    init: &StatePair,
    target: &StatePair,
    tol: f64,
    p: &Parameters,
    g: &Grid,
) -> Result<ControlOutcome> {
    solve_control_with(cfg, init, target, tol, p, g, &ControlOptions::default())
}

pub fn solve_control_with(
    cfg: &ControlConfig,
    init: &StatePair,
    target: &StatePair,
    tol: f64,
    p: &Parameters,
    g: &Grid,
    opts: &ControlOptions,
) -> Result<ControlOutcome> {
    validate_params(*p)?;
    if cfg.kind == crate::model::ConfigKind::Custom {
        return Err(KdvError::ConfigMismatch(
            "control synthesis requires one of the named configurations".into(),
        ));
    }
    cfg.validate()?;
    init.check(g, "initial state")?;
    target.check(g, "target state")?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(KdvError::ConstraintViolation(format!("tolerance must be > 0, got {tol}")));
    }
    let c1 = feasibility(cfg, p, g, opts)?;
    let gram = Gramian::new(cfg, p, g, opts.theta)?;
    let mut out = control_with_gramian(&gram, init, target, tol, opts)?;
    out.c1 = c1;
    Ok(out)
}

pub(crate) fn control_with_gramian(
    gram: &Gramian,
    init: &StatePair,
    target: &StatePair,
    tol: f64,
    opts: &ControlOptions,
) -> Result<ControlOutcome> {
    let g = *gram.solver().grid();
    let zero_bc = BoundarySignals::zeros(g.levels());
    let free = gram.solver().forward_final(init, &zero_bc, None)?;
    let rhs = target.sub(&free);
    let target_norm = gram.inner(target, target).sqrt();
    let rel = |achieved: &StatePair| {
        let d = achieved.sub(target);
        let e = gram.inner(&d, &d).sqrt();
        if target_norm > 0.0 {
            e / target_norm
        } else {
            e
        }
    };
    if gram.inner(&rhs, &rhs).sqrt() < 1e-14 {
        return Ok(ControlOutcome {
            controls: ControlBundle::zero(*gram.config(), &g),
            terminal_error: rel(&free),
            achieved: free,
            iterations: 0,
            adjoint_data: StatePair::zeros(g.nodes()),
            residuals: vec![0.0],
            c1: None,
        });
    }
    let kr = krylov_solve(gram, &rhs, tol, opts)?;
    let controls = gram.controls(&kr.solution)?;
    let achieved = gram.solver().forward_final(init, &controls.signals, None)?;
    Ok(ControlOutcome {
        terminal_error: rel(&achieved),
        controls,
        achieved,
        iterations: kr.iterations,
        adjoint_data: kr.solution,
        residuals: kr.residuals,
        c1: None,
    })
}
