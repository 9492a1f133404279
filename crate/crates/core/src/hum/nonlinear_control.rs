//! Fixed-point control of the nonlinear system.
//!
//! The nonlinear solution splits as free evolution + controlled part +
//! Duhamel term D(u, v) of the nonlinear forcing. Each outer step aims the
//! linear controller at `target - D(previous trajectory)`; only the change in
//! D is handed to the Krylov solver, so the inner tolerance acts on ever
//! smaller corrections.

use super::controls::ControlBundle;
use super::gramian::{feasibility, krylov_solve, ControlOptions, Gramian};
use crate::error::{KdvError, Result};
use crate::model::{validate_params, ConfigKind, ControlConfig, Grid, Parameters, StatePair};
use crate::pde::{nonlinear_forcing, BoundarySignals, SchemeConfig, Trajectory};

#[derive(Debug, Clone)]
pub struct NonlinearControlOutcome {
    pub controls: ControlBundle,
    pub iterations: usize,
    /// Relative sup-in-time distance between successive controlled trajectories.
    pub residuals: Vec<f64>,
    pub trajectory: Trajectory,
    pub achieved: StatePair,
    pub terminal_error: f64,
    pub krylov_iterations: Vec<usize>,
}

pub fn solve_nonlinear_control(
    init: &StatePair,
    target: &StatePair,
    cfg: &ControlConfig,
    delta: f64,
    p: &Parameters,
    g: &Grid,
    scheme: &SchemeConfig,
) -> Result<NonlinearControlOutcome> {
    solve_nonlinear_control_with(init, target, cfg, delta, p, g, scheme, 1e-3, &ControlOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn solve_nonlinear_control_with(
    init: &StatePair,
    target: &StatePair,
    cfg: &ControlConfig,
    delta: f64,
    p: &Parameters,
    g: &Grid,
    scheme: &SchemeConfig,
    tol: f64,
    opts: &ControlOptions,
) -> Result<NonlinearControlOutcome> {
    validate_params(*p)?;
    scheme.validate()?;
    if cfg.kind == ConfigKind::Custom {
        return Err(KdvError::ConfigMismatch(
            "control synthesis requires one of the named configurations".into(),
        ));
    }
    init.check(g, "initial state")?;
    target.check(g, "target state")?;
    let opts = ControlOptions {
        theta: scheme.theta,
        ..*opts
    };
    let gram = Gramian::new(cfg, p, g, scheme.theta)?;
    let size = gram.inner(init, init).sqrt() + gram.inner(target, target).sqrt();
    if size > delta {
        return Err(KdvError::SmallnessViolated { value: size, delta });
    }
    feasibility(cfg, p, g, &opts)?;

    let solver = gram.solver();
    let zero_bc = BoundarySignals::zeros(g.levels());
    let zero = StatePair::zeros(g.nodes());
    let inner_scheme = SchemeConfig {
        picard_tol: (scheme.picard_tol * 1e-2).max(1e-14),
        ..*scheme
    };
    let linear = p.a1 == 0.0 && p.a2 == 0.0 && !scheme.self_interaction;

    let solve = |rhs: &StatePair, x: &mut StatePair, its: &mut Vec<usize>| -> Result<()> {
        if gram.inner(rhs, rhs).sqrt() >= 1e-14 {
            let kr = krylov_solve(&gram, rhs, tol, &opts)?;
            x.axpy(1.0, &kr.solution);
            its.push(kr.iterations);
        } else {
            its.push(0);
        }
        Ok(())
    };

    let free = solver.forward_final(init, &zero_bc, None)?;
    let mut x = StatePair::zeros(g.nodes());
    let mut krylov_iterations = Vec::new();
    solve(&target.sub(&free), &mut x, &mut krylov_iterations)?;

    let mut residuals: Vec<f64> = Vec::new();
    let mut prev: Option<Trajectory> = None;
    let mut d_prev = StatePair::zeros(g.nodes());
    let fail = |it: usize, residuals: &[f64]| {
        let n = residuals.len();
        let last_ratio = if n >= 2 { residuals[n - 1] / residuals[n - 2] } else { f64::NAN };
        KdvError::NonConvergence {
            iterations: it,
            last_ratio,
            residuals: residuals.to_vec(),
        }
    };

    for it in 1..=scheme.picard_max {
        let controls = gram.controls(&x)?;
        let sol = match solver.nonlinear(init, &controls.signals, &inner_scheme) {
            Ok(s) => s,
            Err(KdvError::NonConvergence { .. }) | Err(KdvError::BlowUp { .. }) | Err(KdvError::NonFinite(_)) => {
                return Err(fail(it, &residuals))
            }
            Err(e) => return Err(e),
        };
        let traj = sol.trajectory;
        let done = match &prev {
            None => linear,
            Some(pt) => {
                let scale = traj.sup_norm(p).max(f64::MIN_POSITIVE);
                let r = traj.sup_distance(pt, p) / scale;
                if !r.is_finite() {
                    return Err(fail(it, &residuals));
                }
                residuals.push(r);
                // three consecutive increases: the map is not contracting
                let n = residuals.len();
                if n >= 4 && residuals[n - 1] > residuals[n - 2] && residuals[n - 2] > residuals[n - 3] && residuals[n - 3] > residuals[n - 4] {
                    return Err(fail(it, &residuals));
                }
                r <= scheme.picard_tol
            }
        };
        if done {
            let achieved = traj.final_state().clone();
            let d = achieved.sub(target);
            let tn = gram.inner(target, target).sqrt();
            let err = gram.inner(&d, &d).sqrt();
            return Ok(NonlinearControlOutcome {
                controls,
                iterations: it,
                residuals,
                terminal_error: if tn > 0.0 { err / tn } else { err },
                achieved,
                trajectory: traj,
                krylov_iterations,
            });
        }
        let forcing = nonlinear_forcing(p, g, &traj.states, scheme.self_interaction);
        let d = solver.forward_final(&zero, &zero_bc, Some(&forcing))?;
        let change = d_prev.sub(&d);
        solve(&change, &mut x, &mut krylov_iterations)?;
        d_prev = d;
        prev = Some(traj);
    }
    Err(fail(scheme.picard_max, &residuals))
}
