//! Scenario dispatch and artifact writing.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::json;

use super::scenario::{Command, Scenario, StateSpec};
use crate::error::{KdvError, Result};
use crate::hum::{estimate_observability, solve_control_with, solve_nonlinear_control_with};
use crate::model::{Grid, SIGNAL_NAMES};
use crate::pde::{BoundarySignals, LinearSolver, TraceBundle, Trajectory, TRACE_COLUMNS};
use crate::ucp::{degree_certificate, r0_sweep, ucp_sweep, DegreeConfig, Verdict};

/// Process exit status for an error: 2 input, 3 numerical, 4 infeasible.
pub fn exit_code(e: &KdvError) -> i32 {
    match e {
        KdvError::Parse(_)
        | KdvError::ConstraintViolation(_)
        | KdvError::InvalidGrid(_)
        | KdvError::ConfigMismatch(_)
        | KdvError::DimensionMismatch { .. }
        | KdvError::Io(_) => 2,
        KdvError::Infeasible { .. } => 4,
        _ => 3,
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let g = traj.grid;
    let xs = g.xs();
    let mut out = String::from("t,x,u,v\n");
    for (n, s) in traj.states.iter().enumerate() {
        let t = fmt(g.t(n));
        for (i, x) in xs.iter().enumerate() {
            let _ = writeln!(out, "{t},{},{},{}", fmt(*x), fmt(s.u[i]), fmt(s.v[i]));
        }
    }
    out
}

pub fn traces_csv(g: &Grid, traces: &TraceBundle) -> String {
    let mut out = format!("t,{}\n", TRACE_COLUMNS.join(","));
    let cols = traces.columns();
    for (n, t) in g.ts().into_iter().enumerate() {
        out.push_str(&fmt(t));
        for c in &cols {
            out.push(',');
            out.push_str(&fmt(c[n]));
        }
        out.push('\n');
    }
    out
}

pub fn controls_csv(g: &Grid, s: &BoundarySignals) -> String {
    let mut out = format!("t,{}\n", SIGNAL_NAMES.join(","));
    let cols = s.as_array();
    for (n, t) in g.ts().into_iter().enumerate() {
        out.push_str(&fmt(t));
        for c in cols {
            out.push(',');
            out.push_str(&fmt(c[n]));
        }
        out.push('\n');
    }
    out
}

/// Everything a run produces, held in memory until it succeeds.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub summary: serde_json::Value,
}

fn state(spec: &Option<StateSpec>, g: &Grid, base: &Path, what: &str) -> Result<crate::model::StatePair> {
    spec.clone().unwrap_or_else(StateSpec::zero).sample(g, base, what)
}

/// Runs a scenario; relative data files resolve against `base`.
pub fn execute(s: &Scenario, base: &Path) -> Result<RunOutput> {
    s.validate()?;
    let mut files = Vec::new();
    let summary = match s.command {
        Command::Simulate => {
            let (p, g) = (s.params()?, s.grid()?);
            let init = state(&s.initial, &g, base, "initial")?;
            let bc = s.boundary.clone().unwrap_or_default().sample(&g, base)?;
            let forcing = s.forcing.as_ref().map(|f| f.sample(&g)).transpose()?;
            let solver = LinearSolver::new(&p, &g, s.scheme.theta)?;
            let (traj, traces, iterations, residuals) = if s.simulate.nonlinear {
                if forcing.is_some() {
                    return Err(KdvError::ConfigMismatch("forcing is only supported for linear simulation".into()));
                }
                let sol = solver.nonlinear(&init, &bc, &s.scheme)?;
                (sol.trajectory, sol.traces, sol.iterations, sol.residuals)
            } else {
                let (t, tr) = solver.forward(&init, &bc, forcing.as_ref())?;
                (t, tr, 1, vec![])
            };
            let norms = traj.x_norms(&p);
            files.push(("trajectory.csv".into(), trajectory_csv(&traj)));
            files.push(("traces.csv".into(), traces_csv(&g, &traces)));
            json!({
                "final_x_norm": norms.last(),
                "max_x_norm": norms.iter().copied().fold(0.0, f64::max),
                "picard_iterations": iterations,
                "picard_residuals": residuals,
            })
        }
        Command::Adjoint => {
            let (p, g) = (s.params()?, s.grid()?);
            let fin = state(&s.target, &g, base, "target")?;
            let solver = LinearSolver::new(&p, &g, s.scheme.theta)?;
            let (traj, traces) = solver.adjoint(&fin)?;
            let norms = traj.x_norms(&p);
            files.push(("trajectory.csv".into(), trajectory_csv(&traj)));
            files.push(("traces.csv".into(), traces_csv(&g, &traces)));
            json!({ "initial_x_norm": norms.first(), "final_x_norm": norms.last() })
        }
        Command::Control => {
            let (p, g, cfg) = (s.params()?, s.grid()?, s.control_config()?);
            let init = state(&s.initial, &g, base, "initial")?;
            let target = state(&s.target, &g, base, "target")?;
            let out = solve_control_with(&cfg, &init, &target, s.control.tol, &p, &g, &s.control_options())?;
            let solver = LinearSolver::new(&p, &g, s.scheme.theta)?;
            let (traj, _) = solver.forward(&init, &out.controls.signals, None)?;
            files.push(("controls.csv".into(), controls_csv(&g, &out.controls.signals)));
            files.push(("trajectory.csv".into(), trajectory_csv(&traj)));
            json!({
                "config": cfg.kind.name(),
                "terminal_error": out.terminal_error,
                "krylov_iterations": out.iterations,
                "krylov_residuals": out.residuals,
                "control_norms": out.controls.norms,
                "c1": out.c1,
            })
        }
        Command::NonlinearControl => {
            let (p, g, cfg) = (s.params()?, s.grid()?, s.control_config()?);
            let init = state(&s.initial, &g, base, "initial")?;
            let target = state(&s.target, &g, base, "target")?;
            let delta = s.control.delta.unwrap_or(f64::INFINITY);
            let out = solve_nonlinear_control_with(
                &init,
                &target,
                &cfg,
                delta,
                &p,
                &g,
                &s.scheme,
                s.control.tol,
                &s.control_options(),
            )?;
            files.push(("controls.csv".into(), controls_csv(&g, &out.controls.signals)));
            files.push(("trajectory.csv".into(), trajectory_csv(&out.trajectory)));
            json!({
                "config": cfg.kind.name(),
                "terminal_error": out.terminal_error,
                "outer_iterations": out.iterations,
                "outer_residuals": out.residuals,
                "krylov_iterations": out.krylov_iterations,
                "control_norms": out.controls.norms,
            })
        }
        Command::Observe => {
            let (p, g, cfg) = (s.params()?, s.grid()?, s.control_config()?);
            let rep = estimate_observability(&cfg, s.observe.samples, &p, &g, s.seed)?;
            let mut csv = String::from("sample,quotient\n");
            for (i, q) in rep.quotients.iter().enumerate() {
                let _ = writeln!(csv, "{i},{}", fmt(*q));
            }
            files.push(("observability.csv".into(), csv));
            let c1 = rep.feasibility_constant();
            json!({
                "config": cfg.kind.name(),
                "quotient_min": rep.quotient_min,
                "samples": rep.sample_count,
                "rejected": rep.rejected,
                "c_hidden": rep.c_hidden,
                "c1": c1,
                "feasibility_lhs": c1 * p.defect(),
                "feasible": rep.feasible(&p),
            })
        }
        Command::UcpSweep => {
            let p = s.params()?;
            let verdicts = ucp_sweep(&p, s.ucp.count, s.seed, s.ucp.l_max, s.ucp.tol)?;
            let mut csv = String::from("L,re_p,im_p,case_tag,dispersion,verdict\n");
            for v in &verdicts {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    fmt(v.length),
                    fmt(v.p.re),
                    fmt(v.p.im),
                    v.case_tag.name(),
                    fmt(v.dispersion),
                    v.verdict.name()
                );
            }
            files.push(("ucp.csv".into(), csv));
            let dp = Complex64::new(s.ucp.degree_p[0], s.ucp.degree_p[1]);
            let degrees: Vec<_> = DegreeConfig::ALL
                .iter()
                .map(|&c| {
                    let n = c.free_traces().iter().filter(|&&f| f).count();
                    degree_certificate(c, dp, &p, &vec![Complex64::new(1.0, 0.0); n]).map(|r| {
                        json!({
                            "config": c.name(),
                            "formal_degrees": r.formal_degrees,
                            "denominator_degree": r.denominator_degree,
                            "obstructed": r.obstructed,
                        })
                    })
                })
                .collect::<Result<_>>()?;
            let inconclusive = verdicts.iter().filter(|v| v.verdict == Verdict::Inconclusive).count();
            json!({
                "samples": verdicts.len(),
                "inconclusive": inconclusive,
                "multiplicity_flagged": verdicts.iter().filter(|v| v.multiple_roots).count(),
                "min_relative_dispersion": verdicts.iter().map(|v| v.dispersion / v.w_scale).fold(f64::INFINITY, f64::min),
                "degree_certificates": degrees,
            })
        }
        Command::R0Check => {
            let reps = r0_sweep(&s.r0.lengths, s.r0.grid_points, s.r0.tol)?;
            let mut csv = String::from("L,re_s,im_s,sigma_min,trivial_only\n");
            for r in &reps {
                let _ = writeln!(csv, "{},{},{},{},{}", fmt(r.length), fmt(r.s.re), fmt(r.s.im), fmt(r.sigma_min), r.trivial_only);
            }
            files.push(("r0.csv".into(), csv));
            json!({
                "points": reps.len(),
                "sigma_min": reps.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min),
                "all_trivial": reps.iter().all(|r| r.trivial_only),
            })
        }
    };
    let run = json!({
        "command": s.command.name(),
        "scenario": s,
        "summary": summary,
    });
    let text = serde_json::to_string_pretty(&run).map_err(|e| KdvError::Io(e.to_string()))?;
    files.push(("run.json".into(), text + "\n"));
    Ok(RunOutput { files, summary })
}

/// Writes every file to a temporary name in `dir` first and renames only
/// once all of them are complete.
pub fn write_artifacts(dir: &Path, files: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, content) in files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(content.as_bytes())?;
        tmp.as_file().sync_all()?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, path) in staged {
        tmp.persist(&path).map_err(|e| KdvError::Io(e.to_string()))?;
    }
    Ok(())
}

/// Parse, run and write artifacts. `output_dir` and `seed` override the file.
pub fn run_scenario(path: &Path, output_dir: Option<&Path>, seed: Option<u64>) -> Result<(PathBuf, RunOutput)> {
    let mut s = Scenario::from_file(path)?;
    if let Some(k) = seed {
        s.seed = k;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let dir = match (output_dir, &s.output_dir) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(d)) => base.join(d),
        (None, None) => {
            let stem = path.file_stem().and_then(|x| x.to_str()).unwrap_or("scenario");
            base.join(format!("{stem}_out"))
        }
    };
    let out = execute(&s, &base)?;
    write_artifacts(&dir, &out.files)?;
    Ok((dir, out))
}
