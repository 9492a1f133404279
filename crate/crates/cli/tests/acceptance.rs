//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ggkdv::hum::{
    duality_boundary_term, solve_control_with, solve_nonlinear_control_with,
    ControlOptions, Gramian, KrylovMethod,
};
use ggkdv::model::{ConfigKind, ControlConfig, Grid, Parameters, StatePair};
use ggkdv::pde::{BoundarySignals, Forcing, LinearSolver, SchemeConfig};
use ggkdv::ucp::{build_p, lambert_solve, r0_sweep, roots_p, ucp_sweep, Verdict, DEFAULT_DISPERSION_TOL};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn gaussian(x: f64, c: f64, w: f64) -> f64 {
    (-((x - c) / w).powi(2)).exp()
}

/// Smooth random profile, a few low modes times a bump so that the endpoint
/// values and slopes vanish; evaluated identically on every grid.
fn smooth_profile(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 {
    let coef: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    move |x: f64| {
        let bump = 16.0 * (x * (1.0 - x)).powi(2);
        bump * coef.iter().enumerate().map(|(k, c)| c * ((k as f64 + 1.0) * PI * x).sin()).sum::<f64>()
    }
}

fn smooth_signal(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 {
    let coef: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
    move |t: f64| coef.iter().enumerate().map(|(k, c)| c * ((k as f64 + 1.0) * PI * t).sin()).sum::<f64>()
}

fn c1_manufactured() -> Outcome {
    let p = Parameters::linear(0.2, 1.0, 1.0, 1.0);
    let (a, b, c, r) = (p.a, p.b, p.c, p.r);
    let pi3 = PI.powi(3);
    let mut errors = Vec::new();
    for n in [32usize, 64, 128] {
        let g = Grid::new(1.0, n, 1.0, 4 * n).map_err(err)?;
        let forcing = Forcing::from_fn(
            &g,
            |t, x| (-t).exp() * (-(PI * x).sin() - pi3 * (PI * x).cos() + a * pi3 * (PI * x).sin()),
            |t, x| {
                (-t).exp() * (-c * (PI * x).cos() - r * PI * (PI * x).sin() - a * b * pi3 * (PI * x).cos() + pi3 * (PI * x).sin())
            },
        );
        let bc = BoundarySignals::from_fn(&g, |k, t| {
            let e = (-t).exp();
            match k {
                0 => 0.0,
                1 => PI * PI.cos() * e,
                2 => -PI * PI * PI.sin() * e,
                3 => e,
                4 => -PI * PI.sin() * e,
                _ => -PI * PI * PI.cos() * e,
            }
        });
        let init = StatePair::from_fn(&g, |x| (PI * x).sin(), |x| (PI * x).cos());
        let solver = LinearSolver::new(&p, &g, 0.5).map_err(err)?;
        let (traj, _) = solver.forward(&init, &bc, Some(&forcing)).map_err(err)?;
        let mut worst: f64 = 0.0;
        for (k, s) in traj.states.iter().enumerate() {
            let t = g.t(k);
            let exact = StatePair::from_fn(&g, |x| (PI * x).sin() * (-t).exp(), |x| (PI * x).cos() * (-t).exp());
            worst = worst.max(ggkdv::x_norm(&s.sub(&exact), &p, &g).map_err(err)?);
        }
        errors.push(worst);
    }
    let f1 = errors[0] / errors[1];
    let f2 = errors[1] / errors[2];
    check(
        f1 >= 1.8 && f2 >= 1.8,
        format!("sup-X errors {:.3e} {:.3e} {:.3e}, factors {f1:.2} {f2:.2}", errors[0], errors[1], errors[2]),
    )
}

fn duality_errors(n: usize, p: &Parameters) -> Result<Vec<f64>, String> {
    let g = Grid::new(1.0, n, 1.0, 4 * n).map_err(err)?;
    let solver = LinearSolver::new(p, &g, 0.5).map_err(err)?;
    let mut out = Vec::new();
    for i in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i);
        let sig: Vec<_> = (0..6).map(|_| smooth_signal(&mut rng)).collect();
        let bc = BoundarySignals::from_fn(&g, |k, t| sig[k](t));
        let (fu, fv) = (smooth_profile(&mut rng), smooth_profile(&mut rng));
        let fin = StatePair::from_fn(&g, fu, fv);
        let end = solver.forward_final(&StatePair::zeros(g.nodes()), &bc, None).map_err(err)?;
        let (_, traces) = solver.adjoint(&fin).map_err(err)?;
        let lhs = ggkdv::x_inner(&end, &fin, p, &g).map_err(err)?;
        let rhs = duality_boundary_term(&bc, &traces, p, &g).map_err(err)?;
        // Cauchy–Schwarz scale of the pairing; lhs alone can nearly cancel
        let scale = ggkdv::x_norm(&end, p, &g).map_err(err)? * ggkdv::x_norm(&fin, p, &g).map_err(err)?;
        out.push((lhs - rhs).abs() / scale);
    }
    Ok(out)
}

fn c2_duality() -> Outcome {
    let p = Parameters::linear(0.2, 1.0, 1.0, 1.0);
    let coarse = duality_errors(64, &p)?;
    let fine = duality_errors(128, &p)?;
    let mc = coarse.iter().copied().fold(0.0, f64::max);
    let mf = fine.iter().copied().fold(0.0, f64::max);
    check(mc <= 5e-2 && mf < mc, format!("max relative mismatch {mc:.3e} (N=64), {mf:.3e} (N=128)"))
}

fn gramian_defects(n: usize) -> Result<(f64, f64), String> {
    let p = Parameters::linear(0.2, 1.0, 1.0, 1.0);
    let g = Grid::new(1.0, n, 1.0, 4 * n).map_err(err)?;
    let gram = Gramian::new(&ControlConfig::named(ConfigKind::FourI), &p, &g, 0.5).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut min_pos = f64::INFINITY;
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + i);
        let x = StatePair::from_fn(&g, smooth_profile(&mut rng), smooth_profile(&mut rng));
        let y = StatePair::from_fn(&g, smooth_profile(&mut rng), smooth_profile(&mut rng));
        let gx = gram.apply(&x).map_err(err)?;
        let gy = gram.apply(&y).map_err(err)?;
        let nrm = |s: &StatePair| gram.inner(s, s).sqrt();
        let scale = 0.5 * (nrm(&gx) * nrm(&y) + nrm(&x) * nrm(&gy));
        worst = worst.max((gram.inner(&gx, &y) - gram.inner(&x, &gy)).abs() / scale);
        min_pos = min_pos.min(gram.inner(&gx, &x)).min(gram.inner(&gy, &y));
    }
    Ok((worst, min_pos))
}

fn c3_gramian() -> Outcome {
    let (d64, pos64) = gramian_defects(64)?;
    let (d128, pos128) = gramian_defects(128)?;
    check(
        d64 <= 5e-2 && d128 < d64 && pos64 > 0.0 && pos128 > 0.0,
        format!("symmetry defect {d64:.3e} (N=64), {d128:.3e} (N=128); min <Gx,x> {:.3e}", pos64.min(pos128)),
    )
}

fn c4_linear_control() -> Outcome {
    let p = Parameters::linear(0.2, 1.0, 1.0, 1.0);
    let g = Grid::new(1.0, 128, 1.0, 512).map_err(err)?;
    let target = StatePair::from_fn(&g, |x| 1e-2 * gaussian(x, 0.5, 0.1), |x| 1e-2 * gaussian(x, 0.5, 0.1));
    // CG stagnates on the slightly non-symmetric discrete Gramian; GMRES is the default
    let opts = ControlOptions {
        method: KrylovMethod::Gmres,
        ..Default::default()
    };
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in [ConfigKind::FourI, ConfigKind::FourII, ConfigKind::FourIII, ConfigKind::FourIV] {
        let cfg = ControlConfig::named(kind);
        match solve_control_with(&cfg, &StatePair::zeros(g.nodes()), &target, 1e-3, &p, &g, &opts) {
            Ok(o) => {
                ok &= o.terminal_error <= 1e-2;
                parts.push(format!("{} err {:.2e} ({} its)", kind.name(), o.terminal_error, o.iterations));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", kind.name()));
            }
        }
    }
    check(ok, parts.join(", "))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn c5_three_control() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ggkdv");
    let dir = tempfile::tempdir().map_err(err)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (file, want) in [("three_v.toml", 0), ("three_vi.toml", 0), ("three_v_infeasible.toml", 4)] {
        let out = Command::new(bin)
            .arg("run")
            .arg(scenario(file))
            .arg("--output-dir")
            .arg(dir.path().join(file))
            .output()
            .map_err(err)?;
        let code = out.status.code().unwrap_or(-1);
        ok &= code == want;
        let mut note = format!("{file}: exit {code}");
        if want == 0 && code == 0 {
            let run: serde_json::Value = serde_json::from_str(
                &std::fs::read_to_string(dir.path().join(file).join("run.json")).map_err(err)?,
            )
            .map_err(err)?;
            let s = &run["summary"];
            let c1 = s["c1"].as_f64().unwrap_or(f64::NAN);
            let p = &run["scenario"]["params"];
            let lhs = c1 * (1.0 - p["a"].as_f64().unwrap().powi(2) * p["b"].as_f64().unwrap());
            let feasible = lhs > 0.0 && lhs < p["c"].as_f64().unwrap();
            ok &= feasible;
            note += &format!(" (C1(1-a^2b) = {lhs:.3e}, err {:.2e})", s["terminal_error"].as_f64().unwrap_or(f64::NAN));
        }
        if code == 4 {
            ok &= String::from_utf8_lossy(&out.stderr).contains("feasibility");
        }
        parts.push(note);
    }
    check(ok, parts.join(", "))
}

fn c6_nonlinear_control() -> Outcome {
    let p = Parameters::new(0.2, 0.5, 0.5, 1.0, 1.0, 1.0);
    let g = Grid::new(1.0, 128, 1.0, 512).map_err(err)?;
    let target = StatePair::from_fn(&g, |x| 1e-3 * gaussian(x, 0.5, 0.1), |x| 1e-3 * gaussian(x, 0.5, 0.1));
    let scheme = SchemeConfig::default();
    let o = solve_nonlinear_control_with(
        &StatePair::zeros(g.nodes()),
        &target,
        &ControlConfig::named(ConfigKind::FourI),
        1.0,
        &p,
        &g,
        &scheme,
        1e-3,
        &ControlOptions::default(),
    )
    .map_err(err)?;
    let geometric = o.residuals.windows(2).all(|w| w[1] < w[0]);
    check(
        o.iterations <= 10 && geometric && o.terminal_error <= 2e-2,
        format!("{} outer iterations, residuals [{}], terminal error {:.3e}", o.iterations, o.residuals.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>().join(", "), o.terminal_error),
    )
}

fn random_params(rng: &mut ChaCha8Rng) -> Parameters {
    let b: f64 = rng.random_range(0.2..3.0);
    let a = rng.random_range(-0.95..0.95) / b.sqrt();
    Parameters::linear(a, b, rng.random_range(0.2..5.0), rng.random_range(-3.0..3.0))
}

fn c7_girard() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let prm = random_params(&mut rng);
        let p = Complex64::from_polar(10f64.powf(rng.random_range(-1.0..1.0)), rng.random_range(-PI..PI));
        let rs = roots_p(&build_p(p, &prm).map_err(err)?).map_err(err)?;
        worst = worst.max(rs.worst_girard());
    }
    check(worst <= 1e-8, format!("worst elementary-symmetric residual {worst:.3e}"))
}

fn c8_lambert() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = Complex64::from_polar(10f64.powf(rng.random_range(-1.0..1.0)), rng.random_range(-PI..PI));
        let k = rng.random_range(-3..=3);
        let z = lambert_solve(alpha, k).map_err(err)?;
        worst = worst.max((z * z.exp() - alpha).norm() / alpha.norm().max(1.0));
    }
    let z = lambert_solve(Complex64::new(std::f64::consts::E, 0.0), 0).map_err(err)?;
    let e1 = (z - 1.0).norm();
    check(worst <= 1e-10 && e1 <= 1e-12, format!("worst scaled residual {worst:.3e}, |W_0(e) - 1| = {e1:.1e}"))
}

fn c9_ucp() -> Outcome {
    let prm = Parameters::linear(0.2, 1.0, 1.0, 1.0);
    let v = ucp_sweep(&prm, 200, 9, 10.0, DEFAULT_DISPERSION_TOL).map_err(err)?;
    let inconclusive: Vec<_> = v.iter().filter(|x| x.verdict == Verdict::Inconclusive).collect();
    let unflagged = inconclusive.iter().filter(|x| !x.multiple_roots).count();
    for x in &inconclusive {
        eprintln!("    inconclusive: L = {}, p = {}, {}", x.length, x.p, x.detail);
    }
    check(
        unflagged == 0,
        format!("{} draws, {} inconclusive ({} without multiplicity flag)", v.len(), inconclusive.len(), unflagged),
    )
}

fn c10_r0() -> Outcome {
    let reps = r0_sweep(&[0.5, 1.0, PI, 5.0], 21, 1e-8).map_err(err)?;
    let m = reps.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min);
    check(m > 1e-8, format!("{} (s, L) points, min sigma {m:.3e}", reps.len()))
}

fn c11_dissipativity() -> Outcome {
    let p = Parameters::linear(0.2, 1.0, 1.0, 1.0);
    let g = Grid::new(1.0, 64, 1.0, 256).map_err(err)?;
    let solver = LinearSolver::new(&p, &g, 0.5).map_err(err)?;
    let bc = BoundarySignals::zeros(g.levels());
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1100 + i);
        let init = StatePair::from_fn(&g, smooth_profile(&mut rng), smooth_profile(&mut rng));
        let (traj, _) = solver.forward(&init, &bc, None).map_err(err)?;
        let norms = traj.x_norms(&p);
        for w in norms.windows(2) {
            // growth per step relative to dx·‖initial‖
            worst = worst.max((w[1] - w[0]) / (g.dx() * norms[0]));
        }
    }
    check(worst <= 1.0, format!("max step growth {worst:.3e} x dx |init|"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("manufactured-solution convergence", c1_manufactured, 30),
        ("discrete duality identity", c2_duality, 60),
        ("Gramian symmetry and positivity", c3_gramian, 300),
        ("linear controllability FOUR_I-IV", c4_linear_control, 600),
        ("three-control feasibility path", c5_three_control, 600),
        ("nonlinear control", c6_nonlinear_control, 900),
        ("Newton-Girard relations", c7_girard, 5),
        ("Lambert residuals", c8_lambert, 1),
        ("UCP sweep", c9_ucp, 30),
        ("r = 0 eigencheck", c10_r0, 10),
        ("dissipativity", c11_dissipativity, 30),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let res = f();
        let dt = t0.elapsed();
        let in_time = dt <= Duration::from_secs(*budget);
        let (status, detail) = match &res {
            Ok(d) if in_time => ("PASS", d.clone()),
            Ok(d) => ("FAIL", format!("{d}; over the {budget} s budget")),
            Err(d) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {status}: {name} -- {detail} [{:.2} s]", i + 1, dt.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
