use std::f64::consts::PI;

use ggkdv::hum::{duality_boundary_term, Gramian};
use ggkdv::sobolev::sobolev_inner;
use ggkdv::*;

fn params() -> Parameters {
    Parameters::linear(0.2, 1.0, 1.0, 1.0)
}

fn bump(x: f64) -> f64 {
    16.0 * (x * (1.0 - x)).powi(2)
}

#[test]
fn x_norm_converges_under_refinement() {
    // ‖(x², eˣ)‖²_X = (b/c)/5 + (e² - 1)/2 on (0, 1)
    let p = Parameters::linear(0.3, 2.0, 4.0, 1.0);
    let e = std::f64::consts::E;
    let exact = (0.5f64 / 5.0 + (e * e - 1.0) / 2.0).sqrt();
    let mut prev = f64::INFINITY;
    for n in [16, 32, 64, 128] {
        let g = Grid::new(1.0, n, 1.0, 4).unwrap();
        let s = StatePair::from_fn(&g, |x| x * x, f64::exp);
        let e = (x_norm(&s, &p, &g).unwrap() - exact).abs();
        assert!(e < prev / 3.5, "n = {n}: {e:e} vs {prev:e}");
        prev = e;
    }
    assert!(prev < 5e-5);
}

#[test]
fn sobolev_matches_naive_dft() {
    let m = 40;
    let t_end = 1.7;
    let f: Vec<f64> = (0..=m).map(|n| {
        let t = t_end * n as f64 / m as f64;
        (3.0 * t).sin() + t * t - 0.4
    }).collect();
    // reflected sequence, direct O(n²) transform
    let mut ext = f.clone();
    ext.extend(f[1..m].iter().rev());
    let len = ext.len();
    for s in [-1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0] {
        let mut acc = 0.0;
        for k in 0..len {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, x) in ext.iter().enumerate() {
                let th = -2.0 * PI * (k * n) as f64 / len as f64;
                re += x * th.cos();
                im += x * th.sin();
            }
            let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
            let w = (1.0 + (PI * kk / t_end).powi(2)).powf(s);
            acc += w * (re * re + im * im);
        }
        let naive = 0.5 * (t_end / m as f64) * acc / len as f64;
        let fast = sobolev_inner(&f, &f, s, t_end).unwrap();
        assert!((naive - fast).abs() <= 1e-12 * naive, "s = {s}: {naive} vs {fast}");
    }
}

#[test]
fn sobolev_single_cosine_mode_exact() {
    // cos(πt) on (0, 1): ‖·‖²_s = (1 + π²)^s / 2 for every sampling
    for m in [8, 33, 256] {
        let f: Vec<f64> = (0..=m).map(|n| (PI * n as f64 / m as f64).cos()).collect();
        for s in [-1.0 / 3.0, 1.0 / 3.0] {
            let got = sobolev_trace_norm(&f, s, 1.0).unwrap().powi(2);
            let want = (1.0 + PI * PI).powf(s) / 2.0;
            assert!((got - want).abs() < 1e-13, "m = {m}, s = {s}: {got} vs {want}");
        }
    }
}

#[test]
fn forward_map_is_linear() {
    let p = params();
    let g = Grid::new(1.0, 32, 1.0, 64).unwrap();
    let solver = LinearSolver::new(&p, &g, 0.5).unwrap();
    let i1 = StatePair::from_fn(&g, |x| bump(x) * (2.0 * PI * x).sin(), bump);
    let i2 = StatePair::from_fn(&g, bump, |x| -bump(x) * (PI * x).cos());
    let b1 = BoundarySignals::from_fn(&g, |k, t| (k as f64 + 1.0) * (PI * t).sin());
    let b2 = BoundarySignals::from_fn(&g, |k, t| if k % 2 == 0 { t * t } else { 0.0 });
    let (alpha, beta) = (1.7, -0.6);
    let f1 = solver.forward_final(&i1, &b1, None).unwrap();
    let f2 = solver.forward_final(&i2, &b2, None).unwrap();
    let comb = solver
        .forward_final(&i1.scaled(alpha).add(&i2.scaled(beta)), &b1.scaled(alpha).add(&b2.scaled(beta)), None)
        .unwrap();
    let want = f1.scaled(alpha).add(&f2.scaled(beta));
    assert!(comb.sub(&want).max_abs() <= 1e-10 * want.max_abs());
}

#[test]
fn homogeneous_decay_across_parameters() {
    let g = Grid::new(1.0, 48, 1.0, 96).unwrap();
    let init = StatePair::from_fn(&g, |x| bump(x) * (3.0 * PI * x).sin(), bump);
    for (a, b, c, r) in [(0.0, 1.0, 1.0, 0.0), (0.2, 1.0, 1.0, 1.0), (0.5, 2.0, 0.3, -1.0), (-0.6, 1.5, 5.0, 2.0), (0.5, 1.0, 1e5, 1.0)] {
        let p = Parameters::linear(a, b, c, r);
        let solver = LinearSolver::new(&p, &g, 0.5).unwrap();
        let (traj, _) = solver.forward(&init, &BoundarySignals::zeros(g.levels()), None).unwrap();
        let n = traj.x_norms(&p);
        assert!(n.iter().all(|x| x.is_finite()));
        assert!(n[n.len() - 1] <= n[0] * (1.0 + g.dx()), "params {a} {b} {c} {r}: {} -> {}", n[0], n[n.len() - 1]);
    }
}

#[test]
fn manufactured_solution_second_order() {
    let p = params();
    let (a, b, c, r) = (p.a, p.b, p.c, p.r);
    let pi3 = PI.powi(3);
    let err = |n: usize| {
        let g = Grid::new(1.0, n, 1.0, 4 * n).unwrap();
        let forcing = Forcing::from_fn(
            &g,
            |t, x| (-t).exp() * (-(PI * x).sin() - pi3 * (PI * x).cos() + a * pi3 * (PI * x).sin()),
            |t, x| (-t).exp() * (-c * (PI * x).cos() - r * PI * (PI * x).sin() - a * b * pi3 * (PI * x).cos() + pi3 * (PI * x).sin()),
        );
        let bc = BoundarySignals::from_fn(&g, |k, t| (-t).exp() * [0.0, -PI, 0.0, 1.0, 0.0, PI * PI][k]);
        let init = StatePair::from_fn(&g, |x| (PI * x).sin(), |x| (PI * x).cos());
        let fin = solve_linear_forward(&p, &g, &init, &bc, Some(&forcing)).unwrap().0;
        let exact = StatePair::from_fn(&g, |x| (PI * x).sin() / 1f64.exp(), |x| (PI * x).cos() / 1f64.exp());
        x_norm(&fin.final_state().sub(&exact), &p, &g).unwrap()
    };
    let (e1, e2) = (err(24), err(48));
    assert!(e1 / e2 > 3.0, "{e1:e} {e2:e}");
}

#[test]
fn duality_improves_under_refinement() {
    let p = params();
    let mismatch = |n: usize| {
        let g = Grid::new(1.0, n, 1.0, 4 * n).unwrap();
        let solver = LinearSolver::new(&p, &g, 0.5).unwrap();
        let bc = BoundarySignals::from_fn(&g, |k, t| ((k + 1) as f64 * PI * t).sin() * if k < 3 { 1.0 } else { -0.5 });
        let fin = StatePair::from_fn(&g, |x| bump(x) * (PI * x).sin(), |x| bump(x) * (2.0 * PI * x).sin());
        let end = solver.forward_final(&StatePair::zeros(g.nodes()), &bc, None).unwrap();
        let tr = solver.adjoint_traces(&fin).unwrap();
        let lhs = x_inner(&end, &fin, &p, &g).unwrap();
        let rhs = duality_boundary_term(&bc, &tr, &p, &g).unwrap();
        (lhs - rhs).abs() / (x_norm(&end, &p, &g).unwrap() * x_norm(&fin, &p, &g).unwrap())
    };
    let (m1, m2) = (mismatch(32), mismatch(64));
    assert!(m1 < 0.1 && m2 < m1 / 2.0, "{m1:e} {m2:e}");
}

#[test]
fn gramian_is_nearly_symmetric_and_positive() {
    let p = params();
    let g = Grid::new(1.0, 32, 1.0, 128).unwrap();
    let gram = Gramian::new(&ControlConfig::named(ConfigKind::FourI), &p, &g, 0.5).unwrap();
    let x = StatePair::from_fn(&g, |x| bump(x) * (PI * x).sin(), bump);
    let y = StatePair::from_fn(&g, |x| bump(x) * x, |x| bump(x) * (3.0 * PI * x).cos());
    let (gx, gy) = (gram.apply(&x).unwrap(), gram.apply(&y).unwrap());
    let defect = (gram.inner(&gx, &y) - gram.inner(&x, &gy)).abs();
    let scale = gram.inner(&gx, &gx).sqrt() * gram.inner(&y, &y).sqrt();
    assert!(defect < 5e-2 * scale);
    assert!(gram.inner(&gx, &x) > 0.0 && gram.inner(&gy, &y) > 0.0);
}
