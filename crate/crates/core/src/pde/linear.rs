//! θ-scheme for the linear forward and adjoint problems.
//!
//! Unknowns are interleaved, u_i at 2i and v_i at 2i + 1, which keeps every
//! row within 7 entries of the diagonal. Both problems are written as
//! `Mass U' = A U` on PDE rows plus algebraic boundary rows; the adjoint runs
//! in reversed time τ = T - t.

use super::stencils::{D1_AT_0, D1_CENTERED, D2_AT_L, D3_CENTERED, D3_LEFT, D3_RIGHT, D1_AT_L};
use super::trace::TraceBundle;
use super::{BoundarySignals, Forcing, Trajectory};
use crate::banded::{BandLu, BandMatrix};
use crate::error::{KdvError, Result};
use crate::model::{validate_params, Grid, Parameters, StatePair};

const BAND: usize = 7;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Adjoint,
}

#[inline]
fn iu(i: usize) -> usize {
    2 * i
}

#[inline]
fn iv(i: usize) -> usize {
    2 * i + 1
}

struct Stepper {
    lhs: BandLu,
    rhs: BandMatrix,
    is_bc: Vec<bool>,
}

/// Spatial operator, mass diagonal, and boundary rows.
fn assemble(p: &Parameters, g: &Grid, dir: Direction) -> (BandMatrix, Vec<f64>, BandMatrix) {
    let n = g.interior;
    let dim = 2 * g.nodes();
    let dx = g.dx();
    let dx3 = dx * dx * dx;
    let (a, b, c, r) = (p.a, p.b, p.c, p.r);

    let mut op = BandMatrix::zeros(dim, BAND, BAND);
    let mut bc = BandMatrix::zeros(dim, BAND, BAND);
    let mut mass = vec![0.0; dim];

    // forward: u_t = -(u_xxx + a v_xxx), c v_t = -(r v_x + ab u_xxx + v_xxx)
    // adjoint (in τ): φ_τ = φ_xxx + a ψ_xxx, c ψ_τ = ab φ_xxx + r ψ_x + ψ_xxx
    let (sign, rows) = match dir {
        Direction::Forward => (-1.0, 1..n),
        Direction::Adjoint => (1.0, 2..n + 1),
    };
    for i in rows {
        let st: &[(isize, f64)] = match dir {
            Direction::Forward if i == 1 => &D3_LEFT,
            Direction::Adjoint if i == n => &D3_RIGHT,
            _ => &D3_CENTERED,
        };
        for &(o, w) in st {
            let j = (i as isize + o) as usize;
            let w = sign * w / dx3;
            op.add(iu(i), iu(j), w);
            op.add(iu(i), iv(j), a * w);
            op.add(iv(i), iu(j), a * b * w);
            op.add(iv(i), iv(j), w);
        }
        for &(o, w) in &D1_CENTERED {
            let j = (i as isize + o) as usize;
            op.add(iv(i), iv(j), sign * r * w / dx);
        }
        mass[iu(i)] = 1.0;
        mass[iv(i)] = c;
    }

    let last = n + 1;
    let dx2 = dx * dx;
    bc.set(iu(0), iu(0), 1.0);
    bc.set(iv(0), iv(0), 1.0);
    match dir {
        Direction::Forward => {
            for (k, w) in D1_AT_L.iter().enumerate() {
                bc.set(iu(n), iu(last - k), w / dx);
                bc.set(iv(n), iv(last - k), w / dx);
            }
            for (k, w) in D2_AT_L.iter().enumerate() {
                bc.set(iu(last), iu(last - k), w / dx2);
                bc.set(iv(last), iv(last - k), w / dx2);
            }
        }
        Direction::Adjoint => {
            for (k, w) in D1_AT_0.iter().enumerate() {
                bc.set(iu(1), iu(k), w / dx);
                bc.set(iv(1), iv(k), w / dx);
            }
            // φ_xx + a ψ_xx = 0,  ab φ_xx + r ψ + ψ_xx = 0  at x = L
            for (k, w) in D2_AT_L.iter().enumerate() {
                let w = w / dx2;
                let j = last - k;
                bc.add(iu(last), iu(j), w);
                bc.add(iu(last), iv(j), a * w);
                bc.add(iv(last), iu(j), a * b * w);
                bc.add(iv(last), iv(j), w);
            }
            bc.add(iv(last), iv(last), r);
        }
    }
    (op, mass, bc)
}

fn stepper(p: &Parameters, g: &Grid, theta: f64, dir: Direction) -> Result<Stepper> {
    let (op, mass, bc) = assemble(p, g, dir);
    let dim = mass.len();
    let dt = g.dt();
    let mut diag = BandMatrix::zeros(dim, BAND, BAND);
    for (i, m) in mass.iter().enumerate() {
        diag.set(i, i, m / dt);
    }
    let mut lhs = diag.combine(1.0, &op, -theta);
    let mut rhs = diag.combine(1.0, &op, 1.0 - theta);
    let is_bc: Vec<bool> = mass.iter().map(|&m| m == 0.0).collect();
    for (i, &bcrow) in is_bc.iter().enumerate() {
        if bcrow {
            lhs.copy_row_from(&bc, i);
            rhs.clear_row(i);
        }
    }
    let lhs = lhs.factor().map_err(|e| match e {
        KdvError::Singular { context } => KdvError::Singular {
            context: format!(
                "{} step matrix: {context}",
                if dir == Direction::Forward { "forward" } else { "adjoint" }
            ),
        },
        other => other,
    })?;
    Ok(Stepper { lhs, rhs, is_bc })
}

fn interleave(s: &StatePair, out: &mut [f64]) {
    for (i, (u, v)) in s.u.iter().zip(&s.v).enumerate() {
        out[2 * i] = *u;
        out[2 * i + 1] = *v;
    }
}

fn deinterleave(x: &[f64]) -> StatePair {
    StatePair {
        u: x.iter().step_by(2).copied().collect(),
        v: x.iter().skip(1).step_by(2).copied().collect(),
    }
}

fn blow_up(level: usize, x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(KdvError::BlowUp {
            level,
            context: "non-finite state".into(),
        })
    }
}

/// Factored step matrices for one (parameters, grid, θ); reusable across solves.
pub struct LinearSolver {
    params: Parameters,
    grid: Grid,
    theta: f64,
    forward: Stepper,
    adjoint: Stepper,
}

impl LinearSolver {
    pub fn new(params: &Parameters, grid: &Grid, theta: f64) -> Result<Self> {
        validate_params(*params)?;
        grid.validate()?;
        if !(0.5..=1.0).contains(&theta) {
            return Err(KdvError::ConstraintViolation(format!("theta must lie in [1/2, 1], got {theta}")));
        }
        Ok(Self {
            params: *params,
            grid: *grid,
            theta,
            forward: stepper(params, grid, theta, Direction::Forward)?,
            adjoint: stepper(params, grid, theta, Direction::Adjoint)?,
        })
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Forward march; `visit(n, state)` is called for every time level.
    fn march_forward(
        &self,
        init: &StatePair,
        bc: &BoundarySignals,
        forcing: Option<&Forcing>,
        mut visit: impl FnMut(usize, &[f64]),
    ) -> Result<()> {
        let g = &self.grid;
        init.check(g, "initial state")?;
        bc.check(g)?;
        if let Some(f) = forcing {
            f.check(g)?;
        }
        let n = g.interior;
        let dim = 2 * g.nodes();
        let th = self.theta;
        let st = &self.forward;
        let mut x = vec![0.0; dim];
        let mut y = vec![0.0; dim];
        interleave(init, &mut x);
        visit(0, &x);
        for level in 1..g.levels() {
            st.rhs.matvec_into(&x, &mut y);
            if let Some(f) = forcing {
                for i in 0..g.nodes() {
                    if !st.is_bc[iu(i)] {
                        y[iu(i)] += th * f.p[level][i] + (1.0 - th) * f.p[level - 1][i];
                        y[iv(i)] += th * f.q[level][i] + (1.0 - th) * f.q[level - 1][i];
                    }
                }
            }
            y[iu(0)] = bc.h0[level];
            y[iv(0)] = bc.g0[level];
            y[iu(n)] = bc.h1[level];
            y[iv(n)] = bc.g1[level];
            y[iu(n + 1)] = bc.h2[level];
            y[iv(n + 1)] = bc.g2[level];
            st.lhs.solve_in_place(&mut y);
            std::mem::swap(&mut x, &mut y);
            blow_up(level, &x)?;
            visit(level, &x);
        }
        Ok(())
    }

    pub fn forward(
        &self,
        init: &StatePair,
        bc: &BoundarySignals,
        forcing: Option<&Forcing>,
    ) -> Result<(Trajectory, TraceBundle)> {
        let dx = self.grid.dx();
        let mut states = Vec::with_capacity(self.grid.levels());
        let mut traces = TraceBundle::with_capacity(self.grid.levels());
        self.march_forward(init, bc, forcing, |_, x| {
            let s = deinterleave(x);
            traces.push(&s, dx);
            states.push(s);
        })?;
        Ok((
            Trajectory {
                grid: self.grid,
                states,
            },
            traces,
        ))
    }

    /// State at t = T only.
    pub fn forward_final(
        &self,
        init: &StatePair,
        bc: &BoundarySignals,
        forcing: Option<&Forcing>,
    ) -> Result<StatePair> {
        let mut last = Vec::new();
        let m = self.grid.steps;
        self.march_forward(init, bc, forcing, |n, x| {
            if n == m {
                last = x.to_vec();
            }
        })?;
        Ok(deinterleave(&last))
    }

    fn march_adjoint(&self, final_state: &StatePair, mut visit: impl FnMut(usize, &[f64])) -> Result<()> {
        let g = &self.grid;
        final_state.check(g, "adjoint final state")?;
        let dim = 2 * g.nodes();
        let st = &self.adjoint;
        let mut x = vec![0.0; dim];
        let mut y = vec![0.0; dim];
        interleave(final_state, &mut x);
        let m = g.steps;
        visit(m, &x);
        for k in 1..g.levels() {
            st.rhs.matvec_into(&x, &mut y);
            // boundary rows are homogeneous and already zeroed by `rhs`
            st.lhs.solve_in_place(&mut y);
            std::mem::swap(&mut x, &mut y);
            blow_up(m - k, &x)?;
            visit(m - k, &x);
        }
        Ok(())
    }

    /// Backward adjoint solve; states are indexed by forward time level.
    pub fn adjoint(&self, final_state: &StatePair) -> Result<(Trajectory, TraceBundle)> {
        let levels = self.grid.levels();
        let mut states = vec![StatePair::zeros(0); levels];
        self.march_adjoint(final_state, |n, x| states[n] = deinterleave(x))?;
        let traces = super::extract_traces(&states, &self.grid);
        Ok((
            Trajectory {
                grid: self.grid,
                states,
            },
            traces,
        ))
    }

    /// Adjoint boundary traces without storing the trajectory.
    pub fn adjoint_traces(&self, final_state: &StatePair) -> Result<TraceBundle> {
        let levels = self.grid.levels();
        let dx = self.grid.dx();
        let mut rows: Vec<Option<StatePair>> = vec![None; levels];
        // Traces only need the four nodes at each end.
        self.march_adjoint(final_state, |n, x| {
            let nodes = x.len() / 2;
            let pick = |off: usize| -> Vec<f64> {
                let mut v: Vec<f64> = (0..4).map(|i| x[2 * i + off]).collect();
                v.extend((nodes - 4..nodes).map(|i| x[2 * i + off]));
                v
            };
            rows[n] = Some(StatePair::new(pick(0), pick(1)));
        })?;
        let mut tb = TraceBundle::with_capacity(levels);
        for s in rows.into_iter().flatten() {
            tb.push(&s, dx);
        }
        Ok(tb)
    }
}

/// Linear forward solve with Crank–Nicolson stepping.
pub fn solve_linear_forward(
    p: &Parameters,
    g: &Grid,
    init: &StatePair,
    bc: &BoundarySignals,
    forcing: Option<&Forcing>,
) -> Result<(Trajectory, TraceBundle)> {
    LinearSolver::new(p, g, 0.5)?.forward(init, bc, forcing)
}

/// Backward adjoint solve from data at t = T, Crank–Nicolson stepping.
pub fn solve_adjoint_backward(p: &Parameters, g: &Grid, final_state: &StatePair) -> Result<(Trajectory, TraceBundle)> {
    LinearSolver::new(p, g, 0.5)?.adjoint(final_state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::extract_traces;

    fn setup() -> (Parameters, Grid) {
        (Parameters::linear(0.3, 1.0, 1.5, 1.0), Grid::new(1.0, 24, 1.0, 48).unwrap())
    }

    #[test]
    fn zero_in_zero_out() {
        let (p, g) = setup();
        let (traj, tr) = solve_linear_forward(&p, &g, &StatePair::zeros(g.nodes()), &BoundarySignals::zeros(g.levels()), None).unwrap();
        assert_eq!(traj.states.len(), g.levels());
        assert!(traj.states.iter().all(|s| s.is_zero()));
        assert!(tr.columns().iter().all(|c| c.iter().all(|&x| x == 0.0)));
        let (adj, _) = solve_adjoint_backward(&p, &g, &StatePair::zeros(g.nodes())).unwrap();
        assert!(adj.states.iter().all(|s| s.is_zero()));
    }

    #[test]
    fn boundary_rows_are_enforced() {
        let (p, g) = setup();
        let bc = BoundarySignals::from_fn(&g, |k, t| (k as f64 + 1.0) * (3.0 * t).sin());
        let (traj, tr) = solve_linear_forward(&p, &g, &StatePair::zeros(g.nodes()), &bc, None).unwrap();
        for n in 1..g.levels() {
            assert!((tr.u.value_0[n] - bc.h0[n]).abs() < 1e-9);
            assert!((tr.u.dx_l[n] - bc.h1[n]).abs() < 1e-8);
            assert!((tr.u.dxx_l[n] - bc.h2[n]).abs() < 1e-7);
            assert!((tr.v.value_0[n] - bc.g0[n]).abs() < 1e-9);
            assert!((tr.v.dx_l[n] - bc.g1[n]).abs() < 1e-8);
            assert!((tr.v.dxx_l[n] - bc.g2[n]).abs() < 1e-7);
        }
        assert_eq!(extract_traces(&traj.states, &g), tr);
    }

    #[test]
    fn adjoint_boundary_rows_hold() {
        let (p, g) = setup();
        let fin = StatePair::from_fn(&g, |x| (x * (1.0 - x)).powi(2) * 10.0, |x| (3.0 * x).sin() * x * x * (1.0 - x));
        let (traj, tr) = solve_adjoint_backward(&p, &g, &fin).unwrap();
        assert_eq!(traj.states[g.steps], fin);
        for n in 0..g.steps {
            assert!(tr.u.value_0[n].abs() < 1e-12 && tr.v.value_0[n].abs() < 1e-12);
            assert!(tr.u.dx_0[n].abs() < 1e-9 && tr.v.dx_0[n].abs() < 1e-9);
            let phi_xx = tr.u.dxx_l[n] + p.a * tr.v.dxx_l[n];
            let psi = p.a * p.b * tr.u.dxx_l[n] + p.r * tr.v.value_l[n] + tr.v.dxx_l[n];
            assert!(phi_xx.abs() < 1e-7 && psi.abs() < 1e-7, "{phi_xx} {psi}");
        }
        let solver = LinearSolver::new(&p, &g, 0.5).unwrap();
        let fast = solver.adjoint_traces(&fin).unwrap();
        for (a, b) in fast.columns().iter().zip(tr.columns()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn decoupled_system_matches_scalar_problems() {
        // With a = r = 0 each component evolves alone, so switching one input
        // off must leave the other component untouched.
        let p = Parameters::linear(0.0, 1.0, 2.0, 0.0);
        let g = Grid::new(1.0, 20, 0.5, 40).unwrap();
        let init = StatePair::from_fn(&g, |x| (x * (1.0 - x)).powi(2), |x| x.powi(2) * (1.0 - x).powi(3));
        let bc = BoundarySignals::from_fn(&g, |k, t| (k as f64 + 1.0) * t * t);
        let (both, _) = solve_linear_forward(&p, &g, &init, &bc, None).unwrap();
        let only_u = StatePair::new(init.u.clone(), vec![0.0; g.nodes()]);
        let (u_alone, _) = solve_linear_forward(&p, &g, &only_u, &bc.clone().masked([true, true, true, false, false, false]), None).unwrap();
        for (s, r) in both.states.iter().zip(&u_alone.states) {
            for (x, y) in s.u.iter().zip(&r.u) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!(r.v.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (p, g) = setup();
        let bad = StatePair::zeros(3);
        assert!(matches!(
            solve_linear_forward(&p, &g, &bad, &BoundarySignals::zeros(g.levels()), None),
            Err(KdvError::DimensionMismatch { .. })
        ));
        let mut nan = StatePair::zeros(g.nodes());
        nan.u[3] = f64::NAN;
        assert!(matches!(solve_adjoint_backward(&p, &g, &nan), Err(KdvError::NonFinite(_))));
    }
}
