use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::controls::active_norms_squared;
use crate::error::{KdvError, Result};
use crate::model::{x_inner_unchecked, ControlConfig, Grid, Parameters, StatePair};
use crate::pde::{extract_traces, LinearSolver, Trajectory};
use crate::sobolev::sobolev_trace_norm;

/// Sampled lower bound of the observability quotient and hidden-regularity surrogates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityReport {
    pub config: ControlConfig,
    pub length: f64,
    pub horizon: f64,
    /// min over samples of (sum of squared active trace norms) / ‖final‖²_X
    pub quotient_min: f64,
    pub sample_count: usize,
    /// C_j ≈ max over samples and nodes of ‖∂ₓʲ(φ, ψ)(·, x)‖_{H^{(1-j)/3}} / ‖final‖_X
    pub c_hidden: [f64; 3],
    pub quotients: Vec<f64>,
    pub rejected: usize,
}

impl ObservabilityReport {
    /// The constant entering 0 < C1 (1 - a²b) < c. The condition bounds a
    /// squared trace norm, so the ratio of norms is squared.
    pub fn feasibility_constant(&self) -> f64 {
        self.c_hidden[1].powi(2)
    }

    /// Whether the three-control condition holds with the estimated constant
    /// at this resolution.
    pub fn feasible(&self, p: &Parameters) -> bool {
        let lhs = self.feasibility_constant() * p.defect();
        lhs > 0.0 && lhs < p.c
    }
}

/// Gaussian nodal values smoothed by three passes of nearest-neighbour
/// averaging, scaled to unit X norm.
pub fn random_final_data(g: &Grid, p: &Parameters, rng: &mut ChaCha8Rng) -> StatePair {
    let n = g.nodes();
    let mut draw = || -> Vec<f64> {
        let mut f: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for _ in 0..3 {
            let prev = f.clone();
            f[0] = 0.5 * (prev[0] + prev[1]);
            f[n - 1] = 0.5 * (prev[n - 2] + prev[n - 1]);
            for i in 1..n - 1 {
                f[i] = (prev[i - 1] + prev[i] + prev[i + 1]) / 3.0;
            }
        }
        f
    };
    let u = draw();
    let v = draw();
    let s = StatePair::new(u, v);
    let nrm = x_inner_unchecked(&s, &s, p.b / p.c, g.dx()).sqrt();
    if nrm > 0.0 {
        s.scaled(1.0 / nrm)
    } else {
        s
    }
}

/// Per-sample generator: stream `index` of the seeded ChaCha generator, so
/// sample i is the same whatever the total sample count or thread layout.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn derivative_series(traj: &Trajectory, node: usize, order: usize, use_v: bool) -> Vec<f64> {
    let dx = traj.grid.dx();
    let n = traj.grid.nodes();
    traj.states
        .iter()
        .map(|s| {
            let f = if use_v { &s.v } else { &s.u };
            match order {
                0 => f[node],
                1 => {
                    if node == 0 {
                        (-1.5 * f[0] + 2.0 * f[1] - 0.5 * f[2]) / dx
                    } else if node == n - 1 {
                        (1.5 * f[n - 1] - 2.0 * f[n - 2] + 0.5 * f[n - 3]) / dx
                    } else {
                        (f[node + 1] - f[node - 1]) / (2.0 * dx)
                    }
                }
                _ => {
                    if node == 0 {
                        (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (dx * dx)
                    } else if node == n - 1 {
                        (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (dx * dx)
                    } else {
                        (f[node + 1] - 2.0 * f[node] + f[node - 1]) / (dx * dx)
                    }
                }
            }
        })
        .collect()
}

struct Sample {
    quotient: f64,
    hidden: [f64; 3],
}

fn evaluate(cfg: &ControlConfig, fin: &StatePair, solver: &LinearSolver) -> Result<Option<Sample>> {
    let p = solver.params();
    let g = solver.grid();
    let norm2 = x_inner_unchecked(fin, fin, p.b / p.c, g.dx());
    if !(norm2 > 0.0) {
        return Ok(None);
    }
    let (traj, _) = solver.adjoint(fin)?;
    let traces = extract_traces(&traj.states, g);
    let active: f64 = active_norms_squared(cfg, &traces, p, g)?.iter().sum();
    let mut hidden = [0.0f64; 3];
    for (j, h) in hidden.iter_mut().enumerate() {
        let s = (1.0 - j as f64) / 3.0;
        for node in 0..g.nodes() {
            for use_v in [false, true] {
                let series = derivative_series(&traj, node, j, use_v);
                *h = h.max(sobolev_trace_norm(&series, s, g.horizon)?);
            }
        }
        *h /= norm2.sqrt();
    }
    Ok(Some(Sample {
        quotient: active / norm2,
        hidden,
    }))
}

/// Observability quotient for one adjoint final state; `None` when the state is zero.
pub fn observability_quotient(cfg: &ControlConfig, fin: &StatePair, p: &Parameters, g: &Grid) -> Result<Option<f64>> {
    fin.check(g, "adjoint final state")?;
    let solver = LinearSolver::new(p, g, 0.5)?;
    Ok(evaluate(cfg, fin, &solver)?.map(|s| s.quotient))
}

/// Samples `nsamples` random unit final states (in parallel, deterministic in `seed`).
pub fn estimate_observability(
    cfg: &ControlConfig,
    nsamples: usize,
    p: &Parameters,
    g: &Grid,
    seed: u64,
) -> Result<ObservabilityReport> {
    cfg.validate()?;
    if nsamples == 0 {
        return Err(KdvError::ConstraintViolation("nsamples must be >= 1".into()));
    }
    let solver = LinearSolver::new(p, g, 0.5)?;
    let results: Vec<Result<Option<Sample>>> = (0..nsamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let fin = random_final_data(g, p, &mut rng);
            evaluate(cfg, &fin, &solver)
        })
        .collect();
    let mut quotients = Vec::with_capacity(nsamples);
    let mut c_hidden = [0.0f64; 3];
    let mut rejected = 0;
    for r in results {
        match r? {
            Some(s) => {
                quotients.push(s.quotient);
                for j in 0..3 {
                    c_hidden[j] = c_hidden[j].max(s.hidden[j]);
                }
            }
            None => rejected += 1,
        }
    }
    let quotient_min = quotients.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ObservabilityReport {
        config: *cfg,
        length: g.length,
        horizon: g.horizon,
        quotient_min: if quotients.is_empty() { 0.0 } else { quotient_min },
        sample_count: quotients.len(),
        c_hidden,
        quotients,
        rejected,
    })
}
