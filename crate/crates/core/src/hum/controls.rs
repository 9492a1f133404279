use serde::{Deserialize, Serialize};

use crate::error::{KdvError, Result};
use crate::model::{trapezoid, ControlConfig, Grid, Parameters};
use crate::pde::{BoundarySignals, TraceBundle};
use crate::sobolev::{apply_weight, sobolev_trace_norm};

const THIRD: f64 = 1.0 / 3.0;

/// Sobolev exponent of each input class, order h0, h1, h2, g0, g1, g2.
pub const SIGNAL_EXPONENTS: [f64; 6] = [THIRD, 0.0, -THIRD, THIRD, 0.0, -THIRD];

/// Boundary controls restricted to a configuration, with their norms in the
/// H^{1/3} / L² / H^{-1/3} classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlBundle {
    pub signals: BoundarySignals,
    pub config: ControlConfig,
    pub norms: [f64; 6],
}

impl ControlBundle {
    pub fn new(signals: BoundarySignals, config: ControlConfig, horizon: f64) -> Result<Self> {
        let signals = signals.masked(config.mask);
        let norms = signal_norms(&signals, horizon)?;
        Ok(Self { signals, config, norms })
    }

    pub fn zero(config: ControlConfig, g: &Grid) -> Self {
        Self {
            signals: BoundarySignals::zeros(g.levels()),
            config,
            norms: [0.0; 6],
        }
    }
}

pub fn signal_norms(signals: &BoundarySignals, horizon: f64) -> Result<[f64; 6]> {
    let s = signals.as_array();
    let mut out = [0.0; 6];
    for k in 0..6 {
        out[k] = sobolev_trace_norm(s[k], SIGNAL_EXPONENTS[k], horizon)?;
    }
    Ok(out)
}

/// The adjoint trace combinations that pair with each input:
/// Φ = φ + aψ and Ψ = abφ + ψ, taken as Φ_xx(0), Φ_x(L), Φ(L), Ψ_xx(0), Ψ_x(L), Ψ(L).
pub fn adjoint_combinations(traces: &TraceBundle, p: &Parameters) -> [Vec<f64>; 6] {
    let (u, v) = (&traces.u, &traces.v);
    let big_phi = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a + p.a * b).collect() };
    let big_psi = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| p.a * p.b * a + b).collect() };
    [
        big_phi(&u.dxx_0, &v.dxx_0),
        big_phi(&u.dx_l, &v.dx_l),
        big_phi(&u.value_l, &v.value_l),
        big_psi(&u.dxx_0, &v.dxx_0),
        big_psi(&u.dx_l, &v.dx_l),
        big_psi(&u.value_l, &v.value_l),
    ]
}

/// Sobolev exponent of each adjoint combination (dual to the input class).
pub const COMBINATION_EXPONENTS: [f64; 6] = [-THIRD, 0.0, THIRD, -THIRD, 0.0, THIRD];

fn check_traces(traces: &TraceBundle, g: &Grid) -> Result<()> {
    for col in traces.columns() {
        if col.len() != g.levels() {
            return Err(KdvError::ConfigMismatch(format!(
                "trace series has {} samples, grid has {} time levels",
                col.len(),
                g.levels()
            )));
        }
    }
    Ok(())
}

/// HUM controls read off adjoint traces:
///
/// ```text
/// h0 =  (c/b) W_{-1/3} Φ_xx(0)    g0 =  c W_{-1/3} Ψ_xx(0)
/// h1 =  (c/b) Φ_x(L)              g1 =  c Ψ_x(L)
/// h2 = -(c/b) W_{1/3} Φ(L)        g2 = -c W_{1/3} Ψ(L)
/// ```
///
/// where W_s is the Riesz map of H^s. Inputs outside the mask are zero. With
/// these choices the duality pairing equals the sum of the squared norms of the
/// active combinations (see [`active_norms_squared`]).
pub fn controls_from_adjoint(
    cfg: &ControlConfig,
    traces: &TraceBundle,
    p: &Parameters,
    g: &Grid,
) -> Result<ControlBundle> {
    cfg.validate()?;
    check_traces(traces, g)?;
    let combos = adjoint_combinations(traces, p);
    let scale = [
        p.c / p.b,
        p.c / p.b,
        -p.c / p.b,
        p.c,
        p.c,
        -p.c,
    ];
    let t = g.horizon;
    let mut out: [Vec<f64>; 6] = Default::default();
    for k in 0..6 {
        if !cfg.mask[k] {
            out[k] = vec![0.0; g.levels()];
            continue;
        }
        let w = apply_weight(&combos[k], COMBINATION_EXPONENTS[k], t)?;
        out[k] = w.into_iter().map(|x| scale[k] * x).collect();
    }
    ControlBundle::new(BoundarySignals::from_array(out), *cfg, t)
}

/// Squared norms of the adjoint combinations, zero outside the mask.
pub fn active_norms_squared(cfg: &ControlConfig, traces: &TraceBundle, p: &Parameters, g: &Grid) -> Result<[f64; 6]> {
    check_traces(traces, g)?;
    let combos = adjoint_combinations(traces, p);
    let mut out = [0.0; 6];
    for k in 0..6 {
        if cfg.mask[k] {
            out[k] = sobolev_trace_norm(&combos[k], COMBINATION_EXPONENTS[k], g.horizon)?.powi(2);
        }
    }
    Ok(out)
}

/// Boundary side of the duality identity between the forward problem driven
/// by `bc` (zero initial data) and the adjoint problem with traces `traces`:
///
/// ```text
/// (b/c) ∫ (-h2 Φ(L) + h1 Φ_x(L) + h0 Φ_xx(0)) dt + (1/c) ∫ (-g2 Ψ(L) + g1 Ψ_x(L) + g0 Ψ_xx(0)) dt
/// ```
pub fn duality_boundary_term(bc: &BoundarySignals, traces: &TraceBundle, p: &Parameters, g: &Grid) -> Result<f64> {
    bc.check(g)?;
    check_traces(traces, g)?;
    let combos = adjoint_combinations(traces, p);
    let sig = bc.as_array();
    let dt = g.dt();
    let pair = |k: usize| -> f64 {
        let prod: Vec<f64> = sig[k].iter().zip(&combos[k]).map(|(a, b)| a * b).collect();
        trapezoid(&prod, dt)
    };
    Ok((p.b / p.c) * (pair(0) + pair(1) - pair(2)) + (1.0 / p.c) * (pair(3) + pair(4) - pair(5)))
}
