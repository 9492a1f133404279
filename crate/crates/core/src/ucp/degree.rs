//! Degree certificates for the Paley–Wiener quotients B/P and C/P.
//!
//! Transforming the spectral system (λ = ip) on (0, L) gives
//! M(ξ)·(φ̂, ψ̂) = R(ξ) with
//!
//! ```text
//! M = [[ i(p − ξ³),  −iaξ³ ], [ −iabξ³,  i(pc + rξ − ξ³) ]],   det M = −Q(ξ)
//! ```
//!
//! and R built from the boundary traces the configuration leaves free. The
//! numerators adj(M)·R are computed as polynomials in ξ whose coefficients are
//! linear forms in those traces; any nonzero numerator of degree < 6 cannot be
//! divisible by the sextic, so the quotient is not entire.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KdvError, Result};
use crate::model::{validate_params, Parameters};

type C = Complex64;

/// Trace unknowns, with Φ = φ + aψ and Ψ = abφ + ψ.
pub const TRACE_UNKNOWNS: [&str; 6] = ["Phi(L)", "Phi_x(L)", "Psi(L)", "Psi_x(L)", "Phi_xx(0)", "Psi_xx(0)"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DegreeConfig {
    /// Controls h0, h1, g0, g1.
    Another2,
    /// Controls h1, h2, g1, g2.
    Another3,
    /// Controls h0, h1, g0.
    ThreeV,
    /// Controls h0, g0, g1.
    ThreeVi,
}

impl DegreeConfig {
    pub const ALL: [DegreeConfig; 4] = [Self::Another2, Self::Another3, Self::ThreeV, Self::ThreeVi];

    pub fn name(self) -> &'static str {
        match self {
            Self::Another2 => "ANOTHER2",
            Self::Another3 => "ANOTHER3",
            Self::ThreeV => "THREE_V",
            Self::ThreeVi => "THREE_VI",
        }
    }

    /// Which entries of [`TRACE_UNKNOWNS`] survive the boundary conditions.
    pub fn free_traces(self) -> [bool; 6] {
        match self {
            Self::Another2 => [true, false, true, false, false, false],
            Self::Another3 => [false, false, false, false, true, true],
            Self::ThreeV => [true, false, true, true, false, false],
            Self::ThreeVi => [true, true, true, false, false, false],
        }
    }
}

/// Polynomial in ξ (ascending) whose coefficients are linear forms in the
/// trace unknowns.
type LinPoly = Vec<[C; 6]>;

fn mul(scalar: &[C], lp: &LinPoly) -> LinPoly {
    let mut out = vec![[C::new(0.0, 0.0); 6]; scalar.len() + lp.len() - 1];
    for (i, s) in scalar.iter().enumerate() {
        for (j, form) in lp.iter().enumerate() {
            for k in 0..6 {
                out[i + j][k] += s * form[k];
            }
        }
    }
    out
}

fn add(a: &LinPoly, b: &LinPoly) -> LinPoly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|d| {
            let mut f = [C::new(0.0, 0.0); 6];
            for (k, fk) in f.iter_mut().enumerate() {
                *fk = a.get(d).map_or(C::new(0.0, 0.0), |x| x[k]) + b.get(d).map_or(C::new(0.0, 0.0), |x| x[k]);
            }
            f
        })
        .collect()
}

fn degree_of(coeffs: &[C]) -> Option<usize> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    coeffs.iter().rposition(|c| c.norm() > 1e-14 * scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub config: DegreeConfig,
    pub free_traces: Vec<String>,
    /// Ascending coefficients of the two numerators as linear forms.
    pub numerator_phi: Vec<[C; 6]>,
    pub numerator_psi: Vec<[C; 6]>,
    /// Highest degree with a nonzero linear form.
    pub formal_degrees: (usize, usize),
    /// Degrees with the supplied trace values substituted (`None`: ≡ 0).
    pub evaluated_degrees: (Option<usize>, Option<usize>),
    pub denominator_degree: usize,
    /// All supplied trace values vanish: both numerators are identically zero.
    pub trivial: bool,
    /// Some numerator is nonzero with degree below 6, so the quotient is not entire.
    pub obstructed: bool,
}

/// `traces` are values for the free unknowns in [`TRACE_UNKNOWNS`] order.
pub fn degree_certificate(config: DegreeConfig, p: C, params: &Parameters, traces: &[C]) -> Result<DegreeReport> {
    validate_params(*params)?;
    let free = config.free_traces();
    let nfree = free.iter().filter(|&&f| f).count();
    if traces.len() != nfree {
        return Err(KdvError::DimensionMismatch {
            what: format!("trace values for {}", config.name()),
            expected: nfree,
            found: traces.len(),
        });
    }
    let i = C::new(0.0, 1.0);
    let z = C::new(0.0, 0.0);
    let (a, b, c, r) = (params.a, params.b, params.c, params.r);
    let unit = |k: usize, coef: C| {
        let mut f = [z; 6];
        if free[k] {
            f[k] = coef;
        }
        f
    };
    // R1 = Φ″(0) + e^{−iLξ}(ξ²Φ(L) − iξΦ′(L)), R2 likewise with Ψ (the common
    // exponential is dropped; no configuration mixes the two ends)
    let r1: LinPoly = vec![unit(4, C::new(1.0, 0.0)), unit(1, -i), unit(0, C::new(1.0, 0.0))];
    let r2: LinPoly = vec![unit(5, C::new(1.0, 0.0)), unit(3, -i), unit(2, C::new(1.0, 0.0))];
    let m11 = [i * p, z, z, -i];
    let m12 = [z, z, z, -i * a];
    let m21 = [z, z, z, -i * a * b];
    let m22 = [i * p * c, i * r, z, -i];
    let neg = |s: [C; 4]| s.map(|x| -x);
    let num_phi = add(&mul(&m22, &r1), &mul(&neg(m12), &r2));
    let num_psi = add(&mul(&neg(m21), &r1), &mul(&m11, &r2));

    let formal = |lp: &LinPoly| {
        lp.iter()
            .rposition(|f| f.iter().any(|c| c.norm() > 1e-14))
            .unwrap_or(0)
    };
    let mut vals = [z; 6];
    let mut it = traces.iter();
    for k in 0..6 {
        if free[k] {
            vals[k] = *it.next().expect("length checked");
        }
    }
    let evaluate = |lp: &LinPoly| -> Vec<C> { lp.iter().map(|f| (0..6).map(|k| f[k] * vals[k]).sum()).collect() };
    let ev = (degree_of(&evaluate(&num_phi)), degree_of(&evaluate(&num_psi)));
    let trivial = traces.iter().all(|t| t.norm() == 0.0);
    let obstructed = !trivial && [ev.0, ev.1].iter().any(|d| matches!(d, Some(d) if *d < 6));

    Ok(DegreeReport {
        config,
        free_traces: TRACE_UNKNOWNS
            .iter()
            .zip(free)
            .filter(|(_, f)| *f)
            .map(|(n, _)| n.to_string())
            .collect(),
        formal_degrees: (formal(&num_phi), formal(&num_psi)),
        evaluated_degrees: ev,
        numerator_phi: num_phi,
        numerator_psi: num_psi,
        denominator_degree: 6,
        trivial,
        obstructed,
    })
}
