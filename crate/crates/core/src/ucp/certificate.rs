//! Case analysis for the spectral unique-continuation problem.
//!
//! A nontrivial eigenfunction would force every root ξ_j of P to satisfy
//! ξ_j² e^{iLξ_j} = γ/β for one common ratio. The certificate evaluates
//! w_j = ξ_j² e^{iLξ_j} on the computed roots and checks that they disagree,
//! alongside the per-case contradiction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poly::{build_p, roots_p, RootSet};
use crate::error::{KdvError, Result};
use crate::model::Parameters;

type C = Complex64;

pub const DEFAULT_DISPERSION_TOL: f64 = 1e-6;
/// Roots closer than this are treated as repeated.
pub const MULTIPLICITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseTag {
    Complex,
    Real,
    Imaginary,
    Zero,
}

impl CaseTag {
    pub fn of(p: C) -> Self {
        match (p.re == 0.0, p.im == 0.0) {
            (true, true) => CaseTag::Zero,
            (false, true) => CaseTag::Real,
            (true, false) => CaseTag::Imaginary,
            (false, false) => CaseTag::Complex,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Complex => "COMPLEX",
            CaseTag::Real => "REAL",
            CaseTag::Imaginary => "IMAGINARY",
            CaseTag::Zero => "ZERO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ObstructionConfirmed,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::ObstructionConfirmed => "OBSTRUCTION_CONFIRMED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcpVerdict {
    #[serde(rename = "L")]
    pub length: f64,
    pub p: C,
    pub case_tag: CaseTag,
    pub roots: RootSet,
    /// max_{j,k} |w_j − w_k|
    pub dispersion: f64,
    /// max_j |w_j|, the scale `dispersion` is compared against
    pub w_scale: f64,
    pub multiple_roots: bool,
    /// Whether the case-specific argument alone rules out an eigenfunction.
    pub case_contradiction: bool,
    pub verdict: Verdict,
    pub detail: String,
}

fn dispersion(roots: &[C; 6], l: f64) -> (f64, f64) {
    let w: Vec<C> = roots.iter().map(|&x| x * x * (C::new(0.0, l) * x).exp()).collect();
    let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut d: f64 = 0.0;
    for i in 0..6 {
        for j in i + 1..6 {
            d = d.max((w[i] - w[j]).norm());
        }
    }
    (d, scale)
}

pub fn ucp_certificate(length: f64, p: C, params: &Parameters, tol: f64) -> Result<UcpVerdict> {
    if !(length.is_finite() && length > 0.0) {
        return Err(KdvError::ConstraintViolation(format!("L must be > 0, got {length}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(KdvError::ConstraintViolation(format!("tol must be > 0, got {tol}")));
    }
    let case_tag = CaseTag::of(p);
    let poly = build_p(p, params)?;
    let roots = if case_tag == CaseTag::Zero {
        // P = ξ⁴(ξ² − r/(1 − a²b)): the fourfold zero is known exactly
        let s = C::from(params.r / params.defect()).sqrt();
        let z = C::new(0.0, 0.0);
        let rs = [z, z, z, z, s, -s];
        RootSet {
            residuals: rs.map(|x| super::poly::eval_with_derivative(&poly.coeffs, x).0.norm()),
            girard_residuals: super::poly::girard_residuals(&poly.coeffs, &rs),
            roots: rs,
        }
    } else {
        roots_p(&poly)?
    };
    let (disp, w_scale) = dispersion(&roots.roots, length);
    let multiple_roots = roots.min_separation() < MULTIPLICITY_TOL;

    let (case_contradiction, detail) = match case_tag {
        CaseTag::Zero => (
            true,
            "xi = 0 is a root of P, so gamma = 0, contradicting gamma != 0".to_string(),
        ),
        CaseTag::Complex => {
            // e^{iΣ arg(iLξ_j/2)} must be ±1 for a common γ/β; Vieta forces it
            // to equal −p²/|p|², which is off the real axis here.
            let s: f64 = roots.roots.iter().map(|x| (C::new(0.0, length / 2.0) * x).arg()).sum();
            let phase = C::from_polar(1.0, s);
            let vieta = -(p * p) / p.norm_sqr();
            let off_axis = phase.im.abs();
            (
                off_axis > tol,
                format!(
                    "argument sum {s:.6}, |Im e^(i sum)| = {off_axis:.3e}, Vieta phase mismatch {:.3e}",
                    (phase - vieta).norm()
                ),
            )
        }
        CaseTag::Real => {
            let worst_pair = roots
                .roots
                .iter()
                .map(|z| roots.roots.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            let nonreal = roots.roots.iter().filter(|z| z.im.abs() > 1e-8 * z.norm().max(1.0)).count();
            (false, format!("conjugate pairing residual {worst_pair:.3e}, {nonreal} non-real roots"))
        }
        CaseTag::Imaginary => {
            let nonreal = roots.roots.iter().filter(|z| z.im.abs() > 1e-8 * z.norm().max(1.0)).count();
            (false, format!("{nonreal} non-real roots"))
        }
    };

    let dispersed = !multiple_roots && disp > tol * w_scale;
    let verdict = if dispersed || case_contradiction {
        Verdict::ObstructionConfirmed
    } else {
        Verdict::Inconclusive
    };
    let detail = if multiple_roots && case_tag != CaseTag::Zero {
        format!("repeated roots (separation {:.3e}); {detail}", roots.min_separation())
    } else {
        detail
    };
    Ok(UcpVerdict {
        length,
        p,
        case_tag,
        roots,
        dispersion: disp,
        w_scale,
        multiple_roots,
        case_contradiction,
        verdict,
        detail,
    })
}

/// Sample `i` of a sweep: L uniform in (0, l_max], |p| log-uniform on
/// [p_min, p_max]. Every fourth draw is real, every fourth imaginary.
pub fn sweep_sample(seed: u64, i: usize, l_max: f64, p_min: f64, p_max: f64) -> (f64, C) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let l = l_max * (1.0 - rng.random::<f64>());
    let rad = (p_min.ln() + (p_max / p_min).ln() * rng.random::<f64>()).exp();
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let p = match i % 4 {
        1 => C::new(sign * rad, 0.0),
        3 => C::new(0.0, sign * rad),
        _ => C::from_polar(rad, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)),
    };
    (l, p)
}

/// Certificates for `count` deterministic random draws, evaluated in parallel.
pub fn ucp_sweep(params: &Parameters, count: usize, seed: u64, l_max: f64, tol: f64) -> Result<Vec<UcpVerdict>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let (l, p) = sweep_sample(seed, i, l_max, 0.1, 10.0);
            ucp_certificate(l, p, params, tol)
        })
        .collect()
}
