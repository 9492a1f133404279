//! The degree-six characteristic polynomial of the spectral problem and its
//! roots.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KdvError, Result};
use crate::model::{validate_params, Parameters};

type C = Complex64;

/// Coefficients are stored leading first (ξ⁶ … ξ⁰).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyP {
    /// Q(ξ) = (1 − a²b)ξ⁶ − rξ⁴ − (c+1)pξ³ + prξ + cp²
    pub q: [C; 7],
    /// P(ξ) = Q(−ξ)/(1 − a²b), monic.
    pub coeffs: [C; 7],
    pub p: C,
    pub params: Parameters,
    pub normalized: bool,
}

pub fn build_p(p: C, params: &Parameters) -> Result<PolyP> {
    validate_params(*params)?;
    let d = params.defect();
    let (c, r) = (params.c, params.r);
    let z = C::new(0.0, 0.0);
    let q = [C::from(d), z, C::from(-r), -(c + 1.0) * p, z, p * r, c * p * p];
    // Q(−ξ) flips the sign of odd-degree terms (degree 6 − k for index k)
    let coeffs: [C; 7] = std::array::from_fn(|k| {
        let sign = if (6 - k) % 2 == 1 { -1.0 } else { 1.0 };
        q[k] * sign / d
    });
    Ok(PolyP {
        q,
        coeffs,
        p,
        params: *params,
        normalized: true,
    })
}

/// Horner evaluation of P and P′.
pub fn eval_with_derivative(coeffs: &[C], x: C) -> (C, C) {
    let mut f = C::new(0.0, 0.0);
    let mut df = C::new(0.0, 0.0);
    for &a in coeffs {
        df = df * x + f;
        f = f * x + a;
    }
    (f, df)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: [C; 6],
    /// |P(ξ_j)|
    pub residuals: [f64; 6],
    /// |(−1)^k e_k(ξ) − coeff_k| / max(1, e_k(|ξ|)) for k = 1..6.
    pub girard_residuals: [f64; 6],
}

impl RootSet {
    pub fn worst_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn worst_girard(&self) -> f64 {
        self.girard_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest pairwise distance between roots.
    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..6 {
            for j in i + 1..6 {
                m = m.min((self.roots[i] - self.roots[j]).norm());
            }
        }
        m
    }
}

/// Elementary symmetric polynomials e_0..e_n of the given values.
pub fn elementary_symmetric(xs: &[C]) -> Vec<C> {
    let mut e = vec![C::new(0.0, 0.0); xs.len() + 1];
    e[0] = C::new(1.0, 0.0);
    for (n, &x) in xs.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            e[k] = e[k] + e[k - 1] * x;
        }
    }
    e
}

/// Residuals of the Vieta relations between the monic coefficients and the
/// computed roots.
pub fn girard_residuals(coeffs: &[C; 7], roots: &[C; 6]) -> [f64; 6] {
    let e = elementary_symmetric(roots);
    let abs: Vec<C> = roots.iter().map(|z| C::from(z.norm())).collect();
    let scale = elementary_symmetric(&abs);
    std::array::from_fn(|i| {
        let k = i + 1;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        (e[k] * sign - coeffs[k] / coeffs[0]).norm() / scale[k].re.max(1.0)
    })
}

/// Roots of a monic sextic (`coeffs[0]` need not be 1; it is divided out).
pub fn roots_of(coeffs: &[C; 7]) -> Result<RootSet> {
    if coeffs[0].norm() == 0.0 || coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(KdvError::ConstraintViolation("polynomial must have finite coefficients and degree 6".into()));
    }
    let mono: [C; 7] = std::array::from_fn(|k| coeffs[k] / coeffs[0]);
    // companion matrix: ones on the subdiagonal, −coefficients in the first row
    let mut m = DMatrix::<C>::zeros(6, 6);
    for j in 0..6 {
        m[(0, j)] = -mono[j + 1];
    }
    for i in 1..6 {
        m[(i, i - 1)] = C::new(1.0, 0.0);
    }
    let (_, t) = m.schur().unpack();
    let mut roots: [C; 6] = std::array::from_fn(|i| t[(i, i)]);
    let scale = mono.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for z in roots.iter_mut() {
        let mut best = *z;
        let mut best_res = eval_with_derivative(&mono, best).0.norm();
        let mut x = best;
        for _ in 0..30 {
            let (f, df) = eval_with_derivative(&mono, x);
            if df.norm() == 0.0 {
                break;
            }
            x -= f / df;
            let res = eval_with_derivative(&mono, x).0.norm();
            if res < best_res {
                best = x;
                best_res = res;
            }
            if best_res <= 1e-15 * scale {
                break;
            }
        }
        *z = best;
    }
    let residuals: [f64; 6] = std::array::from_fn(|j| eval_with_derivative(&mono, roots[j]).0.norm());
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= 1e-8 * scale) {
        return Err(KdvError::RootRefinement { worst });
    }
    Ok(RootSet {
        girard_residuals: girard_residuals(&mono, &roots),
        roots,
        residuals,
    })
}

pub fn roots_p(poly: &PolyP) -> Result<RootSet> {
    roots_of(&poly.coeffs)
}
