//! The r = 0 eigenproblem s φ = φ‴ on (0, L) with
//! φ(0) = φ′(0) = φ′(L) = φ″(0) = φ″(L) = 0.
//!
//! Solutions are combinations of e^{μx}, μ³ = s (or 1, x, x² when s = 0);
//! only the trivial one exists when the 5×3 matrix of boundary functionals
//! has full column rank.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KdvError, Result};

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R0Report {
    #[serde(rename = "L")]
    pub length: f64,
    pub s: C,
    pub sigma_min: f64,
    pub tol: f64,
    pub trivial_only: bool,
}

/// Cube roots of s: principal root and its rotations by e^{±2πi/3}.
pub fn cube_roots(s: C) -> [C; 3] {
    let m0 = s.powf(1.0 / 3.0);
    let w = C::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    [m0, m0 * w, m0 * w.conj()]
}

/// Rows φ(0), φ′(0), φ′(L), φ″(0), φ″(L); one column per basis function.
pub fn boundary_matrix(length: f64, s: C) -> DMatrix<C> {
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let l = C::from(length);
    if s.norm() == 0.0 {
        // 1, x, x²
        return DMatrix::from_row_slice(
            5,
            3,
            &[
                one, zero, zero, //
                zero, one, zero, //
                zero, one, 2.0 * l, //
                zero, zero, 2.0 * one, //
                zero, zero, 2.0 * one,
            ],
        );
    }
    let mus = cube_roots(s);
    DMatrix::from_fn(5, 3, |row, col| {
        let mu = mus[col];
        let e = (mu * l).exp();
        match row {
            0 => one,
            1 => mu,
            2 => mu * e,
            3 => mu * mu,
            _ => mu * mu * e,
        }
    })
}

/// Smallest singular value after scaling every column to unit norm, which
/// makes the result independent of how the basis functions are scaled.
pub fn sigma_min(m: &DMatrix<C>) -> f64 {
    let mut m = m.clone();
    for mut col in m.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= C::from(n);
        }
    }
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn r0_eigencheck(length: f64, s: C, tol: f64) -> Result<R0Report> {
    if !(length.is_finite() && length > 0.0) {
        return Err(KdvError::ConstraintViolation(format!("L must be > 0, got {length}")));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(KdvError::NonFinite("s".into()));
    }
    let sigma = sigma_min(&boundary_matrix(length, s));
    Ok(R0Report {
        length,
        s,
        sigma_min: sigma,
        tol,
        trivial_only: sigma > tol,
    })
}

/// The sweep grid: s on an n × n lattice of [−10, 10]², each L in `lengths`.
pub fn r0_sweep(lengths: &[f64], n: usize, tol: f64) -> Result<Vec<R0Report>> {
    let mut out = Vec::with_capacity(lengths.len() * n * n);
    let at = |k: usize| if n == 1 { 0.0 } else { -10.0 + 20.0 * k as f64 / (n - 1) as f64 };
    for &l in lengths {
        for i in 0..n {
            for j in 0..n {
                out.push(r0_eigencheck(l, C::new(at(i), at(j)), tol)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_zero_full_rank() {
        for l in [0.5, 1.0, 5.0] {
            let rep = r0_eigencheck(l, C::new(0.0, 0.0), 1e-8).unwrap();
            assert!(rep.trivial_only && rep.sigma_min > 0.1);
        }
    }

    #[test]
    fn s_one_full_rank() {
        assert!(r0_eigencheck(1.0, C::new(1.0, 0.0), 1e-8).unwrap().sigma_min > 1e-3);
    }

    #[test]
    fn basis_scaling_invariance() {
        let m = boundary_matrix(std::f64::consts::PI, C::new(-3.0, 2.0));
        let mut scaled = m.clone();
        for (k, f) in [1e-3, 7.0, 250.0].iter().enumerate() {
            let mut col = scaled.column_mut(k);
            col *= C::new(*f, -0.5 * f);
        }
        assert!((sigma_min(&m) - sigma_min(&scaled)).abs() < 1e-12);
    }

    #[test]
    fn exponentials_solve_the_ode() {
        for mu in cube_roots(C::new(2.0, -5.0)) {
            assert!((mu.powu(3) - C::new(2.0, -5.0)).norm() < 1e-12);
        }
    }
}
