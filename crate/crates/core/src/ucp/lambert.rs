//! Branches of z e^z = α.
//!
//! Branch k is the zero of log α − z − log z + 2kπi with principal logs, so
//! the index is defined by Im(z + log z − log α) = 2kπ. Away from the
//! negative real axis this coincides with the usual W_k numbering.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{KdvError, Result};

type C = Complex64;

fn branch_function(z: C, log_alpha: C, k: i64) -> C {
    log_alpha - z - z.ln() + C::new(0.0, 2.0 * PI * k as f64)
}

/// Branch index recovered from a solution: round(Im(z + log z − log α) / 2π).
pub fn branch_index(z: C, alpha: C) -> i64 {
    ((z + z.ln() - alpha.ln()).im / (2.0 * PI)).round() as i64
}

fn attempt(alpha: C, log_alpha: C, k: i64, seed: C) -> Option<C> {
    let mut z = seed;
    // Newton on the branch function keeps the iterate near branch k
    for _ in 0..100 {
        let g = branch_function(z, log_alpha, k);
        let step = g * z / (z + 1.0);
        if !(step.re.is_finite() && step.im.is_finite()) {
            return None;
        }
        z += step;
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    // a few Newton steps on z e^z − α sharpen the residual
    let tol = 1e-10 * alpha.norm().max(1.0);
    let residual = |z: C| (z * z.exp() - alpha).norm();
    for _ in 0..10 {
        if residual(z) <= 1e-3 * tol {
            break;
        }
        let ez = z.exp();
        let step = (z * ez - alpha) / (ez * (z + 1.0));
        let trial = z - step;
        if !(residual(trial) < residual(z)) {
            break;
        }
        z = trial;
    }
    (residual(z) <= tol && branch_index(z, alpha) == k).then_some(z)
}

pub fn lambert_solve(alpha: C, k: i64) -> Result<C> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(KdvError::Lambert("alpha must be finite".into()));
    }
    if alpha.norm() == 0.0 {
        return Err(KdvError::Lambert("alpha = 0 has no nonzero branch solutions".into()));
    }
    let log_alpha = alpha.ln();
    let l1 = log_alpha + C::new(0.0, 2.0 * PI * k as f64);
    let one = C::new(1.0, 0.0);
    // asymptotic seed first, then seeds suited to the principal region and
    // to the neighbourhood of the branch point −1/e
    let mut seeds = Vec::new();
    if l1.norm() > 0.0 {
        seeds.push(l1 - l1.ln());
    }
    seeds.push((one + alpha).ln());
    let q = (C::from(2.0 * std::f64::consts::E) * alpha + 2.0).sqrt();
    seeds.push(q - 1.0);
    seeds.push(-q - 1.0);
    seeds.push(alpha);
    seeds
        .into_iter()
        .filter(|s| s.norm() > 0.0 && s.re.is_finite() && s.im.is_finite())
        .find_map(|s| attempt(alpha, log_alpha, k, s))
        .ok_or_else(|| KdvError::Lambert(format!("no solution on branch {k} found for alpha = {alpha}")))
}
