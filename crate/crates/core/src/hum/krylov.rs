//! Krylov solvers for operators on `StatePair` in a weighted inner product.

use serde::{Deserialize, Serialize};

use crate::error::{KdvError, Result};
use crate::model::StatePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KrylovMethod {
    /// Full (unrestarted) GMRES; robust when the discrete Gramian is only
    /// approximately symmetric.
    #[default]
    Gmres,
    /// Conjugate gradient; assumes exact symmetry and positivity.
    Cg,
}

#[derive(Debug, Clone)]
pub struct KrylovOutcome {
    pub solution: StatePair,
    pub iterations: usize,
    /// Relative residual after each iteration, starting with 1 at iteration 0.
    pub residuals: Vec<f64>,
}

fn norm(ip: &impl Fn(&StatePair, &StatePair) -> f64, x: &StatePair) -> f64 {
    ip(x, x).max(0.0).sqrt()
}

/// Solves A x = b from x = 0 until ‖A x - b‖ ≤ tol ‖b‖.
///
/// The recurrence residual can drift away from the true one on badly
/// conditioned operators, so each converged cycle is checked against b - A x
/// and restarted on the true residual when it falls short.
pub fn gmres(
    mut op: impl FnMut(&StatePair) -> Result<StatePair>,
    b: &StatePair,
    ip: impl Fn(&StatePair, &StatePair) -> f64,
    tol: f64,
    max_iter: usize,
) -> Result<KrylovOutcome> {
    const MAX_CYCLES: usize = 20;
    let beta = norm(&ip, b);
    let mut x = StatePair::zeros(b.len());
    let mut history = vec![1.0];
    let mut used = 0;
    if beta == 0.0 {
        return Ok(KrylovOutcome {
            solution: x,
            iterations: 0,
            residuals: history,
        });
    }
    let mut r = b.clone();
    let mut prev_rel = 1.0;
    for _ in 0..MAX_CYCLES {
        let rn = norm(&ip, &r);
        // the cycle works relative to its own right-hand side
        let cycle_tol = (tol * beta / rn).min(1.0);
        let out = match gmres_cycle(&mut op, &r, &ip, cycle_tol, max_iter - used) {
            Ok(o) => o,
            Err(KdvError::Stagnation { iterations, residual, history: h }) => {
                history.extend(h.iter().skip(1).map(|v| v * rn / beta));
                return Err(KdvError::Stagnation {
                    iterations: used + iterations,
                    residual: residual * rn / beta,
                    history,
                });
            }
            Err(e) => return Err(e),
        };
        used += out.iterations;
        history.extend(out.residuals.iter().skip(1).map(|v| v * rn / beta));
        x.axpy(1.0, &out.solution);
        let ax = op(&x)?;
        r = b.sub(&ax);
        let true_rel = norm(&ip, &r) / beta;
        if let Some(last) = history.last_mut() {
            *last = true_rel;
        }
        if true_rel <= tol {
            return Ok(KrylovOutcome {
                solution: x,
                iterations: used,
                residuals: history,
            });
        }
        // a restart that no longer gains 10% is at the conditioning floor
        if used >= max_iter || true_rel > 0.9 * prev_rel {
            break;
        }
        prev_rel = true_rel;
    }
    Err(KdvError::Stagnation {
        iterations: used,
        residual: *history.last().unwrap_or(&1.0),
        history,
    })
}

fn gmres_cycle(
    op: &mut impl FnMut(&StatePair) -> Result<StatePair>,
    b: &StatePair,
    ip: &impl Fn(&StatePair, &StatePair) -> f64,
    tol: f64,
    max_iter: usize,
) -> Result<KrylovOutcome> {
    let beta = norm(ip, b);
    let mut history = vec![1.0];
    let mut basis = vec![b.scaled(1.0 / beta)];
    // Hessenberg columns after Givens rotation (upper triangular part).
    let mut r: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<(f64, f64)> = Vec::new();
    let mut gvec = vec![beta];

    for j in 0..max_iter {
        let mut w = op(&basis[j])?;
        if w.u.iter().chain(&w.v).any(|x| !x.is_finite()) {
            return Err(KdvError::NonFinite("Krylov operator output".into()));
        }
        let wnorm = norm(ip, &w);
        let mut h = vec![0.0; j + 2];
        // modified Gram–Schmidt, two passes
        for _ in 0..2 {
            for (i, vi) in basis.iter().enumerate() {
                let hij = ip(&w, vi);
                h[i] += hij;
                w.axpy(-hij, vi);
            }
        }
        let hnext = norm(ip, &w);
        h[j + 1] = hnext;
        for (i, &(c, s)) in cs.iter().enumerate() {
            let (a, bb) = (h[i], h[i + 1]);
            h[i] = c * a + s * bb;
            h[i + 1] = -s * a + c * bb;
        }
        let denom = h[j].hypot(h[j + 1]);
        let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (h[j] / denom, h[j + 1] / denom) };
        h[j] = denom;
        h[j + 1] = 0.0;
        cs.push((c, s));
        let gj = gvec[j];
        gvec[j] = c * gj;
        gvec.push(-s * gj);
        h.truncate(j + 1);
        r.push(h);

        let rel = gvec[j + 1].abs() / beta;
        history.push(rel);
        // happy breakdown: A v_j (numerically) lies in the current subspace
        let breakdown = hnext <= 1e-13 * wnorm;
        if rel <= tol || breakdown {
            let k = j + 1;
            let mut y = vec![0.0; k];
            for i in (0..k).rev() {
                let mut acc = gvec[i];
                for (l, yl) in y.iter().enumerate().take(k).skip(i + 1) {
                    acc -= r[l][i] * yl;
                }
                if r[i][i] == 0.0 {
                    return Err(KdvError::Singular {
                        context: "GMRES least-squares system".into(),
                    });
                }
                y[i] = acc / r[i][i];
            }
            let mut x = StatePair::zeros(b.len());
            for (yi, vi) in y.iter().zip(&basis) {
                x.axpy(*yi, vi);
            }
            return Ok(KrylovOutcome {
                solution: x,
                iterations: k,
                residuals: history,
            });
        }
        basis.push(w.scaled(1.0 / hnext));
    }
    Err(KdvError::Stagnation {
        iterations: max_iter,
        residual: *history.last().unwrap_or(&1.0),
        history,
    })
}

/// Conjugate gradient from x = 0. Loss of positivity (pᵀAp ≤ 0) is reported
/// as stagnation.
pub fn conjugate_gradient(
    mut op: impl FnMut(&StatePair) -> Result<StatePair>,
    b: &StatePair,
    ip: impl Fn(&StatePair, &StatePair) -> f64,
    tol: f64,
    max_iter: usize,
) -> Result<KrylovOutcome> {
    let beta = norm(&ip, b);
    let mut history = vec![1.0];
    let mut x = StatePair::zeros(b.len());
    if beta == 0.0 {
        return Ok(KrylovOutcome {
            solution: x,
            iterations: 0,
            residuals: history,
        });
    }
    let mut r = b.clone();
    let mut d = r.clone();
    let mut rr = ip(&r, &r);
    for it in 1..=max_iter {
        let ad = op(&d)?;
        let dad = ip(&d, &ad);
        if !(dad > 0.0) {
            return Err(KdvError::Stagnation {
                iterations: it,
                residual: *history.last().unwrap(),
                history,
            });
        }
        let alpha = rr / dad;
        x.axpy(alpha, &d);
        r.axpy(-alpha, &ad);
        let rr_new = ip(&r, &r);
        let rel = rr_new.max(0.0).sqrt() / beta;
        history.push(rel);
        if !rel.is_finite() {
            return Err(KdvError::NonFinite("conjugate gradient residual".into()));
        }
        if rel <= tol {
            return Ok(KrylovOutcome {
                solution: x,
                iterations: it,
                residuals: history,
            });
        }
        let bcoef = rr_new / rr;
        rr = rr_new;
        let mut dn = r.clone();
        dn.axpy(bcoef, &d);
        d = dn;
    }
    Err(KdvError::Stagnation {
        iterations: max_iter,
        residual: *history.last().unwrap(),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dot(a: &StatePair, b: &StatePair) -> f64 {
        a.u.iter().zip(&b.u).chain(a.v.iter().zip(&b.v)).map(|(x, y)| x * y).sum()
    }

    fn matrix_op(m: &[Vec<f64>]) -> impl Fn(&StatePair) -> Result<StatePair> + '_ {
        move |x: &StatePair| {
            let n = x.len();
            let flat: Vec<f64> = x.u.iter().chain(&x.v).copied().collect();
            let y: Vec<f64> = m.iter().map(|row| row.iter().zip(&flat).map(|(a, b)| a * b).sum()).collect();
            Ok(StatePair::new(y[..n].to_vec(), y[n..].to_vec()))
        }
    }

    fn spd(n: usize, rng: &mut ChaCha8Rng, skew: f64) -> Vec<Vec<f64>> {
        let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let s: f64 = (0..n).map(|k| b[i][k] * b[j][k]).sum::<f64>() / n as f64;
                        s + if i == j { 1.0 } else { 0.0 } + skew * (b[i][j] - b[j][i])
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn both_methods_solve_spd_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = spd(20, &mut rng, 0.0);
        let b = StatePair::new((0..10).map(|i| i as f64).collect(), vec![1.0; 10]);
        for out in [
            gmres(matrix_op(&m), &b, dot, 1e-12, 100).unwrap(),
            conjugate_gradient(matrix_op(&m), &b, dot, 1e-12, 100).unwrap(),
        ] {
            let ax = matrix_op(&m)(&out.solution).unwrap();
            let res = ax.sub(&b);
            assert!(dot(&res, &res).sqrt() < 1e-10 * dot(&b, &b).sqrt());
        }
    }

    #[test]
    fn gmres_handles_nonsymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = spd(16, &mut rng, 0.3);
        let b = StatePair::new(vec![1.0; 8], (0..8).map(|i| (i as f64).sin()).collect());
        let out = gmres(matrix_op(&m), &b, dot, 1e-10, 50).unwrap();
        assert!(out.iterations <= 16);
        for w in out.residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_rhs_and_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = spd(12, &mut rng, 0.0);
        let out = gmres(matrix_op(&m), &StatePair::zeros(6), dot, 1e-8, 10).unwrap();
        assert_eq!(out.iterations, 0);
        let b = StatePair::new(vec![1.0; 6], vec![-1.0; 6]);
        let err = gmres(matrix_op(&m), &b, dot, 1e-15, 2).unwrap_err();
        assert!(matches!(err, KdvError::Stagnation { iterations: 2, .. }));
    }
}
