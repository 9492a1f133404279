//! Banded matrices and LU factorization with partial pivoting.
//!
//! Rows are stored densely over the window `[i - kl, i + kl + ku]`, which
//! leaves room for the fill-in created by row interchanges.

use crate::error::{KdvError, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku && j < self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl >= i && j <= i + self.kl + self.ku && j < self.n {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry (i, j). Panics if (i, j) lies outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku);
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku);
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn clear_row(&mut self, i: usize) {
        let w = self.width;
        self.data[i * w..(i + 1) * w].fill(0.0);
    }

    /// Copies row `i` of `other` (same shape) into this matrix.
    pub fn copy_row_from(&mut self, other: &BandMatrix, i: usize) {
        let w = self.width;
        self.data[i * w..(i + 1) * w].copy_from_slice(&other.data[i * w..(i + 1) * w]);
    }

    /// self = alpha * self + beta * other
    pub fn combine(&self, alpha: f64, other: &BandMatrix, beta: f64) -> BandMatrix {
        assert_eq!((self.n, self.kl, self.ku), (other.n, other.kl, other.ku));
        let mut out = self.clone();
        for (o, x) in out.data.iter_mut().zip(&other.data) {
            *o = alpha * *o + beta * x;
        }
        out
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.data[self.slot(i, j)] * x[j];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn factor(&self) -> Result<BandLu> {
        BandLu::new(self.clone())
    }
}

/// LU factors of a banded matrix; the multipliers of step k act on rows
/// k+1..=k+kl after the interchange recorded in `piv[k]`.
#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    lower: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn new(mut a: BandMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let span = a.kl + a.ku;
        let scale = a.data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 || !scale.is_finite() {
            return Err(KdvError::Singular {
                context: "banded matrix is zero or non-finite".into(),
            });
        }
        let mut lower = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0; n];

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + span).min(n - 1);
            let mut p = k;
            let mut best = a.data[a.slot(k, k)].abs();
            for i in k + 1..=last_row {
                let v = a.data[a.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 || best < scale * 1e-15 {
                return Err(KdvError::Singular {
                    context: format!("zero pivot in column {k}"),
                });
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (sk, sp) = (a.slot(k, j), a.slot(p, j));
                    a.data.swap(sk, sp);
                }
            }
            let pivot = a.data[a.slot(k, k)];
            for i in k + 1..=last_row {
                let si = a.slot(i, k);
                let m = a.data[si] / pivot;
                a.data[si] = 0.0;
                lower[k * kl + (i - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let (sk, sj) = (a.slot(k, j), a.slot(i, j));
                        a.data[sj] -= m * a.data[sk];
                    }
                }
            }
        }
        Ok(Self { a, lower, piv })
    }

    pub fn dim(&self) -> usize {
        self.a.n
    }

    /// Solves in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.a.n;
        let kl = self.a.kl;
        let span = self.a.kl + self.a.ku;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                let last_row = (k + kl).min(n - 1);
                for i in k + 1..=last_row {
                    b[i] -= self.lower[k * kl + (i - k - 1)] * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + span).min(n - 1);
            let mut acc = b[i];
            for j in i + 1..=last_col {
                acc -= self.a.data[self.a.slot(i, j)] * b[j];
            }
            b[i] = acc / self.a.data[self.a.slot(i, i)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
