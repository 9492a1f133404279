//! Shared domain types: physical parameters, the space-time grid, state pairs,
//! control configurations, and the diagonal form of the dispersion coupling.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, KdvError, Result};

/// Physical coefficients of the coupled system
///
/// ```text
/// u_t + u u_x + u_xxx + a v_xxx + a1 v v_x + a2 (u v)_x = 0
/// c v_t + r v_x + v v_x + a b u_xxx + v_xxx + a2 b u u_x + a1 b (u v)_x = 0
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub a: f64,
    #[serde(default)]
    pub a1: f64,
    #[serde(default)]
    pub a2: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
}

impl Parameters {
    pub fn new(a: f64, a1: f64, a2: f64, b: f64, c: f64, r: f64) -> Self {
        Self { a, a1, a2, b, c, r }
    }

    /// Linear-only parameter set (a1 = a2 = 0).
    pub fn linear(a: f64, b: f64, c: f64, r: f64) -> Self {
        Self::new(a, 0.0, 0.0, b, c, r)
    }

    /// 1 - a^2 b, the leading coefficient of the spectral polynomial.
    pub fn defect(&self) -> f64 {
        1.0 - self.a * self.a * self.b
    }
}

/// Checks b > 0, c > 0 and 1 - a^2 b > 0.
pub fn validate_params(p: Parameters) -> Result<Parameters> {
    let all = [p.a, p.a1, p.a2, p.b, p.c, p.r];
    if all.iter().any(|v| !v.is_finite()) {
        return Err(KdvError::NonFinite("parameters".into()));
    }
    if p.b <= 0.0 {
        return Err(KdvError::ConstraintViolation(format!("b <= 0 (b = {})", p.b)));
    }
    if p.c <= 0.0 {
        return Err(KdvError::ConstraintViolation(format!("c <= 0 (c = {})", p.c)));
    }
    if p.defect() <= 0.0 {
        return Err(KdvError::ConstraintViolation(format!(
            "1 - a^2 b <= 0 (1 - a^2 b = {})",
            p.defect()
        )));
    }
    Ok(p)
}

/// Uniform discretization of (0, L) x (0, T).
///
/// `interior` is the number of interior nodes N; the spatial grid has N + 2
/// nodes including both endpoints. `steps` is the number of time steps M,
/// giving M + 1 time levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub length: f64,
    pub interior: usize,
    pub horizon: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(length: f64, interior: usize, horizon: f64, steps: usize) -> Result<Self> {
        let g = Self {
            length,
            interior,
            horizon,
            steps,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(KdvError::InvalidGrid(format!("length must be > 0, got {}", self.length)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(KdvError::InvalidGrid(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.interior < 8 {
            return Err(KdvError::InvalidGrid(format!(
                "need at least 8 interior nodes, got {}",
                self.interior
            )));
        }
        if self.steps < 2 {
            return Err(KdvError::InvalidGrid(format!("need at least 2 time steps, got {}", self.steps)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.interior + 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Number of spatial nodes, N + 2.
    pub fn nodes(&self) -> usize {
        self.interior + 2
    }

    /// Number of time levels, M + 1.
    pub fn levels(&self) -> usize {
        self.steps + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.interior + 1 {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn t(&self, n: usize) -> f64 {
        if n == self.steps {
            self.horizon
        } else {
            n as f64 * self.dt()
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nodes()).map(|i| self.x(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.levels()).map(|n| self.t(n)).collect()
    }
}

/// The pair (u, v) sampled at the N + 2 spatial nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl StatePair {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Self {
        Self { u, v }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: &Grid, fu: impl Fn(f64) -> f64, fv: impl Fn(f64) -> f64) -> Self {
        let xs = grid.xs();
        Self {
            u: xs.iter().map(|&x| fu(x)).collect(),
            v: xs.iter().map(|&x| fv(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x == 0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            u: self.u.iter().map(|x| alpha * x).collect(),
            v: self.v.iter().map(|x| alpha * x).collect(),
        }
    }

    /// self += alpha * other
    pub fn axpy(&mut self, alpha: f64, other: &StatePair) {
        for (a, b) in self.u.iter_mut().zip(&other.u) {
            *a += alpha * b;
        }
        for (a, b) in self.v.iter_mut().zip(&other.v) {
            *a += alpha * b;
        }
    }

    pub fn add(&self, other: &StatePair) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &StatePair) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn check(&self, grid: &Grid, what: &str) -> Result<()> {
        let n = grid.nodes();
        for (name, comp) in [("u", &self.u), ("v", &self.v)] {
            if comp.len() != n {
                return Err(KdvError::DimensionMismatch {
                    what: format!("{what}.{name}"),
                    expected: n,
                    found: comp.len(),
                });
            }
        }
        ensure_finite(&self.u, what)?;
        ensure_finite(&self.v, what)
    }
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Weighted inner product (b/c) <u1, u2> + <v1, v2> by trapezoid quadrature.
pub fn x_inner(s1: &StatePair, s2: &StatePair, p: &Parameters, g: &Grid) -> Result<f64> {
    s1.check(g, "state")?;
    s2.check(g, "state")?;
    Ok(x_inner_unchecked(s1, s2, p.b / p.c, g.dx()))
}

pub(crate) fn x_inner_unchecked(s1: &StatePair, s2: &StatePair, weight: f64, dx: f64) -> f64 {
    let n = s1.u.len();
    let mut su = 0.0;
    let mut sv = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        su += w * s1.u[i] * s2.u[i];
        sv += w * s1.v[i] * s2.v[i];
    }
    dx * (weight * su + sv)
}

/// sqrt((b/c) ∫u² + ∫v²).
pub fn x_norm(s: &StatePair, p: &Parameters, g: &Grid) -> Result<f64> {
    Ok(x_inner(s, s, p, g)?.max(0.0).sqrt())
}

/// The six boundary inputs, in the fixed order h0, h1, h2, g0, g1, g2.
pub const SIGNAL_NAMES: [&str; 6] = ["h0", "h1", "h2", "g0", "g1", "g2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConfigKind {
    FourI,
    #[serde(rename = "FOUR_II")]
    FourII,
    #[serde(rename = "FOUR_III")]
    FourIII,
    #[serde(rename = "FOUR_IV")]
    FourIV,
    ThreeV,
    #[serde(rename = "THREE_VI")]
    ThreeVI,
    Custom,
}

impl ConfigKind {
    pub const NAMED: [ConfigKind; 6] = [
        ConfigKind::FourI,
        ConfigKind::FourII,
        ConfigKind::FourIII,
        ConfigKind::FourIV,
        ConfigKind::ThreeV,
        ConfigKind::ThreeVI,
    ];

    /// Active inputs (h0, h1, h2, g0, g1, g2) for the named configurations.
    pub fn pattern(self) -> Option<[bool; 6]> {
        let p = match self {
            ConfigKind::FourI => [true, true, true, false, true, false],
            ConfigKind::FourII => [false, true, false, true, true, true],
            ConfigKind::FourIII => [true, true, false, true, true, false],
            ConfigKind::FourIV => [false, true, true, false, true, true],
            ConfigKind::ThreeV => [true, true, false, true, false, false],
            ConfigKind::ThreeVI => [true, false, false, true, true, false],
            ConfigKind::Custom => return None,
        };
        Some(p)
    }

    pub fn is_three_control(self) -> bool {
        matches!(self, ConfigKind::ThreeV | ConfigKind::ThreeVI)
    }

    pub fn name(self) -> &'static str {
        match self {
            ConfigKind::FourI => "FOUR_I",
            ConfigKind::FourII => "FOUR_II",
            ConfigKind::FourIII => "FOUR_III",
            ConfigKind::FourIV => "FOUR_IV",
            ConfigKind::ThreeV => "THREE_V",
            ConfigKind::ThreeVI => "THREE_VI",
            ConfigKind::Custom => "CUSTOM",
        }
    }
}

/// Which of the six boundary inputs are used as controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub kind: ConfigKind,
    pub mask: [bool; 6],
}

impl ControlConfig {
    pub fn new(kind: ConfigKind, mask: [bool; 6]) -> Result<Self> {
        if let Some(expected) = kind.pattern() {
            if expected != mask {
                return Err(KdvError::ConfigMismatch(format!(
                    "mask {mask:?} does not match the pattern of {}",
                    kind.name()
                )));
            }
        }
        Ok(Self { kind, mask })
    }

    pub fn named(kind: ConfigKind) -> Self {
        let mask = kind.pattern().unwrap_or([true; 6]);
        Self { kind, mask }
    }

    pub fn custom(mask: [bool; 6]) -> Self {
        Self {
            kind: ConfigKind::Custom,
            mask,
        }
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.kind, self.mask).map(|_| ())
    }

    pub fn active_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Eigen-decomposition of the dispersion matrix [[1, a], [ab/c, 1/c]].
///
/// `from_diagonal` holds unit eigenvectors as columns (first nonzero entry
/// positive) and `to_diagonal` is its inverse, so that
/// `from_diagonal * diag(lambda_plus, lambda_minus) * to_diagonal` is the
/// dispersion matrix.
///
/// A closed form sometimes quoted for these coefficients,
/// `-(1/2)((1/c - 1) ± sqrt((1/c - 1)^2 + 4 a^2 b / c))`, does not match the
/// matrix: at a = 0, c = 2 it yields {0, 1/2} while the eigenvalues are
/// {1, 1/2}. The decomposition here is computed from the matrix itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalForm {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub to_diagonal: [[f64; 2]; 2],
    pub from_diagonal: [[f64; 2]; 2],
}

impl DiagonalForm {
    pub fn dispersion_matrix(p: &Parameters) -> [[f64; 2]; 2] {
        [[1.0, p.a], [p.a * p.b / p.c, 1.0 / p.c]]
    }

    /// from_diagonal * diag(λ+, λ-) * to_diagonal
    pub fn reconstruct(&self) -> [[f64; 2]; 2] {
        let v = self.from_diagonal;
        let w = self.to_diagonal;
        let l = [self.lambda_plus, self.lambda_minus];
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..2).map(|k| v[i][k] * l[k] * w[k][j]).sum();
            }
        }
        out
    }
}

fn unit_eigenvector(m: [[f64; 2]; 2], lambda: f64) -> [f64; 2] {
    // Null vector of (M - λI), taken from whichever row is better conditioned.
    let r0 = [m[0][0] - lambda, m[0][1]];
    let r1 = [m[1][0], m[1][1] - lambda];
    let n0 = r0[0].hypot(r0[1]);
    let n1 = r1[0].hypot(r1[1]);
    let mut e = if n0 >= n1 && n0 > 1e-14 {
        [-r0[1], r0[0]]
    } else if n1 > 1e-14 {
        [-r1[1], r1[0]]
    } else {
        [1.0, 0.0]
    };
    let norm = e[0].hypot(e[1]);
    e = [e[0] / norm, e[1] / norm];
    let lead = if e[0].abs() > 1e-14 { e[0] } else { e[1] };
    if lead < 0.0 {
        e = [-e[0], -e[1]];
    }
    e
}

pub fn diagonalize(p: &Parameters) -> Result<DiagonalForm> {
    validate_params(*p)?;
    let m = DiagonalForm::dispersion_matrix(p);
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    // (1 - 1/c)^2 + 4 a^2 b / c, written without cancellation.
    let disc = (m[0][0] - m[1][1]).powi(2) + 4.0 * m[0][1] * m[1][0];
    let root = disc.max(0.0).sqrt();
    let lambda_plus = 0.5 * (tr + root);
    let lambda_minus = det / lambda_plus;

    let (e_plus, e_minus) = if root <= 1e-14 * tr.abs().max(1.0) {
        // Scalar multiple of the identity: any basis diagonalizes it.
        ([1.0, 0.0], [0.0, 1.0])
    } else {
        (unit_eigenvector(m, lambda_plus), unit_eigenvector(m, lambda_minus))
    };
    let from = [[e_plus[0], e_minus[0]], [e_plus[1], e_minus[1]]];
    let d = from[0][0] * from[1][1] - from[0][1] * from[1][0];
    let to = [
        [from[1][1] / d, -from[0][1] / d],
        [-from[1][0] / d, from[0][0] / d],
    ];
    Ok(DiagonalForm {
        lambda_plus,
        lambda_minus,
        to_diagonal: to,
        from_diagonal: from,
    })
}
