use serde::{Deserialize, Serialize};

use super::stencils::{D1_AT_0, D1_AT_L, D2_AT_0, D2_AT_L};
use crate::model::{Grid, StatePair};

/// Value and first two x-derivatives of one component at both endpoints.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComponentTraces {
    pub value_0: Vec<f64>,
    pub dx_0: Vec<f64>,
    pub dxx_0: Vec<f64>,
    pub value_l: Vec<f64>,
    pub dx_l: Vec<f64>,
    pub dxx_l: Vec<f64>,
}

impl ComponentTraces {
    fn with_capacity(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            value_0: v(),
            dx_0: v(),
            dxx_0: v(),
            value_l: v(),
            dx_l: v(),
            dxx_l: v(),
        }
    }

    fn push(&mut self, f: &[f64], dx: f64) {
        let n = f.len();
        let d1_0 = (D1_AT_0[0] * f[0] + D1_AT_0[1] * f[1] + D1_AT_0[2] * f[2]) / dx;
        let d2_0 = (0..4).map(|k| D2_AT_0[k] * f[k]).sum::<f64>() / (dx * dx);
        let d1_l = (0..3).map(|k| D1_AT_L[k] * f[n - 1 - k]).sum::<f64>() / dx;
        let d2_l = (0..4).map(|k| D2_AT_L[k] * f[n - 1 - k]).sum::<f64>() / (dx * dx);
        self.value_0.push(f[0]);
        self.dx_0.push(d1_0);
        self.dxx_0.push(d2_0);
        self.value_l.push(f[n - 1]);
        self.dx_l.push(d1_l);
        self.dxx_l.push(d2_l);
    }

    pub fn series(&self) -> [&Vec<f64>; 6] {
        [
            &self.value_0,
            &self.dx_0,
            &self.dxx_0,
            &self.value_l,
            &self.dx_l,
            &self.dxx_l,
        ]
    }
}

/// Boundary traces of both components; `u`/`v` hold φ/ψ for adjoint solutions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceBundle {
    pub u: ComponentTraces,
    pub v: ComponentTraces,
}

/// CSV column names of the twelve trace series, in `TraceBundle::columns` order.
pub const TRACE_COLUMNS: [&str; 12] = [
    "u_0", "u_x_0", "u_xx_0", "u_L", "u_x_L", "u_xx_L", "v_0", "v_x_0", "v_xx_0", "v_L", "v_x_L",
    "v_xx_L",
];

impl TraceBundle {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            u: ComponentTraces::with_capacity(n),
            v: ComponentTraces::with_capacity(n),
        }
    }

    pub(crate) fn push(&mut self, s: &StatePair, dx: f64) {
        self.u.push(&s.u, dx);
        self.v.push(&s.v, dx);
    }

    pub fn levels(&self) -> usize {
        self.u.value_0.len()
    }

    pub fn columns(&self) -> [&Vec<f64>; 12] {
        let [a, b, c, d, e, f] = self.u.series();
        let [g, h, i, j, k, l] = self.v.series();
        [a, b, c, d, e, f, g, h, i, j, k, l]
    }
}

/// Traces of a sequence of states by one-sided differences.
pub fn extract_traces(states: &[StatePair], grid: &Grid) -> TraceBundle {
    let mut tb = TraceBundle::with_capacity(states.len());
    for s in states {
        tb.push(s, grid.dx());
    }
    tb
}
