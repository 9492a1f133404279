//! Finite-difference weights, as (offset, weight) pairs before division by dx^k.

/// Centered third derivative, second order.
pub const D3_CENTERED: [(isize, f64); 4] = [(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)];

/// Third derivative at node 1, using nodes 0..=4.
pub const D3_LEFT: [(isize, f64); 5] = [(-1, -1.5), (0, 5.0), (1, -6.0), (2, 3.0), (3, -0.5)];

/// Third derivative at node N, using nodes N-3..=N+1.
pub const D3_RIGHT: [(isize, f64); 5] = [(-3, 0.5), (-2, -3.0), (-1, 6.0), (0, -5.0), (1, 1.5)];

/// Centered first derivative.
pub const D1_CENTERED: [(isize, f64); 2] = [(-1, -0.5), (1, 0.5)];

/// One-sided first derivative at x = 0 (nodes 0, 1, 2), over dx.
pub const D1_AT_0: [f64; 3] = [-1.5, 2.0, -0.5];

/// One-sided second derivative at x = 0 (nodes 0..=3), over dx².
pub const D2_AT_0: [f64; 4] = [2.0, -5.0, 4.0, -1.0];

/// One-sided first derivative at x = L (nodes N+1, N, N-1), over dx.
pub const D1_AT_L: [f64; 3] = [1.5, -2.0, 0.5];

/// One-sided second derivative at x = L (nodes N+1, N, N-1, N-2), over dx².
pub const D2_AT_L: [f64; 4] = [2.0, -5.0, 4.0, -1.0];
