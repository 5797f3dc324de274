//! Closed-form spectral data of the two-dimensional Landau Hamiltonian in
//! units hbar = mass = charge = 1 with the kinetic convention -Laplace/2:
//! level energies (l + 1/2) B, the projection kernel onto the l-th level,
//! and the staircase integrated density of states.

use crate::quad;
use crate::{Error, Result};
use num_complex::Complex64;

/// Field strength and level index of one Landau level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauParams {
    pub b: f64,
    pub level: u32,
}

impl LandauParams {
    pub fn new(b: f64, level: u32) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Model(format!("field strength {b} must be > 0")));
        }
        Ok(LandauParams { b, level })
    }

    /// Level energy (l + 1/2) B.
    pub fn energy(&self) -> f64 {
        (self.level as f64 + 0.5) * self.b
    }
}

/// Laguerre polynomial L_l(xi) by the stable three-term recurrence.
pub fn laguerre(level: u32, xi: f64) -> f64 {
    let mut p0 = 1.0;
    if level == 0 {
        return p0;
    }
    let mut p1 = 1.0 - xi;
    for n in 1..level {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0 - xi) * p1 - nf * p0) / (nf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Projection kernel of the l-th Landau level:
/// P_l(x, y) = (B/2pi) exp[i (B/2)(x2 y1 - x1 y2) - (B/4)|x-y|^2]
///             L_l((B/2)|x-y|^2).
pub fn landau_kernel(params: &LandauParams, x: [f64; 2], y: [f64; 2]) -> Complex64 {
    let b = params.b;
    let dx = x[0] - y[0];
    let dy = x[1] - y[1];
    let dist_sq = dx * dx + dy * dy;
    let phase = b / 2.0 * (x[1] * y[0] - x[0] * y[1]);
    let magnitude = b / std::f64::consts::TAU
        * (-b / 4.0 * dist_sq).exp()
        * laguerre(params.level, b / 2.0 * dist_sq);
    Complex64::from_polar(1.0, phase) * magnitude
}

/// Staircase integrated density of states of the Landau Hamiltonian:
/// N(E) = (B/2pi) #{l >= 0 : (l + 1/2) B < E}, left-continuous (a level
/// energy itself does not count).
pub fn landau_staircase(b: f64, e: f64) -> f64 {
    assert!(b > 0.0, "field strength must be positive");
    let x = e / b - 0.5;
    if x <= 0.0 {
        return 0.0;
    }
    // count = #{l : l < x}; nudge a float-rounded candidate onto the strict
    // inequality
    let mut count = x.ceil() as i64;
    while count > 0 && (count as f64 - 1.0 + 0.5) * b >= e {
        count -= 1;
    }
    while ((count as f64) + 0.5) * b < e {
        count += 1;
    }
    b / std::f64::consts::TAU * count as f64
}

/// Trace of 1_cube P_l 1_cube over the unit square centered at the origin,
/// by tensor quadrature of the kernel diagonal. Equals B/2pi, the degeneracy
/// per area.
pub fn degeneracy_trace(params: &LandauParams, order: usize) -> f64 {
    quad::integrate_rect_2d(
        |x, y| landau_kernel(params, [x, y], [x, y]).re,
        [-0.5, -0.5],
        [0.5, 0.5],
        order,
    )
}
