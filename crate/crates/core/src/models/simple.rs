//! Small analytic test systems.

use crate::limit_cycle::SlowFastSystem;
use crate::ode::VectorField;

/// Hopf normal form `ṙ = r(1 − r²)`, `θ̇ = ω` in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hopf {
    pub omega: f64,
}

impl Default for Hopf {
    fn default() -> Self {
        Hopf { omega: 1.0 }
    }
}

impl VectorField for Hopf {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let (a, b) = (x[0], x[1]);
        let q = 1.0 - a * a - b * b;
        dx[0] = a * q - self.omega * b;
        dx[1] = b * q + self.omega * a;
    }

    fn jacobian(&self, _t: f64, x: &[f64], jac: &mut [f64]) -> bool {
        let (a, b) = (x[0], x[1]);
        let q = 1.0 - a * a - b * b;
        jac[0] = q - 2.0 * a * a;
        jac[1] = -2.0 * a * b - self.omega;
        jac[2] = -2.0 * a * b + self.omega;
        jac[3] = q - 2.0 * b * b;
        true
    }
}

/// Odd-symmetric relaxation oscillator `v̇ = (v − v³ − w)`, `ẇ = μ v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToySlowFast {
    pub mu: f64,
}

impl VectorField for ToySlowFast {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        dx[0] = self.fast(x[0], x[1]);
        dx[1] = self.mu * self.slow(x[0], x[1]);
    }
}

impl SlowFastSystem for ToySlowFast {
    fn fast(&self, v: f64, w: f64) -> f64 {
        v - v * v * v - w
    }
    fn fast_dv(&self, v: f64, _w: f64) -> f64 {
        1.0 - 3.0 * v * v
    }
    fn slow(&self, v: f64, _w: f64) -> f64 {
        v
    }
    fn critical(&self, v: f64) -> f64 {
        v - v * v * v
    }
    fn critical_slope(&self, v: f64) -> f64 {
        1.0 - 3.0 * v * v
    }
    fn search_range(&self) -> (f64, f64) {
        (-3.0, 3.0)
    }
}
