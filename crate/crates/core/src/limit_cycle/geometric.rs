//! Geometric phase ψ of a planar state and its inverse along the cycle.

use super::{LimitCycle, LimitCycleError};
use crate::core_math::{wrap, Phase};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Default centre `(0, 0.5)` inside the FHN cycle.
pub const DEFAULT_CENTER: [f64; 2] = [0.0, 0.5];

/// `ψ = atan2(v − x, y − w)` for state `(v, w)` and centre `(x, y)`.
pub fn geometric_phase(state: &[f64], center: [f64; 2]) -> Result<Phase, LimitCycleError> {
    let dx = state[0] - center[0];
    let dy = center[1] - state[1];
    if dx.hypot(dy) < 1e-12 {
        return Err(LimitCycleError::DegeneratePoint);
    }
    Ok(Phase::new(dx.atan2(dy)))
}

/// Tabulated monotone map θ ↦ ψ(γ(θ)) with its inverse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometricPhaseTable {
    center: [f64; 2],
    /// Unwrapped ψ at θ_i = 2πi/N, with a closing entry ψ_0 + 2π.
    psi: Vec<f64>,
}

impl GeometricPhaseTable {
    pub fn new(lc: &LimitCycle, center: [f64; 2]) -> Result<Self, LimitCycleError> {
        let n = lc.grid_len();
        let mut psi = Vec::with_capacity(n + 1);
        let mut prev = 0.0;
        for i in 0..n {
            let raw = geometric_phase(&lc.state(i), center)?.value();
            let val = if i == 0 {
                raw
            } else {
                let step = wrap(raw - wrap(prev));
                // a clockwise step shows up as a wrap close to 2π
                if step == 0.0 || step > std::f64::consts::PI {
                    return Err(LimitCycleError::NonMonotone { index: i });
                }
                prev + step
            };
            psi.push(val);
            prev = val;
        }
        let close = psi[0] + TAU;
        if close <= prev {
            return Err(LimitCycleError::NonMonotone { index: n });
        }
        psi.push(close);
        Ok(GeometricPhaseTable { center, psi })
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn grid_len(&self) -> usize {
        self.psi.len() - 1
    }

    /// ψ at grid phase `i`.
    pub fn psi_at(&self, i: usize) -> Phase {
        Phase::new(self.psi[i])
    }

    /// θ such that ψ(γ(θ)) = ψ, by linear inverse interpolation.
    pub fn theta_of(&self, psi: Phase) -> Phase {
        let n = self.grid_len();
        let target = self.psi[0] + wrap(psi.value() - self.psi[0]);
        let k = self.psi.partition_point(|&p| p <= target).clamp(1, n);
        let (p0, p1) = (self.psi[k - 1], self.psi[k]);
        let frac = ((target - p0) / (p1 - p0)).clamp(0.0, 1.0);
        Phase::new(TAU * ((k - 1) as f64 + frac) / n as f64)
    }

    /// θ of an arbitrary planar state, through its geometric phase.
    pub fn theta_of_state(&self, state: &[f64]) -> Result<Phase, LimitCycleError> {
        Ok(self.theta_of(geometric_phase(state, self.center)?))
    }

    /// Finite-difference slope dψ/dθ on the grid.
    pub fn slope(&self) -> Vec<f64> {
        let n = self.grid_len();
        let dth = TAU / n as f64;
        (0..n).map(|i| (self.psi[i + 1] - self.psi[i]) / dth).collect()
    }
}

/// θ from ψ through the tabulated inverse.
pub fn phase_from_geometric(table: &GeometricPhaseTable, psi: Phase) -> Phase {
    table.theta_of(psi)
}
