//! FitzHugh–Nagumo relaxation oscillator.

use super::ModelError;
use crate::limit_cycle::SlowFastSystem;
use crate::ode::VectorField;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FhnParams {
    pub a: f64,
    pub b: f64,
    pub i: f64,
    pub mu: f64,
}

impl Default for FhnParams {
    fn default() -> Self {
        FhnParams {
            a: 0.7,
            b: 0.8,
            i: 0.33,
            mu: 0.05,
        }
    }
}

impl FhnParams {
    pub fn with_mu(mu: f64) -> Self {
        FhnParams {
            mu,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "mu",
                value: self.mu,
            });
        }
        for (name, value) in [("a", self.a), ("b", self.b), ("i", self.i)] {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// Time unit in which a slow-fast model is integrated.
///
/// `Fast` is the field exactly as written (`ẇ = μ(...)`); `Slow` divides the
/// whole field by μ so that the slow variable moves at unit rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScale {
    Fast,
    #[default]
    Slow,
}

impl TimeScale {
    /// Multiplier applied to the written field.
    pub fn rate(self, mu: f64) -> f64 {
        match self {
            TimeScale::Fast => 1.0,
            TimeScale::Slow => 1.0 / mu,
        }
    }
}

/// `v̇ = v − v³/3 − w + i`, `ẇ = μ(v + a − bw)`, times `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fhn {
    pub p: FhnParams,
    pub rate: f64,
}

impl Fhn {
    pub fn new(p: FhnParams, scale: TimeScale) -> Self {
        Fhn {
            p,
            rate: scale.rate(p.mu),
        }
    }
}

/// The single oscillator in the time units as written.
pub fn fhn_single(p: FhnParams) -> Fhn {
    Fhn::new(p, TimeScale::Fast)
}

impl VectorField for Fhn {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let (v, w) = (x[0], x[1]);
        let p = &self.p;
        dx[0] = self.rate * (v - v * v * v / 3.0 - w + p.i);
        dx[1] = self.rate * p.mu * (v + p.a - p.b * w);
    }

    fn jacobian(&self, _t: f64, x: &[f64], jac: &mut [f64]) -> bool {
        let v = x[0];
        let r = self.rate;
        jac[0] = r * (1.0 - v * v);
        jac[1] = -r;
        jac[2] = r * self.p.mu;
        jac[3] = -r * self.p.mu * self.p.b;
        true
    }
}

impl SlowFastSystem for Fhn {
    fn fast(&self, v: f64, w: f64) -> f64 {
        v - v * v * v / 3.0 - w + self.p.i
    }
    fn fast_dv(&self, v: f64, _w: f64) -> f64 {
        1.0 - v * v
    }
    fn slow(&self, v: f64, w: f64) -> f64 {
        v + self.p.a - self.p.b * w
    }
    fn critical(&self, v: f64) -> f64 {
        v - v * v * v / 3.0 + self.p.i
    }
    fn critical_slope(&self, v: f64) -> f64 {
        1.0 - v * v
    }
    fn search_range(&self) -> (f64, f64) {
        (-4.0, 4.0)
    }
}

/// One branch of the critical manifold `w = v − v³/3 + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalBranch {
    /// Range of `v` covered by the branch (may be unbounded).
    pub v_range: (f64, f64),
    pub stable: bool,
}

/// Fold of the critical manifold and the point the layer flow drops to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub v: f64,
    pub w: f64,
    pub drop_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalManifold {
    pub branches: Vec<CriticalBranch>,
    pub folds: Vec<Fold>,
}

/// Branches, folds and drop points of the FHN critical manifold.
pub fn fhn_critical_manifold(p: FhnParams) -> CriticalManifold {
    let w_of = |v: f64| v - v * v * v / 3.0 + p.i;
    // v − v³/3 = ±2/3 factors as (v ∓ 1)²(v ± 2)
    CriticalManifold {
        branches: vec![
            CriticalBranch {
                v_range: (f64::NEG_INFINITY, -1.0),
                stable: true,
            },
            CriticalBranch {
                v_range: (-1.0, 1.0),
                stable: false,
            },
            CriticalBranch {
                v_range: (1.0, f64::INFINITY),
                stable: true,
            },
        ],
        folds: vec![
            Fold {
                v: 1.0,
                w: w_of(1.0),
                drop_v: -2.0,
            },
            Fold {
                v: -1.0,
                w: w_of(-1.0),
                drop_v: 2.0,
            },
        ],
    }
}

impl CriticalManifold {
    /// Solves `f(v, w) = 0` for `v` on the branch with the given index.
    pub fn branch_v(&self, p: FhnParams, branch: usize, w: f64) -> Option<f64> {
        let br = self.branches.get(branch)?;
        let g = |v: f64| v - v * v * v / 3.0 + p.i - w;
        let lo = br.v_range.0.max(-10.0);
        let hi = br.v_range.1.min(10.0);
        let (glo, ghi) = (g(lo), g(hi));
        if glo.signum() == ghi.signum() && glo != 0.0 && ghi != 0.0 {
            return None;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (g(m) < 0.0) == (glo < 0.0) {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 {
                break;
            }
        }
        Some(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate_to, jacobian_mismatch, FnField, StepOptions, Tolerance};

    #[test]
    fn rhs_at_rest_value() {
        let f = fhn_single(FhnParams::default()).eval(0.0, &[0.0, 0.33]);
        assert!(f[0].abs() < 1e-15);
        assert!((f[1] - 0.0218).abs() < 1e-15);
    }

    #[test]
    fn jacobian_formula_and_fd_agreement() {
        let vf = fhn_single(FhnParams::default());
        let mut j = [0.0; 4];
        vf.jacobian(0.0, &[0.0, 0.0], &mut j);
        for (a, b) in j.iter().zip([1.0, -1.0, 0.05, -0.04]) {
            assert!((a - b).abs() < 1e-15);
        }
        for scale in [TimeScale::Fast, TimeScale::Slow] {
            let vf = Fhn::new(FhnParams::default(), scale);
            for x in [[0.3, -0.2], [-1.7, 0.9], [2.1, 1.3]] {
                assert!(jacobian_mismatch(&vf, 0.0, &x).unwrap() < 1e-5);
            }
        }
    }

    #[test]
    fn folds_and_drop_points() {
        let p = FhnParams::default();
        let m = fhn_critical_manifold(p);
        assert!((m.folds[0].w - (2.0 / 3.0 + 0.33)).abs() < 1e-15);
        assert!((m.folds[1].w - (-2.0 / 3.0 + 0.33)).abs() < 1e-15);
        for f in &m.folds {
            let w_drop = f.drop_v - f.drop_v.powi(3) / 3.0 + p.i;
            assert!((w_drop - f.w).abs() < 1e-14);
        }
    }

    #[test]
    fn branch_solutions_lie_on_manifold() {
        let p = FhnParams::default();
        let m = fhn_critical_manifold(p);
        let vf = fhn_single(p);
        for (branch, (w0, w1)) in [(0, (-0.33, 1.5)), (2, (-1.0, 0.99))] {
            for k in 0..100 {
                let w = w0 + (w1 - w0) * k as f64 / 99.0;
                let v = m.branch_v(p, branch, w).unwrap();
                assert!(vf.fast(v, w).abs() < 1e-12, "branch {branch} w {w}");
            }
        }
    }

    #[test]
    fn layer_flow_from_upper_fold_lands_on_left_branch() {
        let p = FhnParams::default();
        let fold = fhn_critical_manifold(p).folds[0];
        let layer = FnField::new(1, move |_, x, dx| dx[0] = x[0] - x[0].powi(3) / 3.0 - fold.w + p.i);
        let opts = StepOptions::with_tol(Tolerance::new(1e-10, 1e-12));
        let v = integrate_to(&layer, &[fold.v - 0.05], 0.0, 500.0, opts).unwrap();
        assert!((v[0] - fold.drop_v).abs() < 1e-6, "{v:?}");
    }
}
