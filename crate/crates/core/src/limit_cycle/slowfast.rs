//! Singular-limit branch residence for planar slow-fast systems and the
//! corresponding measurement on finite-μ cycles.

use super::{LimitCycle, LimitCycleError};
use crate::core_math::periodic::{cyclic_runs, run_to_arc};
use crate::core_math::quadrature::integrate;
use crate::core_math::Arc;
use serde::{Deserialize, Serialize};

/// `εv̇ = f(v, w)`, `ẇ = g(v, w)` with critical manifold the graph `w = φ(v)`.
pub trait SlowFastSystem {
    fn fast(&self, v: f64, w: f64) -> f64;
    fn fast_dv(&self, v: f64, w: f64) -> f64;
    fn slow(&self, v: f64, w: f64) -> f64;
    /// φ(v), the critical manifold `f(v, φ(v)) = 0`.
    fn critical(&self, v: f64) -> f64;
    fn critical_slope(&self, v: f64) -> f64;
    /// Range of `v` scanned for folds and drop points.
    fn search_range(&self) -> (f64, f64);
}

const SCAN: usize = 20_000;

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa0 = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) < 0.0) == (fa0 < 0.0) {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `f` on a uniform scan of `[lo, hi]`, refined by bisection.
fn roots(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<f64> {
    let h = (hi - lo) / SCAN as f64;
    let mut out = Vec::new();
    let mut prev = f(lo);
    for k in 1..=SCAN {
        let x = lo + k as f64 * h;
        let cur = f(x);
        if cur == 0.0 {
            out.push(x);
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            out.push(bisect(f, x - h, x));
        }
        prev = cur;
    }
    out
}

/// One stable branch of the singular cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularBranch {
    /// Landing point of the fast jump onto this branch.
    pub v_entry: f64,
    /// Fold at which the branch ends.
    pub v_exit: f64,
    pub w_entry: f64,
    pub w_exit: f64,
    /// Slow time spent on the branch.
    pub residence: f64,
}

impl SingularBranch {
    /// +1 for the branch at positive `v`, −1 otherwise.
    pub fn side(&self) -> f64 {
        (self.v_entry + self.v_exit).signum()
    }

    pub fn contains_v(&self, v: f64) -> bool {
        let (lo, hi) = if self.v_entry < self.v_exit {
            (self.v_entry, self.v_exit)
        } else {
            (self.v_exit, self.v_entry)
        };
        v >= lo && v <= hi
    }
}

/// Singular relaxation cycle: residence on each stable branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularCycle {
    pub branches: Vec<SingularBranch>,
    pub period: f64,
}

impl SingularCycle {
    pub fn fractions(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.residence / self.period).collect()
    }

    /// Residence fraction on the branch at positive `v`.
    pub fn positive_fraction(&self) -> Option<f64> {
        self.branches
            .iter()
            .find(|b| b.side() > 0.0)
            .map(|b| b.residence / self.period)
    }
}

/// Residence times on the stable branches in the singular limit: the time
/// integral of `dw / g(ξ(w), w)` from drop point to fold on each branch.
pub fn singular_residence(sys: &dyn SlowFastSystem) -> Result<SingularCycle, LimitCycleError> {
    let (lo, hi) = sys.search_range();
    let folds = roots(&|v| sys.critical_slope(v), lo, hi);
    if folds.len() != 2 {
        return Err(LimitCycleError::FoldNotFound { found: folds.len() });
    }
    for &v in &folds {
        if sys.fast_dv(v, sys.critical(v)).abs() > 1e-8 {
            return Err(LimitCycleError::FoldNotFound { found: 0 });
        }
    }
    let mut branches = Vec::with_capacity(2);
    for (k, &fold) in folds.iter().enumerate() {
        let w_fold = sys.critical(fold);
        // the double root at the fold has no sign change, so only the drop point remains
        let drops: Vec<f64> = roots(&|v| sys.critical(v) - w_fold, lo, hi)
            .into_iter()
            .filter(|v| (v - fold).abs() > 1e-6)
            .collect();
        let Some(&drop) = drops.first() else {
            return Err(LimitCycleError::DropNotFound { fold_v: fold });
        };
        // the landing branch ends at the other fold
        let exit = folds[1 - k];
        let integrand = |v: f64| {
            let w = sys.critical(v);
            sys.critical_slope(v) / sys.slow(v, w)
        };
        for j in 1..1000 {
            let v = drop + (exit - drop) * j as f64 / 1000.0;
            let g = sys.slow(v, sys.critical(v));
            if g == 0.0 || !g.is_finite() {
                return Err(LimitCycleError::SlowFlowZero { v });
            }
        }
        let g_signs = roots(&|v| sys.slow(v, sys.critical(v)), drop.min(exit), drop.max(exit));
        if let Some(&v) = g_signs.iter().find(|&&v| (v - exit).abs() > 1e-9 && (v - drop).abs() > 1e-9) {
            return Err(LimitCycleError::SlowFlowZero { v });
        }
        let (t, _) = integrate(&integrand, drop, exit, 1e-13);
        if !(t > 0.0) {
            return Err(LimitCycleError::SlowFlowZero { v: drop });
        }
        branches.push(SingularBranch {
            v_entry: drop,
            v_exit: exit,
            w_entry: w_fold,
            w_exit: sys.critical(exit),
            residence: t,
        });
    }
    let period = branches.iter().map(|b| b.residence).sum();
    Ok(SingularCycle { branches, period })
}

/// Residence on the stable branches of a finite-μ cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    /// Longest phase arc spent near each branch, with a label.
    pub arcs: Vec<(Option<Arc>, String)>,
    /// Fraction of the time near each branch among time near any branch.
    pub fractions: Vec<f64>,
    pub singular: Option<Vec<f64>>,
    pub proximity: f64,
}

/// Branch point `ξ(w)` on the stable branch of `b`, if `w` is in its range.
fn branch_v(sys: &dyn SlowFastSystem, b: &SingularBranch, w: f64) -> Option<f64> {
    let (lo, hi) = sys.search_range();
    let (a, z) = if b.side() > 0.0 { (b.v_exit, hi) } else { (lo, b.v_exit) };
    let f = |v: f64| sys.critical(v) - w;
    let (fa, fz) = (f(a), f(z));
    if fa == 0.0 {
        return Some(a);
    }
    if (fa < 0.0) == (fz < 0.0) {
        return None;
    }
    Some(bisect(&f, a, z))
}

/// Measures residence on each stable branch of `lc` by proximity in `v`.
pub fn branch_report(
    lc: &LimitCycle,
    sys: &dyn SlowFastSystem,
    singular: &SingularCycle,
    proximity: f64,
) -> BranchReport {
    let n = lc.grid_len();
    let v = lc.component(0).values();
    let w = lc.component(1).values();
    let masks: Vec<Vec<bool>> = singular
        .branches
        .iter()
        .map(|b| {
            (0..n)
                .map(|i| branch_v(sys, b, w[i]).is_some_and(|xi| (v[i] - xi).abs() <= proximity))
                .collect()
        })
        .collect();
    let counts: Vec<usize> = masks.iter().map(|m| m.iter().filter(|&&x| x).count()).collect();
    let total: usize = counts.iter().sum();
    let fractions = counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect();
    let arcs = masks
        .iter()
        .zip(&singular.branches)
        .map(|(m, b)| {
            let longest = cyclic_runs(m)
                .into_iter()
                .max_by_key(|r| r.len)
                .and_then(|r| run_to_arc(r, n));
            let label = if b.side() > 0.0 { "v>0" } else { "v<0" };
            (longest, label.to_string())
        })
        .collect();
    BranchReport {
        arcs,
        fractions,
        singular: Some(singular.fractions()),
        proximity,
    }
}
