//! Induced phase interaction on 𝕋², its average h on 𝕋, and Fourier diagnostics.

use crate::core_math::{grid_phase, samples_to_csv, PeriodicSample};
use crate::limit_cycle::LimitCycle;
use crate::models::{CouplingSpec, Node};
use crate::prc::PhaseResponseCurve;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("grid mismatch: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("Fourier order {order} must be below half the grid ({grid})")]
    InvalidOrder { order: usize, grid: usize },
    #[error("separable path requires a separable coupling")]
    NotSeparable,
}

/// Square sample on 𝕋² with rows indexed by the source phase θ_j and
/// columns by the target phase θ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSample {
    n: usize,
    values: Vec<f64>,
}

impl TorusSample {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let mut values = vec![0.0; n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            for (k, v) in row.iter_mut().enumerate() {
                *v = f(j, k);
            }
        });
        TorusSample { n, values }
    }

    pub fn from_phase_fn(n: usize, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        Self::from_fn(n, |j, k| f(grid_phase(j, n), grid_phase(k, n)))
    }

    pub fn zeros(n: usize) -> Self {
        TorusSample {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Value at source index `j`, target index `k` (both taken mod N).
    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[(j % self.n) * self.n + (k % self.n)]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Diagonal translation `(j, k) ↦ (j + d, k + d)`.
    pub fn shift_diagonal(&self, d: usize) -> Self {
        let n = self.n;
        Self::from_fn(n, |j, k| self.get(j + d, k + d))
    }

    /// Flattened CSV `theta_j,theta_k,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_j,theta_k,value\n");
        for j in 0..self.n {
            for k in 0..self.n {
                let _ = writeln!(
                    out,
                    "{:.11e},{:.11e},{:e}",
                    grid_phase(j, self.n),
                    grid_phase(k, self.n),
                    self.get(j, k)
                );
            }
        }
        out
    }
}

fn check_grids(lc: &LimitCycle, prc: &PhaseResponseCurve) -> Result<(), ReductionError> {
    if lc.grid_len() != prc.grid_len() {
        return Err(ReductionError::GridMismatch {
            left: lc.grid_len(),
            right: prc.grid_len(),
        });
    }
    if lc.dim() != prc.dim() {
        return Err(ReductionError::DimensionMismatch {
            left: lc.dim(),
            right: prc.dim(),
        });
    }
    Ok(())
}

/// Per-component induced interactions `Z_ℓ(θ_k)·g_ℓ(γ(θ_j), γ(θ_k))`.
pub fn build_gpr_components(
    lc: &LimitCycle,
    prc: &PhaseResponseCurve,
    c: &CouplingSpec,
) -> Result<Vec<TorusSample>, ReductionError> {
    check_grids(lc, prc)?;
    if c.dim() != lc.dim() {
        return Err(ReductionError::DimensionMismatch {
            left: c.dim(),
            right: lc.dim(),
        });
    }
    let n = lc.grid_len();
    let d = lc.dim();
    let states: Vec<Vec<f64>> = (0..n).map(|i| lc.state(i)).collect();
    let z: Vec<Vec<f64>> = (0..n).map(|i| prc.at(i)).collect();
    let mut comps: Vec<Vec<f64>> = vec![vec![0.0; n * n]; d];
    let rows: Vec<Vec<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let src = Node::new(&states[j], grid_phase(j, n));
            let mut g = vec![0.0; d];
            let mut row = vec![vec![0.0; n]; d];
            for k in 0..n {
                c.eval(src, Node::new(&states[k], grid_phase(k, n)), &mut g);
                for l in 0..d {
                    row[l][k] = z[k][l] * g[l];
                }
            }
            row
        })
        .collect();
    for (j, row) in rows.into_iter().enumerate() {
        for (l, r) in row.into_iter().enumerate() {
            comps[l][j * n..(j + 1) * n].copy_from_slice(&r);
        }
    }
    Ok(comps.into_iter().map(|values| TorusSample { n, values }).collect())
}

/// `g^PR(θ_j, θ_k) = ⟨Z(θ_k), g(γ(θ_j), γ(θ_k))⟩` on the full grid.
pub fn build_gpr(lc: &LimitCycle, prc: &PhaseResponseCurve, c: &CouplingSpec) -> Result<TorusSample, ReductionError> {
    check_grids(lc, prc)?;
    if c.dim() != lc.dim() {
        return Err(ReductionError::DimensionMismatch {
            left: c.dim(),
            right: lc.dim(),
        });
    }
    let n = lc.grid_len();
    let d = lc.dim();
    let states: Vec<Vec<f64>> = (0..n).map(|i| lc.state(i)).collect();
    let z: Vec<Vec<f64>> = (0..n).map(|i| prc.at(i)).collect();
    let mut values = vec![0.0; n * n];
    values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let src = Node::new(&states[j], grid_phase(j, n));
        let mut g = vec![0.0; d];
        for (k, v) in row.iter_mut().enumerate() {
            c.eval(src, Node::new(&states[k], grid_phase(k, n)), &mut g);
            *v = z[k].iter().zip(&g).map(|(a, b)| a * b).sum();
        }
    });
    Ok(TorusSample { n, values })
}

/// Averaged interaction and its antisymmetrization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionFunction {
    pub h: PeriodicSample,
    pub h_odd: PeriodicSample,
}

/// `h(ϑ) = mean_s g^PR(s, ϑ + s)` using exact grid-aligned diagonals.
pub fn average_h(gpr: &TorusSample) -> InteractionFunction {
    let n = gpr.n;
    let h: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|m| (0..n).map(|s| gpr.get(s, s + m)).sum::<f64>() / n as f64)
        .collect();
    InteractionFunction::from_h(PeriodicSample::new(h).expect("nonempty grid"))
}

impl InteractionFunction {
    /// Assembles `h_odd(ϑ) = h(ϑ) − h(−ϑ)`.
    pub fn from_h(h: PeriodicSample) -> Self {
        let n = h.len();
        let v = h.values();
        let odd = (0..n).map(|m| v[m] - v[(n - m) % n]).collect();
        InteractionFunction {
            h_odd: PeriodicSample::new(odd).expect("nonempty grid"),
            h,
        }
    }

    pub fn grid_len(&self) -> usize {
        self.h.len()
    }

    /// The same interaction with the argument reversed, `ϑ ↦ h(−ϑ)`.
    pub fn reflected(&self) -> Self {
        InteractionFunction::from_h(self.h.reflect())
    }

    /// CSV `phase,h,h_odd`.
    pub fn to_csv(&self) -> String {
        samples_to_csv(&["h", "h_odd"], &[&self.h, &self.h_odd])
    }
}

/// `c(ϑ) = mean_s a(ϑ + s)·b(s)`, direct O(N²) evaluation.
pub fn cross_correlation(a: &PeriodicSample, b: &PeriodicSample) -> Result<PeriodicSample, ReductionError> {
    let n = a.len();
    if b.len() != n {
        return Err(ReductionError::GridMismatch { left: n, right: b.len() });
    }
    let (av, bv) = (a.values(), b.values());
    // skip zero entries of b: dead-zone inputs are mostly zero
    let support: Vec<usize> = (0..n).filter(|&s| bv[s] != 0.0).collect();
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|m| support.iter().map(|&s| av[(s + m) % n] * bv[s]).sum::<f64>() / n as f64)
        .collect();
    Ok(PeriodicSample::new(out).expect("nonempty grid"))
}

/// Components of a separable reduction: `Ẑ_ℓ = Z_ℓ·ĝ^res_ℓ` and `ĝ^in_ℓ`.
#[derive(Debug, Clone)]
pub struct SeparableFactors {
    pub zhat: Vec<PeriodicSample>,
    pub gin: Vec<PeriodicSample>,
}

pub fn separable_factors(
    lc: &LimitCycle,
    prc: &PhaseResponseCurve,
    c: &CouplingSpec,
) -> Result<SeparableFactors, ReductionError> {
    check_grids(lc, prc)?;
    let CouplingSpec::Separable { input, response, dim } = c else {
        return Err(ReductionError::NotSeparable);
    };
    let n = lc.grid_len();
    let d = *dim;
    let mut zhat = vec![vec![0.0; n]; d];
    let mut gin = vec![vec![0.0; n]; d];
    let (mut a, mut r) = (vec![0.0; d], vec![0.0; d]);
    for i in 0..n {
        let x = lc.state(i);
        input(&x, &mut a);
        response(&x, &mut r);
        let z = prc.at(i);
        for l in 0..d {
            zhat[l][i] = z[l] * r[l];
            gin[l][i] = a[l];
        }
    }
    let wrap = |v: Vec<Vec<f64>>| v.into_iter().map(|c| PeriodicSample::new(c).expect("nonempty")).collect();
    Ok(SeparableFactors {
        zhat: wrap(zhat),
        gin: wrap(gin),
    })
}

/// `h(ϑ) = Σ_ℓ mean_s Ẑ_ℓ(ϑ + s)·ĝ^in_ℓ(s)`.
pub fn h_from_factors(zhat: &[PeriodicSample], gin: &[PeriodicSample]) -> Result<InteractionFunction, ReductionError> {
    if zhat.len() != gin.len() {
        return Err(ReductionError::DimensionMismatch {
            left: zhat.len(),
            right: gin.len(),
        });
    }
    let n = zhat[0].len();
    let mut h = vec![0.0; n];
    for (z, g) in zhat.iter().zip(gin) {
        let c = cross_correlation(z, g)?;
        for (hi, ci) in h.iter_mut().zip(c.values()) {
            *hi += ci;
        }
    }
    Ok(InteractionFunction::from_h(PeriodicSample::new(h).expect("nonempty grid")))
}

/// Separable reduction through 1-D cross-correlations.
pub fn average_h_separable(
    lc: &LimitCycle,
    prc: &PhaseResponseCurve,
    c: &CouplingSpec,
) -> Result<InteractionFunction, ReductionError> {
    let f = separable_factors(lc, prc, c)?;
    h_from_factors(&f.zhat, &f.gin)
}

/// Reduction choosing the 1-D path for separable couplings.
pub fn reduce(lc: &LimitCycle, prc: &PhaseResponseCurve, c: &CouplingSpec) -> Result<InteractionFunction, ReductionError> {
    match c {
        CouplingSpec::Separable { .. } => average_h_separable(lc, prc, c),
        _ => Ok(average_h(&build_gpr(lc, prc, c)?)),
    }
}

/// Complex Fourier coefficients `f̂_k = mean f(θ) e^{−ikθ}` for `k = 0..=K`.
pub fn fourier_coefficients(f: &PeriodicSample, order: usize) -> Vec<(f64, f64)> {
    let n = f.len();
    let v = f.values();
    (0..=order)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, x) in v.iter().enumerate() {
                // reduce k·i mod n before forming the angle to keep it accurate
                let ang = grid_phase((k * i) % n, n);
                re += x * ang.cos();
                im -= x * ang.sin();
            }
            (re / n as f64, im / n as f64)
        })
        .collect()
}

/// Order-K Fourier partial sum of `f`, resampled on its grid.
pub fn fourier_truncate(f: &PeriodicSample, order: usize) -> Result<PeriodicSample, ReductionError> {
    let n = f.len();
    if order == 0 || 2 * order >= n {
        return Err(ReductionError::InvalidOrder { order, grid: n });
    }
    let coef = fourier_coefficients(f, order);
    let out = (0..n)
        .map(|i| {
            let mut s = coef[0].0;
            for (k, &(re, im)) in coef.iter().enumerate().skip(1) {
                let ang = grid_phase((k * i) % n, n);
                s += 2.0 * (re * ang.cos() - im * ang.sin());
            }
            s
        })
        .collect();
    Ok(PeriodicSample::new(out).expect("nonempty grid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_math::circular_mean;

    #[test]
    fn diagonal_constant_integrand() {
        let n = 128;
        let g = TorusSample::from_phase_fn(n, |tj, tk| (tj - tk).sin());
        let h = average_h(&g);
        for m in 0..n {
            let th = grid_phase(m, n);
            assert!((h.h.values()[m] + th.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn h_odd_vanishes_at_zero_and_pi() {
        let n = 64;
        let g = TorusSample::from_phase_fn(n, |tj, tk| tj.cos() * (2.0 * tk).sin() + tk.sin());
        let f = average_h(&g);
        assert_eq!(f.h_odd.values()[0], 0.0);
        assert_eq!(f.h_odd.values()[n / 2], 0.0);
        for m in 0..n {
            assert_eq!(f.h_odd.values()[m], f.h.values()[m] - f.h.values()[(n - m) % n]);
        }
    }

    #[test]
    fn product_of_first_harmonics() {
        // f = cos(θ + 0.3), g = 2 sin θ: h is a first harmonic of amplitude 2|f̂₁||ĝ₁|·... checked
        // against discrete Fourier coefficients of both factors
        let n = 256;
        let f = PeriodicSample::from_fn(n, |x| (x + 0.3).cos());
        let g = PeriodicSample::from_fn(n, |x| 2.0 * x.sin());
        let torus = TorusSample::from_fn(n, |j, k| f.values()[j] * g.values()[k]);
        let h = average_h(&torus).h;
        let fc = fourier_coefficients(&f, 1)[1];
        let gc = fourier_coefficients(&g, 1)[1];
        let hc = fourier_coefficients(&h, 3);
        let amp = |c: (f64, f64)| c.0.hypot(c.1);
        assert!((amp(hc[1]) - amp(fc) * amp(gc)).abs() < 1e-13);
        assert!(amp(hc[0]) < 1e-14 && amp(hc[2]) < 1e-14 && amp(hc[3]) < 1e-14);
    }

    #[test]
    fn diagonal_shift_leaves_h_unchanged() {
        let n = 64;
        let g = TorusSample::from_phase_fn(n, |tj, tk| (tj + 2.0 * tk).cos() * tj.sin() + (tk - tj).cos());
        let a = average_h(&g).h;
        let b = average_h(&g.shift_diagonal(7)).h;
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn cross_correlation_matches_torus_average() {
        let n = 128;
        let zhat = PeriodicSample::from_fn(n, |x| (x.sin() + 0.3 * (3.0 * x).cos()).max(0.0));
        let gin = PeriodicSample::from_fn(n, |x| (x.cos() - 0.2).min(0.0));
        let via_torus = average_h(&TorusSample::from_fn(n, |j, k| zhat.values()[k] * gin.values()[j])).h;
        let via_corr = cross_correlation(&zhat, &gin).unwrap();
        for (a, b) in via_torus.values().iter().zip(via_corr.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_of_band_limited_input() {
        let f = PeriodicSample::from_fn(256, |x| (3.0 * x).cos());
        let keep = fourier_truncate(&f, 5).unwrap();
        let drop = fourier_truncate(&f, 2).unwrap();
        for i in 0..256 {
            assert!((keep.values()[i] - f.values()[i]).abs() < 1e-12);
            assert!(drop.values()[i].abs() < 1e-12);
        }
        assert!(fourier_truncate(&f, 128).is_err());
        assert!((circular_mean(&keep) - circular_mean(&f)).abs() < 1e-14);
    }

    fn fhn(grid: usize) -> (LimitCycle, PhaseResponseCurve) {
        use crate::limit_cycle::{find_limit_cycle, CycleOptions, SectionSpec};
        use crate::models::{Fhn, FhnParams, TimeScale};
        use crate::prc::{compute_prc, PrcOptions};
        let vf = Fhn::new(FhnParams::default(), TimeScale::Slow);
        let lc = find_limit_cycle(&vf, &[0.0, -0.6], SectionSpec::fhn(), CycleOptions {
            grid,
            ..Default::default()
        })
        .unwrap();
        let z = compute_prc(&lc, &vf, PrcOptions::default()).unwrap();
        (lc, z)
    }

    #[test]
    fn separable_path_agrees_with_torus_path() {
        let (lc, z) = fhn(256);
        let c = CouplingSpec::fhn_product();
        let a = average_h(&build_gpr(&lc, &z, &c).unwrap());
        let b = average_h_separable(&lc, &z, &c).unwrap();
        let scale = a.h.max_abs();
        assert!(scale > 0.0);
        for (x, y) in a.h.values().iter().zip(b.h.values()) {
            assert!((x - y).abs() < 1e-12 * scale.max(1.0));
        }
        // components sum to the full interaction
        let comps = build_gpr_components(&lc, &z, &c).unwrap();
        let full = build_gpr(&lc, &z, &c).unwrap();
        for (i, v) in full.values().iter().enumerate() {
            let s: f64 = comps.iter().map(|t| t.values()[i]).sum();
            assert!((s - v).abs() < 1e-14);
        }
    }

    #[test]
    fn pulse_interaction_is_prc_correlated_with_pulse() {
        use crate::models::{bump_pulse, PulseSource};
        let (lc, z) = fhn(256);
        let pulse = bump_pulse(1.0, 0.5).unwrap();
        let c = CouplingSpec::fhn_pulse(pulse.clone(), PulseSource::Phase);
        let f = average_h(&build_gpr(&lc, &z, &c).unwrap());
        let p = PeriodicSample::from_fn(256, |x| pulse.at_phase(x));
        let oracle = cross_correlation(z.component(0), &p).unwrap();
        for (x, y) in f.h.values().iter().zip(oracle.values()) {
            assert!((x - y).abs() < 1e-12);
        }
        let r = f.reflected();
        for m in 0..256 {
            assert_eq!(r.h.values()[m], f.h.values()[(256 - m) % 256]);
            assert_eq!(r.h_odd.values()[m], -f.h_odd.values()[m]);
        }
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let (lc, _) = fhn(128);
        let (_, z) = fhn(256);
        let err = build_gpr(&lc, &z, &CouplingSpec::fhn_product()).unwrap_err();
        assert_eq!(err, ReductionError::GridMismatch { left: 128, right: 256 });
    }

    #[test]
    fn hopf_fixed_direction_projects_on_sine() {
        use crate::limit_cycle::{find_limit_cycle, CycleOptions, SectionSpec};
        use crate::models::Hopf;
        use crate::prc::{compute_prc, PrcOptions};
        let vf = Hopf::default();
        let lc = find_limit_cycle(&vf, &[0.5, 0.0], SectionSpec::positive_x_axis(), CycleOptions {
            warmup: 30.0,
            grid: 64,
            ..Default::default()
        })
        .unwrap();
        let z = compute_prc(&lc, &vf, PrcOptions::default()).unwrap();
        let zero = build_gpr(&lc, &z, &CouplingSpec::zero(2)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let c = CouplingSpec::fixed_direction(|xj, _| 1.0 + 0.5 * xj[1], vec![1.0, 0.0]);
        let g = build_gpr(&lc, &z, &c).unwrap();
        for j in 0..64 {
            for k in 0..64 {
                let (tj, tk) = (grid_phase(j, 64), grid_phase(k, 64));
                let want = (1.0 + 0.5 * tj.sin()) * -tk.sin();
                assert!((g.get(j, k) - want).abs() < 1e-6, "({j},{k})");
            }
        }
    }

    #[test]
    fn orthogonal_direction_silences_target_arc() {
        use crate::core_math::Arc;
        use crate::prc::PrcDiagnostics;
        let (lc, _) = fhn(128);
        // synthetic PRC whose first component vanishes on A = (1, 3)
        let a = Arc::new(1.0, 2.0).unwrap();
        let z1 = PeriodicSample::from_fn(128, |x| if a.contains(x) { 0.0 } else { x.sin() + 2.0 });
        let z2 = PeriodicSample::from_fn(128, |x| x.cos());
        let diag = PrcDiagnostics { residual: 0.0, periodicity_gap: 0.0, periods: 0, last_change: 0.0 };
        let z = PhaseResponseCurve::from_samples(vec![z1, z2], diag);
        let c = CouplingSpec::fixed_direction(|xj, xk| 1.0 + xj[0] * xk[1], vec![1.0, 0.0]);
        let g = build_gpr(&lc, &z, &c).unwrap();
        for k in (0..128).filter(|&k| a.contains(grid_phase(k, 128))) {
            for j in 0..128 {
                assert_eq!(g.get(j, k), 0.0);
            }
        }
        assert!(g.max_abs() > 0.1);
    }

    #[test]
    fn state_dead_zone_transports_to_phase_grid() {
        let (lc, z) = fhn(256);
        let g = build_gpr(&lc, &z, &CouplingSpec::fhn_product()).unwrap();
        let v = lc.component(0).values();
        let mut silent = 0;
        for j in 0..256 {
            for k in 0..256 {
                if v[j] < 0.0 || v[k] < 0.0 {
                    assert_eq!(g.get(j, k), 0.0);
                    silent += 1;
                }
            }
        }
        assert!(silent > 0 && silent < 256 * 256 && g.max_abs() > 0.0);
    }
}
