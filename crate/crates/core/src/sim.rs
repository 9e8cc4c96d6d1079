//! Ensemble simulation of a coupled pair, phase extraction through the
//! geometric phase, and comparison of measured drift with the reduction.

use crate::core_math::torus::overlap_components;
use crate::core_math::{cyclic_runs, wrap, wrap_signed, Arc, PeriodicSample};
use crate::limit_cycle::{GeometricPhaseTable, LimitCycle};
use crate::ode::{integrate_sampled, StepOptions, Tolerance, VectorField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub n: usize,
    pub t_final: f64,
    pub sample_dt: f64,
    #[serde(skip)]
    pub step: StepOptions,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            n: 100,
            t_final: 500.0,
            sample_dt: 0.05,
            // fixed first step: keeps runs bitwise symmetric under exchange
            step: StepOptions {
                initial_step: Some(1e-4),
                ..StepOptions::with_tol(Tolerance::ENSEMBLE)
            },
        }
    }
}

impl EnsembleOptions {
    pub fn times(&self) -> Vec<f64> {
        let k = (self.t_final / self.sample_dt).round() as usize;
        (0..=k).map(|i| i as f64 * self.sample_dt).collect()
    }
}

/// One ensemble member: Φ = θ₁ − θ₂ (unwrapped) and the raw states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Member {
    pub index: usize,
    /// Nominal initial phase difference.
    pub phi0: f64,
    pub phi: Vec<f64>,
    /// Row-major states, `2d` values per sample.
    pub states: Vec<f64>,
    /// Integrator or phase-extraction failure; the series are then empty.
    pub failed: Option<String>,
}

impl Member {
    pub fn ok(&self) -> bool {
        self.failed.is_none()
    }

    pub fn net_change(&self) -> f64 {
        match (self.phi.first(), self.phi.last()) {
            (Some(a), Some(b)) => b - a,
            _ => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleRun {
    pub eps: f64,
    pub model: String,
    pub options: EnsembleOptions,
    pub times: Vec<f64>,
    pub dim: usize,
    pub members: Vec<Member>,
}

impl EnsembleRun {
    pub fn initial_phases(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.phi0).collect()
    }

    /// CSV `t,member,Phi,v1,v2` with every `stride`-th sample.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut out = String::from("t,member,Phi,v1,v2\n");
        let node = self.dim / 2;
        for m in self.members.iter().filter(|m| m.ok()) {
            for i in (0..self.times.len()).step_by(stride) {
                let x = &m.states[i * self.dim..(i + 1) * self.dim];
                let _ = writeln!(
                    out,
                    "{:e},{},{:e},{:e},{:e}",
                    self.times[i], m.index, m.phi[i], x[0], x[node]
                );
            }
        }
        out
    }
}

/// Integrates one member from `x0` and extracts Φ at each sample time.
pub fn run_member(
    model: &dyn VectorField,
    table: &GeometricPhaseTable,
    x0: &[f64],
    phi_nominal: f64,
    times: &[f64],
    step: StepOptions,
) -> Result<(Vec<f64>, Vec<f64>), String> {
    let dim = model.dim();
    let node = dim / 2;
    let states = integrate_sampled(model, x0, times[0], times, step).map_err(|e| e.to_string())?;
    let mut phi = Vec::with_capacity(states.len());
    let mut flat = Vec::with_capacity(states.len() * dim);
    let mut prev = phi_nominal;
    for x in &states {
        let t1 = table.theta_of_state(&x[..node]).map_err(|e| e.to_string())?;
        let t2 = table.theta_of_state(&x[node..]).map_err(|e| e.to_string())?;
        let raw = t1.value() - t2.value();
        let val = prev + wrap_signed(raw - prev);
        phi.push(val);
        prev = val;
        flat.extend_from_slice(x);
    }
    Ok((phi, flat))
}

/// Member `m` starts at `(γ(2πm/n), γ(0))`; members run in parallel and are
/// returned in index order.
pub fn run_ensemble(
    model: &(dyn VectorField + Sync),
    lc: &LimitCycle,
    table: &GeometricPhaseTable,
    eps: f64,
    name: &str,
    opts: EnsembleOptions,
) -> EnsembleRun {
    assert!(opts.n >= 2, "ensemble needs at least two members");
    assert_eq!(model.dim(), 2 * lc.dim(), "pair field must have twice the node dimension");
    let times = opts.times();
    let base = lc.state(0);
    let members = (0..opts.n)
        .into_par_iter()
        .map(|m| {
            let phi0 = TAU * m as f64 / opts.n as f64;
            let mut x0 = lc.state_at_phase(phi0);
            x0.extend_from_slice(&base);
            match run_member(model, table, &x0, phi0, &times, opts.step) {
                Ok((phi, states)) => Member {
                    index: m,
                    phi0,
                    phi,
                    states,
                    failed: None,
                },
                Err(e) => Member {
                    index: m,
                    phi0,
                    phi: Vec::new(),
                    states: Vec::new(),
                    failed: Some(e),
                },
            }
        })
        .collect();
    EnsembleRun {
        eps,
        model: name.to_string(),
        options: opts,
        times,
        dim: model.dim(),
        members,
    }
}

/// Means of consecutive non-overlapping windows of `w` samples.
pub fn window_means(series: &[f64], w: usize) -> Vec<f64> {
    series
        .chunks_exact(w.max(1))
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Window-averaged distance to `target` never grows by more than `tol`
/// between consecutive windows.
pub fn moves_toward(series: &[f64], target: f64, w: usize, tol: f64) -> bool {
    let d: Vec<f64> = window_means(series, w)
        .into_iter()
        .map(|p| wrap_signed(p - target).abs())
        .collect();
    d.windows(2).all(|p| p[1] <= p[0] + tol)
}

/// Circular distance from `x` to the closure of `arc`.
pub fn distance_to_arc(x: f64, arc: &Arc) -> f64 {
    if arc.contains_closed(x, 0.0) {
        return 0.0;
    }
    let a = wrap_signed(x - arc.first().value()).abs();
    let b = wrap_signed(x - arc.last().value()).abs();
    a.min(b)
}

/// Measure of the symmetric difference of two arcs.
pub fn arc_symmetric_difference(a: &Arc, b: &Arc) -> f64 {
    let common: f64 = overlap_components(a, b).iter().map(|(lo, hi)| hi - lo).sum();
    a.length() + b.length() - 2.0 * common
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Angular frequency ω = 2π/τ of the uncoupled cycle.
    pub omega: f64,
    /// Time rescaling of the vector field (1/μ in slow time).
    pub kappa: f64,
    /// Window length in time units; one uncoupled period.
    pub window: f64,
    /// Members with |Φ(T) − Φ(0)| below this are frozen.
    pub frozen_tol: f64,
    /// Windows whose predicted rate is below this fraction of the largest are not scored.
    pub floor: f64,
}

impl CompareOptions {
    pub fn for_cycle(lc: &LimitCycle, kappa: f64) -> Self {
        CompareOptions {
            omega: lc.omega(),
            kappa,
            window: lc.period(),
            frozen_tol: 0.05,
            floor: 0.1,
        }
    }
}

/// Measured against predicted drift of Φ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftComparison {
    pub eps: f64,
    pub windows_scored: usize,
    pub median_rel_error: f64,
    pub p90_rel_error: f64,
    pub max_rel_error: f64,
    pub frozen_members: Vec<usize>,
    /// Longest run of frozen members, as the arc of their phase cells.
    pub frozen_band: Option<Arc>,
    pub failed_members: Vec<usize>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Frozen band: longest cyclic run of frozen members, each covering a cell of
/// width 2π/n centred on its initial phase.
pub fn frozen_band(frozen: &[bool]) -> Option<Arc> {
    let n = frozen.len();
    let cell = TAU / n as f64;
    let run = cyclic_runs(frozen).into_iter().max_by_key(|r| r.len)?;
    if run.len == n {
        return Some(Arc::full(0.0));
    }
    Arc::new(wrap(run.start as f64 * cell - 0.5 * cell), run.len as f64 * cell)
}

/// Compares windowed central-difference drift rates with the prediction
/// `dΦ/dt = ε·ω·κ·h_odd(Φ̄)` at the window-mean phase difference.
pub fn compare_with_reduction(
    run: &EnsembleRun,
    hodd: &PeriodicSample,
    dead_band: Option<&Arc>,
    opts: CompareOptions,
) -> DriftComparison {
    let dt = run.options.sample_dt;
    let w = ((opts.window / dt).round() as usize).max(2);
    let gain = run.eps * opts.omega * opts.kappa;
    let max_pred = (gain * hodd.max_abs()).abs();
    let mut errors = Vec::new();
    for m in run.members.iter().filter(|m| m.ok()) {
        if dead_band.is_some_and(|b| b.contains_closed(m.phi0, 0.0)) {
            continue;
        }
        let phi = &m.phi;
        // windows of one period; rate from the window's end points
        let mut start = 0;
        while start + w < phi.len() {
            let rate = (phi[start + w] - phi[start]) / (w as f64 * dt);
            let mean = phi[start..=start + w].iter().sum::<f64>() / (w + 1) as f64;
            let pred = gain * hodd.eval(wrap(mean));
            if pred.abs() >= opts.floor * max_pred && max_pred > 0.0 {
                errors.push(((rate - pred) / pred).abs());
            }
            start += w;
        }
    }
    errors.sort_by(f64::total_cmp);
    let frozen_mask: Vec<bool> = run
        .members
        .iter()
        .map(|m| m.ok() && m.net_change().abs() < opts.frozen_tol)
        .collect();
    DriftComparison {
        eps: run.eps,
        windows_scored: errors.len(),
        median_rel_error: quantile(&errors, 0.5),
        p90_rel_error: quantile(&errors, 0.9),
        max_rel_error: errors.last().copied().unwrap_or(f64::NAN),
        frozen_members: (0..frozen_mask.len()).filter(|&i| frozen_mask[i]).collect(),
        frozen_band: frozen_band(&frozen_mask),
        failed_members: run.members.iter().filter(|m| !m.ok()).map(|m| m.index).collect(),
    }
}

/// Phase difference closest to π among the members, used to pick a band.
pub fn antiphase_member(run: &EnsembleRun) -> usize {
    (0..run.members.len())
        .min_by(|&a, &b| {
            let da = (run.members[a].phi0 - PI).abs();
            let db = (run.members[b].phi0 - PI).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_from_member_mask() {
        let mut frozen = vec![false; 20];
        for f in frozen.iter_mut().skip(6).take(8) {
            *f = true;
        }
        frozen[0] = true;
        let band = frozen_band(&frozen).unwrap();
        let cell = TAU / 20.0;
        assert!((band.first().value() - 5.5 * cell).abs() < 1e-12);
        assert!((band.length() - 8.0 * cell).abs() < 1e-12);
        assert!(frozen_band(&[false; 5]).is_none());
    }

    #[test]
    fn symmetric_difference_of_arcs() {
        let a = Arc::new(1.0, 2.0).unwrap();
        let b = Arc::new(1.5, 2.0).unwrap();
        assert!((arc_symmetric_difference(&a, &b) - 1.0).abs() < 1e-12);
        assert!(arc_symmetric_difference(&a, &a).abs() < 1e-12);
        let c = Arc::new(5.0, 1.0).unwrap();
        assert!((arc_symmetric_difference(&a, &c) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn window_helpers() {
        let s: Vec<f64> = (0..100).map(|i| 2.0 * (-(i as f64) / 30.0).exp() + 0.01 * (i as f64).sin()).collect();
        assert!(moves_toward(&s, 0.0, 10, 1e-3));
        let rising: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        assert!(!moves_toward(&rising, 0.0, 10, 1e-3));
        assert_eq!(window_means(&[1.0, 3.0, 5.0, 7.0, 9.0], 2), vec![2.0, 6.0]);
        let arc = Arc::new(1.0, 1.0).unwrap();
        assert_eq!(distance_to_arc(1.5, &arc), 0.0);
        assert!((distance_to_arc(0.5, &arc) - 0.5).abs() < 1e-12);
        assert!((distance_to_arc(TAU - 0.5, &arc) - 1.5).abs() < 1e-12);
    }
}
