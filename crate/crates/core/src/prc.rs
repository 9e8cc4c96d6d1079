//! Infinitesimal phase response curve from the adjoint variational equation.

use crate::core_math::{samples_to_csv, PeriodicSample};
use crate::limit_cycle::LimitCycle;
use crate::ode::{integrate_sampled, jacobian_or_fd, OdeError, StepOptions, VectorField};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrcError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("adjoint iteration did not contract within {periods} periods (last change {last_change:e})")]
    AdjointDivergence { periods: usize, last_change: f64 },
    #[error("cycle and field dimensions differ ({cycle} vs {field})")]
    DimensionMismatch { cycle: usize, field: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrcOptions {
    pub max_periods: usize,
    /// Sup-norm change between successive periods that counts as converged.
    pub tol: f64,
    pub step: StepOptions,
}

impl Default for PrcOptions {
    fn default() -> Self {
        PrcOptions {
            max_periods: 50,
            tol: 1e-9,
            step: StepOptions::default(),
        }
    }
}

/// Z(θ) on the cycle's phase grid, normalized so that ⟨Z, γ̇⟩ = 1.
#[derive(Debug, Clone)]
pub struct PhaseResponseCurve {
    samples: Vec<PeriodicSample>,
    pub diagnostics: PrcDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrcDiagnostics {
    /// max |⟨Z, γ̇⟩ − 1| before the pointwise normalization pass.
    pub residual: f64,
    /// |Z(0) − Z(τ)| over the final backward period.
    pub periodicity_gap: f64,
    /// Backward periods integrated.
    pub periods: usize,
    /// Sup-norm change over the last period.
    pub last_change: f64,
}

struct Adjoint<'a> {
    lc: &'a LimitCycle,
    vf: &'a dyn VectorField,
}

impl VectorField for Adjoint<'_> {
    fn dim(&self) -> usize {
        self.lc.dim()
    }

    // Ż = −J(γ(t))ᵀ Z
    fn rhs(&self, t: f64, z: &[f64], dz: &mut [f64]) {
        let d = self.lc.dim();
        let mut g = [0.0; 8];
        let mut jac = [0.0; 64];
        let (g, jac) = (&mut g[..d], &mut jac[..d * d]);
        self.lc.state_at_time_into(t, g);
        jacobian_or_fd(self.vf, t, g, jac);
        for j in 0..d {
            let mut s = 0.0;
            for i in 0..d {
                s += jac[i * d + j] * z[i];
            }
            dz[j] = -s;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Integrates the adjoint equation backward over whole periods, renormalizing
/// at each period boundary, until successive periods agree.
pub fn compute_prc(lc: &LimitCycle, vf: &dyn VectorField, opts: PrcOptions) -> Result<PhaseResponseCurve, PrcError> {
    let d = lc.dim();
    if vf.dim() != d {
        return Err(PrcError::DimensionMismatch { cycle: d, field: vf.dim() });
    }
    assert!(d <= 8, "adjoint supports node dimensions up to 8");
    let n = lc.grid_len();
    let tau = lc.period();
    let adj = Adjoint { lc, vf };
    // descending sample times τ, ..., τ/N, 0
    let times: Vec<f64> = (0..=n).rev().map(|i| tau * i as f64 / n as f64).collect();
    let gdot0 = lc.deriv(0);

    let mut z = gdot0.clone();
    let s = dot(&z, &gdot0);
    z.iter_mut().for_each(|v| *v /= s);

    let mut prev: Option<Vec<Vec<f64>>> = None;
    let mut last_change = f64::INFINITY;
    for period in 1..=opts.max_periods {
        let mut states = integrate_sampled(&adj, &z, tau, &times, opts.step)?;
        states.reverse(); // index i ↔ t = iτ/N
        let change = prev.as_ref().map_or(f64::INFINITY, |p| {
            p.iter()
                .zip(&states)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max)
        });
        last_change = change;
        if change < opts.tol {
            return Ok(finish(lc, states, period, change));
        }
        let c = dot(&states[0], &gdot0);
        z = states[0].iter().map(|v| v / c).collect();
        prev = Some(states);
    }
    Err(PrcError::AdjointDivergence {
        periods: opts.max_periods,
        last_change,
    })
}

fn finish(lc: &LimitCycle, states: Vec<Vec<f64>>, periods: usize, last_change: f64) -> PhaseResponseCurve {
    let n = lc.grid_len();
    let d = lc.dim();
    let periodicity_gap = states[0]
        .iter()
        .zip(&states[n])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut residual = 0.0f64;
    let mut comps = vec![vec![0.0; n]; d];
    for (i, z) in states.iter().take(n).enumerate() {
        let c = dot(z, &lc.deriv(i));
        residual = residual.max((c - 1.0).abs());
        for k in 0..d {
            comps[k][i] = z[k] / c;
        }
    }
    PhaseResponseCurve {
        samples: comps.into_iter().map(|c| PeriodicSample::new(c).expect("nonempty grid")).collect(),
        diagnostics: PrcDiagnostics {
            residual,
            periodicity_gap,
            periods,
            last_change,
        },
    }
}

impl PhaseResponseCurve {
    /// Builds a PRC from already-normalized samples (e.g. read back from CSV).
    pub fn from_samples(samples: Vec<PeriodicSample>, diagnostics: PrcDiagnostics) -> Self {
        PhaseResponseCurve { samples, diagnostics }
    }

    pub fn dim(&self) -> usize {
        self.samples.len()
    }

    pub fn grid_len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn component(&self, c: usize) -> &PeriodicSample {
        &self.samples[c]
    }

    pub fn components(&self) -> &[PeriodicSample] {
        &self.samples
    }

    pub fn at(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.values()[i]).collect()
    }

    /// max |⟨Z, γ̇⟩ − 1| on the grid.
    pub fn normalization_error(&self, lc: &LimitCycle) -> f64 {
        (0..self.grid_len())
            .map(|i| (dot(&self.at(i), &lc.deriv(i)) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV `phase,Z_1,...,Z_d`.
    pub fn to_csv(&self) -> String {
        let names: Vec<String> = (1..=self.dim()).map(|k| format!("Z_{k}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let cols: Vec<&PeriodicSample> = self.samples.iter().collect();
        samples_to_csv(&refs, &cols)
    }
}
