//! Periodic orbit location by section returns and uniform-phase resampling.

use super::LimitCycleError;
use crate::core_math::{grid_phase, samples_to_csv, PeriodicSample, Phase, DEFAULT_GRID};
use crate::ode::{
    integrate_dense, integrate_to, locate_in_step, DenseSolution, Direction, StepOptions, Stepper,
    VectorField,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::ops::ControlFlow;

/// Side condition on another component at the crossing, e.g. `w < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideCondition {
    pub component: usize,
    pub bound: f64,
    /// `true` for `x[component] < bound`, `false` for `>`.
    pub below: bool,
}

/// Poincaré section `x[component] = level`, crossed in `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub component: usize,
    pub level: f64,
    pub direction: Direction,
    #[serde(default)]
    pub side: Option<SideCondition>,
}

impl SectionSpec {
    /// Upward crossing of `v = 0` with `w < 0`.
    pub fn fhn() -> Self {
        SectionSpec {
            component: 0,
            level: 0.0,
            direction: Direction::Rising,
            side: Some(SideCondition {
                component: 1,
                bound: 0.0,
                below: true,
            }),
        }
    }

    /// Upward crossing of `y = 0` with `x > 0` (phase zero at angle zero).
    pub fn positive_x_axis() -> Self {
        SectionSpec {
            component: 1,
            level: 0.0,
            direction: Direction::Rising,
            side: Some(SideCondition {
                component: 0,
                bound: 0.0,
                below: false,
            }),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        x[self.component] - self.level
    }

    pub fn side_ok(&self, x: &[f64]) -> bool {
        match self.side {
            None => true,
            Some(s) if s.below => x[s.component] < s.bound,
            Some(s) => x[s.component] > s.bound,
        }
    }

    pub fn describe(&self) -> String {
        let dir = match self.direction {
            Direction::Rising => "upward",
            Direction::Falling => "downward",
            Direction::Either => "any",
        };
        let mut s = format!("{dir} crossing of x{} = {}", self.component + 1, self.level);
        if let Some(c) = self.side {
            let op = if c.below { '<' } else { '>' };
            s.push_str(&format!(" with x{} {op} {}", c.component + 1, c.bound));
        }
        s
    }
}

/// Settings for [`find_limit_cycle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOptions {
    pub warmup: f64,
    /// Convergence threshold on successive return points.
    pub tol: f64,
    pub max_returns: usize,
    pub grid: usize,
    /// Give up if no convergence by this much time after warmup.
    pub horizon: f64,
    pub step: StepOptions,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            warmup: 200.0,
            tol: 1e-10,
            max_returns: 200,
            grid: DEFAULT_GRID,
            horizon: 1e5,
            step: StepOptions::default(),
        }
    }
}

/// Phase-zero convention of a cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub section: SectionSpec,
    pub description: String,
    pub state: Vec<f64>,
}

/// A stable periodic orbit sampled uniformly in phase.
#[derive(Debug, Clone)]
pub struct LimitCycle {
    period: f64,
    samples: Vec<PeriodicSample>,
    derivs: Vec<PeriodicSample>,
    orbit: DenseSolution,
    anchor: Anchor,
    returns: usize,
}

/// Locates the attracting cycle through section returns after a warmup.
pub fn find_limit_cycle(
    vf: &dyn VectorField,
    x0: &[f64],
    section: SectionSpec,
    opts: CycleOptions,
) -> Result<LimitCycle, LimitCycleError> {
    if opts.grid < 4 {
        return Err(LimitCycleError::InvalidGrid(opts.grid));
    }
    let start = if opts.warmup > 0.0 {
        integrate_to(vf, x0, 0.0, opts.warmup, opts.step)?
    } else {
        x0.to_vec()
    };
    let t0 = opts.warmup.max(0.0);
    let mut stepper = Stepper::new(vf, t0, &start, 1.0, opts.step)?;
    let event = |x: &[f64]| section.value(x);
    let mut e_prev = event(&start);
    let mut returns: Vec<(f64, Vec<f64>)> = Vec::new();
    let outcome = stepper.run(t0 + opts.horizon, |step| {
        if let Some(ev) = locate_in_step(step, &event, section.direction, e_prev) {
            if section.side_ok(&ev.x) {
                let speed = vf.eval(ev.t, &ev.x)[section.component].abs();
                if speed < 1e-8 {
                    return ControlFlow::Break(Err(LimitCycleError::NonTransversal { t: ev.t, speed }));
                }
                returns.push((ev.t, ev.x));
                let n = returns.len();
                if n >= 2 {
                    let d = dist(&returns[n - 1].1, &returns[n - 2].1);
                    if d < opts.tol {
                        return ControlFlow::Break(Ok(()));
                    }
                }
                if n > opts.max_returns {
                    return ControlFlow::Break(Err(LimitCycleError::NoCycle { returns: n }));
                }
            }
        }
        e_prev = event(&step.end());
        ControlFlow::Continue(())
    })?;
    match outcome {
        Some(Ok(())) => {}
        Some(Err(e)) => return Err(e),
        None => {
            return Err(LimitCycleError::NoCycle {
                returns: returns.len(),
            })
        }
    }
    let n = returns.len();
    let period = returns[n - 1].0 - returns[n - 2].0;
    let anchor = Anchor {
        section,
        description: section.describe(),
        state: returns[n - 1].1.clone(),
    };
    let mut lc = LimitCycle::from_anchor(vf, anchor, period, opts.grid, opts.step)?;
    lc.returns = n;
    Ok(lc)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl LimitCycle {
    /// Rebuilds the cycle from its anchor state and period.
    pub fn from_anchor(
        vf: &dyn VectorField,
        anchor: Anchor,
        period: f64,
        grid: usize,
        step: StepOptions,
    ) -> Result<Self, LimitCycleError> {
        if grid < 4 {
            return Err(LimitCycleError::InvalidGrid(grid));
        }
        let orbit = integrate_dense(vf, &anchor.state, 0.0, period, step)?;
        let d = vf.dim();
        let mut comps = vec![vec![0.0; grid]; d];
        let mut dcomps = vec![vec![0.0; grid]; d];
        let mut x = vec![0.0; d];
        let mut dx = vec![0.0; d];
        for i in 0..grid {
            if i == 0 {
                x.copy_from_slice(&anchor.state);
            } else {
                orbit.eval_into(period * i as f64 / grid as f64, &mut x);
            }
            vf.rhs(0.0, &x, &mut dx);
            for c in 0..d {
                comps[c][i] = x[c];
                dcomps[c][i] = dx[c];
            }
        }
        let wrap = |v: Vec<Vec<f64>>| -> Vec<PeriodicSample> {
            v.into_iter().map(|c| PeriodicSample::new(c).expect("grid is nonempty")).collect()
        };
        Ok(LimitCycle {
            period,
            samples: wrap(comps),
            derivs: wrap(dcomps),
            orbit,
            anchor,
            returns: 0,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Angular frequency `2π/τ`.
    pub fn omega(&self) -> f64 {
        TAU / self.period
    }

    pub fn dim(&self) -> usize {
        self.samples.len()
    }

    pub fn grid_len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn anchor(&self) -> &Anchor {
        &self.anchor
    }

    /// Number of section returns used to converge (0 when rebuilt from an anchor).
    pub fn returns(&self) -> usize {
        self.returns
    }

    /// Component `c` of γ on the phase grid.
    pub fn component(&self, c: usize) -> &PeriodicSample {
        &self.samples[c]
    }

    /// Component `c` of γ̇ on the phase grid.
    pub fn deriv_component(&self, c: usize) -> &PeriodicSample {
        &self.derivs[c]
    }

    pub fn state(&self, i: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.values()[i]).collect()
    }

    pub fn deriv(&self, i: usize) -> Vec<f64> {
        self.derivs.iter().map(|s| s.values()[i]).collect()
    }

    pub fn grid_phase(&self, i: usize) -> f64 {
        grid_phase(i, self.grid_len())
    }

    /// γ(t) for any `t`, using the stored continuous extension.
    pub fn state_at_time_into(&self, t: f64, out: &mut [f64]) {
        let t = t.rem_euclid(self.period);
        self.orbit.eval_into(t, out);
    }

    pub fn state_at_time(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.state_at_time_into(t, &mut out);
        out
    }

    /// γ at phase θ (θ = 2πt/τ).
    pub fn state_at_phase(&self, theta: impl Into<Phase>) -> Vec<f64> {
        self.state_at_time(theta.into().value() / TAU * self.period)
    }

    /// Maximum relative mismatch between stored derivatives and the field.
    pub fn derivative_consistency(&self, vf: &dyn VectorField) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.grid_len() {
            let f = vf.eval(0.0, &self.state(i));
            let d = self.deriv(i);
            let (mut dot, mut nf, mut nd) = (0.0, 0.0, 0.0);
            for c in 0..f.len() {
                dot += f[c] * d[c];
                nf += f[c] * f[c];
                nd += d[c] * d[c];
            }
            worst = worst.max((1.0 - dot / (nf * nd).sqrt()).abs());
        }
        worst
    }

    /// CSV `phase,<names>,<d names>` on the phase grid.
    pub fn to_csv(&self, names: &[&str]) -> String {
        let mut cols: Vec<String> = names.to_vec().iter().map(|s| s.to_string()).collect();
        cols.extend(names.iter().map(|n| format!("d{n}")));
        let refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
        let all: Vec<&PeriodicSample> = self.samples.iter().chain(&self.derivs).collect();
        samples_to_csv(&refs, &all)
    }
}
