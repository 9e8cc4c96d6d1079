//! Adaptive explicit Runge–Kutta integration with event location.

mod dopri;
mod field;

pub use dopri::{DenseStep, StepOptions, Stepper};
pub use field::{
    finite_difference_jacobian, jacobian_mismatch, jacobian_or_fd, FnField, Rescaled, VectorField,
};

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::ops::ControlFlow;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("no qualifying event before t = {t_max}")]
    NoEvent { t_max: f64 },
    #[error("invalid time span [{t0}, {t1}]")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("tolerances must be positive")]
    InvalidTolerance,
    #[error("state has dimension {got}, field expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Componentwise error tolerance `abs + rel·|x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }

    /// Tolerances used for limit-cycle and adjoint computations.
    pub const PRECISE: Tolerance = Tolerance::new(1e-10, 1e-12);

    /// Tolerances used for ensemble runs.
    pub const ENSEMBLE: Tolerance = Tolerance::new(1e-8, 1e-10);

    pub fn scaled(self, factor: f64) -> Self {
        Tolerance::new(self.rel * factor, self.abs * factor)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::PRECISE
    }
}

/// Accepted-step output of an integration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&[f64]> {
        self.states.last().map(|v| v.as_slice())
    }

    /// CSV with header `t,x1,...,xd`.
    pub fn to_csv(&self) -> String {
        let d = self.states.first().map_or(0, |s| s.len());
        let mut out = String::from("t");
        for i in 1..=d {
            let _ = write!(out, ",x{i}");
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t:e}");
            for v in x {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Piecewise continuous extension over a whole integration.
#[derive(Debug, Clone, Default)]
pub struct DenseSolution {
    steps: Vec<DenseStep>,
}

impl DenseSolution {
    pub fn t_start(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.t0)
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t1)
    }

    pub fn steps(&self) -> &[DenseStep] {
        &self.steps
    }

    /// Evaluates at `t`, clamped to the covered interval.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let forward = self.t_end() >= self.t_start();
        let idx = self.steps.partition_point(|s| if forward { s.t1 < t } else { s.t1 > t });
        let step = &self.steps[idx.min(self.steps.len() - 1)];
        step.eval_into(t, out);
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.steps[0].dim()];
        self.eval_into(t, &mut out);
        out
    }
}

fn check_span(t0: f64, t1: f64) -> Result<(), OdeError> {
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(OdeError::InvalidSpan { t0, t1 });
    }
    Ok(())
}

/// Integrates from `t0` to `t1` (either direction), recording every accepted step.
pub fn integrate(
    vf: &dyn VectorField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: StepOptions,
) -> Result<Trajectory, OdeError> {
    check_span(t0, t1)?;
    let mut stepper = Stepper::new(vf, t0, x0, t1 - t0, opts)?;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![x0.to_vec()],
    };
    stepper.run::<()>(t1, |step| {
        traj.times.push(step.t1);
        traj.states.push(step.end());
        ControlFlow::Continue(())
    })?;
    Ok(traj)
}

/// Final state only.
pub fn integrate_to(
    vf: &dyn VectorField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: StepOptions,
) -> Result<Vec<f64>, OdeError> {
    check_span(t0, t1)?;
    let mut stepper = Stepper::new(vf, t0, x0, t1 - t0, opts)?;
    stepper.run::<()>(t1, |_| ControlFlow::Continue(()))?;
    Ok(stepper.state().to_vec())
}

/// Integrates keeping the full continuous extension.
pub fn integrate_dense(
    vf: &dyn VectorField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: StepOptions,
) -> Result<DenseSolution, OdeError> {
    check_span(t0, t1)?;
    let mut stepper = Stepper::new(vf, t0, x0, t1 - t0, opts)?;
    let mut steps = Vec::new();
    stepper.run::<()>(t1, |s| {
        steps.push(s.clone());
        ControlFlow::Continue(())
    })?;
    Ok(DenseSolution { steps })
}

/// Samples the solution at `times` (monotone in the integration direction).
pub fn integrate_sampled(
    vf: &dyn VectorField,
    x0: &[f64],
    t0: f64,
    times: &[f64],
    opts: StepOptions,
) -> Result<Vec<Vec<f64>>, OdeError> {
    let Some(&t1) = times.last() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(times.len());
    let mut next = 0;
    while next < times.len() && times[next] == t0 {
        out.push(x0.to_vec());
        next += 1;
    }
    if next == times.len() {
        return Ok(out);
    }
    check_span(t0, t1)?;
    let mut stepper = Stepper::new(vf, t0, x0, t1 - t0, opts)?;
    stepper.run::<()>(t1, |step| {
        while next < times.len() && step.covers(times[next]) {
            out.push(step.eval(times[next]));
            next += 1;
        }
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Required sign of the event function's derivative at a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

impl Direction {
    fn accepts(self, before: f64, after: f64) -> bool {
        match self {
            Direction::Rising => before < 0.0 && after >= 0.0,
            Direction::Falling => before > 0.0 && after <= 0.0,
            Direction::Either => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }
}

/// A located section crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Maximum bisection iterations for event refinement.
pub const EVENT_BISECTIONS: usize = 50;

/// Looks for a qualifying crossing of `event` inside one dense step, refining
/// by bisection on the interpolant to `|e| ≤ 1e-12`.
pub fn locate_in_step(
    step: &DenseStep,
    event: &dyn Fn(&[f64]) -> f64,
    direction: Direction,
    e_before: f64,
) -> Option<Event> {
    let x1 = step.end();
    let e_after = event(&x1);
    if !direction.accepts(e_before, e_after) {
        return None;
    }
    let (mut a, mut b) = (step.t0, step.t1);
    let (mut ea, _eb) = (e_before, e_after);
    let mut buf = vec![0.0; step.dim()];
    let mut best = (step.t1, x1);
    for _ in 0..EVENT_BISECTIONS {
        let m = 0.5 * (a + b);
        step.eval_into(m, &mut buf);
        let em = event(&buf);
        if em.abs() <= 1e-12 {
            best = (m, buf.clone());
            break;
        }
        if (ea < 0.0) == (em < 0.0) {
            a = m;
            ea = em;
        } else {
            b = m;
        }
        step.eval_into(b, &mut buf);
        best = (b, buf.clone());
    }
    Some(Event {
        t: best.0,
        x: best.1,
    })
}

/// First time in `(t0, t0 + t_max]` where `event` crosses zero in `direction`.
pub fn integrate_to_event(
    vf: &dyn VectorField,
    x0: &[f64],
    t0: f64,
    event: &dyn Fn(&[f64]) -> f64,
    direction: Direction,
    t_max: f64,
    opts: StepOptions,
) -> Result<Event, OdeError> {
    if !(t_max > 0.0) {
        return Err(OdeError::InvalidSpan { t0, t1: t0 + t_max });
    }
    let mut stepper = Stepper::new(vf, t0, x0, 1.0, opts)?;
    let mut e_prev = event(x0);
    let found = stepper.run(t0 + t_max, |step| {
        if let Some(ev) = locate_in_step(step, event, direction, e_prev) {
            return ControlFlow::Break(ev);
        }
        e_prev = event(&step.end());
        ControlFlow::Continue(())
    })?;
    found.ok_or(OdeError::NoEvent { t_max: t0 + t_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn decay() -> impl VectorField {
        FnField::new(1, |_, x, dx| dx[0] = -x[0])
    }

    fn harmonic() -> impl VectorField {
        FnField::new(2, |_, x, dx| {
            dx[0] = x[1];
            dx[1] = -x[0];
        })
    }

    fn opts(rel: f64) -> StepOptions {
        StepOptions::with_tol(Tolerance::new(rel, rel * 1e-2))
    }

    #[test]
    fn exponential_decay() {
        let x = integrate_to(&decay(), &[1.0], 0.0, 1.0, opts(1e-10)).unwrap();
        assert!((x[0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_orbit_closes() {
        let x = integrate_to(&harmonic(), &[1.0, 0.0], 0.0, 2.0 * PI, opts(1e-10)).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-8 && x[1].abs() < 1e-8, "{x:?}");
    }

    #[test]
    fn forward_then_backward_returns_home() {
        let vf = harmonic();
        let o = opts(1e-10);
        let x1 = integrate_to(&vf, &[0.3, -0.8], 0.0, 5.0, o).unwrap();
        let x0 = integrate_to(&vf, &x1, 5.0, 0.0, o).unwrap();
        assert!((x0[0] - 0.3).abs() < 1e-8 && (x0[1] + 0.8).abs() < 1e-8);
    }

    #[test]
    fn trajectory_times_increase() {
        let tr = integrate(&decay(), &[2.0], 0.0, 3.0, opts(1e-8)).unwrap();
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(tr.times.len(), tr.states.len());
        assert_eq!(*tr.times.last().unwrap(), 3.0);
        assert!(tr.to_csv().starts_with("t,x1\n"));
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let sol = integrate_dense(&harmonic(), &[1.0, 0.0], 0.0, 6.0, opts(1e-10)).unwrap();
        for i in 0..=600 {
            let t = i as f64 * 0.01;
            let x = sol.eval(t);
            assert!((x[0] - t.cos()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn sampled_output_hits_requested_times() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let xs = integrate_sampled(&decay(), &[1.0], 0.0, &times, opts(1e-10)).unwrap();
        assert_eq!(xs.len(), times.len());
        for (t, x) in times.iter().zip(&xs) {
            assert!((x[0] - (-t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn upward_crossing_of_harmonic_oscillator() {
        // x(t) = -cos t from (-1, 0): first upward zero at π/2
        let ev = integrate_to_event(
            &harmonic(),
            &[-1.0, 0.0],
            0.0,
            &|x| x[0],
            Direction::Rising,
            10.0,
            opts(1e-12),
        )
        .unwrap();
        assert!((ev.t - PI / 2.0).abs() < 1e-10, "{}", ev.t);
        assert!(ev.x[0].abs() <= 1e-12);
    }

    #[test]
    fn event_time_independent_of_horizon() {
        let run = |tmax| {
            integrate_to_event(&harmonic(), &[0.2, 1.0], 0.0, &|x| x[0] - 0.5, Direction::Falling, tmax, opts(1e-12))
                .unwrap()
                .t
        };
        let a = run(5.0);
        for tmax in [7.0, 20.0, 100.0] {
            assert!((run(tmax) - a).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_event_never_fires() {
        let err = integrate_to_event(&harmonic(), &[1.0, 0.0], 0.0, &|_| 1.0, Direction::Either, 20.0, opts(1e-8))
            .unwrap_err();
        assert_eq!(err, OdeError::NoEvent { t_max: 20.0 });
    }

    #[test]
    fn blow_up_underflows() {
        // ẋ = x², x(0) = 1 blows up at t = 1
        let vf = FnField::new(1, |_, x, dx| dx[0] = x[0] * x[0]);
        let err = integrate(&vf, &[1.0], 0.0, 2.0, opts(1e-10)).unwrap_err();
        assert!(matches!(err, OdeError::StepSizeUnderflow { .. } | OdeError::TooManySteps { .. }), "{err:?}");
    }

    #[test]
    fn convergence_is_monotone_in_tolerance() {
        let vf = harmonic();
        let reference = integrate_to(&vf, &[1.0, 0.0], 0.0, 20.0, opts(1e-13)).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..5 {
            let rel = 1e-5 / 2f64.powi(k);
            let x = integrate_to(&vf, &[1.0, 0.0], 0.0, 20.0, opts(rel)).unwrap();
            let e = ((x[0] - reference[0]).powi(2) + (x[1] - reference[1]).powi(2)).sqrt();
            assert!(e <= prev * 1.05, "k={k} e={e} prev={prev}");
            prev = e;
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            integrate(&decay(), &[1.0], 1.0, 1.0, opts(1e-8)).unwrap_err(),
            OdeError::InvalidSpan { t0: 1.0, t1: 1.0 }
        );
        let bad = StepOptions::with_tol(Tolerance::new(0.0, 1e-3));
        assert_eq!(integrate(&decay(), &[1.0], 0.0, 1.0, bad).unwrap_err(), OdeError::InvalidTolerance);
        assert!(matches!(
            integrate(&decay(), &[1.0, 2.0], 0.0, 1.0, opts(1e-8)).unwrap_err(),
            OdeError::DimensionMismatch { .. }
        ));
    }
}
