//! Dormand–Prince 5(4) with PI step-size control and continuous output.

use super::field::VectorField;
use super::{OdeError, Tolerance};
use std::ops::ControlFlow;

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error coefficients (5th minus embedded 4th order).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output coefficients (Hairer & Wanner).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step controller settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub tol: Tolerance,
    /// Upper bound on |h|.
    pub max_step: f64,
    /// Initial |h|; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            tol: Tolerance::default(),
            max_step: 0.1,
            initial_step: None,
            max_steps: 50_000_000,
        }
    }
}

impl StepOptions {
    pub fn with_tol(tol: Tolerance) -> Self {
        StepOptions {
            tol,
            ..Default::default()
        }
    }
}

/// One accepted step with its continuous extension on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    /// Interpolation coefficients, five blocks of length d.
    cont: Vec<f64>,
    dim: usize,
}

impl DenseStep {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> &[f64] {
        &self.cont[..self.dim]
    }

    /// State at the end of the step.
    pub fn end(&self) -> Vec<f64> {
        let d = self.dim;
        (0..d).map(|i| self.cont[i] + self.cont[d + i]).collect()
    }

    /// Evaluates the interpolant at `t` into `out` (4th-order accurate).
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let d = self.dim;
        let h = self.t1 - self.t0;
        let s = if h == 0.0 { 0.0 } else { (t - self.t0) / h };
        let s1 = 1.0 - s;
        let c = &self.cont;
        for i in 0..d {
            out[i] = c[i]
                + s * (c[d + i] + s1 * (c[2 * d + i] + s * (c[3 * d + i] + s1 * c[4 * d + i])));
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }

    /// True when `t` lies in the closed step interval.
    pub fn covers(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 {
            (self.t0, self.t1)
        } else {
            (self.t1, self.t0)
        };
        t >= lo && t <= hi
    }
}

/// Adaptive integrator state for a single trajectory.
pub struct Stepper<'a> {
    vf: &'a dyn VectorField,
    opts: StepOptions,
    t: f64,
    x: Vec<f64>,
    k: [Vec<f64>; 7],
    h: f64,
    err_old: f64,
    direction: f64,
    scratch: Vec<f64>,
    x_new: Vec<f64>,
    steps: usize,
    rejected: usize,
    nfev: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(vf: &'a dyn VectorField, t0: f64, x0: &[f64], direction: f64, opts: StepOptions) -> Result<Self, OdeError> {
        let d = vf.dim();
        if x0.len() != d {
            return Err(OdeError::DimensionMismatch {
                expected: d,
                got: x0.len(),
            });
        }
        if !(opts.tol.rel > 0.0 && opts.tol.abs > 0.0) {
            return Err(OdeError::InvalidTolerance);
        }
        let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; d]);
        vf.rhs(t0, x0, &mut k[0]);
        let mut s = Stepper {
            vf,
            opts,
            t: t0,
            x: x0.to_vec(),
            k,
            h: 0.0,
            err_old: 1e-4,
            direction: direction.signum(),
            scratch: vec![0.0; d],
            x_new: vec![0.0; d],
            steps: 0,
            rejected: 0,
            nfev: 1,
        };
        s.h = match opts.initial_step {
            Some(h) => h.abs().min(opts.max_step),
            None => s.initial_step(),
        };
        Ok(s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn stats(&self) -> (usize, usize, usize) {
        (self.steps, self.rejected, self.nfev)
    }

    fn initial_step(&mut self) -> f64 {
        let d = self.x.len();
        let sk: Vec<f64> = (0..d).map(|i| self.opts.tol.abs + self.opts.tol.rel * self.x[i].abs()).collect();
        let dnf = (0..d).map(|i| (self.k[0][i] / sk[i]).powi(2)).sum::<f64>() / d as f64;
        let dny = (0..d).map(|i| (self.x[i] / sk[i]).powi(2)).sum::<f64>() / d as f64;
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(self.opts.max_step);
        let xt: Vec<f64> = (0..d).map(|i| self.x[i] + self.direction * h * self.k[0][i]).collect();
        let mut f1 = vec![0.0; d];
        self.vf.rhs(self.t + self.direction * h, &xt, &mut f1);
        self.nfev += 1;
        let der2 = ((0..d).map(|i| ((f1[i] - self.k[0][i]) / sk[i]).powi(2)).sum::<f64>() / d as f64).sqrt() / h;
        let der12 = der2.max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (h * 1e-3).max(1e-6)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(self.opts.max_step)
    }

    /// Advances by one accepted step, never past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<DenseStep, OdeError> {
        let d = self.x.len();
        let span_scale = (t_end - self.t).abs().max(self.t.abs()).max(1.0);
        loop {
            if self.steps + self.rejected >= self.opts.max_steps {
                return Err(OdeError::TooManySteps { t: self.t });
            }
            let remaining = (t_end - self.t).abs();
            let mut h = self.h.min(self.opts.max_step);
            let mut last = false;
            if h >= remaining * (1.0 - 1e-12) {
                h = remaining;
                last = true;
            }
            if h < 1e-14 * span_scale && !last {
                return Err(OdeError::StepSizeUnderflow { t: self.t, h });
            }
            let hs = self.direction * h;
            let t = self.t;
            let x = &self.x;
            let k = &mut self.k;
            let y = &mut self.scratch;

            for i in 0..d {
                y[i] = x[i] + hs * A21 * k[0][i];
            }
            let (k0, rest) = k.split_at_mut(1);
            self.vf.rhs(t + C2 * hs, y, &mut rest[0]);
            for i in 0..d {
                y[i] = x[i] + hs * (A31 * k0[0][i] + A32 * rest[0][i]);
            }
            self.vf.rhs(t + C3 * hs, y, &mut rest[1]);
            for i in 0..d {
                y[i] = x[i] + hs * (A41 * k0[0][i] + A42 * rest[0][i] + A43 * rest[1][i]);
            }
            self.vf.rhs(t + C4 * hs, y, &mut rest[2]);
            for i in 0..d {
                y[i] = x[i]
                    + hs * (A51 * k0[0][i] + A52 * rest[0][i] + A53 * rest[1][i] + A54 * rest[2][i]);
            }
            self.vf.rhs(t + C5 * hs, y, &mut rest[3]);
            for i in 0..d {
                y[i] = x[i]
                    + hs * (A61 * k0[0][i]
                        + A62 * rest[0][i]
                        + A63 * rest[1][i]
                        + A64 * rest[2][i]
                        + A65 * rest[3][i]);
            }
            let t_new = if last { t_end } else { t + hs };
            self.vf.rhs(t + hs, y, &mut rest[4]);
            let xn = &mut self.x_new;
            for i in 0..d {
                xn[i] = x[i]
                    + hs * (A71 * k0[0][i]
                        + A73 * rest[1][i]
                        + A74 * rest[2][i]
                        + A75 * rest[3][i]
                        + A76 * rest[4][i]);
            }
            self.vf.rhs(t_new, xn, &mut rest[5]);
            self.nfev += 6;

            let mut err = 0.0f64;
            for i in 0..d {
                let e = hs
                    * (E1 * k0[0][i]
                        + E3 * rest[1][i]
                        + E4 * rest[2][i]
                        + E5 * rest[3][i]
                        + E6 * rest[4][i]
                        + E7 * rest[5][i]);
                let sc = self.opts.tol.abs + self.opts.tol.rel * x[i].abs().max(xn[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                self.h = 0.25 * h;
                self.rejected += 1;
                continue;
            }

            // PI controller (Hairer): beta = 0.04, safety 0.9.
            const BETA: f64 = 0.04;
            const EXPO: f64 = 0.2 - BETA * 0.75;
            let fac11 = err.max(1e-300).powf(EXPO);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / 0.9).clamp(0.1, 5.0);
                let h_next = h / fac;
                self.err_old = err.max(1e-4);

                let mut cont = vec![0.0; 5 * d];
                for i in 0..d {
                    let ydiff = xn[i] - x[i];
                    let bspl = hs * k0[0][i] - ydiff;
                    cont[i] = x[i];
                    cont[d + i] = ydiff;
                    cont[2 * d + i] = bspl;
                    cont[3 * d + i] = ydiff - hs * rest[5][i] - bspl;
                    cont[4 * d + i] = hs
                        * (D1 * k0[0][i]
                            + D3 * rest[1][i]
                            + D4 * rest[2][i]
                            + D5 * rest[3][i]
                            + D6 * rest[4][i]
                            + D7 * rest[5][i]);
                }
                let dense = DenseStep {
                    t0: t,
                    t1: t_new,
                    cont,
                    dim: d,
                };
                self.t = t_new;
                std::mem::swap(&mut self.x, &mut self.x_new);
                // FSAL
                let (k0, rest) = self.k.split_at_mut(1);
                k0[0].copy_from_slice(&rest[5]);
                self.h = h_next.min(self.opts.max_step);
                self.steps += 1;
                return Ok(dense);
            }
            self.h = h / (fac11 / 0.9).min(5.0);
            self.rejected += 1;
        }
    }

    /// Drives the integration to `t_end`, handing each accepted step to
    /// `on_step`. Stops early when the callback breaks.
    pub fn run<B>(
        &mut self,
        t_end: f64,
        mut on_step: impl FnMut(&DenseStep) -> ControlFlow<B>,
    ) -> Result<Option<B>, OdeError> {
        while (t_end - self.t) * self.direction > 0.0 {
            let step = self.step(t_end)?;
            if let ControlFlow::Break(b) = on_step(&step) {
                return Ok(Some(b));
            }
        }
        Ok(None)
    }
}
