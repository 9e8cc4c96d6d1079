//! Vector fields and Jacobians.

/// An autonomous or time-dependent vector field on ℝ^d.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `f(t, x)` into `dx`.
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]);

    /// Writes the row-major Jacobian `∂f_i/∂x_j` into `jac` and returns
    /// `true`, or returns `false` when no analytic Jacobian is available.
    fn jacobian(&self, _t: f64, _x: &[f64], _jac: &mut [f64]) -> bool {
        false
    }

    fn has_jacobian(&self) -> bool {
        let d = self.dim();
        let mut scratch = vec![0.0; d * d];
        self.jacobian(0.0, &vec![0.0; d], &mut scratch)
    }

    fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.dim()];
        self.rhs(t, x, &mut dx);
        dx
    }
}

impl<V: VectorField + ?Sized> VectorField for &V {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (**self).rhs(t, x, dx)
    }
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]) -> bool {
        (**self).jacobian(t, x, jac)
    }
}

impl<V: VectorField + ?Sized> VectorField for Box<V> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (**self).rhs(t, x, dx)
    }
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]) -> bool {
        (**self).jacobian(t, x, jac)
    }
}

impl<V: VectorField + ?Sized> VectorField for std::sync::Arc<V> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (**self).rhs(t, x, dx)
    }
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]) -> bool {
        (**self).jacobian(t, x, jac)
    }
}

/// Vector field defined by a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (self.f)(t, x, dx)
    }
}

/// Multiplies a field by a constant rate, i.e. rescales time by `1/rate`.
#[derive(Debug, Clone)]
pub struct Rescaled<V> {
    pub inner: V,
    pub rate: f64,
}

impl<V: VectorField> VectorField for Rescaled<V> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        self.inner.rhs(t, x, dx);
        for v in dx.iter_mut() {
            *v *= self.rate;
        }
    }
    fn jacobian(&self, t: f64, x: &[f64], jac: &mut [f64]) -> bool {
        if !self.inner.jacobian(t, x, jac) {
            return false;
        }
        for v in jac.iter_mut() {
            *v *= self.rate;
        }
        true
    }
}

/// Central-difference Jacobian with step `1e-6·(1 + |x_j|)`.
pub fn finite_difference_jacobian(vf: &dyn VectorField, t: f64, x: &[f64], jac: &mut [f64]) {
    let d = vf.dim();
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; d];
    let mut fm = vec![0.0; d];
    for j in 0..d {
        let h = 1e-6 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        vf.rhs(t, &xp, &mut fp);
        xp[j] = x[j] - h;
        vf.rhs(t, &xp, &mut fm);
        xp[j] = x[j];
        for i in 0..d {
            jac[i * d + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
}

/// Analytic Jacobian when present, finite differences otherwise.
pub fn jacobian_or_fd(vf: &dyn VectorField, t: f64, x: &[f64], jac: &mut [f64]) {
    if !vf.jacobian(t, x, jac) {
        finite_difference_jacobian(vf, t, x, jac);
    }
}

/// Largest relative deviation between the analytic and finite-difference Jacobians at `x`.
pub fn jacobian_mismatch(vf: &dyn VectorField, t: f64, x: &[f64]) -> Option<f64> {
    let d = vf.dim();
    let mut analytic = vec![0.0; d * d];
    if !vf.jacobian(t, x, &mut analytic) {
        return None;
    }
    let mut fd = vec![0.0; d * d];
    finite_difference_jacobian(vf, t, x, &mut fd);
    let scale = analytic.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Some(
        analytic
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b).abs() / scale)
            .fold(0.0, f64::max),
    )
}
