//! Python bindings: cycle → PRC → interaction function → dead zones.

use phasekit::core_math::{Arc, PeriodicSample};
use phasekit::deadzone::{self, DeadZoneReport};
use phasekit::limit_cycle::{find_limit_cycle, CycleOptions, GeometricPhaseTable, SectionSpec, DEFAULT_CENTER};
use phasekit::models::{bump_pulse, fhn_pair_product, CouplingSpec, Fhn, FhnParams, PulseSource, TimeScale};
use phasekit::prc::{compute_prc, PrcOptions};
use phasekit::reduction;
use phasekit::sim::{run_ensemble, EnsembleOptions};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sample(values: Vec<f64>) -> PyResult<PeriodicSample> {
    PeriodicSample::new(values).map_err(err)
}

/// Periodic orbit of the FitzHugh–Nagumo unit, in slow time.
#[pyclass(frozen)]
struct LimitCycle {
    params: FhnParams,
    inner: phasekit::limit_cycle::LimitCycle,
}

#[pymethods]
impl LimitCycle {
    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega()
    }

    #[getter]
    fn grid(&self) -> usize {
        self.inner.grid_len()
    }

    /// Sampled component `c` (0 = v, 1 = w) on the phase grid.
    fn component(&self, c: usize) -> PyResult<Vec<f64>> {
        if c >= self.inner.dim() {
            return Err(err(format!("component {c} out of range")));
        }
        Ok(self.inner.component(c).values().to_vec())
    }

    fn state_at_phase(&self, theta: f64) -> Vec<f64> {
        self.inner.state_at_phase(theta)
    }

    /// Adjoint phase response curve normalized so that ⟨Z, γ̇⟩ = 1.
    fn prc(&self) -> PyResult<Prc> {
        let vf = Fhn::new(self.params, TimeScale::Slow);
        let z = compute_prc(&self.inner, &vf, PrcOptions::default()).map_err(err)?;
        Ok(Prc {
            normalization_residual: z.diagnostics.residual,
            components: z.components().iter().map(|c| c.values().to_vec()).collect(),
        })
    }

    /// Averaged interaction function for `coupling` = "product" or "pulse".
    #[pyo3(signature = (prc, coupling="product", pulse_center=1.0, pulse_half_width=0.5))]
    fn reduce(&self, prc: &Prc, coupling: &str, pulse_center: f64, pulse_half_width: f64) -> PyResult<Interaction> {
        let spec = match coupling {
            "product" => CouplingSpec::fhn_product(),
            "pulse" => CouplingSpec::fhn_pulse(bump_pulse(pulse_center, pulse_half_width).map_err(err)?, PulseSource::Phase),
            other => return Err(err(format!("unknown coupling `{other}`"))),
        };
        let samples = prc.components.iter().cloned().map(sample).collect::<PyResult<Vec<_>>>()?;
        let z = phasekit::prc::PhaseResponseCurve::from_samples(
            samples,
            phasekit::prc::PrcDiagnostics {
                residual: prc.normalization_residual,
                periodicity_gap: 0.0,
                periods: 0,
                last_change: 0.0,
            },
        );
        let f = reduction::reduce(&self.inner, &z, &spec).map_err(err)?;
        Ok(Interaction::from(f))
    }

    /// Final phase differences of a product-coupled pair ensemble started at
    /// evenly spaced offsets. Returns `(phi0, phi_final)`.
    #[pyo3(signature = (eps, n=100, t_final=500.0, sample_dt=0.05))]
    fn ensemble(&self, py: Python<'_>, eps: f64, n: usize, t_final: f64, sample_dt: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        if n < 2 || !(t_final > 0.0) || !(sample_dt > 0.0) {
            return Err(err("need n ≥ 2 and positive times"));
        }
        let table = GeometricPhaseTable::new(&self.inner, DEFAULT_CENTER).map_err(err)?;
        let model = fhn_pair_product(self.params, eps, TimeScale::Slow);
        let opts = EnsembleOptions {
            n,
            t_final,
            sample_dt,
            ..Default::default()
        };
        let run = py.allow_threads(|| run_ensemble(&model, &self.inner, &table, eps, "fhn", opts));
        let last = run
            .members
            .iter()
            .map(|m| m.phi.last().copied().unwrap_or(f64::NAN))
            .collect();
        Ok((run.initial_phases(), last))
    }
}

#[pyclass(frozen, get_all)]
struct Prc {
    normalization_residual: f64,
    components: Vec<Vec<f64>>,
}

#[pyclass(frozen, get_all)]
struct Interaction {
    h: Vec<f64>,
    h_odd: Vec<f64>,
}

impl From<reduction::InteractionFunction> for Interaction {
    fn from(f: reduction::InteractionFunction) -> Self {
        Interaction {
            h: f.h.into_values(),
            h_odd: f.h_odd.into_values(),
        }
    }
}

/// Maximal arcs where a sampled function is within `eta` of zero.
#[pyclass(frozen, get_all)]
struct DeadZones {
    eta: f64,
    simple: bool,
    /// `(first, last, length)` in radians.
    arcs: Vec<(f64, f64, f64)>,
}

impl From<DeadZoneReport> for DeadZones {
    fn from(r: DeadZoneReport) -> Self {
        let arc = |a: &Arc| (a.first().value(), a.last().value(), a.length());
        DeadZones {
            eta: r.eta,
            simple: r.simple,
            arcs: r.arcs.iter().map(arc).collect(),
        }
    }
}

#[pymethods]
impl DeadZones {
    fn __len__(&self) -> usize {
        self.arcs.len()
    }

    fn __repr__(&self) -> String {
        format!("DeadZones(eta={:e}, arcs={:?})", self.eta, self.arcs)
    }
}

/// Finds the attracting cycle for the given parameters.
#[pyfunction]
#[pyo3(signature = (a=0.7, b=0.8, i=0.33, mu=0.05, grid=2048))]
fn fhn_limit_cycle(py: Python<'_>, a: f64, b: f64, i: f64, mu: f64, grid: usize) -> PyResult<LimitCycle> {
    let params = FhnParams { a, b, i, mu };
    params.validate().map_err(err)?;
    let vf = Fhn::new(params, TimeScale::Slow);
    let opts = CycleOptions {
        grid,
        ..Default::default()
    };
    let inner = py
        .allow_threads(|| find_limit_cycle(&vf, &[0.0, -0.6], SectionSpec::fhn(), opts))
        .map_err(err)?;
    Ok(LimitCycle { params, inner })
}

/// Dead zones of `values` on a uniform phase grid; exact zeros when `eta` is None.
#[pyfunction]
#[pyo3(signature = (values, eta=None))]
fn dead_zones(values: Vec<f64>, eta: Option<f64>) -> PyResult<DeadZones> {
    let f = sample(values)?;
    Ok(match eta {
        Some(e) if e.is_finite() && e >= 0.0 => deadzone::detect_circle(&f, e, "f"),
        Some(e) => return Err(err(format!("eta must be non-negative, got {e}"))),
        None => deadzone::detect_circle_exact(&f, "f"),
    }
    .into())
}

/// Keeps harmonics `0..=order` of `values`.
#[pyfunction]
fn fourier_truncate(values: Vec<f64>, order: usize) -> PyResult<Vec<f64>> {
    Ok(reduction::fourier_truncate(&sample(values)?, order).map_err(err)?.into_values())
}

/// Antisymmetric part `h(Φ) − h(−Φ)`.
#[pyfunction]
fn odd_part(values: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(reduction::InteractionFunction::from_h(sample(values)?).h_odd.into_values())
}

/// Randomized length-bound suite; returns `(passed, failed, unmet, false_claims)`.
#[pyfunction]
#[pyo3(signature = (seed=7, met=100, unmet=20, grid=512))]
fn geometric_suite(seed: u64, met: usize, unmet: usize, grid: usize) -> (usize, usize, usize, usize) {
    let s = deadzone::run_prop_geom_suite(seed, met, unmet, grid);
    (s.passed, s.failed, s.unmet, s.false_claims)
}

#[pymodule]
#[pyo3(name = "phasekit")]
fn phasekit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", phasekit::VERSION)?;
    m.add_class::<LimitCycle>()?;
    m.add_class::<Prc>()?;
    m.add_class::<Interaction>()?;
    m.add_class::<DeadZones>()?;
    m.add_function(wrap_pyfunction!(fhn_limit_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(dead_zones, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_truncate, m)?)?;
    m.add_function(wrap_pyfunction!(odd_part, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_suite, m)?)?;
    Ok(())
}
