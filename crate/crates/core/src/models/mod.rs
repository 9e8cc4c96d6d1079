//! Built-in oscillators and coupling functions.

mod coupling;
mod fhn;
mod pulse;
mod simple;

pub use coupling::{
    CouplingKind, CouplingSpec, Node, PairField, PairMap, PhaseMap, PulseSource, ScalarPairMap,
    StateMap,
};
pub use fhn::{
    fhn_critical_manifold, fhn_single, CriticalBranch, CriticalManifold, Fhn, FhnParams, Fold,
    TimeScale,
};
pub use pulse::{bump, bump_integral, bump_pulse, PulseSpec};
pub use simple::{Hopf, ToySlowFast};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid value {value} for parameter `{name}`")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("pulse half-width {half_width} leaves no room on the circle (2b must be < 2π)")]
    WidthTooLarge { half_width: f64 },
    #[error("coupling has dimension {coupling}, node has dimension {node}")]
    DimensionMismatch { node: usize, coupling: usize },
    #[error("phase-driven coupling needs a state-to-phase map")]
    PhaseMapRequired,
}

/// Coupled FHN pair with the branch-localized product coupling.
pub fn fhn_pair_product(p: FhnParams, eps: f64, scale: TimeScale) -> PairField<Fhn> {
    PairField::new(fhn_single(p), CouplingSpec::fhn_product(), eps, scale.rate(p.mu))
        .expect("product coupling matches the FHN dimension")
}

/// Coupled FHN pair with pulsatile coupling. The phase variant requires
/// `phase_map`; the state variant ignores it.
pub fn fhn_pair_pulsatile(
    p: FhnParams,
    eps: f64,
    pulse: PulseSpec,
    source: PulseSource,
    scale: TimeScale,
    phase_map: Option<PhaseMap>,
) -> Result<PairField<Fhn>, ModelError> {
    let c = CouplingSpec::fhn_pulse(pulse, source);
    let rate = scale.rate(p.mu);
    match (source, phase_map) {
        (PulseSource::Phase, Some(m)) => PairField::with_phase_map(fhn_single(p), c, eps, rate, m),
        (PulseSource::Phase, None) => Err(ModelError::PhaseMapRequired),
        (PulseSource::State { .. }, _) => PairField::new(fhn_single(p), c, eps, rate),
    }
}
