//! Pairwise coupling functions `g(x_j, x_k)` and the coupled-pair vector field.

use super::pulse::PulseSpec;
use super::ModelError;
use crate::ode::VectorField;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

pub type StateMap = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
pub type PairMap = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
pub type ScalarPairMap = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// Maps a node state to its phase on the uncoupled cycle.
pub type PhaseMap = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A node as seen by a coupling function.
#[derive(Debug, Clone, Copy)]
pub struct Node<'a> {
    pub state: &'a [f64],
    /// Phase on the uncoupled cycle; only read by phase-driven couplings.
    pub phase: f64,
}

impl<'a> Node<'a> {
    pub fn new(state: &'a [f64], phase: f64) -> Self {
        Node { state, phase }
    }

    pub fn state_only(state: &'a [f64]) -> Self {
        Node {
            state,
            phase: f64::NAN,
        }
    }
}

/// What a pulsatile coupling reads from the source node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum PulseSource {
    /// `P(x_j[component])`, the pulse applied to a state component.
    State { component: usize },
    /// `P(θ_j)`, the pulse applied to the source phase.
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    General,
    Separable,
    FixedDirection,
    Pulsatile,
}

/// `g(x_j, x_k)`: the effect of source `j` on target `k`.
#[derive(Clone)]
pub enum CouplingSpec {
    General {
        dim: usize,
        map: PairMap,
    },
    /// `g^in(x_j) ⊙ g^res(x_k)`.
    Separable {
        dim: usize,
        input: StateMap,
        response: StateMap,
    },
    /// `g̃(x_j, x_k)·v`.
    FixedDirection {
        scalar: ScalarPairMap,
        direction: Vec<f64>,
    },
    /// `P(source)·r` with constant response `r`.
    Pulsatile {
        pulse: PulseSpec,
        source: PulseSource,
        response: Vec<f64>,
    },
}

impl fmt::Debug for CouplingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CouplingSpec::General { dim, .. } => write!(f, "General {{ dim: {dim} }}"),
            CouplingSpec::Separable { dim, .. } => write!(f, "Separable {{ dim: {dim} }}"),
            CouplingSpec::FixedDirection { direction, .. } => {
                write!(f, "FixedDirection {{ direction: {direction:?} }}")
            }
            CouplingSpec::Pulsatile {
                pulse,
                source,
                response,
            } => write!(f, "Pulsatile {{ pulse: {pulse:?}, source: {source:?}, response: {response:?} }}"),
        }
    }
}

/// `v·𝟙{v > 0}` on the first component, zero elsewhere.
fn positive_part_first(x: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    out[0] = x[0].max(0.0);
}

impl CouplingSpec {
    pub fn zero(dim: usize) -> Self {
        CouplingSpec::General {
            dim,
            map: Arc::new(|_, _, out: &mut [f64]| out.fill(0.0)),
        }
    }

    pub fn general(dim: usize, map: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        CouplingSpec::General {
            dim,
            map: Arc::new(map),
        }
    }

    pub fn separable(
        dim: usize,
        input: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        response: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        CouplingSpec::Separable {
            dim,
            input: Arc::new(input),
            response: Arc::new(response),
        }
    }

    pub fn fixed_direction(
        scalar: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        direction: Vec<f64>,
    ) -> Self {
        CouplingSpec::FixedDirection {
            scalar: Arc::new(scalar),
            direction,
        }
    }

    /// Branch-localized product coupling of two FHN units: `v_j v_k` on the
    /// `v` equation when both voltages are positive, zero otherwise.
    pub fn fhn_product() -> Self {
        CouplingSpec::separable(2, positive_part_first, positive_part_first)
    }

    /// Pulse on the `v` equation.
    pub fn fhn_pulse(pulse: PulseSpec, source: PulseSource) -> Self {
        CouplingSpec::Pulsatile {
            pulse,
            source,
            response: vec![1.0, 0.0],
        }
    }

    pub fn kind(&self) -> CouplingKind {
        match self {
            CouplingSpec::General { .. } => CouplingKind::General,
            CouplingSpec::Separable { .. } => CouplingKind::Separable,
            CouplingSpec::FixedDirection { .. } => CouplingKind::FixedDirection,
            CouplingSpec::Pulsatile { .. } => CouplingKind::Pulsatile,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CouplingSpec::General { dim, .. } | CouplingSpec::Separable { dim, .. } => *dim,
            CouplingSpec::FixedDirection { direction, .. } => direction.len(),
            CouplingSpec::Pulsatile { response, .. } => response.len(),
        }
    }

    pub fn needs_phase(&self) -> bool {
        matches!(
            self,
            CouplingSpec::Pulsatile {
                source: PulseSource::Phase,
                ..
            }
        )
    }

    /// Writes `g(source, target)` into `out`.
    pub fn eval(&self, source: Node, target: Node, out: &mut [f64]) {
        match self {
            CouplingSpec::General { map, .. } => map(source.state, target.state, out),
            CouplingSpec::Separable { input, response, dim } => {
                let mut buf = [0.0; 8];
                let mut heap;
                let r: &mut [f64] = if *dim <= buf.len() {
                    &mut buf[..*dim]
                } else {
                    heap = vec![0.0; *dim];
                    &mut heap
                };
                response(target.state, r);
                input(source.state, out);
                for (o, ri) in out.iter_mut().zip(r.iter()) {
                    *o *= ri;
                }
            }
            CouplingSpec::FixedDirection { scalar, direction } => {
                let s = scalar(source.state, target.state);
                for (o, v) in out.iter_mut().zip(direction) {
                    *o = s * v;
                }
            }
            CouplingSpec::Pulsatile {
                pulse,
                source: src,
                response,
            } => {
                let p = match *src {
                    PulseSource::State { component } => pulse.at_value(source.state[component]),
                    PulseSource::Phase => pulse.at_phase(source.phase),
                };
                for (o, r) in out.iter_mut().zip(response) {
                    *o = p * r;
                }
            }
        }
    }

    pub fn eval_vec(&self, source: Node, target: Node) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval(source, target, &mut out);
        out
    }
}

/// Two identical units `ẋ₁ = f(x₁) + ε g(x₂, x₁)`, `ẋ₂ = f(x₂) + ε g(x₁, x₂)`,
/// the whole field multiplied by `rate`.
#[derive(Clone)]
pub struct PairField<V> {
    pub node: V,
    pub coupling: CouplingSpec,
    pub eps: f64,
    pub rate: f64,
    phase_map: Option<PhaseMap>,
}

impl<V: VectorField> PairField<V> {
    pub fn new(node: V, coupling: CouplingSpec, eps: f64, rate: f64) -> Result<Self, ModelError> {
        if coupling.dim() != node.dim() {
            return Err(ModelError::DimensionMismatch {
                node: node.dim(),
                coupling: coupling.dim(),
            });
        }
        if coupling.needs_phase() {
            return Err(ModelError::PhaseMapRequired);
        }
        Ok(PairField {
            node,
            coupling,
            eps,
            rate,
            phase_map: None,
        })
    }

    /// Like [`PairField::new`] but supplies the state-to-phase map that
    /// phase-driven couplings read.
    pub fn with_phase_map(
        node: V,
        coupling: CouplingSpec,
        eps: f64,
        rate: f64,
        phase_map: PhaseMap,
    ) -> Result<Self, ModelError> {
        if coupling.dim() != node.dim() {
            return Err(ModelError::DimensionMismatch {
                node: node.dim(),
                coupling: coupling.dim(),
            });
        }
        Ok(PairField {
            node,
            coupling,
            eps,
            rate,
            phase_map: Some(phase_map),
        })
    }

    fn node_view<'a>(&self, x: &'a [f64]) -> Node<'a> {
        match &self.phase_map {
            Some(m) => Node::new(x, m(x)),
            None => Node::state_only(x),
        }
    }
}

impl<V: VectorField> VectorField for PairField<V> {
    fn dim(&self) -> usize {
        2 * self.node.dim()
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let d = self.node.dim();
        let (x1, x2) = x.split_at(d);
        let (d1, d2) = dx.split_at_mut(d);
        self.node.rhs(t, x1, d1);
        self.node.rhs(t, x2, d2);
        if self.eps != 0.0 {
            let mut buf = [0.0; 8];
            let mut heap;
            let g: &mut [f64] = if d <= buf.len() {
                &mut buf[..d]
            } else {
                heap = vec![0.0; d];
                &mut heap
            };
            let (n1, n2) = (self.node_view(x1), self.node_view(x2));
            self.coupling.eval(n2, n1, g);
            for (o, gi) in d1.iter_mut().zip(g.iter()) {
                *o += self.eps * gi;
            }
            self.coupling.eval(n1, n2, g);
            for (o, gi) in d2.iter_mut().zip(g.iter()) {
                *o += self.eps * gi;
            }
        }
        if self.rate != 1.0 {
            for v in dx.iter_mut() {
                *v *= self.rate;
            }
        }
    }
}
