//! Effective coupling graphs: edge j→k unless the pair sits in a dead zone.

use super::DeadZoneReport;
use crate::models::{CouplingSpec, Node};
use serde::{Deserialize, Serialize};

/// Membership test for the dead zone of a coupling on pairs (source, target).
pub trait DeadZoneSet {
    fn contains_pair(&self, source: &[f64], target: &[f64]) -> bool;
}

/// State-space dead zone found by probing: a pair is inside when the coupling
/// stays within `eta` on the whole cube of half-width `radius` around it.
pub struct ProbedDeadZone<'a> {
    pub coupling: &'a CouplingSpec,
    pub radius: f64,
    /// Probe points per coordinate (≥ 2).
    pub points: usize,
    pub eta: f64,
}

impl<'a> ProbedDeadZone<'a> {
    pub fn new(coupling: &'a CouplingSpec) -> Self {
        ProbedDeadZone {
            coupling,
            radius: 1e-3,
            points: 3,
            eta: 0.0,
        }
    }
}

impl DeadZoneSet for ProbedDeadZone<'_> {
    fn contains_pair(&self, source: &[f64], target: &[f64]) -> bool {
        let d = source.len();
        let dims = 2 * d;
        let p = self.points.max(2);
        let mut x = vec![0.0; dims];
        let mut out = vec![0.0; self.coupling.dim()];
        for code in 0..p.pow(dims as u32) {
            let mut c = code;
            for (i, xi) in x.iter_mut().enumerate() {
                let centre = if i < d { source[i] } else { target[i - d] };
                let t = (c % p) as f64 / (p - 1) as f64;
                *xi = centre + self.radius * (2.0 * t - 1.0);
                c /= p;
            }
            self.coupling
                .eval(Node::state_only(&x[..d]), Node::state_only(&x[d..]), &mut out);
            if out.iter().any(|v| v.abs() > self.eta) {
                return false;
            }
        }
        true
    }
}

/// Phase-space dead zone from a torus report: states are one-element phases.
impl DeadZoneSet for DeadZoneReport {
    fn contains_pair(&self, source: &[f64], target: &[f64]) -> bool {
        self.region_at(source[0], target[0]).is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveGraph {
    pub n: usize,
    /// Sorted ordered pairs `(j, k)` meaning j → k.
    pub edges: Vec<(usize, usize)>,
}

impl EffectiveGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.edges.binary_search(&(j, k)).is_ok()
    }

    pub fn is_subgraph_of(&self, other: &EffectiveGraph) -> bool {
        self.n == other.n && self.edges.iter().all(|&(j, k)| other.has_edge(j, k))
    }

    pub fn is_complete(&self) -> bool {
        self.edge_count() == self.n * self.n.saturating_sub(1)
    }
}

/// Edge j → k for every ordered pair of distinct nodes outside the dead zone.
pub fn effective_graph(states: &[Vec<f64>], dz: &dyn DeadZoneSet) -> EffectiveGraph {
    let n = states.len();
    let mut edges = Vec::new();
    for j in 0..n {
        for k in 0..n {
            if j != k && !dz.contains_pair(&states[j], &states[k]) {
                edges.push((j, k));
            }
        }
    }
    EffectiveGraph { n, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deadzone::detect_torus;
    use crate::reduction::TorusSample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_coupling_graphs() {
        let c = CouplingSpec::fhn_product();
        let dz = ProbedDeadZone::new(&c);
        let up = vec![vec![1.2, 0.0], vec![0.8, 0.3], vec![1.9, -0.5]];
        assert!(effective_graph(&up, &dz).is_complete());
        let down = vec![vec![-1.5, 0.0], vec![-0.7, 1.0], vec![-1.9, 0.2]];
        assert_eq!(effective_graph(&down, &dz).edge_count(), 0);
        let mixed = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let g = effective_graph(&mixed, &dz);
        assert!(!g.has_edge(0, 1) && !g.has_edge(1, 0));
        // direct oracle: the product vanishes on a whole grid around the pair
        for dv1 in -5..=5 {
            for dv2 in -5..=5 {
                let (a, b) = ([1.0 + 0.01 * dv1 as f64, 0.0], [-1.0 + 0.01 * dv2 as f64, 0.0]);
                assert_eq!(c.eval_vec(Node::state_only(&a), Node::state_only(&b)), vec![0.0, 0.0]);
            }
        }
    }

    #[test]
    fn enlarging_dead_zone_never_adds_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 64;
        let base = TorusSample::from_phase_fn(n, |a, b| (a.sin() - 0.4).max(0.0) + (b.cos() - 0.6).max(0.0));
        for trial in 0..20 {
            let cut: f64 = rng.random_range(0.0..1.0);
            // zeroing more cells only enlarges the thresholded set
            let bigger = TorusSample::from_fn(n, |j, k| {
                let v = base.get(j, k);
                if ((j * 7 + k * 3 + trial) % 10) as f64 / 10.0 < cut { 0.0 } else { v }
            });
            let small = detect_torus(&base, 0.0, "base");
            let large = detect_torus(&bigger, 0.0, "bigger");
            let phases: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.random_range(0.0..std::f64::consts::TAU)]).collect();
            let g_small = effective_graph(&phases, &small);
            let g_large = effective_graph(&phases, &large);
            assert!(g_large.is_subgraph_of(&g_small), "trial {trial}");
        }
        let c = CouplingSpec::fhn_product();
        let states: Vec<Vec<f64>> = (0..10).map(|_| vec![rng.random_range(-0.2..0.2), 0.0]).collect();
        let mut prev: Option<EffectiveGraph> = None;
        for eta in [0.0, 0.01, 0.03, 0.1] {
            let g = effective_graph(&states, &ProbedDeadZone { coupling: &c, radius: 0.01, points: 3, eta });
            if let Some(p) = &prev {
                assert!(g.is_subgraph_of(p));
            }
            prev = Some(g);
        }
    }
}
