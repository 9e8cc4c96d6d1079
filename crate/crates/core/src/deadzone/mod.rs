//! Exact and η-approximate dead zones on 𝕋 and 𝕋², effective coupling
//! graphs, and checkers for the sufficient conditions on h.

mod graph;
mod props;

pub use graph::{effective_graph, DeadZoneSet, EffectiveGraph, ProbedDeadZone};
pub use props::{
    check_prop_dead_branch, check_prop_eta, check_prop_geom, check_prop_overlap, check_prop_res1,
    dead_offsets, pulse_windows, random_zero_arc_sample, run_prop_geom_suite, ComponentOverlap,
    DeadBranchCheck, EtaCheck, GeomCheck, GeomSuite, OverlapCheck, Res1Check,
};

use crate::core_math::{cyclic_runs, grid_phase, maximal_zero_arcs, run_to_arc, Arc, PeriodicSample};
use crate::reduction::TorusSample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Relative level below which a sample counts as numerically zero.
pub const NUMERICAL_ZERO: f64 = 1e-12;

/// `NUMERICAL_ZERO · max|f|`.
pub fn exact_eta(f: &PeriodicSample) -> f64 {
    NUMERICAL_ZERO * f.max_abs()
}

/// How a torus component decomposes into product strips. Rows are source
/// phases θ_j, columns target phases θ_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    /// `U × 𝕋`: the source's state silences it towards every target.
    Output,
    /// `𝕋 × U`: the target ignores every source.
    Input,
    /// Union of an output strip and an input strip.
    InputOutput,
    /// The whole torus.
    Full,
    /// No product structure.
    Other,
}

/// A connected component of the thresholded torus sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusRegion {
    pub label: u32,
    pub cells: usize,
    pub kind: RegionKind,
    /// Maximal arcs of source phases whose whole row lies in the region.
    pub source_arcs: Vec<Arc>,
    /// Maximal arcs of target phases whose whole column lies in the region.
    pub target_arcs: Vec<Arc>,
}

/// Detected dead zones of a circle or torus function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeadZoneReport {
    pub eta: f64,
    pub source: String,
    pub arcs: Vec<Arc>,
    /// Exactly one arc (connected dead zone).
    pub simple: bool,
    pub regions: Vec<TorusRegion>,
    /// Per-cell region label (0 = none) for torus reports.
    #[serde(skip)]
    labels: Option<(usize, Vec<u32>)>,
}

impl DeadZoneReport {
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty() && self.regions.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(Arc::length).sum()
    }

    pub fn longest(&self) -> Option<&Arc> {
        self.arcs.iter().max_by(|a, b| a.length().total_cmp(&b.length()))
    }

    /// Arc whose closure contains `x`.
    pub fn arc_containing(&self, x: f64, tol: f64) -> Option<&Arc> {
        self.arcs.iter().find(|a| a.contains_closed(x, tol))
    }

    /// Region label of the torus cell nearest to `(θ_j, θ_k)`.
    pub fn region_at(&self, theta_j: f64, theta_k: f64) -> Option<u32> {
        let (n, labels) = self.labels.as_ref()?;
        let idx = |t: f64| ((crate::core_math::wrap(t) / std::f64::consts::TAU * *n as f64).round() as usize) % n;
        let l = labels[idx(theta_j) * n + idx(theta_k)];
        (l != 0).then_some(l)
    }

    /// JSON summary with arc extremities in radians.
    pub fn to_json(&self) -> serde_json::Value {
        let arc = |a: &Arc| json!({"first": a.first().value(), "last": a.last().value(), "length": a.length()});
        json!({
            "source": self.source,
            "eta": self.eta,
            "simple": self.simple,
            "arcs": self.arcs.iter().map(arc).collect::<Vec<_>>(),
            "regions": self.regions.iter().map(|r| json!({
                "label": r.label,
                "cells": r.cells,
                "kind": r.kind,
                "source_arcs": r.source_arcs.iter().map(arc).collect::<Vec<_>>(),
                "target_arcs": r.target_arcs.iter().map(arc).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Maximal arcs with `|f| ≤ eta`; `simple` when there is exactly one.
pub fn detect_circle(f: &PeriodicSample, eta: f64, source: &str) -> DeadZoneReport {
    let arcs = maximal_zero_arcs(f, eta);
    DeadZoneReport {
        eta,
        source: source.to_string(),
        simple: arcs.len() == 1,
        arcs,
        regions: Vec::new(),
        labels: None,
    }
}

/// Exact dead zones, using the numerical-zero threshold.
pub fn detect_circle_exact(f: &PeriodicSample, source: &str) -> DeadZoneReport {
    detect_circle(f, exact_eta(f), source)
}

/// Detector reports over an η ladder.
pub fn eta_ladder(f: &PeriodicSample, etas: &[f64], source: &str) -> Vec<DeadZoneReport> {
    etas.iter().map(|&e| detect_circle(f, e, source)).collect()
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins: keeps labels deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Thresholds `|g2| ≤ eta`, labels 4-connected components on the torus,
/// drops components without a 2×2 block, and classifies product strips.
pub fn detect_torus(g2: &TorusSample, eta: f64, source: &str) -> DeadZoneReport {
    let n = g2.len();
    let mask: Vec<bool> = g2.values().iter().map(|v| v.abs() <= eta).collect();

    // pass 1: cyclic runs per row, in parallel
    let row_runs: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let row = &mask[j * n..(j + 1) * n];
            let mut ids = vec![usize::MAX; n];
            for (r, run) in cyclic_runs(row).into_iter().enumerate() {
                for t in 0..run.len {
                    ids[(run.start + t) % n] = r;
                }
            }
            ids
        })
        .collect();
    let mut offset = vec![0usize; n + 1];
    for j in 0..n {
        let runs = row_runs[j].iter().filter(|&&r| r != usize::MAX).max().map_or(0, |m| m + 1);
        offset[j + 1] = offset[j] + runs;
    }
    let run_id = |j: usize, k: usize| {
        let r = row_runs[j][k];
        (r != usize::MAX).then(|| offset[j] + r)
    };

    // pass 2: sequential merge across rows (wrapping)
    let mut dsu = Dsu::new(offset[n]);
    for j in 0..n {
        let jn = (j + 1) % n;
        for k in 0..n {
            if let (Some(a), Some(b)) = (run_id(j, k), run_id(jn, k)) {
                dsu.union(a, b);
            }
        }
    }

    // components need a 2×2 block of cells
    let mut open = vec![false; offset[n]];
    for j in 0..n {
        let jn = (j + 1) % n;
        for k in 0..n {
            let kn = (k + 1) % n;
            if mask[j * n + k] && mask[j * n + kn] && mask[jn * n + k] && mask[jn * n + kn] {
                let root = dsu.find(run_id(j, k).unwrap());
                open[root] = true;
            }
        }
    }

    let mut label_of_root = vec![0u32; offset[n]];
    let mut next = 0u32;
    let mut labels = vec![0u32; n * n];
    for j in 0..n {
        for k in 0..n {
            if let Some(r) = run_id(j, k) {
                let root = dsu.find(r);
                if !open[root] {
                    continue;
                }
                if label_of_root[root] == 0 {
                    next += 1;
                    label_of_root[root] = next;
                }
                labels[j * n + k] = label_of_root[root];
            }
        }
    }

    let regions = (1..=next).map(|l| classify(&labels, n, l)).collect();
    DeadZoneReport {
        eta,
        source: source.to_string(),
        arcs: Vec::new(),
        simple: next == 1,
        regions,
        labels: Some((n, labels)),
    }
}

fn classify(labels: &[u32], n: usize, label: u32) -> TorusRegion {
    let mut row_count = vec![0usize; n];
    let mut col_count = vec![0usize; n];
    let mut cells = 0;
    for j in 0..n {
        for k in 0..n {
            if labels[j * n + k] == label {
                row_count[j] += 1;
                col_count[k] += 1;
                cells += 1;
            }
        }
    }
    let full_rows: Vec<bool> = row_count.iter().map(|&c| c == n).collect();
    let full_cols: Vec<bool> = col_count.iter().map(|&c| c == n).collect();
    let r = full_rows.iter().filter(|&&b| b).count();
    let c = full_cols.iter().filter(|&&b| b).count();
    let strips = r * n + c * n - r * c;
    let kind = if cells == n * n {
        RegionKind::Full
    } else if strips != cells || (r == 0 && c == 0) {
        RegionKind::Other
    } else if c == 0 {
        RegionKind::Output
    } else if r == 0 {
        RegionKind::Input
    } else {
        RegionKind::InputOutput
    };
    let arcs = |m: &[bool]| cyclic_runs(m).into_iter().filter_map(|run| run_to_arc(run, n)).collect();
    TorusRegion {
        label,
        cells,
        kind,
        source_arcs: arcs(&full_rows),
        target_arcs: arcs(&full_cols),
    }
}

/// Grid phases of a mask, as a convenience for tests and reports.
pub fn mask_phases(mask: &[bool]) -> Vec<f64> {
    let n = mask.len();
    (0..n).filter(|&i| mask[i]).map(|i| grid_phase(i, n)).collect()
}
