//! Numerical checks of the sufficient conditions for dead zones of h.

use super::{detect_circle, detect_circle_exact, exact_eta};
use crate::core_math::{arc_overlap, grid_phase, maximal_zero_arcs, Arc, PeriodicSample};
use crate::limit_cycle::SingularCycle;
use crate::models::PulseSpec;
use crate::reduction::{cross_correlation, h_from_factors, TorusSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

fn longest_zero_arc(f: &PeriodicSample) -> f64 {
    maximal_zero_arcs(f, exact_eta(f)).iter().map(Arc::length).fold(0.0, f64::max)
}

/// Outcome of the arc-length bound for a separable pair `(Ẑ, ĝ^in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomCheck {
    pub l1: f64,
    pub l2: f64,
    /// `L1 + L2 − 2π`.
    pub predicted_min_length: f64,
    pub precondition_met: bool,
    pub detected_arcs: Vec<Arc>,
    pub longest_detected: f64,
    /// Grid slack subtracted from the bound (two cells).
    pub slack: f64,
    /// `None` when the precondition fails: no claim is made.
    pub holds: Option<bool>,
}

/// Measures the longest zero arcs of both factors and, when they exceed 2π
/// together, checks the dead zone of their cross-correlation.
pub fn check_prop_geom(zhat: &PeriodicSample, gin: &PeriodicSample) -> GeomCheck {
    let n = zhat.len();
    let (l1, l2) = (longest_zero_arc(zhat), longest_zero_arc(gin));
    let bound = l1 + l2 - TAU;
    let slack = 2.0 * TAU / n as f64;
    let h = cross_correlation(zhat, gin).expect("factors share a grid");
    let report = detect_circle_exact(&h, "h");
    let longest = report.arcs.iter().map(Arc::length).fold(0.0, f64::max);
    let met = bound > 0.0;
    GeomCheck {
        l1,
        l2,
        predicted_min_length: bound,
        precondition_met: met,
        detected_arcs: report.arcs,
        longest_detected: longest,
        slack,
        holds: met.then_some(longest >= bound - slack),
    }
}

/// Piecewise-smooth sample that vanishes on the closed arc `[start, start + len]`
/// and is a random nonvanishing smooth profile elsewhere.
pub fn random_zero_arc_sample(rng: &mut impl Rng, n: usize, start: f64, len: f64) -> PeriodicSample {
    let gap = TAU - len;
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let amp: f64 = rng.random_range(0.2..3.0);
    let harmonics: Vec<(f64, f64)> = (1..=3)
        .map(|_| (rng.random_range(-0.25..0.25), rng.random_range(0.0..TAU)))
        .collect();
    PeriodicSample::from_fn(n, |x| {
        let off = crate::core_math::wrap(x - start);
        if off <= len {
            return 0.0;
        }
        let t = (off - len) / gap;
        let envelope = (std::f64::consts::PI * t).sin();
        let wobble: f64 = harmonics
            .iter()
            .enumerate()
            .map(|(k, (a, p))| a * ((k + 1) as f64 * x + p).sin())
            .sum();
        sign * amp * envelope * (1.0 + wobble)
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeomSuite {
    pub seed: u64,
    pub cases: Vec<GeomCheck>,
    /// Cases with `L1 + L2 > 2π` that satisfied the bound.
    pub passed: usize,
    /// Cases with `L1 + L2 > 2π` that violated it.
    pub failed: usize,
    /// Cases reported as precondition-unmet.
    pub unmet: usize,
    /// Cases drawn with `L1 + L2 ≤ 2π` that were nevertheless given a claim.
    pub false_claims: usize,
}

impl GeomSuite {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.false_claims == 0
    }
}

/// `met` randomized constructions with `L1 + L2 > 2π` and `unmet` with
/// `L1 + L2 ≤ 2π`, all from `seed`.
pub fn run_prop_geom_suite(seed: u64, met: usize, unmet: usize, n: usize) -> GeomSuite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = TAU / n as f64;
    let mut cases = Vec::with_capacity(met + unmet);
    let mut false_claims = 0;
    for case in 0..met + unmet {
        let want_met = case < met;
        let l1: f64 = rng.random_range(0.3..TAU - 0.3);
        let l2: f64 = if want_met {
            rng.random_range((TAU - l1 + 4.0 * cell).min(TAU - 0.2)..TAU - 0.1)
        } else {
            rng.random_range(0.1..(TAU - l1 - 4.0 * cell).max(0.11))
        };
        let (s1, s2) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
        let zhat = random_zero_arc_sample(&mut rng, n, s1, l1);
        let gin = random_zero_arc_sample(&mut rng, n, s2, l2);
        let check = check_prop_geom(&zhat, &gin);
        if !want_met && check.holds.is_some() {
            false_claims += 1;
        }
        cases.push(check);
    }
    GeomSuite {
        seed,
        passed: cases.iter().filter(|c| c.holds == Some(true)).count(),
        failed: cases.iter().filter(|c| c.holds == Some(false)).count(),
        unmet: cases.iter().filter(|c| c.holds.is_none()).count(),
        false_claims,
        cases,
    }
}

/// Per-component verdict of the overlap hypothesis at offset α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentOverlap {
    /// `N(Ẑ_ℓ∘ρ_α) ∪ N(ĝ^in_ℓ)` covers the grid.
    pub covers: bool,
    /// Every zero arc of `Ẑ_ℓ∘ρ_α` overlaps a zero arc of `ĝ^in_ℓ` at its last extremity.
    pub overlap_at_last: bool,
    pub zhat_arcs: Vec<Arc>,
    pub gin_arcs: Vec<Arc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapCheck {
    /// α rounded to the grid.
    pub alpha: f64,
    pub components: Vec<ComponentOverlap>,
    pub hypothesis: bool,
    /// h vanishes at α and at the next grid phase.
    pub h_zero_from_alpha: bool,
    /// Detected dead-zone arc of h whose closure contains α.
    pub dz_arc: Option<Arc>,
    /// `None` when the hypothesis fails.
    pub conclusion: Option<bool>,
}

/// Checks the overlapping-arcs condition component by component and, when it
/// holds, that the dead zone of h contains an arc starting at α.
pub fn check_prop_overlap(zhat: &[PeriodicSample], gin: &[PeriodicSample], alpha: f64) -> OverlapCheck {
    assert_eq!(zhat.len(), gin.len(), "component counts differ");
    let n = zhat[0].len();
    let ai = ((crate::core_math::wrap(alpha) / TAU * n as f64).round() as usize) % n;
    let components: Vec<ComponentOverlap> = zhat
        .iter()
        .zip(gin)
        .map(|(z, g)| {
            let shifted = z.rotate(ai as isize);
            let (tz, tg) = (exact_eta(z), exact_eta(g));
            let zero_z = |i: usize| shifted.values()[i].abs() <= tz;
            let zero_g = |i: usize| g.values()[i].abs() <= tg;
            let covers = (0..n).all(|i| zero_z(i) || zero_g(i));
            let zhat_arcs = maximal_zero_arcs(&shifted, tz);
            let gin_arcs = maximal_zero_arcs(g, tg);
            let all_z = (0..n).all(zero_z);
            let all_g = (0..n).all(zero_g);
            let overlap_at_last = all_z
                || all_g
                || (!zhat_arcs.is_empty()
                    && zhat_arcs.iter().all(|c1| {
                        c1.is_full_circle()
                            || gin_arcs
                                .iter()
                                .any(|c2| arc_overlap(c1, c2).is_some_and(|o| o.at_last_extremity_of_c1))
                    }));
            ComponentOverlap {
                covers,
                overlap_at_last,
                zhat_arcs,
                gin_arcs,
            }
        })
        .collect();
    let hypothesis = components.iter().all(|c| c.covers && c.overlap_at_last);
    let h = h_from_factors(zhat, gin).expect("factors share a grid").h;
    let tol = exact_eta(&h).max(f64::MIN_POSITIVE);
    let hv = h.values();
    let h_zero_from_alpha = hv[ai].abs() <= tol && hv[(ai + 1) % n].abs() <= tol;
    let a = grid_phase(ai, n);
    let dz_arc = detect_circle(&h, tol, "h").arc_containing(a, 1e-12).copied();
    OverlapCheck {
        alpha: a,
        components,
        hypothesis,
        h_zero_from_alpha,
        dz_arc,
        conclusion: hypothesis.then_some(h_zero_from_alpha),
    }
}

/// Offsets ϑ (grid indices) for which no `s` has both `s` and `s + ϑ` live.
pub fn dead_offsets(live: &[bool]) -> Vec<bool> {
    let n = live.len();
    let idx: Vec<usize> = (0..n).filter(|&i| live[i]).collect();
    (0..n)
        .map(|m| idx.iter().all(|&s| !live[(s + m) % n]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Res1Check {
    /// Every band point with offset in A is a zero of every component.
    pub band_zero: bool,
    /// Grid offsets inside A.
    pub offsets: usize,
    /// h = 0 on A, evaluated when `band_zero` holds.
    pub h_zero_on_arc: Option<bool>,
}

/// Band condition `{(s, s + ϑ) : ϑ ∈ A} ⊂ ⋂ N(ĥ_ℓ)`; when it holds, confirms
/// that the averaged interaction vanishes on A.
pub fn check_prop_res1(components: &[TorusSample], a: &Arc) -> Res1Check {
    let n = components[0].len();
    let offsets: Vec<usize> = (0..n).filter(|&m| a.contains(grid_phase(m, n))).collect();
    let band_zero = offsets
        .iter()
        .all(|&m| (0..n).all(|s| components.iter().all(|c| c.get(s, s + m) == 0.0)));
    let h_zero_on_arc = band_zero.then(|| {
        offsets.iter().all(|&m| {
            let v: f64 = components.iter().map(|c| (0..n).map(|s| c.get(s, s + m)).sum::<f64>()).sum();
            v == 0.0
        })
    });
    Res1Check {
        band_zero,
        offsets: offsets.len(),
        h_zero_on_arc,
    }
}

/// Precondition for a dead zone in the branch-localized case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeadBranchCheck {
    /// Fraction of the singular period spent on the coupled branch.
    pub alpha: f64,
    pub dead_fraction: f64,
    /// `0 < α < 1/2`.
    pub holds: bool,
}

/// α is the residence fraction on the branch where coupling is active
/// (`coupled_side` gives its sign of v).
pub fn check_prop_dead_branch(singular: &SingularCycle, coupled_side: f64) -> DeadBranchCheck {
    let f = singular.fractions();
    let alpha: f64 = singular
        .branches
        .iter()
        .zip(&f)
        .filter(|(b, _)| b.side() * coupled_side > 0.0)
        .map(|(_, x)| x)
        .sum();
    DeadBranchCheck {
        alpha,
        dead_fraction: 1.0 - alpha,
        holds: alpha > 0.0 && alpha < 0.5,
    }
}

/// Offsets ϑ for which `supp P + ϑ` lies inside a branch arc shrunk by `margin`.
pub fn pulse_windows(pulse: &PulseSpec, branches: &[Arc], margin: f64) -> Vec<Arc> {
    let (a, b) = pulse.support();
    branches
        .iter()
        .filter_map(|c| {
            let c = c.shrink(margin)?;
            Arc::new(c.first().value() - a, c.length() - (b - a))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaCheck {
    pub windows: Vec<Arc>,
    /// sup |h| over the grid points of the windows.
    pub sup_h_window: f64,
    /// max |Z| over the shrunk branch arcs.
    pub max_z_branch: f64,
    /// Discrete circular mean of the pulse.
    pub pulse_mean: f64,
    pub eta: f64,
    /// `max_z_branch ≤ η`.
    pub hypothesis: bool,
    /// `sup_h_window ≤ η`.
    pub conclusion: bool,
    /// `sup_h_window ≤ max_z_branch · pulse_mean`.
    pub chain_holds: bool,
}

/// Grid-level form of the narrow-pulse argument: over every offset window,
/// `|h| ≤ max_branch |Z| · mean P`, hence `≤ η` once the PRC is below η.
pub fn check_prop_eta(z: &PeriodicSample, pulse: &PulseSpec, branches: &[Arc], margin: f64, eta: f64) -> EtaCheck {
    let n = z.len();
    let p = PeriodicSample::from_fn(n, |x| pulse.at_phase(x));
    let h = cross_correlation(z, &p).expect("same grid");
    let windows = pulse_windows(pulse, branches, margin);
    let sup_h_window = (0..n)
        .filter(|&i| windows.iter().any(|w| w.contains(grid_phase(i, n))))
        .map(|i| h.values()[i].abs())
        .fold(0.0, f64::max);
    let shrunk: Vec<Arc> = branches.iter().filter_map(|c| c.shrink(margin)).collect();
    let max_z_branch = (0..n)
        .filter(|&i| shrunk.iter().any(|c| c.contains_closed(grid_phase(i, n), 1e-12)))
        .map(|i| z.values()[i].abs())
        .fold(0.0, f64::max);
    let pulse_mean = crate::core_math::circular_mean(&p);
    EtaCheck {
        sup_h_window,
        max_z_branch,
        pulse_mean,
        eta,
        hypothesis: max_z_branch <= eta,
        conclusion: sup_h_window <= eta,
        chain_holds: sup_h_window <= max_z_branch * pulse_mean * (1.0 + 1e-12) + 1e-300,
        windows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_math::circular_mean;
    use std::f64::consts::PI;

    #[test]
    fn three_quarter_arcs_give_half_circle() {
        let n = 512;
        let z = PeriodicSample::from_fn(n, |x| if x < 1.5 * PI { 0.0 } else { (4.0 * (x - 1.5 * PI)).sin() });
        let g = PeriodicSample::from_fn(n, |x| if x > 0.5 * PI { 0.0 } else { -(2.0 * x).sin() });
        let c = check_prop_geom(&z, &g);
        assert!(c.precondition_met);
        assert!((c.predicted_min_length - PI).abs() < 3.0 * TAU / n as f64);
        assert_eq!(c.holds, Some(true));
        assert!(c.longest_detected >= PI - c.slack);
    }

    #[test]
    fn half_arcs_make_no_claim() {
        let n = 512;
        let z = PeriodicSample::from_fn(n, |x| x.sin().max(0.0));
        let g = PeriodicSample::from_fn(n, |x| (-x.sin()).max(0.0));
        let c = check_prop_geom(&z, &g);
        assert!(!c.precondition_met);
        assert_eq!(c.holds, None);
    }

    #[test]
    fn randomized_suite_has_no_counterexample() {
        let s = run_prop_geom_suite(7, 100, 20, 512);
        assert_eq!(s.passed, 100, "{:?}", s.cases.iter().filter(|c| c.holds == Some(false)).collect::<Vec<_>>());
        assert!(s.ok() && s.unmet == 20);
    }

    #[test]
    fn random_samples_have_requested_zero_arc() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_zero_arc_sample(&mut rng, 1024, 2.0, 3.0);
        assert!((longest_zero_arc(&f) - 3.0).abs() <= 2.0 * TAU / 1024.0);
    }

    #[test]
    fn single_component_overlap_matches_geometry() {
        let n = 512;
        let z = PeriodicSample::from_fn(n, |x| if x < 1.5 * PI { 0.0 } else { 1.0 + x.cos() * 0.1 });
        let g = PeriodicSample::from_fn(n, |x| if x > 0.5 * PI { 0.0 } else { 1.0 });
        let geom = check_prop_geom(&z, &g);
        let dz = geom.detected_arcs.iter().max_by(|a, b| a.length().total_cmp(&b.length())).unwrap();
        // α inside the dead zone but away from its end: overlap hypothesis holds
        let alpha = dz.first().value() + 0.25 * dz.length();
        let o = check_prop_overlap(&[z.clone()], &[g.clone()], alpha);
        assert!(o.hypothesis && o.conclusion == Some(true), "{o:?}");
        // outside the dead zone neither the covering nor the claim holds
        let o = check_prop_overlap(&[z], &[g], dz.midpoint().value() + PI);
        assert!(!o.hypothesis && o.conclusion.is_none());
    }

    #[test]
    fn disjoint_zero_arcs_make_no_claim() {
        let n = 256;
        let z = PeriodicSample::from_fn(n, |x| x.sin().max(0.0));
        let g = PeriodicSample::from_fn(n, |x| x.sin().max(0.0));
        let o = check_prop_overlap(&[z], &[g], 0.0);
        assert!(!o.hypothesis && o.conclusion.is_none());
    }

    #[test]
    fn two_component_construction_at_quarter_pi() {
        let n = 512;
        let alpha = PI / 4.0;
        // component 1 (shifted by α) vanishes on (0, 3π/2); its input vanishes on (π, 2π + 0.3)
        let z1 = PeriodicSample::from_fn(n, |x| {
            let y = crate::core_math::wrap(x - alpha);
            if y <= 1.5 * PI { 0.0 } else { 1.0 + 0.2 * x.sin() }
        });
        let g1 = PeriodicSample::from_fn(n, |x| if x >= PI || x <= 0.3 { 0.0 } else { 0.5 + 0.1 * x.cos() });
        // component 2: input vanishes everywhere but (2, 2.5), response shifted vanishes around it
        let z2 = PeriodicSample::from_fn(n, |x| {
            let y = crate::core_math::wrap(x - alpha);
            if (1.5..3.0).contains(&y) { 0.0 } else { -1.0 }
        });
        let g2 = PeriodicSample::from_fn(n, |x| if (2.0..2.5).contains(&x) { 1.0 } else { 0.0 });
        let o = check_prop_overlap(&[z1.clone(), z2.clone()], &[g1.clone(), g2.clone()], alpha);
        assert!(o.hypothesis, "{o:?}");
        assert_eq!(o.conclusion, Some(true));
        let arc = o.dz_arc.expect("dead zone at α");
        assert!(arc.length() > 0.1);
        // oracle: direct h on the construction
        let h = h_from_factors(&[z1, z2], &[g1, g2]).unwrap().h;
        let ai = (alpha / TAU * n as f64).round() as usize;
        assert!((0..10).all(|k| h.values()[ai + k] == 0.0));
    }

    #[test]
    fn band_condition_examples() {
        let n = 64;
        let zero = TorusSample::zeros(n);
        let any = Arc::new(0.3, 4.0).unwrap();
        let r = check_prop_res1(&[zero.clone(), zero.clone()], &any);
        assert!(r.band_zero && r.h_zero_on_arc == Some(true));
        let bump = TorusSample::from_fn(n, |j, k| if j == 3 && k == 3 + 10 { 1.0 } else { 0.0 });
        let arc = Arc::new(grid_phase(8, n), grid_phase(4, n)).unwrap();
        let r = check_prop_res1(&[zero, bump], &arc);
        assert!(!r.band_zero && r.h_zero_on_arc.is_none());
    }

    #[test]
    fn dead_offsets_of_short_live_arc() {
        let n = 100;
        let live: Vec<bool> = (0..n).map(|i| i < 30).collect();
        let dead = dead_offsets(&live);
        // offsets 30..=70 separate any two live points
        for (m, d) in dead.iter().enumerate() {
            assert_eq!(*d, (30..=70).contains(&m), "m = {m}");
        }
    }

    #[test]
    fn narrow_pulse_chain_on_synthetic_prc() {
        let n = 1024;
        let pulse = crate::models::bump_pulse(1.0, 0.5).unwrap();
        // small on (0.3, 2.8) and (3.4, 6.0), large elsewhere
        let branches = [Arc::new(0.3, 2.5).unwrap(), Arc::new(3.4, 2.6).unwrap()];
        let z = PeriodicSample::from_fn(n, |x| if branches.iter().any(|b| b.contains(x)) { 1e-3 * x.sin() } else { 5.0 });
        let c = check_prop_eta(&z, &pulse, &branches, 0.1, 2e-3);
        assert_eq!(c.windows.len(), 2);
        assert!(c.hypothesis && c.conclusion && c.chain_holds, "{c:?}");
        assert!((c.pulse_mean - 1.0).abs() < 1e-10);
        assert!((circular_mean(&PeriodicSample::from_fn(n, |x| pulse.at_phase(x))) - 1.0).abs() < 1e-10);
        // pulse wider than every branch: no window
        let wide = crate::models::bump_pulse(1.0, 1.5).unwrap();
        assert!(pulse_windows(&wide, &branches, 0.1).is_empty());
    }
}
