//! Points and arcs on the circle 𝕋 = ℝ/2πℤ.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Tolerance used when comparing lifted positions of arc extremities.
const EXTREMITY_TOL: f64 = 1e-12;

/// Wraps any real number into the canonical interval `[0, 2π)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps into the symmetric interval `[-π, π)`.
#[inline]
pub fn wrap_signed(x: f64) -> f64 {
    let r = wrap(x + std::f64::consts::PI) - std::f64::consts::PI;
    if r >= std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// A point on the circle, stored as its representative in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phase(f64);

impl Phase {
    pub const ZERO: Phase = Phase(0.0);

    pub fn new(x: f64) -> Self {
        Phase(wrap(x))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Signed distance `other - self` in `[-π, π)`.
    pub fn signed_diff(self, other: Phase) -> f64 {
        wrap_signed(other.0 - self.0)
    }

    /// Geodesic distance on the circle, in `[0, π]`.
    pub fn distance(self, other: Phase) -> f64 {
        self.signed_diff(other).abs()
    }
}

impl From<f64> for Phase {
    fn from(x: f64) -> Self {
        Phase::new(x)
    }
}

impl Add<f64> for Phase {
    type Output = Phase;
    fn add(self, rhs: f64) -> Phase {
        Phase::new(self.0 + rhs)
    }
}

impl Add for Phase {
    type Output = Phase;
    fn add(self, rhs: Phase) -> Phase {
        Phase::new(self.0 + rhs.0)
    }
}

impl Sub for Phase {
    type Output = Phase;
    fn sub(self, rhs: Phase) -> Phase {
        Phase::new(self.0 - rhs.0)
    }
}

impl Sub<f64> for Phase {
    type Output = Phase;
    fn sub(self, rhs: f64) -> Phase {
        Phase::new(self.0 - rhs)
    }
}

impl Neg for Phase {
    type Output = Phase;
    fn neg(self) -> Phase {
        Phase::new(-self.0)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An open arc `(first, first + length)` on 𝕋, traversed counterclockwise.
///
/// An arc of length `2π` is the whole circle minus the point `first`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    first: Phase,
    length: f64,
}

impl Arc {
    /// Builds an arc from its first extremity and length. Lengths are clamped
    /// to `2π`; non-positive lengths yield `None`.
    pub fn new(first: impl Into<Phase>, length: f64) -> Option<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return None;
        }
        Some(Arc {
            first: first.into(),
            length: length.min(TAU),
        })
    }

    /// Arc running counterclockwise from `first` to `last`. Equal endpoints
    /// produce no arc.
    pub fn from_extremities(first: impl Into<Phase>, last: impl Into<Phase>) -> Option<Self> {
        let first = first.into();
        let last = last.into();
        Arc::new(first, wrap(last.value() - first.value()))
    }

    /// The full circle minus the point `first`.
    pub fn full(first: impl Into<Phase>) -> Self {
        Arc {
            first: first.into(),
            length: TAU,
        }
    }

    pub fn first(&self) -> Phase {
        self.first
    }

    pub fn last(&self) -> Phase {
        self.first + self.length
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_full_circle(&self) -> bool {
        self.length >= TAU
    }

    /// Position of `x` measured counterclockwise from the first extremity, in `[0, 2π)`.
    #[inline]
    pub fn offset_of(&self, x: Phase) -> f64 {
        wrap(x.value() - self.first.value())
    }

    /// Open-arc membership.
    pub fn contains(&self, x: impl Into<Phase>) -> bool {
        let d = self.offset_of(x.into());
        d > 0.0 && d < self.length
    }

    /// Membership of the closed arc with slack `tol` at both ends.
    pub fn contains_closed(&self, x: impl Into<Phase>, tol: f64) -> bool {
        let x = x.into();
        let d = self.offset_of(x);
        d <= self.length + tol || d >= TAU - tol
    }

    /// Midpoint of the arc.
    pub fn midpoint(&self) -> Phase {
        self.first + 0.5 * self.length
    }

    /// True when every point of `other` lies in `self` (open arcs).
    pub fn contains_arc(&self, other: &Arc, tol: f64) -> bool {
        if self.is_full_circle() {
            return !other.contains(self.first);
        }
        if other.length > self.length + tol {
            return false;
        }
        let start = self.offset_of(other.first);
        let start = if start > TAU - tol { start - TAU } else { start };
        start >= -tol && start + other.length <= self.length + tol
    }

    /// Shrinks the arc by `margin` at each end.
    pub fn shrink(&self, margin: f64) -> Option<Arc> {
        Arc::new(self.first + margin, self.length - 2.0 * margin)
    }

    /// Translates the arc by `delta`.
    pub fn rotate(&self, delta: f64) -> Arc {
        Arc {
            first: self.first + delta,
            length: self.length,
        }
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.6}, {:.6}) len {:.6}",
            self.first.value(),
            self.last().value(),
            self.length
        )
    }
}

/// Result of intersecting two arcs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub arc: Arc,
    /// The overlap starts at the first extremity of `c1`.
    pub at_first_extremity_of_c1: bool,
    /// The overlap runs up to the last extremity of `c1`.
    pub at_last_extremity_of_c1: bool,
}

/// Intersects `c1` with `c2`.
///
/// The intersection of two arcs has at most two components. The returned
/// component is the one reaching the last extremity of `c1` when there is
/// such a component, otherwise the longest one.
pub fn arc_overlap(c1: &Arc, c2: &Arc) -> Option<Overlap> {
    let components = overlap_components(c1, c2);
    let pick = components
        .iter()
        .find(|(_, hi)| (c1.length - hi).abs() <= EXTREMITY_TOL)
        .or_else(|| {
            components
                .iter()
                .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
        })?;
    let (lo, hi) = *pick;
    let arc = Arc::new(c1.first + lo, hi - lo)?;
    Some(Overlap {
        arc,
        at_first_extremity_of_c1: lo.abs() <= EXTREMITY_TOL,
        at_last_extremity_of_c1: (c1.length - hi).abs() <= EXTREMITY_TOL,
    })
}

/// Intersection components of `c1 ∩ c2` in coordinates lifted to `[0, len c1]`
/// from the first extremity of `c1`.
pub fn overlap_components(c1: &Arc, c2: &Arc) -> Vec<(f64, f64)> {
    let s = c1.offset_of(c2.first);
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(2);
    for lift in [s - TAU, s] {
        let lo = lift.max(0.0);
        let hi = (lift + c2.length).min(c1.length);
        if hi - lo > EXTREMITY_TOL {
            out.push((lo, hi));
        }
    }
    // Two arcs of total length > 2π can produce components that meet at a
    // point which is not in either open arc; they stay separate.
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn arc(a: f64, l: f64) -> Arc {
        Arc::new(a, l).unwrap()
    }

    #[test]
    fn phase_wraps_into_canonical_range() {
        assert_eq!(Phase::new(TAU).value(), 0.0);
        assert!((Phase::new(-0.5).value() - (TAU - 0.5)).abs() < 1e-15);
        assert_eq!(Phase::new(-1e-18).value(), 0.0);
        let p = Phase::new(3.0) + 4.0;
        assert!(p.value() >= 0.0 && p.value() < TAU);
    }

    #[test]
    fn overlap_simple_interval() {
        let o = arc_overlap(&arc(0.0, PI), &arc(PI / 2.0, PI)).unwrap();
        assert!((o.arc.first().value() - PI / 2.0).abs() < 1e-12);
        assert!((o.arc.length() - PI / 2.0).abs() < 1e-12);
        assert!(o.at_last_extremity_of_c1);
        assert!(!o.at_first_extremity_of_c1);
    }

    #[test]
    fn overlap_disjoint_is_none() {
        assert!(arc_overlap(&arc(0.0, PI / 2.0), &arc(PI, PI / 2.0)).is_none());
    }

    #[test]
    fn overlap_wraps_around_seam() {
        let c1 = Arc::from_extremities(1.5 * PI, 0.5 * PI).unwrap();
        let c2 = Arc::from_extremities(1.75 * PI, 0.25 * PI).unwrap();
        let o = arc_overlap(&c1, &c2).unwrap();
        assert!((o.arc.first().value() - 1.75 * PI).abs() < 1e-12);
        assert!((o.arc.last().value() - 0.25 * PI).abs() < 1e-12);
        assert!(!o.at_last_extremity_of_c1);

        // Brute-force membership scan over 10⁴ grid points.
        let n = 10_000;
        for i in 0..n {
            let x = TAU * (i as f64 + 0.5) / n as f64;
            let both = c1.contains(x) && c2.contains(x);
            assert_eq!(both, o.arc.contains(x), "x = {x}");
        }
    }

    #[test]
    fn full_circle_arc_excludes_only_its_first_extremity() {
        let a = Arc::full(1.0);
        assert!(a.is_full_circle());
        assert!(!a.contains(1.0));
        assert!(a.contains(1.0 + 1e-9));
        assert!(a.contains(0.999));
    }

    #[test]
    fn contains_arc_handles_wrap() {
        let big = Arc::from_extremities(5.0, 2.0).unwrap();
        assert!(big.contains_arc(&Arc::from_extremities(6.0, 0.5).unwrap(), 1e-12));
        assert!(!big.contains_arc(&Arc::from_extremities(1.5, 2.5).unwrap(), 1e-12));
    }

    /// Lift-based membership: x ∈ (a, a+l) iff some lift x' = x + 2πk has a < x' < a + l.
    fn lifted_member(a: f64, l: f64, x: f64) -> bool {
        (-2..=2).any(|k| {
            let xl = x + TAU * k as f64;
            a < xl && xl < a + l
        })
    }

    proptest! {
        #[test]
        fn membership_matches_lift(a in 0.0..TAU, l in 1e-3..TAU, x in -10.0f64..10.0) {
            let c = arc(a, l);
            let xw = wrap(x);
            // stay away from extremities where rounding decides
            prop_assume!((xw - a).abs() > 1e-9 && (wrap(a + l) - xw).abs() > 1e-9);
            prop_assert_eq!(c.contains(x), lifted_member(a, l, xw));
        }

        #[test]
        fn overlap_no_longer_than_inputs(a in 0.0..TAU, l1 in 1e-3..TAU, b in 0.0..TAU, l2 in 1e-3..TAU) {
            if let Some(o) = arc_overlap(&arc(a, l1), &arc(b, l2)) {
                prop_assert!(o.arc.length() <= l1.min(l2) + 1e-12);
            }
        }
    }
}
