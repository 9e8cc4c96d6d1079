//! Normalized compactly supported bump pulse.

use super::ModelError;
use crate::core_math::quadrature::integrate;
use crate::core_math::wrap_signed;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// `P̃(x) = exp(−1/(1−x²))` on `(−1, 1)`, zero elsewhere.
#[inline]
pub fn bump(x: f64) -> f64 {
    let q = 1.0 - x * x;
    if q <= 1e-300 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

/// `∫₋₁¹ P̃(x) dx`.
pub fn bump_integral() -> f64 {
    integrate(&bump, -1.0, 1.0, 1e-14).0
}

/// `P(φ) = a·P̃((φ − c)/b)`, normalized to unit circular mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub center: f64,
    pub half_width: f64,
    /// Normalization constant.
    pub scale: f64,
}

/// Builds the pulse centred at `c` with half-width `b`.
pub fn bump_pulse(c: f64, b: f64) -> Result<PulseSpec, ModelError> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(ModelError::InvalidParameter {
            name: "half_width",
            value: b,
        });
    }
    if 2.0 * b >= TAU {
        return Err(ModelError::WidthTooLarge { half_width: b });
    }
    Ok(PulseSpec {
        center: c,
        half_width: b,
        scale: TAU / (b * bump_integral()),
    })
}

impl PulseSpec {
    /// Support `[c − b, c + b]` (unwrapped).
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    /// Value at a phase; the offset from the centre is taken in `[−π, π)`.
    pub fn at_phase(&self, phi: f64) -> f64 {
        debug_assert!(self.half_width < PI);
        self.scale * bump(wrap_signed(phi - self.center) / self.half_width)
    }

    /// Value at a real argument (no wrapping), e.g. a voltage.
    pub fn at_value(&self, x: f64) -> f64 {
        self.scale * bump((x - self.center) / self.half_width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_math::{circular_mean, PeriodicSample};

    #[test]
    fn bump_integral_matches_reference() {
        // independent composite Simpson on a fine grid
        let n = 200_000;
        let h = 2.0 / n as f64;
        let mut s = 0.0;
        for k in 0..=n {
            let x = -1.0 + k as f64 * h;
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * bump(x);
        }
        s *= h / 3.0;
        assert!((bump_integral() - s).abs() < 1e-12, "{} vs {s}", bump_integral());
        assert!((bump_integral() - 0.443993816168).abs() < 1e-11);
    }

    #[test]
    fn paper_pulse_support_and_mean() {
        let p = bump_pulse(1.0, 0.5).unwrap();
        assert_eq!(p.support(), (0.5, 1.5));
        let s = PeriodicSample::from_fn(2048, |x| p.at_phase(x));
        assert!((circular_mean(&s) - 1.0).abs() < 1e-10);
        for x in [0.0, 0.5, 1.5, 1.6, 3.0, 6.0, -0.2] {
            assert_eq!(p.at_phase(x), 0.0, "x = {x}");
        }
        assert!(p.at_phase(0.51) > 0.0 && p.at_phase(1.49) > 0.0);
    }

    #[test]
    fn width_limits() {
        assert_eq!(bump_pulse(0.0, 3.5).unwrap_err(), ModelError::WidthTooLarge { half_width: 3.5 });
        assert!(bump_pulse(0.0, 0.0).is_err());
        let wide = bump_pulse(2.0, 3.0).unwrap();
        let s = PeriodicSample::from_fn(4096, |x| wide.at_phase(x));
        assert!((circular_mean(&s) - 1.0).abs() < 1e-9);
    }
}
