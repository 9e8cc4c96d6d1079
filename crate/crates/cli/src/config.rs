//! Run configuration: strict TOML with range-checked fields.

use phasekit::models::{FhnParams, TimeScale};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub coupling: CouplingSection,
    pub numerics: NumericsSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// Only `fhn` is built in.
    pub name: String,
    pub time_scale: TimeScale,
    /// Starting state for the search for the attracting cycle.
    pub initial: [f64; 2],
    pub params: FhnParams,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            name: "fhn".into(),
            time_scale: TimeScale::Slow,
            initial: [0.0, -0.6],
            params: FhnParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingChoice {
    /// `g = (max(0, v_j)·max(0, v_k), 0)`.
    Product,
    /// `g = (P(·), 0)` with a bump pulse read from the source.
    Pulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseInput {
    /// The pulse reads the source phase.
    Phase,
    /// The pulse reads the source `v`.
    State,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSection {
    pub kind: CouplingChoice,
    pub eps: f64,
    pub pulse_center: f64,
    pub pulse_half_width: f64,
    pub pulse_input: PulseInput,
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection {
            kind: CouplingChoice::Product,
            eps: 0.04,
            pulse_center: 1.0,
            pulse_half_width: 0.5,
            pulse_input: PulseInput::Phase,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub grid: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub warmup: f64,
    pub prc_max_periods: usize,
    pub prc_tol: f64,
    pub ensemble_rel_tol: f64,
    pub ensemble_abs_tol: f64,
    pub ensemble_size: usize,
    pub t_final: f64,
    pub sample_dt: f64,
    pub fourier_order: usize,
    /// Approximate dead zones use η = eta_rel·max|f|.
    pub eta_rel: f64,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            grid: 2048,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            warmup: 200.0,
            prc_max_periods: 50,
            prc_tol: 1e-9,
            ensemble_rel_tol: 1e-8,
            ensemble_abs_tol: 1e-10,
            ensemble_size: 100,
            t_final: 500.0,
            sample_dt: 0.05,
            fourier_order: 10,
            eta_rel: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Write the sampled torus `gpr.csv` in `reduce`.
    pub gpr: bool,
    /// Keep every n-th time sample in `ensemble.csv`.
    pub csv_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            gpr: false,
            csv_stride: 1,
        }
    }
}

fn check(ok: bool, key: &'static str, reason: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Invalid { key, reason: reason() })
    }
}

fn positive(x: f64, key: &'static str) -> Result<(), ConfigError> {
    check(x.is_finite() && x > 0.0, key, || format!("must be positive and finite, got {x}"))
}

fn tolerance(x: f64, key: &'static str) -> Result<(), ConfigError> {
    check(x.is_finite() && x > 0.0 && x <= 1e-2, key, || format!("must lie in (0, 1e-2], got {x}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        check(m.name == "fhn", "model.name", || format!("unknown model `{}` (expected `fhn`)", m.name))?;
        check(m.initial.iter().all(|x| x.is_finite()), "model.initial", || "must be finite".into())?;
        let p = &m.params;
        positive(p.mu, "model.params.mu")?;
        check(p.mu <= 1.0, "model.params.mu", || format!("must be at most 1, got {}", p.mu))?;
        for (key, v) in [("model.params.a", p.a), ("model.params.b", p.b), ("model.params.i", p.i)] {
            check(v.is_finite(), key, || format!("must be finite, got {v}"))?;
        }

        let c = &self.coupling;
        check(c.eps.is_finite() && c.eps.abs() <= 1.0, "coupling.eps", || {
            format!("must satisfy |eps| ≤ 1, got {}", c.eps)
        })?;
        check(c.pulse_center.is_finite(), "coupling.pulse_center", || "must be finite".into())?;
        check(
            c.pulse_half_width.is_finite() && c.pulse_half_width > 0.0 && c.pulse_half_width < std::f64::consts::PI,
            "coupling.pulse_half_width",
            || format!("must lie in (0, π), got {}", c.pulse_half_width),
        )?;

        let n = &self.numerics;
        check((16..=1 << 16).contains(&n.grid), "numerics.grid", || {
            format!("must lie in [16, 65536], got {}", n.grid)
        })?;
        tolerance(n.rel_tol, "numerics.rel_tol")?;
        tolerance(n.abs_tol, "numerics.abs_tol")?;
        tolerance(n.prc_tol, "numerics.prc_tol")?;
        tolerance(n.ensemble_rel_tol, "numerics.ensemble_rel_tol")?;
        tolerance(n.ensemble_abs_tol, "numerics.ensemble_abs_tol")?;
        check(n.warmup.is_finite() && n.warmup >= 0.0, "numerics.warmup", || {
            format!("must be non-negative, got {}", n.warmup)
        })?;
        check((1..=10_000).contains(&n.prc_max_periods), "numerics.prc_max_periods", || {
            format!("must lie in [1, 10000], got {}", n.prc_max_periods)
        })?;
        check((2..=10_000).contains(&n.ensemble_size), "numerics.ensemble_size", || {
            format!("must lie in [2, 10000], got {}", n.ensemble_size)
        })?;
        positive(n.t_final, "numerics.t_final")?;
        positive(n.sample_dt, "numerics.sample_dt")?;
        check(n.sample_dt <= n.t_final, "numerics.sample_dt", || "must not exceed t_final".into())?;
        check(n.t_final / n.sample_dt <= 1e7, "numerics.sample_dt", || "too many samples (> 1e7)".into())?;
        check(n.fourier_order >= 1 && 2 * n.fourier_order < n.grid, "numerics.fourier_order", || {
            format!("must satisfy 1 ≤ K < grid/2, got {}", n.fourier_order)
        })?;
        check((0.0..=1.0).contains(&n.eta_rel), "numerics.eta_rel", || {
            format!("must lie in [0, 1], got {}", n.eta_rel)
        })?;

        check(self.output.csv_stride >= 1, "output.csv_stride", || "must be at least 1".into())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.model.params.mu = 0.02;
        c.coupling.kind = CouplingChoice::Pulse;
        c.numerics.grid = 512;
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), c.to_toml());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::from_toml("[numerics]\ngird = 10\n").unwrap_err();
        assert!(e.to_string().contains("gird"), "{e}");
        let e = RunConfig::from_toml("[model.params]\nnu = 0.1\n").unwrap_err();
        assert!(e.to_string().contains("nu"), "{e}");
    }

    #[test]
    fn ranges_name_the_key() {
        for (text, key) in [
            ("[numerics]\ngrid = 4\n", "numerics.grid"),
            ("[model.params]\nmu = -1.0\n", "model.params.mu"),
            ("[coupling]\neps = 2.0\n", "coupling.eps"),
            ("[numerics]\nsample_dt = 0.0\n", "numerics.sample_dt"),
            ("[model]\nname = \"vdp\"\n", "model.name"),
        ] {
            match RunConfig::from_toml(text) {
                Err(ConfigError::Invalid { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
