//! Staged commands with file handoffs: cycle → prc → reduce → deadzone.

use crate::config::{ConfigError, CouplingChoice, PulseInput, RunConfig};
use phasekit::core_math::{samples_from_csv, samples_to_csv, wrap, Arc, PeriodicSample};
use phasekit::deadzone::{detect_circle, detect_circle_exact, exact_eta, DeadZoneReport};
use phasekit::limit_cycle::{
    find_limit_cycle, singular_residence, Anchor, CycleOptions, GeometricPhaseTable, LimitCycle, SectionSpec,
    SingularCycle, DEFAULT_CENTER,
};
use phasekit::models::{bump_pulse, fhn_pair_product, fhn_pair_pulsatile, CouplingSpec, Fhn, PairField, PulseSource};
use phasekit::ode::{StepOptions, Tolerance};
use phasekit::prc::{compute_prc, PhaseResponseCurve, PrcDiagnostics, PrcOptions};
use phasekit::reduction::{build_gpr, fourier_truncate, reduce, InteractionFunction};
use phasekit::sim::{
    arc_symmetric_difference, compare_with_reduction, distance_to_arc, moves_toward, run_ensemble, CompareOptions,
    DriftComparison, EnsembleOptions,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc as Shared;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("stage `{stage}` has not been run: missing `{}`", path.display())]
    MissingStage { stage: &'static str, path: PathBuf },
    #[error("artifact of stage `{stage}` does not match the config: {reason}; rerun `{stage}`")]
    Stale { stage: &'static str, reason: String },
    #[error("malformed artifact `{}`: {reason}", path.display())]
    Artifact { path: PathBuf, reason: String },
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("i/o error on `{}`: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn stage_err(stage: &'static str) -> impl Fn(String) -> PipelineError {
    move |message| PipelineError::Stage { stage, message }
}

pub const CYCLE_JSON: &str = "cycle.json";
pub const CYCLE_CSV: &str = "cycle.csv";
pub const PRC_CSV: &str = "prc.csv";
pub const PRC_JSON: &str = "prc.json";
pub const H_CSV: &str = "h.csv";
pub const MANIFEST: &str = "manifest.json";

/// Cycle handoff: everything needed to regenerate the sampled orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleArtifact {
    pub model: crate::config::ModelSection,
    pub grid: usize,
    pub period: f64,
    pub omega: f64,
    pub returns: usize,
    pub anchor: Anchor,
    pub derivative_consistency: f64,
    pub singular: Option<SingularCycle>,
    pub residence_fractions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrcArtifact {
    pub grid: usize,
    pub diagnostics: PrcDiagnostics,
    pub normalization_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub tool_version: String,
    pub core_version: String,
    pub seed: u64,
    pub config_sha256: String,
    /// Digest of the config and every input digest.
    pub inputs_sha256: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Manifest {
    pub stages: BTreeMap<String, StageRecord>,
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One command invocation: resolved config, output directory and the files
/// read and written so far.
pub struct Pipeline {
    pub cfg: RunConfig,
    pub seed: u64,
    pub quiet: bool,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    started: Instant,
}

impl Pipeline {
    pub fn new(cfg: RunConfig, seed: u64, quiet: bool) -> Result<Self, PipelineError> {
        cfg.validate()?;
        let out = cfg.output.dir.clone();
        std::fs::create_dir_all(&out).map_err(|source| PipelineError::Io { path: out, source })?;
        Ok(Pipeline {
            cfg,
            seed,
            quiet,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.cfg.output.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir().join(name)
    }

    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("[phasekit] {}", msg.as_ref());
        }
    }

    /// Reads an artifact produced by `stage`, recording it as an input.
    fn read(&mut self, path: &Path, stage: &'static str) -> Result<String, PipelineError> {
        if !path.exists() {
            return Err(PipelineError::MissingStage {
                stage,
                path: path.to_path_buf(),
            });
        }
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha_hex(text.as_bytes()),
            bytes: text.len() as u64,
        });
        Ok(text)
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<PathBuf, PipelineError> {
        let path = self.path(name);
        std::fs::write(&path, content).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        self.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha_hex(content.as_bytes()),
            bytes: content.len() as u64,
        });
        self.info(format!("wrote {}", path.display()));
        Ok(path)
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf, PipelineError> {
        let mut text = serde_json::to_string_pretty(value).expect("json serializes");
        text.push('\n');
        self.write(name, &text)
    }

    /// Writes the config echo and merges this command into `manifest.json`.
    pub fn finish(mut self, command: &str) -> Result<StageRecord, PipelineError> {
        let config = self.cfg.to_toml();
        self.write("config.toml", &config)?;
        let mut hasher = Sha256::new();
        hasher.update(config.as_bytes());
        for f in &self.inputs {
            hasher.update(f.sha256.as_bytes());
        }
        let record = StageRecord {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            core_version: phasekit::VERSION.into(),
            seed: self.seed,
            config_sha256: sha_hex(config.as_bytes()),
            inputs_sha256: hex::encode(hasher.finalize()),
            inputs: std::mem::take(&mut self.inputs),
            outputs: std::mem::take(&mut self.outputs),
            elapsed_ms: self.started.elapsed().as_millis() as u64,
        };
        let path = self.path(MANIFEST);
        let mut manifest: Manifest = match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| PipelineError::Artifact {
                path: path.clone(),
                reason: e.to_string(),
            })?,
            Err(_) => Manifest::default(),
        };
        manifest.stages.insert(command.to_string(), record.clone());
        let mut text = serde_json::to_string_pretty(&manifest).expect("json serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| PipelineError::Io { path, source })?;
        Ok(record)
    }

    fn precise_step(&self) -> StepOptions {
        StepOptions::with_tol(Tolerance::new(self.cfg.numerics.rel_tol, self.cfg.numerics.abs_tol))
    }

    pub fn field(&self) -> Fhn {
        Fhn::new(self.cfg.model.params, self.cfg.model.time_scale)
    }

    /// Rate factor between the written field and the integrated one.
    pub fn kappa(&self) -> f64 {
        self.cfg.model.time_scale.rate(self.cfg.model.params.mu)
    }

    pub fn coupling(&self) -> Result<CouplingSpec, PipelineError> {
        let c = &self.cfg.coupling;
        Ok(match c.kind {
            CouplingChoice::Product => CouplingSpec::fhn_product(),
            CouplingChoice::Pulse => {
                let pulse = bump_pulse(c.pulse_center, c.pulse_half_width)
                    .map_err(|e| stage_err("reduce")(e.to_string()))?;
                CouplingSpec::fhn_pulse(pulse, self.pulse_source())
            }
        })
    }

    fn pulse_source(&self) -> PulseSource {
        match self.cfg.coupling.pulse_input {
            PulseInput::Phase => PulseSource::Phase,
            PulseInput::State => PulseSource::State { component: 0 },
        }
    }

    // ---- limit-cycle ------------------------------------------------------

    pub fn limit_cycle(&mut self) -> Result<CycleArtifact, PipelineError> {
        let vf = self.field();
        let n = &self.cfg.numerics;
        let opts = CycleOptions {
            warmup: n.warmup,
            grid: n.grid,
            step: self.precise_step(),
            ..Default::default()
        };
        let lc = find_limit_cycle(&vf, &self.cfg.model.initial, SectionSpec::fhn(), opts)
            .map_err(|e| stage_err("limit-cycle")(e.to_string()))?;
        let singular = singular_residence(&vf).ok();
        let art = CycleArtifact {
            model: self.cfg.model.clone(),
            grid: lc.grid_len(),
            period: lc.period(),
            omega: lc.omega(),
            returns: lc.returns(),
            anchor: lc.anchor().clone(),
            derivative_consistency: lc.derivative_consistency(&vf),
            residence_fractions: singular.as_ref().map(|s| s.fractions()).unwrap_or_default(),
            singular,
        };
        self.info(format!("period {:.6} after {} returns", art.period, art.returns));
        self.write(CYCLE_CSV, &lc.to_csv(&["v", "w"]))?;
        self.write_json(CYCLE_JSON, &art)?;
        Ok(art)
    }

    /// Regenerates the cycle from `cycle.json`, checking it matches the config.
    pub fn load_cycle(&mut self) -> Result<(CycleArtifact, LimitCycle), PipelineError> {
        let path = self.path(CYCLE_JSON);
        let text = self.read(&path, "limit-cycle")?;
        let art: CycleArtifact = serde_json::from_str(&text).map_err(|e| PipelineError::Artifact {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        if art.model != self.cfg.model {
            return Err(PipelineError::Stale {
                stage: "limit-cycle",
                reason: "model section differs".into(),
            });
        }
        if art.grid != self.cfg.numerics.grid {
            return Err(PipelineError::Stale {
                stage: "limit-cycle",
                reason: format!("grid {} vs {}", art.grid, self.cfg.numerics.grid),
            });
        }
        let lc = LimitCycle::from_anchor(&self.field(), art.anchor.clone(), art.period, art.grid, self.precise_step())
            .map_err(|e| stage_err("limit-cycle")(e.to_string()))?;
        Ok((art, lc))
    }

    // ---- prc --------------------------------------------------------------

    pub fn prc(&mut self) -> Result<PrcArtifact, PipelineError> {
        let (_, lc) = self.load_cycle()?;
        let n = &self.cfg.numerics;
        let opts = PrcOptions {
            max_periods: n.prc_max_periods,
            tol: n.prc_tol,
            step: self.precise_step(),
        };
        let z = compute_prc(&lc, &self.field(), opts).map_err(|e| stage_err("prc")(e.to_string()))?;
        let art = PrcArtifact {
            grid: z.grid_len(),
            diagnostics: z.diagnostics,
            normalization_error: z.normalization_error(&lc),
        };
        self.info(format!(
            "adjoint residual {:.2e} after {} periods",
            art.diagnostics.residual, art.diagnostics.periods
        ));
        self.write(PRC_CSV, &z.to_csv())?;
        self.write_json(PRC_JSON, &art)?;
        Ok(art)
    }

    pub fn load_prc(&mut self) -> Result<PhaseResponseCurve, PipelineError> {
        let json_path = self.path(PRC_JSON);
        let csv_path = self.path(PRC_CSV);
        let text = self.read(&json_path, "prc")?;
        let art: PrcArtifact = serde_json::from_str(&text).map_err(|e| PipelineError::Artifact {
            path: json_path,
            reason: e.to_string(),
        })?;
        let (_, samples) = self.read_samples(&csv_path, "prc")?;
        if samples.first().map(|s| s.len()) != Some(art.grid) {
            return Err(PipelineError::Stale {
                stage: "prc",
                reason: "prc.csv and prc.json disagree on the grid".into(),
            });
        }
        Ok(PhaseResponseCurve::from_samples(samples, art.diagnostics))
    }

    fn read_samples(
        &mut self,
        path: &Path,
        stage: &'static str,
    ) -> Result<(Vec<String>, Vec<PeriodicSample>), PipelineError> {
        let text = self.read(path, stage)?;
        samples_from_csv(&text).map_err(|e| PipelineError::Artifact {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    // ---- reduce -----------------------------------------------------------

    pub fn reduce(&mut self) -> Result<InteractionFunction, PipelineError> {
        let z = self.load_prc()?;
        let (_, lc) = self.load_cycle()?;
        if z.grid_len() != lc.grid_len() {
            return Err(PipelineError::Stale {
                stage: "prc",
                reason: format!("grid {} vs cycle grid {}", z.grid_len(), lc.grid_len()),
            });
        }
        let c = self.coupling()?;
        let f = reduce(&lc, &z, &c).map_err(|e| stage_err("reduce")(e.to_string()))?;
        self.write(H_CSV, &f.to_csv())?;
        if self.cfg.output.gpr {
            let g = build_gpr(&lc, &z, &c).map_err(|e| stage_err("reduce")(e.to_string()))?;
            self.write("gpr.csv", &g.to_csv())?;
        }
        let dz = detect_circle_exact(&f.h_odd, "h_odd");
        self.write_json(
            "reduce.json",
            &json!({
                "coupling": c.kind(),
                "kappa": self.kappa(),
                "max_abs_h": f.h.max_abs(),
                "max_abs_h_odd": f.h_odd.max_abs(),
                "h_odd_exact_dead_zone": dz.to_json(),
            }),
        )?;
        Ok(f)
    }

    pub fn load_h(&mut self, path: Option<&Path>) -> Result<InteractionFunction, PipelineError> {
        let path = path.map(Path::to_path_buf).unwrap_or_else(|| self.path(H_CSV));
        let (names, cols) = self.read_samples(&path, "reduce")?;
        let h = names
            .iter()
            .position(|n| n == "h")
            .ok_or_else(|| PipelineError::Artifact {
                path: path.clone(),
                reason: "no `h` column".into(),
            })?;
        Ok(InteractionFunction::from_h(cols[h].clone()))
    }

    // ---- deadzone ---------------------------------------------------------

    /// Detects dead zones of every column of `input`. `eta` is absolute;
    /// otherwise `eta_rel·max|f|`; with neither, exact zeros.
    pub fn deadzone(
        &mut self,
        input: Option<&Path>,
        eta: Option<f64>,
        eta_rel: Option<f64>,
    ) -> Result<Vec<DeadZoneReport>, PipelineError> {
        if let Some(e) = eta.filter(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(ConfigError::Invalid {
                key: "--eta",
                reason: format!("must be non-negative, got {e}"),
            }
            .into());
        }
        let path = input.map(Path::to_path_buf).unwrap_or_else(|| self.path(H_CSV));
        let (names, cols) = self.read_samples(&path, "reduce")?;
        let reports: Vec<DeadZoneReport> = names
            .iter()
            .zip(&cols)
            .map(|(name, f)| match (eta, eta_rel) {
                (Some(e), _) => detect_circle(f, e, name),
                (None, Some(r)) => detect_circle(f, r * f.max_abs(), name),
                (None, None) => detect_circle_exact(f, name),
            })
            .collect();
        let mode = match (eta, eta_rel) {
            (Some(_), _) => "absolute",
            (None, Some(_)) => "relative",
            (None, None) => "exact",
        };
        self.write_json(
            "dz.json",
            &json!({
                "input": path.display().to_string(),
                "mode": mode,
                "columns": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            }),
        )?;
        Ok(reports)
    }

    // ---- fourier ----------------------------------------------------------

    /// Truncates every column of `input` to `order` harmonics and compares
    /// exact and approximate dead zones before and after.
    pub fn fourier(&mut self, input: Option<&Path>, order: Option<usize>) -> Result<serde_json::Value, PipelineError> {
        let order = order.unwrap_or(self.cfg.numerics.fourier_order);
        let path = input.map(Path::to_path_buf).unwrap_or_else(|| self.path(H_CSV));
        let (names, cols) = self.read_samples(&path, "reduce")?;
        let mut truncated = Vec::with_capacity(cols.len());
        let mut summary = Vec::new();
        for (name, f) in names.iter().zip(&cols) {
            let t = fourier_truncate(f, order).map_err(|e| ConfigError::Invalid {
                key: "--order",
                reason: e.to_string(),
            })?;
            summary.push(truncation_summary(name, f, &t, self.cfg.numerics.eta_rel));
            truncated.push(t);
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let cols: Vec<&PeriodicSample> = truncated.iter().collect();
        self.write("h_fourier.csv", &samples_to_csv(&refs, &cols))?;
        let report = json!({ "order": order, "eta_rel": self.cfg.numerics.eta_rel, "columns": summary });
        self.write_json("fourier.json", &report)?;
        Ok(report)
    }

    // ---- ensemble ---------------------------------------------------------

    pub fn ensemble(&mut self) -> Result<EnsembleReport, PipelineError> {
        let (_, lc) = self.load_cycle()?;
        let f = self.load_h(None)?;
        if f.grid_len() != lc.grid_len() {
            return Err(PipelineError::Stale {
                stage: "reduce",
                reason: "h.csv grid differs from the cycle grid".into(),
            });
        }
        let table = GeometricPhaseTable::new(&lc, DEFAULT_CENTER).map_err(|e| stage_err("ensemble")(e.to_string()))?;
        let cfg = self.cfg.clone();
        let (p, eps, scale) = (cfg.model.params, cfg.coupling.eps, cfg.model.time_scale);
        let model: PairField<Fhn> = match cfg.coupling.kind {
            CouplingChoice::Product => fhn_pair_product(p, eps, scale),
            CouplingChoice::Pulse => {
                let pulse = bump_pulse(cfg.coupling.pulse_center, cfg.coupling.pulse_half_width)
                    .map_err(|e| stage_err("ensemble")(e.to_string()))?;
                let t = table.clone();
                let map: phasekit::models::PhaseMap =
                    Shared::new(move |x: &[f64]| t.theta_of_state(x).map(|p| p.value()).unwrap_or(0.0));
                fhn_pair_pulsatile(p, eps, pulse, self.pulse_source(), scale, Some(map))
                    .map_err(|e| stage_err("ensemble")(e.to_string()))?
            }
        };
        let n = &cfg.numerics;
        let mut opts = EnsembleOptions {
            n: n.ensemble_size,
            t_final: n.t_final,
            sample_dt: n.sample_dt,
            ..Default::default()
        };
        opts.step.tol = Tolerance::new(n.ensemble_rel_tol, n.ensemble_abs_tol);
        self.info(format!("ensemble of {} pairs, eps {eps}, T {}", opts.n, opts.t_final));
        let run = run_ensemble(&model, &lc, &table, eps, &cfg.model.name, opts);
        let dz = detect_circle_exact(&f.h_odd, "h_odd");
        let band = dz.arc_containing(PI, 0.0).copied();
        let cmp = compare_with_reduction(&run, &f.h_odd, band.as_ref(), CompareOptions::for_cycle(&lc, self.kappa()));
        let report = ensemble_report(&run, band, cmp, lc.period());
        self.write("ensemble.csv", &run.to_csv(cfg.output.csv_stride))?;
        self.write_json("ensemble_report.json", &report)?;
        Ok(report)
    }
}

/// Exact and approximate zero arcs of `f` and of its truncation `t`.
pub fn truncation_summary(name: &str, f: &PeriodicSample, t: &PeriodicSample, eta_rel: f64) -> serde_json::Value {
    let original = detect_circle_exact(f, name);
    let exact_after = detect_circle(t, exact_eta(t), name);
    let approx = detect_circle(t, eta_rel * f.max_abs(), name);
    let coverage = original.longest().map(|a| arc_coverage(a, &approx.arcs, f.len()));
    json!({
        "column": name,
        "original_exact": original.to_json(),
        "truncated_exact": exact_after.to_json(),
        "truncated_approximate": approx.to_json(),
        "coverage_of_longest_original": coverage,
    })
}

/// Fraction of the grid points of `a` lying in one of `cover`.
pub fn arc_coverage(a: &Arc, cover: &[Arc], n: usize) -> f64 {
    let inside: Vec<usize> = (0..n)
        .filter(|&i| a.contains_closed(phasekit::core_math::grid_phase(i, n), 1e-12))
        .collect();
    if inside.is_empty() {
        return 0.0;
    }
    let covered = inside
        .iter()
        .filter(|&&i| {
            let x = phasekit::core_math::grid_phase(i, n);
            cover.iter().any(|c| c.contains_closed(x, 1e-12))
        })
        .count();
    covered as f64 / inside.len() as f64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArcJson {
    pub first: f64,
    pub last: f64,
    pub length: f64,
}

impl From<&Arc> for ArcJson {
    fn from(a: &Arc) -> Self {
        ArcJson {
            first: a.first().value(),
            last: a.last().value(),
            length: a.length(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub eps: f64,
    pub members: usize,
    pub t_final: f64,
    /// Exact dead zone of h_odd around antiphase.
    pub dead_band: Option<ArcJson>,
    pub frozen_band: Option<ArcJson>,
    /// |frozen Δ detected| / |detected|.
    pub band_symmetric_difference: Option<f64>,
    pub in_band_members: usize,
    pub in_band_max_change: f64,
    pub outside_members: usize,
    /// Outside members whose windowed Φ moves monotonically toward 0.
    pub toward_synchrony: usize,
    /// Outside members ending closer to the band than they started.
    pub approaching_band: usize,
    pub comparison: DriftComparison,
}

pub fn ensemble_report(
    run: &phasekit::sim::EnsembleRun,
    band: Option<Arc>,
    cmp: DriftComparison,
    period: f64,
) -> EnsembleReport {
    let in_band = |phi0: f64| band.is_some_and(|b| b.contains_closed(phi0, 0.0));
    let w = ((period / run.options.sample_dt).round() as usize).max(1);
    let ok: Vec<_> = run.members.iter().filter(|m| m.ok()).collect();
    let inside: Vec<_> = ok.iter().filter(|m| in_band(m.phi0)).collect();
    let outside: Vec<_> = ok.iter().filter(|m| !in_band(m.phi0)).collect();
    let toward = outside.iter().filter(|m| moves_toward(&m.phi, 0.0, w, 2e-3)).count();
    let approaching = match band {
        Some(b) => outside
            .iter()
            .filter(|m| {
                let d0 = distance_to_arc(wrap(m.phi[0]), &b);
                let d1 = distance_to_arc(wrap(*m.phi.last().unwrap()), &b);
                d1 < d0 - 0.01 || d1 < 0.05
            })
            .count(),
        None => 0,
    };
    EnsembleReport {
        eps: run.eps,
        members: run.members.len(),
        t_final: run.options.t_final,
        dead_band: band.as_ref().map(ArcJson::from),
        frozen_band: cmp.frozen_band.as_ref().map(ArcJson::from),
        band_symmetric_difference: match (band, cmp.frozen_band) {
            (Some(b), Some(f)) => Some(arc_symmetric_difference(&f, &b) / b.length()),
            _ => None,
        },
        in_band_members: inside.len(),
        in_band_max_change: inside.iter().map(|m| m.net_change().abs()).fold(0.0, f64::max),
        outside_members: outside.len(),
        toward_synchrony: toward,
        approaching_band: approaching,
        comparison: cmp,
    }
}
