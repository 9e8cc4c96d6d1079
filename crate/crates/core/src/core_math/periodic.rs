//! Functions on 𝕋 sampled on a uniform grid.

use super::torus::{wrap, Arc, Phase};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use thiserror::Error;

/// Grid size used by every reduction pipeline unless configured otherwise.
pub const DEFAULT_GRID: usize = 2048;

#[derive(Debug, Error, PartialEq)]
pub enum SampleError {
    #[error("grid size must be positive")]
    EmptyGrid,
    #[error("grid mismatch: {0} vs {1} points")]
    GridMismatch(usize, usize),
    #[error("csv: {0}")]
    Csv(String),
}

/// Evaluation rule between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Piecewise linear; keeps zero runs exactly zero.
    #[default]
    Linear,
    /// Trigonometric interpolation through all grid values.
    Fourier,
}

/// A real function on 𝕋 stored at the phases `2πi/N`, `i = 0..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSample {
    values: Vec<f64>,
}

impl PeriodicSample {
    pub fn new(values: Vec<f64>) -> Result<Self, SampleError> {
        if values.is_empty() {
            return Err(SampleError::EmptyGrid);
        }
        Ok(PeriodicSample { values })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n > 0, "grid size must be positive");
        let values = (0..n).map(|i| f(grid_phase(i, n))).collect();
        PeriodicSample { values }
    }

    pub fn zeros(n: usize) -> Self {
        PeriodicSample {
            values: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    pub fn phase_at(&self, i: usize) -> f64 {
        grid_phase(i, self.values.len())
    }

    /// Value at grid index `i`, taken cyclically.
    #[inline]
    pub fn at(&self, i: isize) -> f64 {
        let n = self.values.len() as isize;
        self.values[i.rem_euclid(n) as usize]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn eval(&self, phase: impl Into<Phase>) -> f64 {
        self.eval_with(phase, Interpolation::Linear)
    }

    pub fn eval_with(&self, phase: impl Into<Phase>, rule: Interpolation) -> f64 {
        let phase = phase.into().value();
        match rule {
            Interpolation::Linear => linear_eval(&self.values, phase),
            Interpolation::Fourier => fourier_eval(&self.values, phase),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        PeriodicSample {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product; grids must agree.
    pub fn mul(&self, other: &PeriodicSample) -> Result<Self, SampleError> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with(
        &self,
        other: &PeriodicSample,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, SampleError> {
        if self.len() != other.len() {
            return Err(SampleError::GridMismatch(self.len(), other.len()));
        }
        Ok(PeriodicSample {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Cyclic rotation: `out[i] = self[i + k]`.
    pub fn rotate(&self, k: isize) -> Self {
        let n = self.len() as isize;
        PeriodicSample {
            values: (0..n).map(|i| self.at(i + k)).collect(),
        }
    }

    /// Reflection `out(θ) = self(-θ)`.
    pub fn reflect(&self) -> Self {
        let n = self.len() as isize;
        PeriodicSample {
            values: (0..n).map(|i| self.at(-i)).collect(),
        }
    }

    /// Serializes as `phase,<column>` CSV rows.
    pub fn to_csv(&self, column: &str) -> String {
        samples_to_csv(&[column], &[self])
    }
}

#[inline]
pub fn grid_phase(i: usize, n: usize) -> f64 {
    TAU * i as f64 / n as f64
}

fn linear_eval(values: &[f64], phase: f64) -> f64 {
    let n = values.len();
    let x = phase / TAU * n as f64;
    let i0 = x.floor();
    let frac = x - i0;
    let i = (i0 as usize) % n;
    if frac == 0.0 {
        return values[i];
    }
    let j = (i + 1) % n;
    values[i] + frac * (values[j] - values[i])
}

/// Trigonometric interpolant through the grid values (DFT-based, O(N)).
fn fourier_eval(values: &[f64], phase: f64) -> f64 {
    let n = values.len();
    let half = n / 2;
    let mut acc = 0.0;
    for k in 0..=half {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &v) in values.iter().enumerate() {
            let ang = TAU * ((k * i) % n) as f64 / n as f64;
            re += v * ang.cos();
            im -= v * ang.sin();
        }
        let (sin_kx, cos_kx) = ((k as f64) * phase).sin_cos();
        let term = re * cos_kx - im * sin_kx;
        let weight = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else {
            2.0
        };
        acc += weight * term;
    }
    acc / n as f64
}

/// Mean value `(1/2π)∫f` by the rectangle rule on the periodic grid.
pub fn circular_mean(f: &PeriodicSample) -> f64 {
    f.values.iter().sum::<f64>() / f.len() as f64
}

/// `g(θ) = f(θ + delta)`. Grid-aligned shifts are exact rotations; others
/// use linear interpolation.
pub fn shift(f: &PeriodicSample, delta: impl Into<Phase>) -> PeriodicSample {
    let delta = delta.into().value();
    let n = f.len();
    let cells = delta / TAU * n as f64;
    let k = cells.round();
    if (cells - k).abs() < 1e-9 {
        return f.rotate(k as isize);
    }
    PeriodicSample {
        values: (0..n)
            .map(|i| linear_eval(&f.values, wrap(grid_phase(i, n) + delta)))
            .collect(),
    }
}

/// A run of consecutive grid indices `start..start+len` (cyclic).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridRun {
    pub start: usize,
    pub len: usize,
}

/// Maximal cyclic runs of `true` in `mask`. A mask that is entirely true
/// gives one run of length N starting at 0.
pub fn cyclic_runs(mask: &[bool]) -> Vec<GridRun> {
    let n = mask.len();
    if n == 0 {
        return Vec::new();
    }
    if mask.iter().all(|&m| m) {
        return vec![GridRun { start: 0, len: n }];
    }
    // start scanning right after a false entry so runs never straddle the seam
    let anchor = mask.iter().position(|&m| !m).unwrap();
    let mut runs = Vec::new();
    let mut current: Option<GridRun> = None;
    for step in 1..=n {
        let i = (anchor + step) % n;
        if mask[i] {
            match current.as_mut() {
                Some(r) => r.len += 1,
                None => current = Some(GridRun { start: i, len: 1 }),
            }
        } else if let Some(r) = current.take() {
            runs.push(r);
        }
    }
    if let Some(r) = current {
        runs.push(r);
    }
    runs.sort_by_key(|r| r.start);
    runs
}

/// Converts a grid run into the open arc spanned by its grid points.
pub fn run_to_arc(run: GridRun, n: usize) -> Option<Arc> {
    if run.len >= n {
        return Some(Arc::full(grid_phase(run.start, n)));
    }
    if run.len < 2 {
        return None;
    }
    Arc::new(grid_phase(run.start, n), TAU * (run.len - 1) as f64 / n as f64)
}

/// Maximal arcs on which `|f| ≤ eta` at every grid point, merged across the
/// seam at phase 0. Single-point runs are isolated zeros and are discarded.
pub fn maximal_zero_arcs(f: &PeriodicSample, eta: f64) -> Vec<Arc> {
    let mask: Vec<bool> = f.values.iter().map(|v| v.abs() <= eta).collect();
    cyclic_runs(&mask)
        .into_iter()
        .filter_map(|r| run_to_arc(r, f.len()))
        .collect()
}

/// Formats a float with `sig` significant digits in scientific notation.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    format!("{:.*e}", sig.saturating_sub(1), x)
}

/// Writes aligned sample columns as CSV with a leading `phase` column.
pub fn samples_to_csv(columns: &[&str], samples: &[&PeriodicSample]) -> String {
    assert_eq!(columns.len(), samples.len());
    let n = samples.first().map_or(0, |s| s.len());
    let mut out = String::with_capacity(n * 24 * (columns.len() + 1));
    out.push_str("phase");
    for c in columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for i in 0..n {
        out.push_str(&fmt_sig(grid_phase(i, n), 12));
        for s in samples {
            let _ = write!(out, ",{:e}", s.values[i]);
        }
        out.push('\n');
    }
    out
}

/// Parses CSV written by [`samples_to_csv`]. Returns the column names (without
/// `phase`) and one sample per column. Phases must match the uniform grid.
pub fn samples_from_csv(text: &str) -> Result<(Vec<String>, Vec<PeriodicSample>), SampleError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| SampleError::Csv("empty file".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.first() != Some(&"phase") || names.len() < 2 {
        return Err(SampleError::Csv(format!("bad header `{header}`")));
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len() - 1];
    let mut phases = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(SampleError::Csv(format!(
                "row {}: expected {} fields, got {}",
                lineno + 2,
                names.len(),
                fields.len()
            )));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| SampleError::Csv(format!("row {}: {e}", lineno + 2)))
        };
        phases.push(parse(fields[0])?);
        for (c, f) in cols.iter_mut().zip(&fields[1..]) {
            c.push(parse(f)?);
        }
    }
    let n = phases.len();
    if n == 0 {
        return Err(SampleError::EmptyGrid);
    }
    for (i, p) in phases.iter().enumerate() {
        if (p - grid_phase(i, n)).abs() > 1e-9 {
            return Err(SampleError::Csv(format!(
                "row {}: phase {p} is not on the uniform {n}-point grid",
                i + 2
            )));
        }
    }
    Ok((
        names[1..].iter().map(|s| s.to_string()).collect(),
        cols.into_iter().map(|values| PeriodicSample { values }).collect(),
    ))
}
