//! Stable limit cycles, geometric phase and branch-residence diagnostics.

mod cycle;
mod geometric;
mod slowfast;

pub use cycle::{find_limit_cycle, Anchor, CycleOptions, LimitCycle, SectionSpec, SideCondition};
pub use geometric::{geometric_phase, phase_from_geometric, GeometricPhaseTable, DEFAULT_CENTER};
pub use slowfast::{
    branch_report, singular_residence, BranchReport, SingularBranch, SingularCycle, SlowFastSystem,
};

use crate::ode::OdeError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitCycleError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("section returns did not converge after {returns} returns")]
    NoCycle { returns: usize },
    #[error("section crossed with speed {speed:e} at t = {t}")]
    NonTransversal { t: f64, speed: f64 },
    #[error("state coincides with the geometric-phase centre")]
    DegeneratePoint,
    #[error("geometric phase is not increasing at grid index {index}")]
    NonMonotone { index: usize },
    #[error("expected two folds of the critical manifold, found {found}")]
    FoldNotFound { found: usize },
    #[error("no drop point for the fold at v = {fold_v}")]
    DropNotFound { fold_v: f64 },
    #[error("slow flow vanishes on a branch at v = {v}")]
    SlowFlowZero { v: f64 },
    #[error("phase grid of {0} points is too small")]
    InvalidGrid(usize),
}
