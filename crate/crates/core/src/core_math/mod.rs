//! Circle arithmetic, arcs, sampled periodic functions and quadrature.

pub mod periodic;
pub mod quadrature;
pub mod torus;

pub use periodic::{
    circular_mean, cyclic_runs, grid_phase, maximal_zero_arcs, samples_from_csv,
    run_to_arc, samples_to_csv, shift, GridRun, Interpolation, PeriodicSample, SampleError, DEFAULT_GRID,
};
pub use torus::{arc_overlap, wrap, wrap_signed, Arc, Overlap, Phase};
