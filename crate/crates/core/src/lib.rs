//! Phase reduction of weakly coupled oscillators and detection of dead zones.

pub mod core_math;
pub mod deadzone;
pub mod limit_cycle;
pub mod models;
pub mod ode;
pub mod prc;
pub mod reduction;
pub mod sim;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
