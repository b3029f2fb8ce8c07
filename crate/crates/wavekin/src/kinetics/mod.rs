//! Collision kernel, kinetic equation, the discrete second-order
//! correlation and the `sinc^2` approximate identity.
//!
//! Kinetic predictions use `T_kin = alpha^-2` with constant 1; any other
//! normalization shows up as one global factor in comparisons.

mod k2;
mod kernel;
mod sinc2;
mod wke;

pub use k2::{k2_discrete, k2_lattice, kinetic_time_ratio, K2Options, ResonantTerms};
pub use kernel::{
    bracket, collision_kernel, kernel_conservation, kernel_grid, kernel_is_trivial, parse_grid, windowed_kernel,
    ConservationReport, KernelGrid, KernelSpec,
};
pub use sinc2::{sinc2_identity_check, Sinc2Point, Sinc2Report};
pub use wke::{integrate_wke, WkeConfig, WkeTrajectory};
