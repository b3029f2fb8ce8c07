//! Ensemble simulation of the Wick-ordered profile equation in the
//! interaction picture.
//!
//! The linear flow is carried exactly by the phases `e(T t Omega)`; RK4
//! steps the nonlinear part. The cubic sum is evaluated by a zero-padded
//! FFT of length `>= 4 cutoff + 1`, which makes the Galerkin truncation to
//! `|j| <= cutoff` alias-free. A direct epsilon-filtered triple sum serves
//! as its oracle.

mod compare;
mod ensemble;
mod evolve;
mod rhs;
mod state;

pub use compare::{
    compare_to_theorem, residual_trend, second_order_consistency, MomentRow, ResidualRow, SecondOrderReport,
    SupRatio, TheoremReport,
};
pub use ensemble::{ensemble_second_moment, theorem_time, EnsembleConfig, EnsembleStats, MIN_MEMBERS};
pub use evolve::{evolve, first_increment, max_step, Stepper, Trajectory, MASS_TOLERANCE, PHASE_STEP_LIMIT};
pub use rhs::Nonlinearity;
pub use state::{cutoff_numerator, sample_initial_data, InitialKind, ModeState};
