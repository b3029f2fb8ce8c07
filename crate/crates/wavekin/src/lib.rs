//! Combinatorial and numerical machinery for the 1-D wave kinetic theory of
//! the MMT/NLS model on a periodic lattice.
//!
//! * [`combinatorics`]: trees, couples, decorations, iterates and couple
//!   expressions.
//! * [`molecules`]: labelled multigraphs built from couples.
//! * [`splice`]: double bonds, chains, unit twists and splicing.
//! * [`algorithm`]: the reduction algorithm, operation trees and the
//!   injection of two-vector into three-vector operations.
//! * [`counting`]: exact lattice-point counting oracles and bound sweeps.
//! * [`kinetics`]: collision kernel, kinetic equation and the second-order
//!   correlation.
//! * [`simulator`]: interaction-picture ensemble simulation.

pub mod algorithm;
pub mod combinatorics;
pub mod counting;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod kinetics;
pub mod lattice;
pub mod molecules;
pub mod quad;
pub mod simulator;
pub mod spectrum;
pub mod splice;

pub use error::{Error, Result};
pub use lattice::{omega, Dispersion, WaveNumber};
pub use spectrum::{PhysicalParams, Spectrum};
