//! Molecule reduction by the ten counting operations.
//!
//! Each step removes one atom (or one bridge) chosen by the lowest-numbered
//! applicable operation, ties broken by atom id or a seeded policy. Bridge
//! removals split the operation tree; the resulting records feed the
//! tuple order and the injection of two-vector into three-vector tuples
//! that bounds the number of two-vector counting steps.

mod phi;
mod run;
mod sweep;
mod tree;
mod verify;
mod work;

pub use phi::{phi_map, verify_phi, PhiReport};
pub use run::{
    jump_target, leaf_property, run_algorithm, AlgorithmRun, Mode, MonitorViolation, PreludeRemoval, RunOptions, Scan,
    TieBreak,
};
pub use sweep::{exhaustive_bound_sweep, strict_exclusion, SweepConfig, SweepPart, SweepReport};
pub use tree::{
    build_operation_tuples, CountingClass, OperationCounts, OperationRecord, OperationTree, OperationTuple, TupleSets,
};
pub use verify::{check_count_identities, verify_count_identities, IdentityCheck, IdentityReport};
