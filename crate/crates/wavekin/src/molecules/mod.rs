//! Labelled molecules built from couples, their structure theory and
//! decoration counting.

mod canon;
mod decor;
mod graph;
mod structure;

pub use canon::{canonical_form, canonical_form_marked, MAX_CANON_PERMS};
pub use decor::{
    atom_sums, count_molecule_decorations, decoration_from_molecule, decoration_transfer, gamma, GammaWindow,
    MoleculeCountSpec, MoleculeDecoration, MAX_FREE_BONDS, MAX_SEARCH,
};
pub use graph::{build_molecule, build_molecule_labelled, components_of, Atom, Bond, BondEnd, BondLabel, Molecule};
pub use structure::{
    atomic_group, bond_value_forms, bridges, degeneracy, structurally_degenerate_atoms, find_forbidden_triangle, forbidden_triangle_check, structure_report,
    AtomicGroup, DegeneracyReport, MultiBond, StructureReport,
};
