//! Double bonds, chains, unit twists, congruence classes and splicing.

mod chains;
mod factor;
mod surgery;
mod twist;

pub use chains::{
    chain_gap, chain_gaps, classify_chain_objects, classify_chain_objects_in, classify_double_bonds, ChainKind,
    ChainObject, ChainScope, DoubleBondInfo, DoubleBondKind, GapClass, Orientation, Witness,
};
pub use factor::{decorate_chain, irregular_chain_couple, twist_sum_factorization_check, TwistSumReport, TWIST_SUM_TOL};
pub use surgery::{
    choose_splice_set, choose_splice_set_with, cl_chain, couple_chain_gap, preprocess, preprocess_fixpoint, preprocess_with, splice,
    splice_at, splice_decorated, splice_many, ClChain, Exclusion, Spliced,
};
pub use twist::{
    admissible_site, congruence_class, is_admissible, is_twist_admissible, twist_admissible_nodes, twist_all,
    unit_twist, TwistSite, MAX_TWIST_SET,
};
