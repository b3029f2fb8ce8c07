//! Signed ternary trees, couples, decorations and the numerical evaluation
//! of iterates and couple expressions.

mod couple;
mod decoration;
mod evaluate;
mod flower;
mod isserlis;
mod tree;

pub use couple::{couple_count, enumerate_couples, random_couple, Couple, CoupleIter, CoupleJson, SpliceNote, MAX_COUPLE_ORDER};
pub use decoration::{
    check_couple_decoration, enumerate_decorations, epsilon, fill_internal, for_each_couple_decoration,
    for_each_tree_decoration, local_factors, Decoration, LeafBounds, MAX_FREE_SLOTS_LARGE_L,
};
pub use evaluate::{
    draw_modes, evaluate_kq, evaluate_kq_windowed, sample_j_iterate, JSampler, QuadSpec, TimeForest, TimeIntegrator,
    MAX_EVAL_ORDER,
};
pub use flower::{flower_structure, FlowerCouple};
pub use isserlis::{isserlis_check, isserlis_check_many, predicted_correlation, IsserlisConfig, IsserlisReport};
pub use tree::{child_sign, enumerate_trees, ternary_catalan, Diagram, Node, NodeId, Sign, SignedTernaryTree, MAX_TREE_ORDER};
