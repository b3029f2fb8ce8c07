//! Exact lattice-point counts for the resonance counting problems, with
//! empirical checks of the two-, three- and five-vector estimates and of
//! the lattice-sum approximation used for iterates.

mod bounds;
mod five;
mod iterates;
mod oracle;

pub use bounds::{verify_vc_bounds, BoundFamily, FamilySummary, VcGrid, VcReport, VcRow};
pub use five::{
    fit_exponents, five_vector_box_count, five_vector_box_points, five_vector_lower_bound, five_vector_problem,
    five_vector_sweep, FivePoint, FiveVectorReport,
};
pub use iterates::{fejer, iterate_integral_sum, iterate_lattice_sum, iterate_sum_vs_integral, IterateConfig, IterateReport};
pub use oracle::{count_solutions, search_cost, CountingProblem, CountingTuple, SizeRule, MAX_SEARCH_POINTS};
