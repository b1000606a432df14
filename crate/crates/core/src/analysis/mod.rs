//! Error norms, convergence studies and inequality estimates.

mod convergence;
pub mod inequalities;
mod norms;
mod problems;

pub use convergence::{
    convergence_study, error_vs_projection, sci, solve_and_measure, solve_problem, uniform_convergence,
    ConvergenceRow, ConvergenceTable, ErrorReport, Solution, ORDER_NOISE_FLOOR,
};
pub use inequalities::{
    estimate_domain_inverse, estimate_inverse_constant, estimate_lp_inverse, estimate_trace_constant,
    InequalityEstimate, InequalityKind,
};
pub use norms::{l2_norm_element, triple_bar_norm};
pub use problems::{case1_source, case2_source, ExactSolution, NormalField, Problem, ScalarField, VectorField};
