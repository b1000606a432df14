//! Global DOFs, assembly of the weak Galerkin form, and the sparse SPD solve.

mod assemble;
mod dofmap;
mod solve;
mod sparse;

pub use assemble::{assemble, assemble_operator, local_load, local_matrix, local_stabilizer, LoadData, SparseSystem};
pub use dofmap::DofMap;
pub use solve::{
    cholesky_solve, conjugate_gradient, is_positive_definite, relative_residual, solve, solve_free, SolverKind,
    SolverOptions,
};
pub use sparse::CsrMatrix;
