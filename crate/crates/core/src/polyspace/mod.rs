//! Polynomial spaces on elements and edges, quadrature, and L2 projections.

mod basis;
mod projection;
mod quadrature;

pub use basis::{edge_mass_matrix, mass_matrix, EdgeBasis, ElementBasis};
pub use projection::{embed_exact_solution, project_edge, project_element, solve_mass, Projector};
pub use quadrature::{
    disk_rule, edge_quadrature, element_quadrature, gauss_legendre, polygon_rule, segment_rule, triangle_rule,
    QuadratureRule,
};
