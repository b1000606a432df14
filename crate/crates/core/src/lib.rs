//! Weak Galerkin finite elements for the biharmonic equation `Δ²u = f` with
//! clamped boundary data on polygonal meshes of the plane.
//!
//! Data flows from [`mesh`] through [`polyspace`] for local polynomial tools
//! and [`weaklap`] for the element weak Laplacian into [`system`], which
//! assembles and solves. [`analysis`] measures errors and estimates the
//! inequality constants.

pub mod analysis;
pub mod cli;
pub mod discretization;
pub mod error;
pub mod mesh;
pub mod polyspace;
pub mod system;
pub mod weaklap;

pub use discretization::{Discretization, Flavor, StabilizerScale};
pub use error::{Error, Result};
