use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{Edge, Element, Mesh};
use crate::polyspace::{element_quadrature, ElementBasis};

/// Which gradient trace the weak functions carry on edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// Full vector trace `v_g` in `[P_{k-1}(e)]^2` (Algorithm I).
    VectorTrace,
    /// Scalar normal trace `v_g` with `v_g n_e` implied (Algorithm II).
    NormalTrace,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::VectorTrace => "algorithm1",
            Flavor::NormalTrace => "algorithm2",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "algorithm1" | "1" | "i" | "vector" => Ok(Flavor::VectorTrace),
            "algorithm2" | "2" | "ii" | "normal" => Ok(Flavor::NormalTrace),
            other => Err(Error::InvalidArgument(format!("unknown flavor `{other}`"))),
        }
    }
}

/// Length used in place of `h` in the stabilizer weights `h⁻¹` and `h⁻³`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilizerScale {
    /// Length of the edge carrying the boundary integral. The published
    /// error tables for uniform triangulations are reproduced with this one.
    EdgeLength,
    /// Diameter of the element.
    Diameter,
}

impl StabilizerScale {
    pub fn name(self) -> &'static str {
        match self {
            StabilizerScale::EdgeLength => "edge",
            StabilizerScale::Diameter => "diameter",
        }
    }
}

impl fmt::Display for StabilizerScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StabilizerScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edge" | "edge-length" => Ok(StabilizerScale::EdgeLength),
            "diameter" | "element" => Ok(StabilizerScale::Diameter),
            other => Err(Error::InvalidArgument(format!("unknown stabilizer scale `{other}`"))),
        }
    }
}

/// Polynomial degree, scheme flavor and quadrature settings shared by every
/// stage of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discretization {
    pub degree: usize,
    pub flavor: Flavor,
    pub element_exactness: usize,
    pub edge_exactness: usize,
    /// Edge rule used for the stabilizer; `2k` integrates it exactly.
    pub stabilizer_exactness: usize,
    /// Orthonormalize the element basis on each element.
    pub orthonormal: bool,
    pub stabilizer_scale: StabilizerScale,
}

impl Discretization {
    pub fn new(degree: usize, flavor: Flavor) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidArgument(format!("polynomial degree must be at least 2, got {degree}")));
        }
        Ok(Self {
            degree,
            flavor,
            element_exactness: 2 * degree + 2,
            edge_exactness: 2 * degree + 2,
            stabilizer_exactness: 2 * degree,
            orthonormal: false,
            stabilizer_scale: StabilizerScale::EdgeLength,
        })
    }

    pub fn with_exactness(mut self, element: usize, edge: usize) -> Self {
        self.element_exactness = element;
        self.edge_exactness = edge;
        self
    }

    pub fn with_orthonormal(mut self, on: bool) -> Self {
        self.orthonormal = on;
        self
    }

    pub fn with_stabilizer_scale(mut self, scale: StabilizerScale) -> Self {
        self.stabilizer_scale = scale;
        self
    }

    /// Weights `(h⁻¹, h⁻³)` of the gradient and value terms of the
    /// stabilizer on one edge of `element`.
    pub fn stabilizer_weights(&self, element: &Element, edge: &Edge) -> (f64, f64) {
        let h = match self.stabilizer_scale {
            StabilizerScale::EdgeLength => edge.length,
            StabilizerScale::Diameter => element.diameter,
        };
        (1.0 / h, h.powi(-3))
    }

    /// Dimension of `P_k(T)`.
    pub fn interior_dim(&self) -> usize {
        poly_dim(self.degree)
    }

    /// Dimension of `P_{k-2}(T)`, the range of the weak Laplacian.
    pub fn laplacian_dim(&self) -> usize {
        poly_dim(self.degree - 2)
    }

    pub fn trace_dim(&self) -> usize {
        self.degree + 1
    }

    /// Gradient-trace coefficients per edge.
    pub fn gradient_dim(&self) -> usize {
        match self.flavor {
            Flavor::VectorTrace => 2 * self.degree,
            Flavor::NormalTrace => self.degree,
        }
    }

    /// Basis of `P_k(T)` on an element, honouring the orthonormal flag.
    pub fn element_basis(&self, mesh: &Mesh, element: usize) -> Result<ElementBasis> {
        let basis = ElementBasis::for_element(mesh.element(element), self.degree);
        if self.orthonormal {
            let rule = element_quadrature(mesh, element, 2 * self.degree)?;
            basis.orthonormalized(&rule)
        } else {
            Ok(basis)
        }
    }
}

/// Dimension of bivariate polynomials of total degree at most `degree`.
pub fn poly_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}
