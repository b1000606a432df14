//! The discrete weak Laplacian on a single element.
//!
//! For a weak function `v = {v0, vb, vg}` on `T`, `Δw v ∈ P_{k-2}(T)` is the
//! unique polynomial with
//!
//! ```text
//! (Δw v, φ)_T = (v0, Δφ)_T - <vb, ∇φ·n>_∂T + <vg·n, φ>_∂T   for all φ ∈ P_{k-2}(T)
//! ```
//!
//! where `n` is the outward normal of `T`. The map is linear in the local
//! DOFs, so it is stored as a dense matrix.

use nalgebra::{DMatrix, DVector};

use crate::discretization::{Discretization, Flavor};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::polyspace::{edge_quadrature, element_quadrature, mass_matrix, EdgeBasis, ElementBasis, Projector};

/// Offsets of the DOF blocks of one element: `v0`, then `vb` per local edge,
/// then the gradient trace per local edge.
///
/// For the vector flavor each gradient block holds the normal-component
/// coefficients (`vg · n_e`) followed by the tangential ones (`vg · tau_e`);
/// for the normal flavor only the former.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalLayout {
    pub interior: usize,
    pub edges: usize,
    pub trace: usize,
    pub gradient: usize,
    /// Coefficients of one gradient component, `dim P_{k-1}(e)`.
    pub component: usize,
}

impl LocalLayout {
    pub fn new(disc: &Discretization, edges: usize) -> Self {
        Self {
            interior: disc.interior_dim(),
            edges,
            trace: disc.trace_dim(),
            gradient: disc.gradient_dim(),
            component: disc.degree,
        }
    }

    pub fn len(&self) -> usize {
        self.interior + self.edges * (self.trace + self.gradient)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn trace_offset(&self, local_edge: usize) -> usize {
        self.interior + local_edge * self.trace
    }

    pub fn gradient_offset(&self, local_edge: usize) -> usize {
        self.interior + self.edges * self.trace + local_edge * self.gradient
    }
}

/// Gradient trace on one edge.
#[derive(Debug, Clone, PartialEq)]
pub enum GradientTrace {
    /// Vector trace in the edge frame: `vg = normal * n_e + tangential * tau_e`.
    Vector { normal: DVector<f64>, tangential: DVector<f64> },
    /// Scalar trace `vg` standing for `vg n_e`.
    Normal(DVector<f64>),
}

/// Structured view of the local DOFs of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalWeakFunction {
    pub v0: DVector<f64>,
    pub vb: Vec<DVector<f64>>,
    pub vg: Vec<GradientTrace>,
}

impl LocalWeakFunction {
    pub fn from_slice(layout: &LocalLayout, flavor: Flavor, dofs: &[f64]) -> Result<Self> {
        if dofs.len() != layout.len() {
            return Err(Error::DimensionMismatch { expected: layout.len(), got: dofs.len() });
        }
        let v0 = DVector::from_column_slice(&dofs[..layout.interior]);
        let vb = (0..layout.edges)
            .map(|i| DVector::from_column_slice(&dofs[layout.trace_offset(i)..][..layout.trace]))
            .collect();
        let vg = (0..layout.edges)
            .map(|i| {
                let block = &dofs[layout.gradient_offset(i)..][..layout.gradient];
                match flavor {
                    Flavor::NormalTrace => GradientTrace::Normal(DVector::from_column_slice(block)),
                    Flavor::VectorTrace => GradientTrace::Vector {
                        normal: DVector::from_column_slice(&block[..layout.component]),
                        tangential: DVector::from_column_slice(&block[layout.component..]),
                    },
                }
            })
            .collect();
        Ok(Self { v0, vb, vg })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.v0.iter().copied().collect();
        for b in &self.vb {
            out.extend(b.iter());
        }
        for g in &self.vg {
            match g {
                GradientTrace::Normal(c) => out.extend(c.iter()),
                GradientTrace::Vector { normal, tangential } => {
                    out.extend(normal.iter());
                    out.extend(tangential.iter());
                }
            }
        }
        out
    }
}

/// `Δw` on one element as a dense `dim P_{k-2} x local DOFs` matrix.
#[derive(Debug, Clone)]
pub struct WeakLaplacianOperator {
    pub element: usize,
    pub layout: LocalLayout,
    /// Coefficients of `Δw v` in the `P_{k-2}(T)` basis.
    pub matrix: DMatrix<f64>,
    /// Right-hand side functionals: `rhs * v` are the moments `(Δw v, φ_i)_T`.
    pub rhs: DMatrix<f64>,
    /// Gram matrix of the `P_{k-2}(T)` basis.
    pub mass: DMatrix<f64>,
    pub basis: ElementBasis,
}

impl WeakLaplacianOperator {
    pub fn apply(&self, local: &[f64]) -> Result<DVector<f64>> {
        if local.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: self.matrix.ncols(), got: local.len() });
        }
        Ok(&self.matrix * DVector::from_column_slice(local))
    }

    /// `Lᵀ M L`, the contribution of `(Δw u, Δw v)_T`; built as `Yᵀ Y` with
    /// `M = C Cᵀ` and `Y = C⁻¹ rhs` so it is exactly symmetric.
    pub fn stiffness(&self) -> Result<DMatrix<f64>> {
        let chol = self
            .mass
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SingularMass { context: format!("P_(k-2) mass on element {}", self.element) })?;
        let y = chol
            .l()
            .solve_lower_triangular(&self.rhs)
            .ok_or_else(|| Error::SingularMass { context: format!("P_(k-2) mass on element {}", self.element) })?;
        Ok(y.tr_mul(&y))
    }
}

pub fn build_weak_laplacian(mesh: &Mesh, element: usize, disc: &Discretization) -> Result<WeakLaplacianOperator> {
    let el = mesh.element(element);
    let layout = LocalLayout::new(disc, el.num_edges());
    let full = disc.element_basis(mesh, element)?;
    let test = full.truncated(disc.degree - 2);
    let nt = test.dim();
    let mut rhs = DMatrix::zeros(nt, layout.len());

    let rule = element_quadrature(mesh, element, disc.element_exactness)?;
    for (p, w) in rule.iter() {
        let lap = test.laplacians(p);
        let vals = full.values(p);
        for i in 0..nt {
            if lap[i] == 0.0 {
                continue;
            }
            let li = w * lap[i];
            for (j, v) in vals.iter().enumerate() {
                rhs[(i, j)] += li * v;
            }
        }
    }

    for (local, &eid) in el.edges.iter().enumerate() {
        let edge = mesh.edge(eid);
        let sign = el.edge_signs[local];
        let n = edge.normal * sign;
        let trace_basis = EdgeBasis::new(edge, disc.degree);
        let grad_basis = EdgeBasis::new(edge, disc.degree - 1);
        let (to, go) = (layout.trace_offset(local), layout.gradient_offset(local));
        for (p, w) in edge_quadrature(mesh, eid, disc.edge_exactness).iter() {
            let phi = test.values(p);
            let dphi = test.gradients(p);
            let psi_b = trace_basis.values(p);
            let psi_g = grad_basis.values(p);
            for i in 0..nt {
                let dn = w * dphi[i].dot(n);
                for (j, s) in psi_b.iter().enumerate() {
                    rhs[(i, to + j)] -= dn * s;
                }
                // vg·n = sign * (normal coefficient); the tangential part drops out
                let fw = w * sign * phi[i];
                for (j, s) in psi_g.iter().enumerate() {
                    rhs[(i, go + j)] += fw * s;
                }
            }
        }
    }

    let mass = mass_matrix(&test, &rule);
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularMass { context: format!("P_(k-2) mass on element {element}") })?;
    let matrix = chol.solve(&rhs);
    Ok(WeakLaplacianOperator { element, layout, matrix, rhs, mass, basis: test })
}

/// Max over elements of the coefficient difference between `Δw(Q_h u)` and
/// `ℚ_h(Δu)`.
pub fn verify_commutativity(
    mesh: &Mesh,
    disc: &Discretization,
    u: impl Fn(crate::mesh::Point) -> f64 + Sync,
    grad: impl Fn(crate::mesh::Point) -> crate::mesh::Point + Sync,
    laplacian: impl Fn(crate::mesh::Point) -> f64 + Sync,
) -> Result<f64> {
    use rayon::prelude::*;

    let proj = Projector::new(mesh, *disc);
    let errs: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            let op = build_weak_laplacian(mesh, t, disc)?;
            let local = local_projection(mesh, &proj, t, &u, &grad)?;
            let lhs = op.apply(&local)?;
            let rhs = proj.qh_interior(t, &laplacian)?;
            Ok((lhs - rhs).amax())
        })
        .collect::<Result<_>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// Local DOFs of `Q_h u` on one element.
pub fn local_projection(
    mesh: &Mesh,
    proj: &Projector<'_>,
    element: usize,
    u: impl Fn(crate::mesh::Point) -> f64,
    grad: impl Fn(crate::mesh::Point) -> crate::mesh::Point,
) -> Result<Vec<f64>> {
    let el = mesh.element(element);
    let mut out: Vec<f64> = proj.q0(element, &u)?.iter().copied().collect();
    for &e in &el.edges {
        out.extend(proj.qb(e, &u)?.iter());
    }
    for &e in &el.edges {
        out.extend(proj.gradient_trace(e, &grad)?);
    }
    Ok(out)
}
