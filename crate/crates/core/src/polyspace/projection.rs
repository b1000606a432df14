//! Local L2 projections onto element and edge polynomial spaces.

use nalgebra::{DMatrix, DVector};

use super::basis::{edge_mass_matrix, mass_matrix, EdgeBasis, ElementBasis};
use super::quadrature::{edge_quadrature, element_quadrature, QuadratureRule};
use crate::discretization::{Discretization, Flavor};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::system::DofMap;

/// Solves `M c = b` for an SPD Gram matrix.
pub fn solve_mass(mass: DMatrix<f64>, rhs: DVector<f64>, context: &str) -> Result<DVector<f64>> {
    let chol = mass.cholesky().ok_or_else(|| Error::SingularMass { context: context.to_string() })?;
    Ok(chol.solve(&rhs))
}

/// L2 projection of `f` onto the span of an element basis.
pub fn project_element(basis: &ElementBasis, rule: &QuadratureRule, f: impl Fn(Point) -> f64) -> Result<DVector<f64>> {
    let mut rhs = DVector::zeros(basis.dim());
    for (p, w) in rule.iter() {
        let fw = f(p) * w;
        for (r, v) in rhs.iter_mut().zip(basis.values(p)) {
            *r += fw * v;
        }
    }
    solve_mass(mass_matrix(basis, rule), rhs, "element projection")
}

/// L2 projection of `f` onto the span of an edge basis.
pub fn project_edge(basis: &EdgeBasis, rule: &QuadratureRule, f: impl Fn(Point) -> f64) -> Result<DVector<f64>> {
    let mut rhs = DVector::zeros(basis.dim());
    for (p, w) in rule.iter() {
        let fw = f(p) * w;
        for (r, v) in rhs.iter_mut().zip(basis.values(p)) {
            *r += fw * v;
        }
    }
    solve_mass(edge_mass_matrix(basis, rule), rhs, "edge projection")
}

/// The projections of the scheme bound to a mesh and discretization.
pub struct Projector<'a> {
    mesh: &'a Mesh,
    disc: Discretization,
}

impl<'a> Projector<'a> {
    pub fn new(mesh: &'a Mesh, disc: Discretization) -> Self {
        Self { mesh, disc }
    }

    /// `Q_0`: onto `P_k(T)`.
    pub fn q0(&self, element: usize, f: impl Fn(Point) -> f64) -> Result<DVector<f64>> {
        let basis = self.disc.element_basis(self.mesh, element)?;
        let rule = element_quadrature(self.mesh, element, self.disc.element_exactness)?;
        project_element(&basis, &rule, f)
    }

    /// `ℚ_h`: onto `P_{k-2}(T)`.
    pub fn qh_interior(&self, element: usize, f: impl Fn(Point) -> f64) -> Result<DVector<f64>> {
        let basis = self.disc.element_basis(self.mesh, element)?.truncated(self.disc.degree - 2);
        let rule = element_quadrature(self.mesh, element, self.disc.element_exactness)?;
        project_element(&basis, &rule, f)
    }

    /// `Q_b`: onto `P_k(e)`.
    pub fn qb(&self, edge: usize, f: impl Fn(Point) -> f64) -> Result<DVector<f64>> {
        let basis = EdgeBasis::new(self.mesh.edge(edge), self.disc.degree);
        project_edge(&basis, &edge_quadrature(self.mesh, edge, self.disc.edge_exactness), f)
    }

    /// `Q_g`: componentwise onto `[P_{k-1}(e)]^2`, Cartesian components.
    pub fn qg(&self, edge: usize, g: impl Fn(Point) -> Point) -> Result<[DVector<f64>; 2]> {
        let basis = EdgeBasis::new(self.mesh.edge(edge), self.disc.degree - 1);
        let rule = edge_quadrature(self.mesh, edge, self.disc.edge_exactness);
        Ok([project_edge(&basis, &rule, |p| g(p).x)?, project_edge(&basis, &rule, |p| g(p).y)?])
    }

    /// `Q_gn`: onto `P_{k-1}(e)` for a scalar normal-derivative datum.
    pub fn qgn(&self, edge: usize, g: impl Fn(Point) -> f64) -> Result<DVector<f64>> {
        let basis = EdgeBasis::new(self.mesh.edge(edge), self.disc.degree - 1);
        project_edge(&basis, &edge_quadrature(self.mesh, edge, self.disc.edge_exactness), g)
    }

    /// Gradient-trace coefficients of `Q_h u` on an edge, laid out as the DOF
    /// block: normal part `Q(grad u . n_e)` and, for the vector flavor, the
    /// tangential part `Q(grad u . tau_e)` after it.
    pub fn gradient_trace(&self, edge: usize, grad: impl Fn(Point) -> Point) -> Result<Vec<f64>> {
        let e = self.mesh.edge(edge);
        let (n, t) = (e.normal, e.tangent);
        let mut out: Vec<f64> = self.qgn(edge, |p| grad(p).dot(n))?.iter().copied().collect();
        if self.disc.flavor == Flavor::VectorTrace {
            out.extend(self.qgn(edge, |p| grad(p).dot(t))?.iter());
        }
        Ok(out)
    }
}

/// Global DOF vector of `Q_h u = {Q_0 u, Q_b u, Q_g(grad u)}`.
pub fn embed_exact_solution(
    mesh: &Mesh,
    disc: Discretization,
    dofs: &DofMap,
    u: impl Fn(Point) -> f64 + Sync,
    grad: impl Fn(Point) -> Point + Sync,
) -> Result<DVector<f64>> {
    use rayon::prelude::*;

    let proj = Projector::new(mesh, disc);
    let mut v = DVector::zeros(dofs.len());
    let interiors: Vec<DVector<f64>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| proj.q0(t, &u))
        .collect::<Result<_>>()?;
    for (t, c) in interiors.iter().enumerate() {
        v.rows_mut(dofs.interior_offset(t), c.len()).copy_from(c);
    }
    let traces: Vec<(DVector<f64>, Vec<f64>)> = (0..mesh.num_edges())
        .into_par_iter()
        .map(|e| Ok((proj.qb(e, &u)?, proj.gradient_trace(e, &grad)?)))
        .collect::<Result<_>>()?;
    for (e, (b, g)) in traces.iter().enumerate() {
        v.rows_mut(dofs.trace_offset(e), b.len()).copy_from(b);
        v.rows_mut(dofs.gradient_offset(e), g.len()).copy_from_slice(g);
    }
    Ok(v)
}
