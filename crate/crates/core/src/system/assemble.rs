use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::dofmap::DofMap;
use super::sparse::CsrMatrix;
use crate::discretization::{Discretization, Flavor};
use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::polyspace::{edge_quadrature, element_quadrature, EdgeBasis, Projector};
use crate::weaklap::{build_weak_laplacian, LocalLayout};

/// Right-hand side and boundary data of the biharmonic problem.
pub struct LoadData<'a> {
    pub source: &'a (dyn Fn(Point) -> f64 + Sync),
    /// Dirichlet datum `u = ζ` on the boundary.
    pub dirichlet: &'a (dyn Fn(Point) -> f64 + Sync),
    /// Neumann datum `∂u/∂n = φ`, given the outward unit normal.
    pub neumann: &'a (dyn Fn(Point, Point) -> f64 + Sync),
}

/// Stabilizer on one element:
/// `h^-1 <∇u0 - ug, ∇v0 - vg>_∂T + h^-3 <u0 - ub, v0 - vb>_∂T`
/// (for the normal flavor the first term uses `∇u0·n_e - ug`). The length
/// `h` is chosen per edge by [`Discretization::stabilizer_weights`].
pub fn local_stabilizer(mesh: &Mesh, element: usize, disc: &Discretization) -> Result<DMatrix<f64>> {
    let el = mesh.element(element);
    let layout = LocalLayout::new(disc, el.num_edges());
    let basis = disc.element_basis(mesh, element)?;
    let n = layout.len();
    let mut s = DMatrix::zeros(n, n);

    let mut row = vec![0.0; n];

    for (local, &eid) in el.edges.iter().enumerate() {
        let edge = mesh.edge(eid);
        let (wg, wb) = disc.stabilizer_weights(el, edge);
        let trace_basis = EdgeBasis::new(edge, disc.degree);
        let grad_basis = EdgeBasis::new(edge, disc.degree - 1);
        let (to, go) = (layout.trace_offset(local), layout.gradient_offset(local));
        for (p, w) in edge_quadrature(mesh, eid, disc.stabilizer_exactness).iter() {
            let vals = basis.values(p);
            let grads = basis.gradients(p);
            let psi_b = trace_basis.values(p);
            let psi_g = grad_basis.values(p);

            // v0 - vb
            row[..vals.len()].copy_from_slice(&vals);
            for (j, v) in psi_b.iter().enumerate() {
                row[to + j] = -v;
            }
            add_outer(&mut s, &mut row, w * wb);

            // ∇v0·n_e - vg_n
            for (i, g) in grads.iter().enumerate() {
                row[i] = g.dot(edge.normal);
            }
            for (j, v) in psi_g.iter().enumerate() {
                row[go + j] = -v;
            }
            add_outer(&mut s, &mut row, w * wg);

            if disc.flavor == Flavor::VectorTrace {
                // ∇v0·tau_e - vg_t
                for (i, g) in grads.iter().enumerate() {
                    row[i] = g.dot(edge.tangent);
                }
                for (j, v) in psi_g.iter().enumerate() {
                    row[go + layout.component + j] = -v;
                }
                add_outer(&mut s, &mut row, w * wg);
            }
        }
    }
    Ok(s)
}

/// `s += weight * row rowᵀ`, then clears `row`.
fn add_outer(s: &mut DMatrix<f64>, row: &mut [f64], weight: f64) {
    let nz: Vec<usize> = (0..row.len()).filter(|&i| row[i] != 0.0).collect();
    for &i in &nz {
        let wi = weight * row[i];
        for &j in &nz {
            s[(i, j)] += wi * row[j];
        }
    }
    row.iter_mut().for_each(|r| *r = 0.0);
}

/// Element matrix `Lᵀ M L + s_T` of the weak Galerkin bilinear form.
pub fn local_matrix(mesh: &Mesh, element: usize, disc: &Discretization) -> Result<DMatrix<f64>> {
    let op = build_weak_laplacian(mesh, element, disc)?;
    let a = op.stiffness()? + local_stabilizer(mesh, element, disc)?;
    // averaging with the transpose makes the result bitwise symmetric
    Ok((&a + a.transpose()) * 0.5)
}

/// `(f, v0)_T` against the interior basis.
pub fn local_load(mesh: &Mesh, element: usize, disc: &Discretization, f: impl Fn(Point) -> f64) -> Result<DVector<f64>> {
    let basis = disc.element_basis(mesh, element)?;
    let mut b = DVector::zeros(basis.dim());
    for (p, w) in element_quadrature(mesh, element, disc.element_exactness)?.iter() {
        let fw = w * f(p);
        for (bi, v) in b.iter_mut().zip(basis.values(p)) {
            *bi += fw * v;
        }
    }
    Ok(b)
}

/// The bilinear form on the whole space `V_h`, without boundary conditions.
pub fn assemble_operator(mesh: &Mesh, disc: &Discretization, dofs: &DofMap) -> Result<CsrMatrix> {
    let locals: Vec<(Vec<usize>, DMatrix<f64>)> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| Ok((dofs.local_dofs(mesh, t), local_matrix(mesh, t, disc)?)))
        .collect::<Result<_>>()?;
    let cap = locals.iter().map(|(d, _)| d.len() * d.len()).sum();
    let mut triplets = Vec::with_capacity(cap);
    for (ids, a) in &locals {
        for (j, &cj) in ids.iter().enumerate() {
            for (i, &ri) in ids.iter().enumerate() {
                let v = a[(i, j)];
                if v != 0.0 {
                    triplets.push((ri, cj, v));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(dofs.len(), dofs.len(), &triplets))
}

/// Reduced SPD system on the free DOFs; boundary DOFs carry projected data.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub dofs: DofMap,
    /// Unconstrained operator on all DOFs.
    pub full: CsrMatrix,
    /// Operator restricted to the free DOFs.
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global vector holding the boundary values (zero on free DOFs).
    pub fixed_values: Vec<f64>,
    pub free: Vec<usize>,
}

impl SparseSystem {
    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs.len()
    }

    /// Merges a free-DOF vector with the boundary values.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        let mut x = self.fixed_values.clone();
        for (&g, &v) in self.free.iter().zip(free_values) {
            x[g] = v;
        }
        x
    }

    pub fn restrict(&self, global: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&g| global[g]).collect()
    }
}

pub fn assemble(mesh: &Mesh, disc: &Discretization, data: &LoadData<'_>) -> Result<SparseSystem> {
    let dofs = DofMap::new(mesh, disc);
    let full = assemble_operator(mesh, disc, &dofs)?;

    let loads: Vec<DVector<f64>> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| local_load(mesh, t, disc, data.source))
        .collect::<Result<_>>()?;
    let mut load = vec![0.0; dofs.len()];
    for (t, b) in loads.iter().enumerate() {
        let o = dofs.interior_offset(t);
        load[o..o + b.len()].copy_from_slice(b.as_slice());
    }

    let fixed_values = boundary_values(mesh, disc, &dofs, data)?;
    let mut index = vec![usize::MAX; dofs.len()];
    let free: Vec<usize> = (0..dofs.len()).filter(|&i| !dofs.is_fixed(i)).collect();
    for (k, &g) in free.iter().enumerate() {
        index[g] = k;
    }

    let mut triplets = Vec::with_capacity(full.nnz());
    let mut rhs = Vec::with_capacity(free.len());
    for (k, &g) in free.iter().enumerate() {
        let mut b = load[g];
        for (c, v) in full.row(g) {
            if dofs.is_fixed(c) {
                b -= v * fixed_values[c];
            } else {
                triplets.push((k, index[c], v));
            }
        }
        rhs.push(b);
    }
    let matrix = CsrMatrix::from_triplets(free.len(), free.len(), &triplets);
    Ok(SparseSystem { dofs, full, matrix, rhs, fixed_values, free })
}

/// `Q_b ζ` and `Q_gn φ` on boundary edges.
fn boundary_values(mesh: &Mesh, disc: &Discretization, dofs: &DofMap, data: &LoadData<'_>) -> Result<Vec<f64>> {
    let proj = Projector::new(mesh, *disc);
    let mut x = vec![0.0; dofs.len()];
    for e in mesh.edges().iter().filter(|e| e.is_boundary()) {
        let b = proj.qb(e.id, data.dirichlet)?;
        let g = proj.qgn(e.id, |p| (data.neumann)(p, e.normal))?;
        let (to, go) = (dofs.trace_offset(e.id), dofs.gradient_offset(e.id));
        x[to..to + b.len()].copy_from_slice(b.as_slice());
        x[go..go + g.len()].copy_from_slice(g.as_slice());
    }
    Ok(x)
}
