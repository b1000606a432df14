//! Discrete norms on the weak finite element space.
//!
//! Both norms are evaluated pointwise by quadrature from the DOF vector. They
//! do not reuse the assembled matrix, so comparing `|||v|||²` with `vᵀAv`
//! checks the assembly independently.

use rayon::prelude::*;

use crate::discretization::{Discretization, Flavor};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::polyspace::{edge_quadrature, element_quadrature, EdgeBasis};
use crate::system::DofMap;
use crate::weaklap::build_weak_laplacian;

fn check_len(dofs: &DofMap, v: &[f64]) -> Result<()> {
    if v.len() != dofs.len() {
        return Err(Error::DimensionMismatch { expected: dofs.len(), got: v.len() });
    }
    Ok(())
}

/// Squared contribution of one element to `|||v|||²`.
fn element_energy(mesh: &Mesh, disc: &Discretization, dofs: &DofMap, element: usize, v: &[f64]) -> Result<f64> {
    let el = mesh.element(element);
    let ids = dofs.local_dofs(mesh, element);
    let local: Vec<f64> = ids.iter().map(|&g| v[g]).collect();

    let op = build_weak_laplacian(mesh, element, disc)?;
    let lap = op.apply(&local)?;
    let rule = element_quadrature(mesh, element, disc.element_exactness)?;
    let mut total = rule.integrate(|p| op.basis.evaluate(lap.as_slice(), p).powi(2));

    let basis = disc.element_basis(mesh, element)?;
    let v0 = &local[..op.layout.interior];
    for (i, &eid) in el.edges.iter().enumerate() {
        let edge = mesh.edge(eid);
        let (wg, wb) = disc.stabilizer_weights(el, edge);
        let trace = EdgeBasis::new(edge, disc.degree);
        let gradient = EdgeBasis::new(edge, disc.degree - 1);
        let vb = &local[op.layout.trace_offset(i)..][..op.layout.trace];
        let vg = &local[op.layout.gradient_offset(i)..][..op.layout.gradient];
        let (gn, gt) = vg.split_at(op.layout.component);
        for (p, w) in edge_quadrature(mesh, eid, disc.edge_exactness).iter() {
            let jump = basis.evaluate(v0, p) - trace.evaluate(vb, p);
            let grad = basis.evaluate_gradient(v0, p);
            let mut flux = (grad.dot(edge.normal) - gradient.evaluate(gn, p)).powi(2);
            if disc.flavor == Flavor::VectorTrace {
                flux += (grad.dot(edge.tangent) - gradient.evaluate(gt, p)).powi(2);
            }
            total += w * (wb * jump * jump + wg * flux);
        }
    }
    Ok(total)
}

/// `|||v|||`: weak Laplacian in `L²` plus both stabilizer terms.
pub fn triple_bar_norm(mesh: &Mesh, disc: &Discretization, v: &[f64]) -> Result<f64> {
    let dofs = DofMap::new(mesh, disc);
    check_len(&dofs, v)?;
    let parts: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| element_energy(mesh, disc, &dofs, t, v))
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// `(Σ_T ‖v0‖²_T)^½`; only the interior block contributes.
pub fn l2_norm_element(mesh: &Mesh, disc: &Discretization, v: &[f64]) -> Result<f64> {
    let dofs = DofMap::new(mesh, disc);
    check_len(&dofs, v)?;
    let parts: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            let basis = disc.element_basis(mesh, t)?;
            let o = dofs.interior_offset(t);
            let v0 = &v[o..o + dofs.interior_dim()];
            Ok(element_quadrature(mesh, t, disc.element_exactness)?.integrate(|p| basis.evaluate(v0, p).powi(2)))
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}
