use crate::discretization::{Discretization, Flavor};
use crate::mesh::Mesh;
use crate::weaklap::LocalLayout;

/// Global numbering: all element `v0` blocks (by element id), then all edge
/// `vb` blocks, then all edge gradient-trace blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub flavor: Flavor,
    pub degree: usize,
    n_elements: usize,
    n_edges: usize,
    interior: usize,
    trace: usize,
    gradient: usize,
    /// Per DOF: fixed by boundary data.
    fixed: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, disc: &Discretization) -> Self {
        let (interior, trace, gradient) = (disc.interior_dim(), disc.trace_dim(), disc.gradient_dim());
        let (n_elements, n_edges) = (mesh.num_elements(), mesh.num_edges());
        let total = n_elements * interior + n_edges * (trace + gradient);
        let mut map = Self {
            flavor: disc.flavor,
            degree: disc.degree,
            n_elements,
            n_edges,
            interior,
            trace,
            gradient,
            fixed: vec![false; total],
        };
        // V_h^0: vb and the normal part of vg vanish on the boundary; the
        // tangential part of a vector trace stays free
        let normal_part = disc.degree;
        for e in mesh.edges().iter().filter(|e| e.is_boundary()) {
            let (t, g) = (map.trace_offset(e.id), map.gradient_offset(e.id));
            map.fixed[t..t + trace].iter_mut().for_each(|f| *f = true);
            map.fixed[g..g + normal_part].iter_mut().for_each(|f| *f = true);
        }
        map
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }

    pub fn interior_dim(&self) -> usize {
        self.interior
    }

    pub fn trace_dim(&self) -> usize {
        self.trace
    }

    pub fn gradient_dim(&self) -> usize {
        self.gradient
    }

    pub fn interior_offset(&self, element: usize) -> usize {
        element * self.interior
    }

    pub fn trace_offset(&self, edge: usize) -> usize {
        self.n_elements * self.interior + edge * self.trace
    }

    pub fn gradient_offset(&self, edge: usize) -> usize {
        self.n_elements * self.interior + self.n_edges * self.trace + edge * self.gradient
    }

    pub fn is_fixed(&self, dof: usize) -> bool {
        self.fixed[dof]
    }

    pub fn fixed_mask(&self) -> &[bool] {
        &self.fixed
    }

    pub fn num_free(&self) -> usize {
        self.fixed.iter().filter(|&&f| !f).count()
    }

    /// Global indices of an element's DOFs in [`LocalLayout`] order.
    pub fn local_dofs(&self, mesh: &Mesh, element: usize) -> Vec<usize> {
        let el = mesh.element(element);
        let layout = LocalLayout {
            interior: self.interior,
            edges: el.num_edges(),
            trace: self.trace,
            gradient: self.gradient,
            component: self.degree,
        };
        let mut out = Vec::with_capacity(layout.len());
        let t0 = self.interior_offset(element);
        out.extend(t0..t0 + self.interior);
        for &e in &el.edges {
            let o = self.trace_offset(e);
            out.extend(o..o + self.trace);
        }
        for &e in &el.edges {
            let o = self.gradient_offset(e);
            out.extend(o..o + self.gradient);
        }
        out
    }
}
