//! Two-dimensional polygonal meshes.
//!
//! A [`Mesh`] is immutable once built. Every edge carries a fixed unit normal
//! `n_e`: on the boundary it points out of the domain, on interior edges it
//! points from the lower-numbered adjacent element toward the higher-numbered
//! one. Each element stores, per edge, the sign `s` with `s * n_e` equal to
//! its outward normal.

mod build;
pub mod geometry;
mod io;
mod regularity;

use std::collections::HashMap;

pub use build::{build_polygonal, build_uniform_triangular, build_voronoi};
pub use geometry::Point;
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use regularity::{check_shape_regularity, RegularityReport};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub pos: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: usize,
    /// Endpoints in the order the first adjacent element traverses them.
    pub vertices: [usize; 2],
    pub normal: Point,
    /// Unit vector from the first endpoint to the second.
    pub tangent: Point,
    pub midpoint: Point,
    pub length: f64,
    /// First entry is the lower element id; second is `None` on the boundary.
    pub elements: (usize, Option<usize>),
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.elements.1.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: usize,
    /// Counter-clockwise vertex loop.
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]`.
    pub edges: Vec<usize>,
    pub edge_signs: Vec<f64>,
    pub area: f64,
    pub diameter: f64,
    pub centroid: Point,
    pub convex: bool,
}

impl Element {
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn local_edge(&self, edge: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == edge)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    elements: Vec<Element>,
    h: f64,
}

impl Mesh {
    /// Builds a mesh from vertex coordinates and counter-clockwise element
    /// loops and derives the edge data. `h` overrides the reported
    /// mesh size (defaults to the largest element diameter).
    pub fn from_polygons(points: Vec<Point>, loops: Vec<Vec<usize>>, h: Option<f64>) -> Result<Mesh> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("vertex {i} has non-finite coordinates")));
        }
        let vertices: Vec<Vertex> = points
            .iter()
            .enumerate()
            .map(|(id, &pos)| Vertex { id, pos })
            .collect();

        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elements = Vec::with_capacity(loops.len());

        for (id, vloop) in loops.into_iter().enumerate() {
            let m = vloop.len();
            if m < 3 {
                return Err(Error::InvalidElement { element: id, message: format!("{m} vertices") });
            }
            if let Some(&v) = vloop.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidElement { element: id, message: format!("unknown vertex {v}") });
            }
            let pts: Vec<Point> = vloop.iter().map(|&v| points[v]).collect();
            if !geometry::is_simple(&pts) {
                return Err(Error::InvalidElement { element: id, message: "vertex loop is not simple".into() });
            }
            let area = geometry::signed_area(&pts);
            if area <= 0.0 {
                return Err(Error::InvalidElement {
                    element: id,
                    message: format!("vertex loop is not counter-clockwise (signed area {area:e})"),
                });
            }

            let mut edge_ids = Vec::with_capacity(m);
            let mut signs = Vec::with_capacity(m);
            for i in 0..m {
                let (a, b) = (vloop[i], vloop[(i + 1) % m]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let eid = edges.len();
                        let (pa, pb) = (points[a], points[b]);
                        let length = pa.distance(pb);
                        let tangent = (pb - pa) * (1.0 / length);
                        edges.push(Edge {
                            id: eid,
                            vertices: [a, b],
                            normal: tangent.rotate_cw(),
                            tangent,
                            midpoint: (pa + pb) * 0.5,
                            length,
                            elements: (id, None),
                        });
                        lookup.insert(key, eid);
                        edge_ids.push(eid);
                        signs.push(1.0);
                    }
                    Some(&eid) => {
                        let edge = &mut edges[eid];
                        if edge.elements.1.is_some() || edge.elements.0 == id {
                            return Err(Error::Topology {
                                edge: eid,
                                message: "edge shared by more than two elements".into(),
                            });
                        }
                        if edge.vertices != [b, a] {
                            return Err(Error::Topology {
                                edge: eid,
                                message: "neighbouring elements traverse the edge in the same direction".into(),
                            });
                        }
                        edge.elements.1 = Some(id);
                        edge_ids.push(eid);
                        signs.push(-1.0);
                    }
                }
            }

            elements.push(Element {
                id,
                diameter: geometry::diameter(&pts),
                centroid: geometry::polygon_centroid(&pts),
                convex: geometry::is_convex(&pts),
                vertices: vloop,
                edges: edge_ids,
                edge_signs: signs,
                area,
            });
        }

        if elements.is_empty() {
            return Err(Error::InvalidArgument("mesh has no elements".into()));
        }
        let h = h.unwrap_or_else(|| elements.iter().map(|e| e.diameter).fold(0.0, f64::max));
        let mesh = Mesh { vertices, edges, elements, h };
        mesh.check_area_balance()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn vertex(&self, id: usize) -> Point {
        self.vertices[id].pos
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn element(&self, id: usize) -> &Element {
        &self.elements[id]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_boundary_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    /// Global mesh parameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dimension(&self) -> usize {
        2
    }

    pub fn element_points(&self, element: usize) -> Vec<Point> {
        self.elements[element].vertices.iter().map(|&v| self.vertex(v)).collect()
    }

    /// Outward unit normal of `element` on `edge`.
    pub fn outward_normal(&self, element: usize, edge: usize) -> Result<Point> {
        let el = &self.elements[element];
        let local = el.local_edge(edge).ok_or(Error::EdgeNotInElement { element, edge })?;
        Ok(self.edges[edge].normal * el.edge_signs[local])
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// Area enclosed by the boundary edges, computed from the boundary alone.
    pub fn domain_area(&self) -> f64 {
        self.edges
            .iter()
            .filter(|e| e.is_boundary())
            .map(|e| e.length * e.midpoint.x * e.normal.x)
            .sum()
    }

    fn check_area_balance(&self) -> Result<()> {
        let (total, domain) = (self.total_area(), self.domain_area());
        if (total - domain).abs() > 1e-10 * domain.abs() {
            return Err(Error::Topology {
                edge: self.edges.iter().position(|e| e.is_boundary()).unwrap_or(0),
                message: format!("element areas sum to {total} but the boundary encloses {domain}"),
            });
        }
        Ok(())
    }
}
