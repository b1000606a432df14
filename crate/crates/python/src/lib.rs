//! Python bindings for building meshes and running solves. Convergence
//! tables and the inequality estimators are exposed as plain functions.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wgbih::analysis::inequalities::{self, DEFAULT_SEED};
use wgbih::analysis::{self, ConvergenceTable, Problem};
use wgbih::mesh::{self, Point};
use wgbih::system::{SolverKind, SolverOptions};
use wgbih::{Discretization, Error, Flavor, StabilizerScale};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::DimensionMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// A polygonal mesh of the unit square (or of a loaded domain).
#[pyclass(name = "Mesh", frozen)]
pub struct PyMesh {
    inner: mesh::Mesh,
    uniform: bool,
}

#[pymethods]
impl PyMesh {
    /// Uniform triangulation with `n × n` squares cut along the negative diagonal.
    #[staticmethod]
    fn uniform(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be at least 1"));
        }
        Ok(Self { inner: mesh::build_uniform_triangular(n), uniform: true })
    }

    /// Lloyd-relaxed Voronoi mesh with `cells` cells.
    #[staticmethod]
    #[pyo3(signature = (cells, lloyd = 10, seed = 42))]
    fn voronoi(py: Python<'_>, cells: usize, lloyd: usize, seed: u64) -> PyResult<Self> {
        let inner = py.detach(|| mesh::build_polygonal(cells, lloyd, seed)).map_err(to_py)?;
        Ok(Self { inner, uniform: false })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: mesh::load_mesh(path).map_err(to_py)?, uniform: false })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: mesh::parse_mesh(text).map_err(to_py)?, uniform: false })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        mesh::save_mesh(&self.inner, path).map_err(to_py)
    }

    fn to_text(&self) -> String {
        mesh::write_mesh(&self.inner)
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.num_elements()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    /// Vertex coordinates of one element, counter-clockwise.
    fn element_points(&self, element: usize) -> PyResult<Vec<(f64, f64)>> {
        if element >= self.inner.num_elements() {
            return Err(PyValueError::new_err(format!("element {element} out of range")));
        }
        Ok(self.inner.element_points(element).iter().map(|p| (p.x, p.y)).collect())
    }

    /// Shape-regularity constants as a dict.
    #[pyo3(signature = (sigma = 0.05))]
    fn regularity<'py>(&self, py: Python<'py>, sigma: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = mesh::check_shape_regularity(&self.inner, sigma);
        let d = PyDict::new(py);
        d.set_item("rho_v", r.rho_v)?;
        d.set_item("rho_e", r.rho_e)?;
        d.set_item("kappa", r.kappa)?;
        d.set_item("sigma_star", r.sigma_star)?;
        d.set_item("pyramids_ok", r.all_pyramids_ok())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Mesh(elements={}, edges={}, h={:.4e})", self.num_elements(), self.num_edges(), self.h())
    }
}

/// Settings shared by every solve on a mesh.
#[pyclass(name = "Discretization", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyDiscretization {
    inner: Discretization,
    /// `None` picks edge length on uniform meshes and diameter otherwise.
    scale: Option<StabilizerScale>,
}

impl PyDiscretization {
    fn for_mesh(&self, m: &PyMesh) -> Discretization {
        let auto = if m.uniform { StabilizerScale::EdgeLength } else { StabilizerScale::Diameter };
        self.inner.with_stabilizer_scale(self.scale.unwrap_or(auto))
    }
}

#[pymethods]
impl PyDiscretization {
    #[new]
    #[pyo3(signature = (k = 2, flavor = "algorithm2", stabilizer_scale = "auto", orthonormal = false, element_exactness = None, edge_exactness = None))]
    fn new(
        k: usize,
        flavor: &str,
        stabilizer_scale: &str,
        orthonormal: bool,
        element_exactness: Option<usize>,
        edge_exactness: Option<usize>,
    ) -> PyResult<Self> {
        let flavor: Flavor = flavor.parse().map_err(to_py)?;
        let mut inner = Discretization::new(k, flavor).map_err(to_py)?.with_orthonormal(orthonormal);
        inner = inner.with_exactness(
            element_exactness.unwrap_or(inner.element_exactness),
            edge_exactness.unwrap_or(inner.edge_exactness),
        );
        let scale = match stabilizer_scale {
            "auto" => None,
            s => Some(s.parse().map_err(to_py)?),
        };
        Ok(Self { inner, scale })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.degree
    }

    #[getter]
    fn flavor(&self) -> &'static str {
        self.inner.flavor.name()
    }

    fn __repr__(&self) -> String {
        let scale = self.scale.map_or("auto", |s| s.name());
        format!("Discretization(k={}, flavor={}, stabilizer_scale={scale})", self.inner.degree, self.inner.flavor)
    }
}

fn problem(case: &str, poly: Option<Vec<(f64, u32, u32)>>) -> PyResult<Problem> {
    match (case, poly) {
        ("polynomial", Some(terms)) => Ok(Problem::polynomial(&terms)),
        ("polynomial", None) => Err(PyValueError::new_err("case 'polynomial' needs poly=[(c, a, b), ...]")),
        (name, _) => Problem::by_name(name).ok_or_else(|| PyValueError::new_err(format!("unknown case '{name}'"))),
    }
}

fn solver(name: &str, tol: f64) -> PyResult<SolverOptions> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(PyValueError::new_err("tol must lie in (0, 1)"));
    }
    let kind = match name {
        "direct" => SolverKind::Direct,
        "cg" => SolverKind::ConjugateGradient { max_iterations: 100_000 },
        other => return Err(PyValueError::new_err(format!("unknown solver '{other}'"))),
    };
    Ok(SolverOptions { kind, tol })
}

/// Solves one problem. The returned dict holds the errors and the DOF vector.
#[pyfunction]
#[pyo3(signature = (mesh, disc, case = "case1", poly = None, solver_name = "direct", tol = 1e-10))]
fn solve<'py>(
    py: Python<'py>,
    mesh: &PyMesh,
    disc: &PyDiscretization,
    case: &str,
    poly: Option<Vec<(f64, u32, u32)>>,
    solver_name: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let problem = problem(case, poly)?;
    let options = solver(solver_name, tol)?;
    let d = disc.for_mesh(mesh);
    let (sol, report) = py.detach(|| analysis::solve_and_measure(&mesh.inner, &d, &problem, &options)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("err_h2", report.err_h2)?;
    out.set_item("err_l2", report.err_l2)?;
    out.set_item("h", report.h)?;
    out.set_item("num_dofs", sol.system.num_dofs())?;
    out.set_item("num_free", sol.system.num_free())?;
    out.set_item("values", sol.values)?;
    Ok(out)
}

/// Convergence table on uniform triangulations, one dict per row.
#[pyfunction]
#[pyo3(signature = (case = "case1", ns = vec![4, 8, 16, 32], disc = None))]
fn convergence<'py>(
    py: Python<'py>,
    case: &str,
    ns: Vec<usize>,
    disc: Option<PyDiscretization>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    if ns.contains(&0) {
        return Err(PyValueError::new_err("mesh sizes must be at least 1"));
    }
    let problem = problem(case, None)?;
    let disc = match disc {
        Some(d) => d,
        None => PyDiscretization::new(2, "algorithm2", "auto", false, None, None)?,
    };
    let d = disc.inner.with_stabilizer_scale(disc.scale.unwrap_or(StabilizerScale::EdgeLength));
    let table: ConvergenceTable = py
        .detach(|| analysis::uniform_convergence(&problem, &d, &ns, &SolverOptions::default()))
        .map_err(to_py)?;
    table
        .rows
        .iter()
        .map(|r| {
            let row = PyDict::new(py);
            row.set_item("h", r.h)?;
            row.set_item("err_h2", r.err_h2)?;
            row.set_item("order_h2", r.order_h2)?;
            row.set_item("err_l2", r.err_l2)?;
            row.set_item("order_l2", r.order_l2)?;
            Ok(row)
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (mesh, k = 2, p = 2.0, samples = 200, seed = DEFAULT_SEED))]
fn trace_constant(py: Python<'_>, mesh: &PyMesh, k: usize, p: f64, samples: usize, seed: u64) -> PyResult<f64> {
    py.detach(|| inequalities::estimate_trace_constant(&mesh.inner, k, p, samples, seed)).map(|e| e.constant).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (mesh, k = 2, samples = 200, seed = DEFAULT_SEED))]
fn inverse_constant(py: Python<'_>, mesh: &PyMesh, k: usize, samples: usize, seed: u64) -> PyResult<f64> {
    py.detach(|| inequalities::estimate_inverse_constant(&mesh.inner, k, samples, seed)).map(|e| e.constant).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (mesh, k = 2, p = 2.0, r = 1.0, samples = 200, seed = DEFAULT_SEED))]
fn lp_inverse_constant(py: Python<'_>, mesh: &PyMesh, k: usize, p: f64, r: f64, samples: usize, seed: u64) -> PyResult<f64> {
    py.detach(|| inequalities::estimate_lp_inverse(&mesh.inner, k, p, r, samples, seed)).map(|e| e.constant).map_err(to_py)
}

/// Domain inverse constant between a triangle and a disk inside it.
#[pyfunction]
#[pyo3(signature = (triangle, center, radius, k = 2, samples = 200, seed = DEFAULT_SEED))]
fn domain_inverse_constant(
    triangle: [(f64, f64); 3],
    center: (f64, f64),
    radius: f64,
    k: usize,
    samples: usize,
    seed: u64,
) -> PyResult<f64> {
    let tri = triangle.map(|(x, y)| Point::new(x, y));
    inequalities::estimate_domain_inverse(&tri, Point::new(center.0, center.1), radius, k, samples, seed)
        .map(|e| e.constant)
        .map_err(to_py)
}

/// Formats a number the way the tables print it, e.g. `2.5683e-01`.
#[pyfunction]
fn sci(x: f64) -> String {
    analysis::sci(x)
}

#[pymodule]
fn wgbih_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyDiscretization>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(trace_constant, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_constant, m)?)?;
    m.add_function(wrap_pyfunction!(lp_inverse_constant, m)?)?;
    m.add_function(wrap_pyfunction!(domain_inverse_constant, m)?)?;
    m.add_function(wrap_pyfunction!(sci, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_scale_follows_mesh_kind() {
        let d = PyDiscretization::new(2, "algorithm2", "auto", false, None, None).unwrap();
        let uniform = PyMesh::uniform(2).unwrap();
        assert_eq!(d.for_mesh(&uniform).stabilizer_scale, StabilizerScale::EdgeLength);
        let file = PyMesh { inner: mesh::build_uniform_triangular(2), uniform: false };
        assert_eq!(d.for_mesh(&file).stabilizer_scale, StabilizerScale::Diameter);
        let fixed = PyDiscretization::new(3, "algorithm1", "edge", false, Some(10), None).unwrap();
        assert_eq!(fixed.for_mesh(&file).stabilizer_scale, StabilizerScale::EdgeLength);
        assert_eq!(fixed.inner.element_exactness, 10);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        assert!(PyDiscretization::new(1, "algorithm2", "auto", false, None, None).is_err());
        assert!(PyDiscretization::new(2, "algorithm3", "auto", false, None, None).is_err());
        assert!(PyDiscretization::new(2, "algorithm2", "radius", false, None, None).is_err());
        assert!(solver("direct", 1.5).is_err());
        assert!(solver("lu", 1e-8).is_err());
        assert!(problem("polynomial", None).is_err());
        assert!(problem("case2", None).is_ok());
    }
}
