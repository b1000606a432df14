use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::{geometry, Mesh, Point};

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

const MAX_GAUSS_POINTS: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    assert!((1..=MAX_GAUSS_POINTS).contains(&n), "Gauss-Legendre order {n} out of range");
    &TABLE.get_or_init(|| (0..=MAX_GAUSS_POINTS).map(compute_gauss_legendre).collect())[n]
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `P_n(z)` and its derivative by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss rule on the segment `a-b` exact for polynomials of `degree`.
pub fn segment_rule(a: Point, b: Point, degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    let half = a.distance(b) * 0.5;
    let mid = (a + b) * 0.5;
    let dir = (b - a) * 0.5;
    QuadratureRule {
        points: x.iter().map(|&t| mid + dir * t).collect(),
        weights: w.iter().map(|&wi| wi * half).collect(),
        degree,
    }
}

/// Collapsed (Duffy) product rule on the triangle `abc`, exact for `degree`.
/// All weights are positive.
pub fn triangle_rule(a: Point, b: Point, c: Point, degree: usize) -> QuadratureRule {
    // the collapse adds a factor (1 - u) in the first direction
    let nu = (degree + 1) / 2 + 1;
    let nv = degree / 2 + 1;
    let (xu, wu) = gauss_legendre(nu);
    let (xv, wv) = gauss_legendre(nv);
    let jac = (b - a).cross(c - a).abs();
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for (&su, &au) in xu.iter().zip(wu) {
        let u = 0.5 * (su + 1.0);
        for (&sv, &av) in xv.iter().zip(wv) {
            let v = 0.5 * (sv + 1.0) * (1.0 - u);
            points.push(a + (b - a) * u + (c - a) * v);
            weights.push(0.25 * au * av * (1.0 - u) * jac);
        }
    }
    QuadratureRule { points, weights, degree }
}

/// Rule on a polygonal element: the polygon is split into triangles (a fan
/// when convex, ear clipping otherwise) and a triangle rule mapped onto each.
pub fn element_quadrature(mesh: &Mesh, element: usize, degree: usize) -> Result<QuadratureRule> {
    let el = mesh.element(element);
    if el.area < 1e-14 {
        return Err(Error::DegenerateCell { element, area: el.area });
    }
    Ok(polygon_rule(&mesh.element_points(element), degree))
}

pub fn polygon_rule(points: &[Point], degree: usize) -> QuadratureRule {
    let tris = geometry::triangulate(points);
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new(), degree };
    for t in tris {
        let r = triangle_rule(points[t[0]], points[t[1]], points[t[2]], degree);
        rule.points.extend(r.points);
        rule.weights.extend(r.weights);
    }
    rule
}

pub fn edge_quadrature(mesh: &Mesh, edge: usize, degree: usize) -> QuadratureRule {
    let e = mesh.edge(edge);
    segment_rule(mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]), degree)
}

/// Polar product rule on a disk, exact for polynomials of `degree`.
pub fn disk_rule(center: Point, radius: f64, degree: usize) -> QuadratureRule {
    // radial integrand r^(d+1) on [0, R]; trapezoid in angle is exact up to degree
    let nr = (degree + 1) / 2 + 1;
    let nt = degree + 1;
    let (xr, wr) = gauss_legendre(nr);
    let mut points = Vec::with_capacity(nr * nt);
    let mut weights = Vec::with_capacity(nr * nt);
    for (&s, &ws) in xr.iter().zip(wr) {
        let r = 0.5 * radius * (s + 1.0);
        for j in 0..nt {
            let theta = 2.0 * PI * j as f64 / nt as f64;
            points.push(center + Point::new(theta.cos(), theta.sin()) * r);
            weights.push(0.5 * radius * ws * r * 2.0 * PI / nt as f64);
        }
    }
    QuadratureRule { points, weights, degree }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    /// int_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!.
    fn reference_moment(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(a) * fact(b) / fact(a + b + 2)
    }

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                let q: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(d as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} d={d}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn triangle_rule_is_exact() {
        let o = Point::new(0.0, 0.0);
        let (a, b) = (Point::new(1.0, 0.0), Point::new(0.0, 1.0));
        for degree in 0..=14u32 {
            let r = triangle_rule(o, a, b, degree as usize);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.measure() - 0.5).abs() < 1e-15);
            for i in 0..=degree {
                for j in 0..=degree - i {
                    let q = r.integrate(|p| p.x.powi(i as i32) * p.y.powi(j as i32));
                    let exact = reference_moment(i, j);
                    assert!((q - exact).abs() <= 1e-12 * exact, "deg {degree}: x^{i} y^{j}");
                }
            }
        }
        let r = triangle_rule(o, a, b, 1);
        assert!((r.integrate(|p| p.x) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn polygon_rule_on_unit_square() {
        let m = Mesh::from_polygons(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)],
            vec![vec![0, 1, 2, 3]],
            None,
        )
        .unwrap();
        let r = element_quadrature(&m, 0, 6).unwrap();
        assert!((r.measure() - 1.0).abs() < 1e-14);
        // int x^3 y^2 = 1/12
        assert!((r.integrate(|p| p.x.powi(3) * p.y.powi(2)) - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn segment_rule_moments() {
        let r = segment_rule(Point::new(0.0, 0.0), Point::new(1.0, 0.0), 4);
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((r.integrate(|p| p.x) - 0.5).abs() < 1e-15);
        assert!((r.integrate(|p| p.x * p.x) - 1.0 / 3.0).abs() < 1e-15);
        let slanted = segment_rule(Point::new(0.0, 1.0), Point::new(1.0, 0.0), 2);
        assert!((slanted.measure() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn disk_rule_moments() {
        let r = disk_rule(Point::new(0.2, 0.3), 0.5, 6);
        assert!((r.measure() - PI * 0.25).abs() < 1e-14);
        // int (x - cx)^2 over the disk = pi R^4 / 4
        let q = r.integrate(|p| (p.x - 0.2).powi(2));
        assert!((q - PI * 0.5f64.powi(4) / 4.0).abs() < 1e-14);
        let q = r.integrate(|p| (p.x - 0.2).powi(2) * (p.y - 0.3).powi(4));
        // pi R^8 / 64 for x^2 y^4
        assert!((q - PI * 0.5f64.powi(8) / 64.0).abs() < 1e-15);
    }
}
