use nalgebra::{DMatrix, DVector};

use super::quadrature::QuadratureRule;
use crate::discretization::poly_dim;
use crate::error::{Error, Result};
use crate::mesh::{Edge, Element, Point};

/// Scaled monomials `((x - x_T)/h_T)^a ((y - y_T)/h_T)^b`, `a + b <= degree`,
/// in graded lexicographic order: 1, x, y, x^2, xy, y^2, ...
///
/// Optionally carries a lower-triangular transform `C` so that the basis is
/// `C * monomials`. Because the order is graded, the leading `poly_dim(r)`
/// functions of a transformed basis still span `P_r`.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    center: Point,
    scale: f64,
    degree: usize,
    exponents: Vec<(usize, usize)>,
    transform: Option<DMatrix<f64>>,
}

impl ElementBasis {
    pub fn monomial(center: Point, scale: f64, degree: usize) -> Self {
        let exponents = (0..=degree)
            .flat_map(|d| (0..=d).map(move |j| (d - j, j)))
            .collect();
        Self { center, scale, degree, exponents, transform: None }
    }

    pub fn for_element(element: &Element, degree: usize) -> Self {
        Self::monomial(element.centroid, element.diameter, degree)
    }

    /// Gram-Schmidt (via Cholesky of the Gram matrix) on the given rule.
    pub fn orthonormalized(self, rule: &QuadratureRule) -> Result<Self> {
        let plain = Self { transform: None, ..self.clone() };
        let gram = mass_matrix(&plain, rule);
        let chol = gram.cholesky().ok_or_else(|| Error::SingularMass { context: "orthonormalization".into() })?;
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(self.dim(), self.dim()))
            .ok_or_else(|| Error::SingularMass { context: "orthonormalization".into() })?;
        Ok(Self { transform: Some(l_inv), ..plain })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_orthonormal(&self) -> bool {
        self.transform.is_some()
    }

    /// The sub-basis spanning polynomials of degree at most `degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        assert!(degree <= self.degree);
        let n = poly_dim(degree);
        Self {
            center: self.center,
            scale: self.scale,
            degree,
            exponents: self.exponents[..n].to_vec(),
            transform: self.transform.as_ref().map(|t| t.view((0, 0), (n, n)).into_owned()),
        }
    }

    fn powers(&self, p: Point) -> (Vec<f64>, Vec<f64>) {
        let xi = (p.x - self.center.x) / self.scale;
        let eta = (p.y - self.center.y) / self.scale;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    fn apply_transform(&self, raw: Vec<f64>) -> Vec<f64> {
        match &self.transform {
            None => raw,
            Some(t) => (t * DVector::from_vec(raw)).data.into(),
        }
    }

    pub fn values(&self, p: Point) -> Vec<f64> {
        let (px, py) = self.powers(p);
        let raw = self.exponents.iter().map(|&(a, b)| px[a] * py[b]).collect();
        self.apply_transform(raw)
    }

    pub fn gradients(&self, p: Point) -> Vec<Point> {
        let (px, py) = self.powers(p);
        let s = self.scale;
        let gx: Vec<f64> = self
            .exponents
            .iter()
            .map(|&(a, b)| if a == 0 { 0.0 } else { a as f64 * px[a - 1] * py[b] / s })
            .collect();
        let gy: Vec<f64> = self
            .exponents
            .iter()
            .map(|&(a, b)| if b == 0 { 0.0 } else { b as f64 * px[a] * py[b - 1] / s })
            .collect();
        let (gx, gy) = (self.apply_transform(gx), self.apply_transform(gy));
        gx.into_iter().zip(gy).map(|(x, y)| Point::new(x, y)).collect()
    }

    /// Exact Laplacians of the basis functions at `p`.
    pub fn laplacians(&self, p: Point) -> Vec<f64> {
        let (px, py) = self.powers(p);
        let s2 = self.scale * self.scale;
        let raw = self
            .exponents
            .iter()
            .map(|&(a, b)| {
                let mut v = 0.0;
                if a >= 2 {
                    v += (a * (a - 1)) as f64 * px[a - 2] * py[b];
                }
                if b >= 2 {
                    v += (b * (b - 1)) as f64 * px[a] * py[b - 2];
                }
                v / s2
            })
            .collect();
        self.apply_transform(raw)
    }

    pub fn evaluate(&self, coeffs: &[f64], p: Point) -> f64 {
        self.values(p).iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }

    pub fn evaluate_gradient(&self, coeffs: &[f64], p: Point) -> Point {
        self.gradients(p)
            .iter()
            .zip(coeffs)
            .fold(Point::default(), |acc, (g, &c)| acc + *g * c)
    }
}

/// Monomials `t^j`, `j <= degree`, in the centered arclength coordinate
/// `t = (x - m_e) . tau_e / h_e` in `[-1/2, 1/2]`.
#[derive(Debug, Clone)]
pub struct EdgeBasis {
    midpoint: Point,
    tangent: Point,
    length: f64,
    degree: usize,
}

impl EdgeBasis {
    pub fn new(edge: &Edge, degree: usize) -> Self {
        Self { midpoint: edge.midpoint, tangent: edge.tangent, length: edge.length, degree }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn parameter(&self, p: Point) -> f64 {
        (p - self.midpoint).dot(self.tangent) / self.length
    }

    pub fn values(&self, p: Point) -> Vec<f64> {
        let t = self.parameter(p);
        let mut out = vec![1.0; self.degree + 1];
        for j in 1..=self.degree {
            out[j] = out[j - 1] * t;
        }
        out
    }

    pub fn evaluate(&self, coeffs: &[f64], p: Point) -> f64 {
        self.values(p).iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }
}

/// Gram matrix of an element basis under a quadrature rule.
pub fn mass_matrix(basis: &ElementBasis, rule: &QuadratureRule) -> DMatrix<f64> {
    gram(basis.dim(), rule, |p| basis.values(p))
}

pub fn edge_mass_matrix(basis: &EdgeBasis, rule: &QuadratureRule) -> DMatrix<f64> {
    gram(basis.dim(), rule, |p| basis.values(p))
}

fn gram(n: usize, rule: &QuadratureRule, values: impl Fn(Point) -> Vec<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let v = values(p);
        for i in 0..n {
            let wi = w * v[i];
            for j in 0..=i {
                m[(i, j)] += wi * v[j];
            }
        }
    }
    m.fill_upper_triangle_with_lower_triangle();
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order() {
        let b = ElementBasis::monomial(Point::default(), 1.0, 2);
        assert_eq!(b.exponents, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        assert_eq!(b.dim(), 6);
        let v = b.values(Point::new(2.0, 3.0));
        assert_eq!(v, vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = ElementBasis::monomial(Point::new(0.3, -0.2), 0.7, 4);
        let p = Point::new(0.45, 0.1);
        let h = 1e-4;
        let g = b.gradients(p);
        let lap = b.laplacians(p);
        let f = |q: Point| b.values(q);
        let (c, xp, xm, yp, ym) = (
            f(p),
            f(p + Point::new(h, 0.0)),
            f(p - Point::new(h, 0.0)),
            f(p + Point::new(0.0, h)),
            f(p - Point::new(0.0, h)),
        );
        for i in 0..b.dim() {
            let gx = (xp[i] - xm[i]) / (2.0 * h);
            let gy = (yp[i] - ym[i]) / (2.0 * h);
            let l = (xp[i] + xm[i] + yp[i] + ym[i] - 4.0 * c[i]) / (h * h);
            assert!((g[i].x - gx).abs() < 1e-6, "d/dx of basis {i}");
            assert!((g[i].y - gy).abs() < 1e-6, "d/dy of basis {i}");
            assert!((lap[i] - l).abs() < 1e-4, "laplacian of basis {i}");
        }
    }

    #[test]
    fn constant_function_is_one_at_center() {
        let b = ElementBasis::monomial(Point::new(0.2, 0.4), 0.1, 3);
        assert_eq!(b.values(Point::new(0.2, 0.4))[0], 1.0);
    }
}
