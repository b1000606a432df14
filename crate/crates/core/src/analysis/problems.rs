use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::mesh::Point;

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point) -> Point + Send + Sync>;
/// Boundary datum evaluated at a point with the outward unit normal.
pub type NormalField = Arc<dyn Fn(Point, Point) -> f64 + Send + Sync>;

/// A known solution with the derivatives the error analysis needs.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub grad: VectorField,
    pub laplacian: ScalarField,
}

/// `Δ²u = f` in the unit square with `u = ζ`, `∂u/∂n = φ` on the boundary.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
    pub neumann: NormalField,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl Problem {
    /// Boundary data taken from the exact solution: `ζ = u`, `φ = ∇u·n`.
    pub fn manufactured(name: impl Into<String>, exact: ExactSolution, source: ScalarField) -> Self {
        let (u, grad) = (exact.u.clone(), exact.grad.clone());
        Self {
            name: name.into(),
            source,
            dirichlet: Arc::new(move |p| u(p)),
            neumann: Arc::new(move |p, n| grad(p).dot(n)),
            exact: Some(exact),
        }
    }

    /// `u = x²(1-x)² y²(1-y)²`, homogeneous clamped boundary.
    pub fn case1() -> Self {
        let exact = ExactSolution {
            u: Arc::new(|p| bump(p.x) * bump(p.y)),
            grad: Arc::new(|p| Point::new(bump_d1(p.x) * bump(p.y), bump(p.x) * bump_d1(p.y))),
            laplacian: Arc::new(|p| bump_d2(p.x) * bump(p.y) + bump(p.x) * bump_d2(p.y)),
        };
        Self::manufactured("case1", exact, Arc::new(case1_source))
    }

    /// `u = sin(πx) sin(πy)`, `f = 4π⁴ u`.
    pub fn case2() -> Self {
        let exact = ExactSolution {
            u: Arc::new(|p| (PI * p.x).sin() * (PI * p.y).sin()),
            grad: Arc::new(|p| {
                Point::new(
                    PI * (PI * p.x).cos() * (PI * p.y).sin(),
                    PI * (PI * p.x).sin() * (PI * p.y).cos(),
                )
            }),
            laplacian: Arc::new(|p| -2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin()),
        };
        Self::manufactured("case2", exact, Arc::new(case2_source))
    }

    /// Polynomial solution `Σ c x^a y^b` with all derivatives taken exactly.
    pub fn polynomial(terms: &[(f64, u32, u32)]) -> Self {
        let poly = Polynomial(terms.to_vec());
        let (pu, pg, pl, pf) = (poly.clone(), poly.clone(), poly.clone(), poly);
        let exact = ExactSolution {
            u: Arc::new(move |p| pu.eval(p)),
            grad: Arc::new(move |p| Point::new(pg.dx().eval(p), pg.dy().eval(p))),
            laplacian: Arc::new(move |p| pl.laplacian().eval(p)),
        };
        let source = Arc::new(move |p| pf.laplacian().laplacian().eval(p));
        Self::manufactured("polynomial", exact, source)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "case1" => Some(Self::case1()),
            "case2" => Some(Self::case2()),
            _ => None,
        }
    }
}

fn bump(t: f64) -> f64 {
    t * t * (1.0 - t) * (1.0 - t)
}

fn bump_d1(t: f64) -> f64 {
    2.0 * t - 6.0 * t * t + 4.0 * t * t * t
}

fn bump_d2(t: f64) -> f64 {
    2.0 - 12.0 * t + 12.0 * t * t
}

/// `Δ²(p(x) p(y)) = p''''(x) p(y) + 2 p''(x) p''(y) + p(x) p''''(y)` with
/// `p'''' = 24`.
pub fn case1_source(p: Point) -> f64 {
    24.0 * bump(p.y) + 2.0 * bump_d2(p.x) * bump_d2(p.y) + 24.0 * bump(p.x)
}

pub fn case2_source(p: Point) -> f64 {
    4.0 * PI.powi(4) * (PI * p.x).sin() * (PI * p.y).sin()
}

#[derive(Debug, Clone)]
struct Polynomial(Vec<(f64, u32, u32)>);

impl Polynomial {
    fn eval(&self, p: Point) -> f64 {
        self.0
            .iter()
            .map(|&(c, a, b)| c * p.x.powi(a as i32) * p.y.powi(b as i32))
            .sum()
    }

    fn dx(&self) -> Self {
        Self(self.0.iter().filter(|t| t.1 > 0).map(|&(c, a, b)| (c * a as f64, a - 1, b)).collect())
    }

    fn dy(&self) -> Self {
        Self(self.0.iter().filter(|t| t.2 > 0).map(|&(c, a, b)| (c * b as f64, a, b - 1)).collect())
    }

    fn laplacian(&self) -> Self {
        let mut terms = self.dx().dx().0;
        terms.extend(self.dy().dy().0);
        Self(terms)
    }
}
