//! Sampling estimates of the best constants in the polynomial trace and
//! inverse inequalities.
//!
//! Every estimator draws coefficient vectors uniformly from `[-1, 1]` in the
//! scaled monomial basis of each element and reports the largest observed
//! quotient. The same draws are reused on every element, so on meshes of
//! similar elements the estimate does not depend on the mesh size.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::discretization::poly_dim;
use crate::error::{Error, Result};
use crate::mesh::geometry::{contains_point, signed_area};
use crate::mesh::{Mesh, Point};
use crate::polyspace::{disk_rule, edge_quadrature, element_quadrature, triangle_rule, ElementBasis, QuadratureRule};

pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityKind {
    /// `‖θ‖ᵖ_e ≤ C h_T⁻¹ (‖θ‖ᵖ_T + h_Tᵖ ‖∇θ‖ᵖ_T)`.
    Trace,
    /// `‖∇φ‖_T ≤ C h_T⁻¹ ‖φ‖_T`.
    Inverse,
    /// `‖φ‖_{Lᵖ(Ω)} ≤ C h^{2/p - 2/r} ‖φ‖_{Lʳ(Ω)}` for piecewise polynomials.
    LpInverse,
    /// `‖v‖_K ≤ C ‖v‖_S` for a ball `S` inside a triangle `K`.
    DomainInverse,
}

impl InequalityKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Trace => "trace",
            Self::Inverse => "inverse",
            Self::LpInverse => "lp-inverse",
            Self::DomainInverse => "domain-inverse",
        }
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityEstimate {
    pub kind: InequalityKind,
    /// Largest sampled quotient.
    pub constant: f64,
    pub samples: usize,
    pub seed: u64,
}

fn draw_coefficients(dim: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect()
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    Ok(())
}

/// Basis values (and optionally gradients) tabulated at the points of a rule.
struct Tabulated {
    weights: Vec<f64>,
    values: Vec<Vec<f64>>,
    gradients: Vec<Vec<Point>>,
}

impl Tabulated {
    fn new(basis: &ElementBasis, rule: &QuadratureRule, with_gradients: bool) -> Self {
        Self {
            weights: rule.weights.clone(),
            values: rule.points.iter().map(|&p| basis.values(p)).collect(),
            gradients: if with_gradients { rule.points.iter().map(|&p| basis.gradients(p)).collect() } else { Vec::new() },
        }
    }

    /// `∫ |Σ c_i φ_i|ᵖ`.
    fn power(&self, c: &[f64], p: f64) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * dot(c, v).abs().powf(p)).sum()
    }

    /// `∫ |∇ Σ c_i φ_i|ᵖ`.
    fn gradient_power(&self, c: &[f64], p: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.gradients)
            .map(|(w, g)| {
                let v = c.iter().zip(g).fold(Point::new(0.0, 0.0), |acc, (&ci, &gi)| acc + gi * ci);
                w * v.norm().powf(p)
            })
            .sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exactness for `|φ|ᵖ` with `φ ∈ P_k`; exact when `p` is an even integer.
fn power_exactness(k: usize, p: f64) -> usize {
    (k as f64 * p).ceil() as usize + 2
}

fn max_finite(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().filter(|q| q.is_finite()).fold(0.0, f64::max)
}

/// Trace quotient `‖θ‖ᵖ_e / (h_T⁻¹ (‖θ‖ᵖ_T + h_Tᵖ ‖∇θ‖ᵖ_T))` maximized over
/// edges of one element.
pub fn trace_quotient(mesh: &Mesh, element: usize, k: usize, p: f64, coeffs: &[f64]) -> Result<f64> {
    Ok(max_finite(trace_quotients(mesh, element, k, p, std::slice::from_ref(&coeffs.to_vec()))?))
}

fn trace_quotients(mesh: &Mesh, element: usize, k: usize, p: f64, draws: &[Vec<f64>]) -> Result<Vec<f64>> {
    let el = mesh.element(element);
    let h = el.diameter;
    let basis = ElementBasis::for_element(el, k);
    let deg = power_exactness(k, p);
    let inner = Tabulated::new(&basis, &element_quadrature(mesh, element, deg)?, true);
    let edges: Vec<Tabulated> =
        el.edges.iter().map(|&e| Tabulated::new(&basis, &edge_quadrature(mesh, e, deg), false)).collect();
    let mut out = Vec::with_capacity(draws.len() * edges.len());
    for c in draws {
        let denom = (inner.power(c, p) + h.powf(p) * inner.gradient_power(c, p)) / h;
        if denom <= 0.0 {
            continue;
        }
        out.extend(edges.iter().map(|e| e.power(c, p) / denom));
    }
    Ok(out)
}

pub fn estimate_trace_constant(mesh: &Mesh, k: usize, p: f64, samples: usize, seed: u64) -> Result<InequalityEstimate> {
    check_samples(samples)?;
    if p < 1.0 {
        return Err(Error::InvalidArgument(format!("trace inequality needs p >= 1, got {p}")));
    }
    let draws = draw_coefficients(poly_dim(k), samples, seed);
    let per_element: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| trace_quotients(mesh, t, k, p, &draws).map(max_finite))
        .collect::<Result<_>>()?;
    Ok(InequalityEstimate { kind: InequalityKind::Trace, constant: max_finite(per_element), samples, seed })
}

/// `h_T ‖∇φ‖_T / ‖φ‖_T` for one polynomial on one element.
pub fn inverse_quotient(mesh: &Mesh, element: usize, k: usize, coeffs: &[f64]) -> Result<f64> {
    Ok(max_finite(inverse_quotients(mesh, element, k, std::slice::from_ref(&coeffs.to_vec()))?))
}

fn inverse_quotients(mesh: &Mesh, element: usize, k: usize, draws: &[Vec<f64>]) -> Result<Vec<f64>> {
    let el = mesh.element(element);
    let basis = ElementBasis::for_element(el, k);
    let tab = Tabulated::new(&basis, &element_quadrature(mesh, element, 2 * k)?, true);
    Ok(draws
        .iter()
        .filter_map(|c| {
            let den = tab.power(c, 2.0);
            (den > 0.0).then(|| el.diameter * (tab.gradient_power(c, 2.0) / den).sqrt())
        })
        .collect())
}

pub fn estimate_inverse_constant(mesh: &Mesh, k: usize, samples: usize, seed: u64) -> Result<InequalityEstimate> {
    check_samples(samples)?;
    let draws = draw_coefficients(poly_dim(k), samples, seed);
    let per_element: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| inverse_quotients(mesh, t, k, &draws).map(max_finite))
        .collect::<Result<_>>()?;
    Ok(InequalityEstimate { kind: InequalityKind::Inverse, constant: max_finite(per_element), samples, seed })
}

fn check_exponents(p: f64, r: f64) -> Result<()> {
    if !(r >= 1.0 && p >= r && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("lp-inverse needs p >= r >= 1, got p = {p}, r = {r}")));
    }
    Ok(())
}

struct LpTables {
    tables: Vec<Tabulated>,
}

impl LpTables {
    fn new(mesh: &Mesh, k: usize, p: f64, r: f64) -> Result<Self> {
        let deg = power_exactness(k, p.max(r));
        let tables = (0..mesh.num_elements())
            .into_par_iter()
            .map(|t| {
                let basis = ElementBasis::for_element(mesh.element(t), k);
                Ok(Tabulated::new(&basis, &element_quadrature(mesh, t, deg)?, false))
            })
            .collect::<Result<_>>()?;
        Ok(Self { tables })
    }

    /// `(∫|φ|ᵖ, ∫|φ|ʳ)` summed over the elements where `φ` is given.
    fn powers<'a>(&self, pieces: impl Iterator<Item = (usize, &'a [f64])>, p: f64, r: f64) -> (f64, f64) {
        pieces.fold((0.0, 0.0), |(a, b), (t, c)| (a + self.tables[t].power(c, p), b + self.tables[t].power(c, r)))
    }
}

fn lp_ratio(pp: f64, rr: f64, p: f64, r: f64, h: f64) -> Option<f64> {
    (rr > 0.0).then(|| pp.powf(1.0 / p) / (h.powf(2.0 / p - 2.0 / r) * rr.powf(1.0 / r)))
}

/// `‖φ‖_{Lᵖ(Ω)} / (h^{2/p - 2/r} ‖φ‖_{Lʳ(Ω)})` for a piecewise polynomial
/// given by one coefficient vector per element.
pub fn lp_inverse_quotient(mesh: &Mesh, k: usize, p: f64, r: f64, pieces: &[Vec<f64>]) -> Result<f64> {
    check_exponents(p, r)?;
    if pieces.len() != mesh.num_elements() {
        return Err(Error::DimensionMismatch { expected: mesh.num_elements(), got: pieces.len() });
    }
    let tables = LpTables::new(mesh, k, p, r)?;
    let (pp, rr) = tables.powers(pieces.iter().map(Vec::as_slice).enumerate(), p, r);
    lp_ratio(pp, rr, p, r, mesh.h()).ok_or_else(|| Error::InvalidArgument("zero function".into()))
}

/// Samples two families: one polynomial supported on a single element (for
/// every element) and global piecewise polynomials with independent pieces.
pub fn estimate_lp_inverse(mesh: &Mesh, k: usize, p: f64, r: f64, samples: usize, seed: u64) -> Result<InequalityEstimate> {
    check_samples(samples)?;
    check_exponents(p, r)?;
    let tables = LpTables::new(mesh, k, p, r)?;
    let h = mesh.h();
    let dim = poly_dim(k);
    let draws = draw_coefficients(dim, samples, seed);

    let local: Vec<f64> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|t| {
            max_finite(draws.iter().filter_map(|c| {
                let (pp, rr) = tables.powers(std::iter::once((t, c.as_slice())), p, r);
                lp_ratio(pp, rr, p, r, h)
            }))
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let global = max_finite((0..samples).filter_map(|_| {
        let pieces: Vec<Vec<f64>> = (0..mesh.num_elements())
            .map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
            .collect();
        let (pp, rr) = tables.powers(pieces.iter().map(Vec::as_slice).enumerate(), p, r);
        lp_ratio(pp, rr, p, r, h)
    }));

    Ok(InequalityEstimate {
        kind: InequalityKind::LpInverse,
        constant: max_finite(local).max(global),
        samples,
        seed,
    })
}

/// Whether the closed disk lies inside the triangle.
fn disk_inside_triangle(k: &[Point; 3], center: Point, radius: f64) -> bool {
    if !contains_point(k, center) {
        return false;
    }
    (0..3).all(|i| {
        let (a, b) = (k[i], k[(i + 1) % 3]);
        let t = b - a;
        (center - a).cross(t).abs() / t.norm() >= radius
    })
}

struct DomainPair {
    on_k: Tabulated,
    on_s: Tabulated,
}

impl DomainPair {
    fn new(k: &[Point; 3], center: Point, radius: f64, degree: usize) -> Result<Self> {
        if signed_area(k) == 0.0 || radius <= 0.0 {
            return Err(Error::InvalidArgument("degenerate simplex or ball".into()));
        }
        if !disk_inside_triangle(k, center, radius) {
            return Err(Error::InvalidArgument("ball is not contained in the simplex".into()));
        }
        let centroid = (k[0] + k[1] + k[2]) * (1.0 / 3.0);
        let diameter = (0..3).map(|i| k[i].distance(k[(i + 1) % 3])).fold(0.0, f64::max);
        let basis = ElementBasis::monomial(centroid, diameter, degree);
        Ok(Self {
            on_k: Tabulated::new(&basis, &triangle_rule(k[0], k[1], k[2], 2 * degree), false),
            on_s: Tabulated::new(&basis, &disk_rule(center, radius, 2 * degree), false),
        })
    }

    fn quotient(&self, c: &[f64]) -> Option<f64> {
        let s = self.on_s.power(c, 2.0);
        (s > 0.0).then(|| (self.on_k.power(c, 2.0) / s).sqrt())
    }
}

/// `‖v‖_{L²(K)} / ‖v‖_{L²(S)}` for one polynomial in the scaled basis of `K`.
pub fn domain_inverse_quotient(k: &[Point; 3], center: Point, radius: f64, degree: usize, coeffs: &[f64]) -> Result<f64> {
    DomainPair::new(k, center, radius, degree)?
        .quotient(coeffs)
        .ok_or_else(|| Error::InvalidArgument("zero polynomial".into()))
}

pub fn estimate_domain_inverse(
    k: &[Point; 3],
    center: Point,
    radius: f64,
    degree: usize,
    samples: usize,
    seed: u64,
) -> Result<InequalityEstimate> {
    check_samples(samples)?;
    let pair = DomainPair::new(k, center, radius, degree)?;
    let draws = draw_coefficients(poly_dim(degree), samples, seed);
    Ok(InequalityEstimate {
        kind: InequalityKind::DomainInverse,
        constant: max_finite(draws.iter().filter_map(|c| pair.quotient(c))),
        samples,
        seed,
    })
}
