use std::fmt::Write as _;

use super::norms::{l2_norm_element, triple_bar_norm};
use super::problems::{ExactSolution, Problem};
use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::mesh::{build_uniform_triangular, Mesh, Point};
use crate::polyspace::embed_exact_solution;
use crate::system::{assemble, solve, LoadData, SolverOptions, SparseSystem};

/// Errors below this are treated as round-off and get no order.
pub const ORDER_NOISE_FLOOR: f64 = 1e-9;

/// A solved discrete problem.
#[derive(Debug, Clone)]
pub struct Solution {
    pub system: SparseSystem,
    /// Full DOF vector, boundary values included.
    pub values: Vec<f64>,
}

pub fn solve_problem(mesh: &Mesh, disc: &Discretization, problem: &Problem, options: &SolverOptions) -> Result<Solution> {
    let data = LoadData {
        source: problem.source.as_ref(),
        dirichlet: problem.dirichlet.as_ref(),
        neumann: problem.neumann.as_ref(),
    };
    let system = assemble(mesh, disc, &data)?;
    let values = solve(&system, options)?;
    Ok(Solution { system, values })
}

/// Errors of a discrete solution against the projection of the exact one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    /// `|||u_h - Q_h u|||`.
    pub err_h2: f64,
    /// `‖u_0 - Q_0 u‖`.
    pub err_l2: f64,
}

pub fn error_vs_projection(
    mesh: &Mesh,
    disc: &Discretization,
    uh: &[f64],
    u: impl Fn(Point) -> f64 + Sync,
    grad: impl Fn(Point) -> Point + Sync,
) -> Result<ErrorReport> {
    let dofs = crate::system::DofMap::new(mesh, disc);
    if uh.len() != dofs.len() {
        return Err(Error::DimensionMismatch { expected: dofs.len(), got: uh.len() });
    }
    let qh = embed_exact_solution(mesh, *disc, &dofs, u, grad)?;
    let diff: Vec<f64> = uh.iter().zip(qh.iter()).map(|(a, b)| a - b).collect();
    Ok(ErrorReport {
        h: mesh.h(),
        err_h2: triple_bar_norm(mesh, disc, &diff)?,
        err_l2: l2_norm_element(mesh, disc, &diff)?,
    })
}

fn exact_of(problem: &Problem) -> Result<&ExactSolution> {
    problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("problem '{}' has no exact solution", problem.name)))
}

/// Solves `problem` on `mesh` and measures the error.
pub fn solve_and_measure(
    mesh: &Mesh,
    disc: &Discretization,
    problem: &Problem,
    options: &SolverOptions,
) -> Result<(Solution, ErrorReport)> {
    let exact = exact_of(problem)?;
    let sol = solve_problem(mesh, disc, problem, options)?;
    let report = error_vs_projection(mesh, disc, &sol.values, exact.u.as_ref(), exact.grad.as_ref())?;
    Ok((sol, report))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub err_h2: f64,
    pub order_h2: Option<f64>,
    pub err_l2: f64,
    pub order_l2: Option<f64>,
}

/// Errors per refinement level with observed orders
/// `log(e_{i-1}/e_i) / log(h_{i-1}/h_i)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

fn observed_order(e0: f64, e1: f64, h0: f64, h1: f64) -> Option<f64> {
    if e0 < ORDER_NOISE_FLOOR || e1 < ORDER_NOISE_FLOOR || h0 == h1 {
        return None;
    }
    Some((e0 / e1).ln() / (h0 / h1).ln())
}

impl ConvergenceTable {
    pub fn from_reports(reports: &[ErrorReport]) -> Self {
        let rows = reports
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let prev = i.checked_sub(1).map(|j| reports[j]);
                ConvergenceRow {
                    h: r.h,
                    err_h2: r.err_h2,
                    err_l2: r.err_l2,
                    order_h2: prev.and_then(|p| observed_order(p.err_h2, r.err_h2, p.h, r.h)),
                    order_l2: prev.and_then(|p| observed_order(p.err_l2, r.err_l2, p.h, r.h)),
                }
            })
            .collect();
        Self { rows }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>12}  {:>12}  {:>10}  {:>12}  {:>10}", "h", "err_H2", "order", "err_L2", "order");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>12}  {:>12}  {:>10}  {:>12}  {:>10}",
                sci(r.h),
                sci(r.err_h2),
                order_text(r.order_h2),
                sci(r.err_l2),
                order_text(r.order_l2)
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,err_h2,order_h2,err_l2,order_l2\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                sci(r.h),
                sci(r.err_h2),
                order_text(r.order_h2),
                sci(r.err_l2),
                order_text(r.order_l2)
            );
        }
        out
    }
}

fn order_text(order: Option<f64>) -> String {
    order.map_or_else(String::new, |o| format!("{o:.4}"))
}

/// Five significant digits with a signed two-digit exponent: `2.5683e-01`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// One solve per mesh, in order.
pub fn convergence_study(
    problem: &Problem,
    disc: &Discretization,
    meshes: &[Mesh],
    options: &SolverOptions,
) -> Result<ConvergenceTable> {
    let reports = meshes
        .iter()
        .map(|m| solve_and_measure(m, disc, problem, options).map(|(_, r)| r))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable::from_reports(&reports))
}

/// Convergence on uniform triangular meshes with `n × n` squares.
pub fn uniform_convergence(
    problem: &Problem,
    disc: &Discretization,
    n_list: &[usize],
    options: &SolverOptions,
) -> Result<ConvergenceTable> {
    let meshes: Vec<Mesh> = n_list.iter().map(|&n| build_uniform_triangular(n)).collect();
    convergence_study(problem, disc, &meshes, options)
}
