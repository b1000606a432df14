//! Command-line front end.
//!
//! Every flag can also be given in a `key = value` file passed with
//! `--config`. File entries are inserted after the subcommand name, and an
//! entry is dropped when the same flag is typed on the command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::inequalities::{self, DEFAULT_SEED};
use crate::analysis::{
    error_vs_projection, sci, solve_problem, ConvergenceTable, ErrorReport, InequalityEstimate, Problem,
};
use crate::discretization::{Discretization, Flavor, StabilizerScale};
use crate::error::{Error, Result};
use crate::mesh::{
    build_polygonal, build_uniform_triangular, check_shape_regularity, load_mesh, save_mesh, Mesh, Point,
};
use crate::system::{SolverKind, SolverOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest degree accepted without `--orthonormal`.
pub const MAX_MONOMIAL_DEGREE: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "wgbih", version, about = "Weak Galerkin solver for the biharmonic equation on polygonal meshes")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem and report the errors.
    Solve(SolveArgs),
    /// Solve on a sequence of meshes and print the convergence table.
    Convergence(SolveArgs),
    /// Report shape-regularity constants of meshes.
    MeshCheck(MeshCheckArgs),
    /// Estimate the constants of the polynomial trace and inverse inequalities.
    IneqCheck(IneqArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Read further options from a `key = value` file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Suppress tables on stdout; output files are still written.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    /// Uniform triangulations with n × n squares (comma-separated list).
    #[arg(long = "n", visible_alias = "uniform", value_delimiter = ',', value_name = "N")]
    pub n: Vec<usize>,
    /// Lloyd-relaxed Voronoi meshes with this many cells (comma-separated list).
    #[arg(long, value_delimiter = ',', value_name = "CELLS")]
    pub seeds: Vec<usize>,
    /// Lloyd iterations for Voronoi meshes.
    #[arg(long, default_value_t = 10)]
    pub lloyd: usize,
    /// Random seed for Voronoi generators and polynomial sampling.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Mesh files in the `polymesh` text format.
    #[arg(long, value_name = "FILE")]
    pub mesh: Vec<PathBuf>,
    /// Write the (first) mesh to this file.
    #[arg(long, value_name = "FILE")]
    pub save_mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    /// Edge length on uniform triangulations, element diameter otherwise.
    Auto,
    Edge,
    Diameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Direct,
    Cg,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Problem: case1, case2 or polynomial (with --poly).
    #[arg(long, default_value = "case1")]
    pub case: String,
    /// Polynomial solution as `c a b` terms for `c x^a y^b`, separated by `;`.
    #[arg(long, value_name = "TERMS")]
    pub poly: Option<String>,
    /// Polynomial degree k.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// algorithm1 (vector gradient trace) or algorithm2 (normal trace).
    #[arg(long, default_value = "algorithm2")]
    pub flavor: String,
    /// Orthonormalize the element basis; lifts the degree cap.
    #[arg(long)]
    pub orthonormal: bool,
    /// Quadrature exactness on elements (default 2k+2).
    #[arg(long)]
    pub element_exactness: Option<usize>,
    /// Quadrature exactness on edges (default 2k+2).
    #[arg(long)]
    pub edge_exactness: Option<usize>,
    /// Length used in the stabilizer weights.
    #[arg(long, value_enum, default_value_t = ScaleArg::Auto)]
    pub stabilizer_scale: ScaleArg,
    #[arg(long, value_enum, default_value_t = SolverArg::Direct)]
    pub solver: SolverArg,
    /// Relative residual bound of the linear solve.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iterations: usize,
    /// Write the error table as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Write `x,y,u` samples of the interior solution (solve only).
    #[arg(long, value_name = "FILE")]
    pub field: Option<PathBuf>,
    /// Write the reduced system matrix in MatrixMarket format (solve only).
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MeshCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Pyramid height threshold as a fraction of the element diameter.
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Fail when a cell area is below this value.
    #[arg(long, default_value_t = 1e-12)]
    pub min_area: f64,
    /// Fail when rho_v is below this value.
    #[arg(long, default_value_t = 0.0)]
    pub min_rho_v: f64,
    /// Fail when rho_e is below this value.
    #[arg(long, default_value_t = 0.0)]
    pub min_rho_e: f64,
    /// Fail when kappa is below this value.
    #[arg(long, default_value_t = 0.0)]
    pub min_kappa: f64,
}

#[derive(Debug, Clone, Args)]
pub struct IneqArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub mesh: MeshArgs,
    /// Trace inequality on element boundaries.
    #[arg(long)]
    pub trace: bool,
    /// Gradient inverse inequality.
    #[arg(long)]
    pub inverse: bool,
    /// Lp-Lr inverse inequality for piecewise polynomials.
    #[arg(long)]
    pub lp: bool,
    /// Domain inverse inequality between a triangle and an inscribed disk.
    #[arg(long)]
    pub domain: bool,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Exponent p (trace and lp-inverse).
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Exponent r of the lp-inverse inequality.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Disk radius relative to the reference triangle for the domain inequality.
    #[arg(long, default_value_t = 0.2)]
    pub radius: f64,
    /// Allowed max/min ratio of each constant across meshes
    /// (default 1.05 on uniform meshes, 3 otherwise).
    #[arg(long)]
    pub band: Option<f64>,
    /// Write the estimates as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{}", e.render()) } else { write!(err, "{}", e.render()) };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Run(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Splices the entries of a `--config` file in after the subcommand name.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut iter = args.iter().enumerate();
    while let Some((_, a)) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = iter.next().map(|(_, p)| PathBuf::from(p));
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--").map(|f| canonical_flag(f.split('=').next().unwrap_or(f))))
        .collect();
    let mut extra = Vec::new();
    let entries = parse_config(&fs::read_to_string(&path)?)?;
    let mut i = 0;
    while i < entries.len() {
        let flag = canonical_flag(entries[i].to_string_lossy().trim_start_matches('-'));
        let takes_value = entries.get(i + 1).is_some_and(|v| !v.to_string_lossy().starts_with("--"));
        let n = if takes_value { 2 } else { 1 };
        if !given.contains(&flag) {
            extra.extend_from_slice(&entries[i..i + n]);
        }
        i += n;
    }
    let insert_at = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map_or(args.len(), |i| i + 2);
    let mut out = args[..insert_at.min(args.len())].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[insert_at.min(args.len())..]);
    Ok(out)
}

fn canonical_flag(flag: &str) -> String {
    match flag {
        "uniform" => "n".to_string(),
        other => other.to_string(),
    }
}

/// `key = value` lines become `--key value`; `true`/`false` toggle switches.
pub fn parse_config(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, message: format!("expected `key = value`, got `{line}`") })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(Error::Parse { line: i + 1, message: format!("invalid key `{key}`") });
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

fn execute(command: &Command, out: &mut dyn Write) -> CliResult<i32> {
    match command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Convergence(a) => cmd_convergence(a, out),
        Command::MeshCheck(a) => cmd_mesh_check(a, out),
        Command::IneqCheck(a) => cmd_ineq_check(a, out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MeshKind {
    Uniform,
    Polygonal,
    File,
}

struct LabeledMesh {
    label: String,
    kind: MeshKind,
    mesh: Mesh,
}

fn build_meshes(args: &MeshArgs, default_n: &[usize]) -> CliResult<Vec<LabeledMesh>> {
    let given = [!args.n.is_empty(), !args.seeds.is_empty(), !args.mesh.is_empty()];
    if given.iter().filter(|&&g| g).count() > 1 {
        return usage("choose one of --n/--uniform, --seeds or --mesh");
    }
    if args.n.contains(&0) || args.seeds.contains(&0) {
        return usage("mesh sizes must be at least 1");
    }
    let mut meshes = Vec::new();
    if !args.seeds.is_empty() {
        for &s in &args.seeds {
            let mesh = build_polygonal(s, args.lloyd, args.seed)?;
            meshes.push(LabeledMesh { label: format!("voronoi {s}"), kind: MeshKind::Polygonal, mesh });
        }
    } else if !args.mesh.is_empty() {
        for p in &args.mesh {
            let mesh = load_mesh(p)?;
            meshes.push(LabeledMesh { label: p.display().to_string(), kind: MeshKind::File, mesh });
        }
    } else {
        let ns = if args.n.is_empty() { default_n } else { &args.n };
        for &n in ns {
            meshes.push(LabeledMesh {
                label: format!("uniform {n}"),
                kind: MeshKind::Uniform,
                mesh: build_uniform_triangular(n),
            });
        }
    }
    if let (Some(path), Some(first)) = (&args.save_mesh, meshes.first()) {
        save_mesh(&first.mesh, path)?;
    }
    Ok(meshes)
}

fn parse_poly(text: &str) -> CliResult<Vec<(f64, u32, u32)>> {
    text.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let parts: Vec<&str> = t.split_whitespace().collect();
            match parts.as_slice() {
                [c, a, b] => match (c.parse(), a.parse(), b.parse()) {
                    (Ok(c), Ok(a), Ok(b)) => Ok((c, a, b)),
                    _ => usage(format!("bad polynomial term `{}`", t.trim())),
                },
                _ => usage(format!("polynomial terms are `c a b`, got `{}`", t.trim())),
            }
        })
        .collect()
}

fn build_problem(args: &SolveArgs) -> CliResult<Problem> {
    match args.case.as_str() {
        "polynomial" | "poly" => {
            let Some(terms) = &args.poly else { return usage("--case polynomial needs --poly") };
            Ok(Problem::polynomial(&parse_poly(terms)?))
        }
        name => Problem::by_name(name).map_or_else(|| usage(format!("unknown case `{name}`")), Ok),
    }
}

fn discretization(args: &SolveArgs, kind: MeshKind) -> CliResult<Discretization> {
    if args.k < 2 {
        return usage(format!("k must be at least 2, got {}", args.k));
    }
    if args.k > MAX_MONOMIAL_DEGREE && !args.orthonormal {
        return usage(format!("k = {} exceeds the cap {MAX_MONOMIAL_DEGREE}; pass --orthonormal to lift it", args.k));
    }
    let flavor: Flavor = args.flavor.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let mut disc = Discretization::new(args.k, flavor)?.with_orthonormal(args.orthonormal);
    disc = disc.with_exactness(
        args.element_exactness.unwrap_or(disc.element_exactness),
        args.edge_exactness.unwrap_or(disc.edge_exactness),
    );
    let scale = match (args.stabilizer_scale, kind) {
        (ScaleArg::Edge, _) | (ScaleArg::Auto, MeshKind::Uniform) => StabilizerScale::EdgeLength,
        _ => StabilizerScale::Diameter,
    };
    Ok(disc.with_stabilizer_scale(scale))
}

fn solver_options(args: &SolveArgs) -> CliResult<SolverOptions> {
    if !(args.tol > 0.0 && args.tol < 1.0) {
        return usage(format!("tol must lie in (0, 1), got {}", args.tol));
    }
    let kind = match args.solver {
        SolverArg::Direct => SolverKind::Direct,
        SolverArg::Cg => SolverKind::ConjugateGradient { max_iterations: args.max_iterations },
    };
    Ok(SolverOptions { kind, tol: args.tol })
}

fn solve_one(
    args: &SolveArgs,
    m: &LabeledMesh,
    problem: &Problem,
) -> CliResult<(Discretization, crate::analysis::Solution, ErrorReport)> {
    let disc = discretization(args, m.kind)?;
    let options = solver_options(args)?;
    let exact = problem.exact.as_ref().expect("built-in problems carry their solution");
    let sol = solve_problem(&m.mesh, &disc, problem, &options)?;
    let report = error_vs_projection(&m.mesh, &disc, &sol.values, exact.u.as_ref(), exact.grad.as_ref())?;
    Ok((disc, sol, report))
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> CliResult<i32> {
    let problem = build_problem(args)?;
    let meshes = build_meshes(&args.mesh, &[4])?;
    if meshes.len() != 1 {
        return usage("solve takes exactly one mesh");
    }
    let m = &meshes[0];
    let (disc, sol, report) = solve_one(args, m, &problem)?;
    if !args.common.quiet {
        writeln!(
            out,
            "mesh: {} ({} elements, {} edges, h = {})",
            m.label,
            m.mesh.num_elements(),
            m.mesh.num_edges(),
            sci(m.mesh.h())
        )?;
        writeln!(
            out,
            "problem: {}  k = {}  flavor = {}  stabilizer scale = {}",
            problem.name, disc.degree, disc.flavor, disc.stabilizer_scale
        )?;
        writeln!(out, "dofs: {} total, {} free", sol.system.num_dofs(), sol.system.num_free())?;
        writeln!(out, "err_H2 = {}", sci(report.err_h2))?;
        writeln!(out, "err_L2 = {}", sci(report.err_l2))?;
    }
    if let Some(path) = &args.csv {
        fs::write(path, ConvergenceTable::from_reports(&[report]).to_csv())?;
    }
    if let Some(path) = &args.field {
        fs::write(path, raster_field(&m.mesh, &disc, &sol.values)?)?;
    }
    if let Some(path) = &args.matrix {
        fs::write(path, sol.system.matrix.to_matrix_market())?;
    }
    Ok(EXIT_OK)
}

fn cmd_convergence(args: &SolveArgs, out: &mut dyn Write) -> CliResult<i32> {
    if args.field.is_some() || args.matrix.is_some() {
        return usage("--field and --matrix apply to `solve` only");
    }
    let problem = build_problem(args)?;
    let meshes = build_meshes(&args.mesh, &[4, 8, 16, 32])?;
    let mut reports = Vec::with_capacity(meshes.len());
    for m in &meshes {
        reports.push(solve_one(args, m, &problem)?.2);
    }
    let table = ConvergenceTable::from_reports(&reports);
    if !args.common.quiet {
        write!(out, "{}", table.to_text())?;
    }
    if let Some(path) = &args.csv {
        fs::write(path, table.to_csv())?;
    }
    Ok(EXIT_OK)
}

/// `x,y,u` samples of `v0` on a grid with spacing at most `h/3`.
pub fn raster_field(mesh: &Mesh, disc: &Discretization, values: &[f64]) -> Result<String> {
    use std::fmt::Write as _;

    let dofs = crate::system::DofMap::new(mesh, disc);
    if values.len() != dofs.len() {
        return Err(Error::DimensionMismatch { expected: dofs.len(), got: values.len() });
    }
    let (mut lo, mut hi) = (Point::new(f64::MAX, f64::MAX), Point::new(f64::MIN, f64::MIN));
    for v in mesh.vertices() {
        lo = Point::new(lo.x.min(v.pos.x), lo.y.min(v.pos.y));
        hi = Point::new(hi.x.max(v.pos.x), hi.y.max(v.pos.y));
    }
    let steps = (3.0 * (hi.x - lo.x).max(hi.y - lo.y) / mesh.h()).ceil().max(1.0) as usize;
    let locator = Locator::new(mesh, lo, hi, steps);
    let bases: Vec<_> = (0..mesh.num_elements()).map(|t| disc.element_basis(mesh, t)).collect::<Result<_>>()?;

    let mut out = String::from("x,y,u\n");
    for j in 0..=steps {
        for i in 0..=steps {
            let p = Point::new(
                lo.x + (hi.x - lo.x) * i as f64 / steps as f64,
                lo.y + (hi.y - lo.y) * j as f64 / steps as f64,
            );
            if let Some(t) = locator.find(mesh, p) {
                let o = dofs.interior_offset(t);
                let u = bases[t].evaluate(&values[o..o + dofs.interior_dim()], p);
                let _ = writeln!(out, "{:?},{:?},{:?}", p.x, p.y, u);
            }
        }
    }
    Ok(out)
}

/// Bucket grid over element bounding boxes for point location.
struct Locator {
    lo: Point,
    cell: Point,
    size: usize,
    buckets: Vec<Vec<usize>>,
}

impl Locator {
    fn new(mesh: &Mesh, lo: Point, hi: Point, steps: usize) -> Self {
        let size = steps.clamp(1, 256);
        let cell = Point::new((hi.x - lo.x) / size as f64, (hi.y - lo.y) / size as f64);
        let mut loc = Self { lo, cell, size, buckets: vec![Vec::new(); size * size] };
        for t in 0..mesh.num_elements() {
            let pts = mesh.element_points(t);
            let (mut a, mut b) = (pts[0], pts[0]);
            for p in &pts {
                a = Point::new(a.x.min(p.x), a.y.min(p.y));
                b = Point::new(b.x.max(p.x), b.y.max(p.y));
            }
            let (i0, j0) = loc.index(a);
            let (i1, j1) = loc.index(b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * size + i].push(t);
                }
            }
        }
        loc
    }

    fn index(&self, p: Point) -> (usize, usize) {
        let f = |v: f64, lo: f64, c: f64| (((v - lo) / c).floor().max(0.0) as usize).min(self.size - 1);
        (f(p.x, self.lo.x, self.cell.x), f(p.y, self.lo.y, self.cell.y))
    }

    fn find(&self, mesh: &Mesh, p: Point) -> Option<usize> {
        let (i, j) = self.index(p);
        self.buckets[j * self.size + i]
            .iter()
            .copied()
            .find(|&t| point_in_closed_polygon(&mesh.element_points(t), p))
    }
}

/// Inside or on the boundary, with a small tolerance for grid points on edges.
fn point_in_closed_polygon(pts: &[Point], p: Point) -> bool {
    let scale = crate::mesh::geometry::diameter(pts);
    let tol = 1e-12 * scale * scale;
    (0..pts.len()).all(|i| {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        (b - a).cross(p - a) >= -tol
    }) || crate::mesh::geometry::contains_point(pts, p)
}

fn cmd_mesh_check(args: &MeshCheckArgs, out: &mut dyn Write) -> CliResult<i32> {
    if !(args.sigma > 0.0) {
        return usage("sigma must be positive");
    }
    let meshes = build_meshes(&args.mesh, &[4])?;
    let mut failed = Vec::new();
    if !args.common.quiet {
        writeln!(
            out,
            "{:<20} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>9}",
            "mesh", "cells", "h", "min area", "rho_v", "rho_e", "kappa", "sigma*", "pyramids"
        )?;
    }
    for m in &meshes {
        let r = check_shape_regularity(&m.mesh, args.sigma);
        let min_area = m.mesh.elements().iter().map(|e| e.area).fold(f64::INFINITY, f64::min);
        let ok_pyramids = r.pyramid_ok.iter().filter(|&&b| b).count();
        if !args.common.quiet {
            writeln!(
                out,
                "{:<20} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>9}",
                m.label,
                m.mesh.num_elements(),
                sci(m.mesh.h()),
                sci(min_area),
                sci(r.rho_v),
                sci(r.rho_e),
                sci(r.kappa),
                sci(r.sigma_star),
                format!("{ok_pyramids}/{}", r.pyramid_ok.len())
            )?;
        }
        let checks = [
            (min_area < args.min_area, "cell area"),
            (r.rho_v < args.min_rho_v, "rho_v"),
            (r.rho_e < args.min_rho_e, "rho_e"),
            (r.kappa < args.min_kappa, "kappa"),
            (!r.all_pyramids_ok(), "pyramid height"),
        ];
        failed.extend(checks.iter().filter(|c| c.0).map(|c| format!("{}: {} below floor", m.label, c.1)));
    }
    for f in &failed {
        writeln!(out, "FAIL {f}")?;
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_ineq_check(args: &IneqArgs, out: &mut dyn Write) -> CliResult<i32> {
    if args.samples == 0 {
        return usage("samples must be at least 1");
    }
    let all = !(args.trace || args.inverse || args.lp || args.domain);
    let meshes = build_meshes(&args.mesh, &[2, 4, 8])?;
    let uniform = meshes.iter().all(|m| m.kind == MeshKind::Uniform);
    let band = args.band.unwrap_or(if uniform { 1.05 } else { 3.0 });
    let seed = args.mesh.seed;

    let mut columns: Vec<(&str, Vec<InequalityEstimate>)> = Vec::new();
    let selected = [
        (all || args.trace, "trace"),
        (all || args.inverse, "inverse"),
        (all || args.lp, "lp-inverse"),
    ];
    for (on, name) in selected {
        if !on {
            continue;
        }
        let mut col = Vec::with_capacity(meshes.len());
        for m in &meshes {
            let est = match name {
                "trace" => inequalities::estimate_trace_constant(&m.mesh, args.k, args.p, args.samples, seed),
                "inverse" => inequalities::estimate_inverse_constant(&m.mesh, args.k, args.samples, seed),
                _ => inequalities::estimate_lp_inverse(&m.mesh, args.k, args.p, args.r, args.samples, seed),
            }
            .map_err(|e| match e {
                Error::InvalidArgument(msg) => CliError::Usage(msg),
                other => CliError::Run(other),
            })?;
            col.push(est);
        }
        columns.push((name, col));
    }

    let mut csv = String::from("mesh,h");
    for (name, _) in &columns {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    if !args.common.quiet && !columns.is_empty() {
        write!(out, "{:<20} {:>12}", "mesh", "h")?;
        for (name, _) in &columns {
            write!(out, " {name:>14}")?;
        }
        writeln!(out)?;
    }
    for (i, m) in meshes.iter().enumerate() {
        csv.push_str(&format!("{},{}", m.label, sci(m.mesh.h())));
        if !args.common.quiet && !columns.is_empty() {
            write!(out, "{:<20} {:>12}", m.label, sci(m.mesh.h()))?;
        }
        for (_, col) in &columns {
            csv.push_str(&format!(",{:?}", col[i].constant));
            if !args.common.quiet {
                write!(out, " {:>14.10}", col[i].constant)?;
            }
        }
        csv.push('\n');
        if !args.common.quiet && !columns.is_empty() {
            writeln!(out)?;
        }
    }

    let mut failed = Vec::new();
    for (name, col) in &columns {
        let lo = col.iter().map(|e| e.constant).fold(f64::INFINITY, f64::min);
        let hi = col.iter().map(|e| e.constant).fold(0.0, f64::max);
        let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !args.common.quiet {
            writeln!(out, "{name}: max/min = {spread:.12} (band {band})")?;
        }
        if !(spread <= band) || !hi.is_finite() {
            failed.push(format!("{name}: spread {spread} exceeds band {band}"));
        }
    }

    if all || args.domain {
        let k = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let center = Point::new(0.25, 0.25);
        let est = inequalities::estimate_domain_inverse(&k, center, args.radius, args.k, args.samples, seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if !args.common.quiet {
            writeln!(
                out,
                "domain-inverse (reference triangle, disk at (0.25, 0.25), radius {}): {:.10}",
                args.radius, est.constant
            )?;
        }
        csv.push_str(&format!("domain-inverse,{:?}\n", est.constant));
    }

    if let Some(path) = &args.csv {
        fs::write(path, csv)?;
    }
    for f in &failed {
        writeln!(out, "FAIL {f}")?;
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Convenience wrapper used by the binary.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["wgbih"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn solve_reproduces_first_table_row() {
        let (code, out, _) = run_capture(&["solve", "--case", "case1", "--n", "4", "--k", "2", "--flavor", "algorithm2"]);
        assert_eq!(code, 0);
        assert!(out.contains("err_H2 = 2.5683e-01"), "{out}");
        assert!(out.contains("err_L2 = 3.3304e-02"), "{out}");
    }

    #[test]
    fn degree_cap_is_a_usage_error() {
        let (code, _, err) = run_capture(&["solve", "--case", "case1", "--n", "4", "--k", "5"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("cap"));
        assert_eq!(run_capture(&["solve", "--k", "1"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["solve", "--tol", "2"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["solve", "--flavor", "three"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["solve", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["solve", "--n", "2", "--seeds", "4"]).0, EXIT_USAGE);
    }

    #[test]
    fn single_level_has_blank_orders() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("t.csv");
        let (code, _, _) = run_capture(&["convergence", "--n", "4", "--quiet", "--csv", csv.to_str().unwrap()]);
        assert_eq!(code, 0);
        let text = fs::read_to_string(csv).unwrap();
        assert_eq!(text, "h,err_h2,order_h2,err_l2,order_l2\n2.5000e-01,2.5683e-01,,3.3304e-02,\n");
    }

    #[test]
    fn quiet_suppresses_tables() {
        let (code, out, _) = run_capture(&["convergence", "--n", "2,4", "--quiet"]);
        assert_eq!((code, out.as_str()), (0, ""));
    }

    #[test]
    fn config_file_supplies_flags_and_command_line_wins() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# test\ncase = case2\nn = 8\nk = 2\nquiet = false\n").unwrap();
        let (code, out, _) = run_capture(&["solve", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.contains("err_H2 = 1.2794e+01"), "{out}");
        let (code, out, _) = run_capture(&["solve", "--config", cfg.to_str().unwrap(), "--n", "4"]);
        assert_eq!(code, 0);
        assert!(out.contains("err_H2 = 2.4536e+01"), "{out}");
        fs::write(&cfg, "no equals sign\n").unwrap();
        assert_eq!(run_capture(&["solve", "--config", cfg.to_str().unwrap()]).0, EXIT_USAGE);
    }

    #[test]
    fn mesh_check_reports_kappa_and_area_floor() {
        let (code, out, _) = run_capture(&["mesh-check", "--uniform", "8"]);
        assert_eq!(code, 0);
        assert!(out.contains(&sci(std::f64::consts::FRAC_1_SQRT_2)), "{out}");
        let (code, out, _) = run_capture(&["mesh-check", "--uniform", "8", "--min-area", "0.01"]);
        assert_eq!(code, EXIT_CHECK_FAILED);
        assert!(out.contains("FAIL"));
    }

    #[test]
    fn ineq_check_trace_is_scale_invariant() {
        let (code, out, _) = run_capture(&["ineq-check", "--trace", "--uniform", "2,4,8", "--samples", "50", "--band", "1.0000000001"]);
        assert_eq!(code, 0, "{out}");
        let (code, _, _) = run_capture(&["ineq-check", "--lp", "--p", "1", "--r", "2"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn csv_output_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        for p in [&a, &b] {
            let (code, _, _) =
                run_capture(&["convergence", "--seeds", "9,16", "--seed", "3", "--quiet", "--csv", p.to_str().unwrap()]);
            assert_eq!(code, 0);
        }
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn solve_exports_field_matrix_and_mesh() {
        let dir = tempfile::tempdir().unwrap();
        let (field, matrix, mesh) = (dir.path().join("f.csv"), dir.path().join("a.mtx"), dir.path().join("m.poly"));
        let (code, _, _) = run_capture(&[
            "solve",
            "--seeds",
            "16",
            "--quiet",
            "--field",
            field.to_str().unwrap(),
            "--matrix",
            matrix.to_str().unwrap(),
            "--save-mesh",
            mesh.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let f = fs::read_to_string(field).unwrap();
        assert!(f.starts_with("x,y,u\n"));
        assert!(f.lines().count() > 50);
        assert!(fs::read_to_string(matrix).unwrap().starts_with("%%MatrixMarket matrix coordinate real symmetric"));
        let (code, out, _) = run_capture(&["solve", "--mesh", mesh.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.contains("stabilizer scale = diameter"));
    }

    #[test]
    fn poly_terms() {
        assert_eq!(parse_poly("1 2 0; -0.5 1 1").unwrap(), vec![(1.0, 2, 0), (-0.5, 1, 1)]);
        assert!(parse_poly("1 2").is_err());
        let (code, out, _) = run_capture(&["solve", "--case", "polynomial", "--poly", "1 2 0; 1 0 2", "--n", "2"]);
        assert_eq!(code, 0);
        let h2 = out.lines().find_map(|l| l.strip_prefix("err_H2 = ")).unwrap();
        assert!(h2.parse::<f64>().unwrap() < 1e-8, "{out}");
    }
}
