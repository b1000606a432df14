//! Plain-text mesh files.
//!
//! ```text
//! # comment
//! polymesh 2 <n_vertices> <n_elements>
//! x y                      (n_vertices lines)
//! m v1 v2 ... vm           (n_elements lines, counter-clockwise, 0-based)
//! ```
//!
//! Edges and normals are derived on load. Coordinates are written in the
//! shortest form that round-trips, so save followed by load is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Mesh, Point};
use crate::error::{Error, Result};

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "polymesh 2 {} {}", mesh.num_vertices(), mesh.num_elements());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{:?} {:?}", v.pos.x, v.pos.y);
    }
    for el in mesh.elements() {
        let _ = write!(out, "{}", el.vertices.len());
        for v in &el.vertices {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_mesh(mesh))?;
    Ok(())
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    parse_mesh(&fs::read_to_string(path)?)
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let perr = |line: usize, message: String| Error::Parse { line, message };

    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty mesh file".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 4 || tokens[0] != "polymesh" {
        return Err(perr(hline, format!("expected `polymesh 2 <n_vertices> <n_elements>`, found `{header}`")));
    }
    if tokens[1] != "2" {
        return Err(perr(hline, format!("unsupported dimension {}", tokens[1])));
    }
    let count = |s: &str| s.parse::<usize>().map_err(|e| perr(hline, format!("bad count `{s}`: {e}")));
    let (nv, ne) = (count(tokens[2])?, count(tokens[3])?);

    let mut last = hline;
    let mut points = Vec::with_capacity(nv);
    for k in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(last + 1, format!("expected {nv} vertices, found {k}")))?;
        last = ln;
        let xy: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| perr(ln, format!("bad coordinate `{t}`: {e}"))))
            .collect::<Result<_>>()?;
        if xy.len() != 2 {
            return Err(perr(ln, format!("expected 2 coordinates, found {}", xy.len())));
        }
        points.push(Point::new(xy[0], xy[1]));
    }

    let mut loops = Vec::with_capacity(ne);
    for k in 0..ne {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| perr(last + 1, format!("expected {ne} elements, found {k}")))?;
        last = ln;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| perr(ln, format!("bad index `{t}`: {e}"))))
            .collect::<Result<_>>()?;
        let (&m, rest) = ids.split_first().ok_or_else(|| perr(ln, "empty element line".into()))?;
        if rest.len() != m {
            return Err(perr(ln, format!("element declares {m} vertices but lists {}", rest.len())));
        }
        if let Some(&v) = rest.iter().find(|&&v| v >= nv) {
            return Err(perr(ln, format!("vertex index {v} out of range")));
        }
        loops.push(rest.to_vec());
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing data after the last element".into()));
    }
    Mesh::from_polygons(points, loops, None)
}
