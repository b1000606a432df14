use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{self, Point};
use super::Mesh;
use crate::error::{Error, Result};

/// Uniform mesh of the unit square: `n x n` squares, each cut into two right
/// triangles by its negative-slope diagonal. The reported `h` is `1/n`.
pub fn build_uniform_triangular(n: usize) -> Mesh {
    assert!(n >= 1, "uniform mesh needs n >= 1");
    let nf = n as f64;
    let mut points = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            points.push(Point::new(i as f64 / nf, j as f64 / nf));
        }
    }
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut loops = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            loops.push(vec![v(i, j), v(i + 1, j), v(i, j + 1)]);
            loops.push(vec![v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    Mesh::from_polygons(points, loops, Some(1.0 / nf)).expect("uniform mesh is valid by construction")
}

/// Clipped Voronoi partition of the unit square for `seed_count` uniformly
/// random seeds, followed by `lloyd_iters` centroidal relaxation sweeps.
pub fn build_polygonal(seed_count: usize, lloyd_iters: usize, rng_seed: u64) -> Result<Mesh> {
    if seed_count == 0 {
        return Err(Error::InvalidArgument("seed_count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let seeds: Vec<Point> = (0..seed_count)
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    build_voronoi(&seeds, lloyd_iters)
}

/// Clipped Voronoi partition of the unit square for explicit seeds.
pub fn build_voronoi(seeds: &[Point], lloyd_iters: usize) -> Result<Mesh> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let mut seeds = seeds.to_vec();
    for _ in 0..lloyd_iters {
        let cells = voronoi_cells(&seeds);
        for (s, cell) in seeds.iter_mut().zip(&cells) {
            if cell.len() >= 3 && geometry::signed_area(cell) > 1e-14 {
                *s = geometry::polygon_centroid(cell);
            }
        }
    }
    let cells = voronoi_cells(&seeds);
    for (id, cell) in cells.iter().enumerate() {
        let area = if cell.len() >= 3 { geometry::signed_area(cell) } else { 0.0 };
        if area < 1e-12 {
            return Err(Error::DegenerateCell { element: id, area });
        }
    }
    let (points, loops) = weld(&cells, 1e-10);
    for (id, l) in loops.iter().enumerate() {
        if l.len() < 3 {
            return Err(Error::DegenerateCell { element: id, area: 0.0 });
        }
    }
    Mesh::from_polygons(points, loops, None)
}

fn unit_square() -> Vec<Point> {
    vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ]
}

fn voronoi_cells(seeds: &[Point]) -> Vec<Vec<Point>> {
    seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut cell = unit_square();
            for (j, &t) in seeds.iter().enumerate() {
                if i == j || cell.is_empty() {
                    continue;
                }
                let dir = t - s;
                if dir.norm() == 0.0 {
                    continue;
                }
                let mid = (s + t) * 0.5;
                cell = clip_half_plane(&cell, mid, dir);
            }
            cell
        })
        .collect()
}

/// Keeps the part of a convex polygon where `(p - origin) . dir <= 0`.
fn clip_half_plane(poly: &[Point], origin: Point, dir: Point) -> Vec<Point> {
    let n = poly.len();
    let side: Vec<f64> = poly.iter().map(|&p| (p - origin).dot(dir)).collect();
    if side.iter().all(|&d| d <= 0.0) {
        return poly.to_vec();
    }
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (p, q) = (poly[i], poly[j]);
        let (dp, dq) = (side[i], side[j]);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

/// Merges coordinates closer than `tol` so neighbouring cells share vertices,
/// and drops the repeated vertices this produces inside a loop.
fn weld(cells: &[Vec<Point>], tol: f64) -> (Vec<Point>, Vec<Vec<usize>>) {
    let mut points: Vec<Point> = Vec::new();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Point| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut loops = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut ids: Vec<usize> = Vec::with_capacity(cell.len());
        for &p in cell {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(bucket) = grid.get(&(kx + dx, ky + dy)) {
                        if let Some(&id) = bucket.iter().find(|&&id| points[id].distance(p) <= tol) {
                            found = Some(id);
                            break 'search;
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                points.push(p);
                grid.entry((kx, ky)).or_default().push(points.len() - 1);
                points.len() - 1
            });
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        loops.push(ids);
    }
    (points, loops)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts_match_euler() {
        for (n, v, t, e) in [(1, 4, 2, 5), (2, 9, 8, 16), (4, 25, 32, 56)] {
            let m = build_uniform_triangular(n);
            assert_eq!((m.num_vertices(), m.num_elements(), m.num_edges()), (v, t, e));
            // Euler with the outer face
            assert_eq!(v as i64 - e as i64 + (t as i64 + 1), 2);
        }
        let m = build_uniform_triangular(2);
        assert_eq!(m.num_boundary_edges(), 8);
        assert_eq!(m.h(), 0.5);
        assert!((m.element(0).diameter - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_diagonals_have_negative_slope() {
        let m = build_uniform_triangular(3);
        for e in m.edges().iter().filter(|e| !e.is_boundary()) {
            let t = e.tangent;
            assert!(t.x == 0.0 || t.y == 0.0 || t.x * t.y < 0.0);
        }
    }

    #[test]
    fn single_seed_gives_the_square() {
        let m = build_voronoi(&[Point::new(0.3, 0.6)], 0).unwrap();
        assert_eq!(m.num_elements(), 1);
        assert_eq!(m.num_edges(), 4);
        assert!((m.element(0).area - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadrant_seeds_give_four_squares() {
        let seeds = [
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.25),
            Point::new(0.25, 0.75),
            Point::new(0.75, 0.75),
        ];
        let m = build_voronoi(&seeds, 0).unwrap();
        assert_eq!(m.num_elements(), 4);
        assert_eq!(m.num_edges(), 12);
        assert_eq!(m.num_vertices(), 9);
        for el in m.elements() {
            assert_eq!(el.num_edges(), 4);
            assert!((el.area - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn random_voronoi_partitions_the_square() {
        let m = build_polygonal(64, 3, 7).unwrap();
        assert_eq!(m.num_elements(), 64);
        assert!((m.total_area() - 1.0).abs() < 1e-10);
        assert!(m.elements().iter().all(|e| e.convex));
        for e in m.edges().iter().filter(|e| e.is_boundary()) {
            let p = e.midpoint;
            let on_side = p.x.abs() < 1e-12 || p.y.abs() < 1e-12 || (p.x - 1.0).abs() < 1e-12 || (p.y - 1.0).abs() < 1e-12;
            assert!(on_side, "boundary edge {} off the square", e.id);
        }
    }

    #[test]
    fn duplicate_seeds_are_degenerate() {
        let seeds = [Point::new(0.5, 0.5), Point::new(0.5, 0.5), Point::new(0.1, 0.1), Point::new(0.9, 0.9)];
        // coincident seeds both own the same cell; the welded mesh overlaps itself
        assert!(build_voronoi(&seeds, 0).is_err());
    }
}
