use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Rotation by -90 degrees: the outward normal of a counter-clockwise edge.
    pub fn rotate_cw(self) -> Point {
        Point::new(self.y, -self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        rhs * self
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Twice the signed area of a closed polygon (positive when counter-clockwise).
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| points[i].cross(points[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

/// Area centroid of a simple polygon with nonzero area.
pub fn polygon_centroid(points: &[Point]) -> Point {
    let n = points.len();
    // shift to the first vertex to limit cancellation
    let origin = points[0];
    let mut a2 = 0.0;
    let mut c = Point::default();
    for i in 0..n {
        let p = points[i] - origin;
        let q = points[(i + 1) % n] - origin;
        let w = p.cross(q);
        a2 += w;
        c = c + (p + q) * w;
    }
    origin + c * (1.0 / (3.0 * a2))
}

pub fn diameter(points: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            d = d.max(p.distance(q));
        }
    }
    d
}

pub fn is_convex(points: &[Point]) -> bool {
    let n = points.len();
    (0..n).all(|i| {
        let a = points[i];
        let b = points[(i + 1) % n];
        let c = points[(i + 2) % n];
        (b - a).cross(c - b) >= -1e-14 * (b - a).norm() * (c - b).norm()
    })
}

/// True when the open segments `p1-p2` and `q1-q2` cross at a single interior point.
pub fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// A closed polygon is simple when no two non-adjacent sides intersect.
pub fn is_simple(points: &[Point]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        if a.distance(b) == 0.0 {
            return false;
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (points[j], points[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Even-odd point-in-polygon test; points on the boundary may go either way.
pub fn contains_point(points: &[Point], p: Point) -> bool {
    let n = points.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (points[i], points[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Triangulates a simple counter-clockwise polygon. Convex polygons are fanned
/// from their first vertex; anything else goes through ear clipping.
pub fn triangulate(points: &[Point]) -> Vec<[usize; 3]> {
    let n = points.len();
    if n == 3 {
        return vec![[0, 1, 2]];
    }
    if is_convex(points) {
        return (1..n - 1).map(|i| [0, i, i + 1]).collect();
    }
    ear_clip(points)
}

fn ear_clip(points: &[Point]) -> Vec<[usize; 3]> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let mut tris = Vec::with_capacity(points.len() - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (points[ia], points[ib], points[ic]);
            if (b - a).cross(c - b) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = points[j];
                (b - a).cross(p - a) >= 0.0 && (c - b).cross(p - b) >= 0.0 && (a - c).cross(p - c) >= 0.0
            });
            if !blocked {
                tris.push([ia, ib, ic]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // numerically collinear remainder; fall back to a fan
            let first = idx[0];
            for w in idx[1..].windows(2) {
                tris.push([first, w[0], w[1]]);
            }
            return tris;
        }
    }
    tris.push([idx[0], idx[1], idx[2]]);
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn area_and_centroid_of_unit_square() {
        let sq = square();
        assert_eq!(signed_area(&sq), 1.0);
        let c = polygon_centroid(&sq);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
        assert!((diameter(&sq) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ear_clipping_covers_l_shape() {
        let l = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        assert!(!is_convex(&l));
        let tris = triangulate(&l);
        assert_eq!(tris.len(), 4);
        let total: f64 = tris
            .iter()
            .map(|t| signed_area(&[l[t[0]], l[t[1]], l[t[2]]]))
            .sum();
        assert!((total - 3.0).abs() < 1e-14);
        assert!(tris
            .iter()
            .all(|t| signed_area(&[l[t[0]], l[t[1]], l[t[2]]]) > 0.0));
    }

    #[test]
    fn bow_tie_is_not_simple() {
        let bow = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(!is_simple(&bow));
        assert!(is_simple(&square()));
    }
}
