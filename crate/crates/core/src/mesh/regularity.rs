use super::geometry::{self, Point};
use super::Mesh;

/// Shape-regularity constants of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    /// min over elements of |T| / h_T^2.
    pub rho_v: f64,
    /// min over edges of |e| / h_e; identically one for straight edges in 2D.
    pub rho_e: f64,
    /// min over element/edge pairs of h_e / h_T.
    pub kappa: f64,
    /// Per element: every edge supports an inscribed triangle of height at
    /// least `sigma_threshold * h_T`.
    pub pyramid_ok: Vec<bool>,
    /// Smallest best-found height ratio over all element/edge pairs.
    pub sigma_star: f64,
    pub sigma_threshold: f64,
}

impl RegularityReport {
    pub fn all_pyramids_ok(&self) -> bool {
        self.pyramid_ok.iter().all(|&ok| ok)
    }
}

const APEX_GRID: usize = 5;

pub fn check_shape_regularity(mesh: &Mesh, sigma_threshold: f64) -> RegularityReport {
    let mut rho_v = f64::INFINITY;
    let mut kappa = f64::INFINITY;
    let mut sigma_star = f64::INFINITY;
    let mut pyramid_ok = Vec::with_capacity(mesh.num_elements());

    let rho_e = mesh
        .edges()
        .iter()
        .map(|e| e.length / mesh.vertex(e.vertices[0]).distance(mesh.vertex(e.vertices[1])))
        .fold(f64::INFINITY, f64::min);

    for el in mesh.elements() {
        let hd = el.diameter;
        rho_v = rho_v.min(el.area / (hd * hd));
        // local coordinates keep the test identical on translated copies
        let origin = mesh.vertex(el.vertices[0]);
        let pts: Vec<Point> = mesh.element_points(el.id).into_iter().map(|p| p - origin).collect();
        let apexes = apex_candidates(&pts, geometry::polygon_centroid(&pts));
        let mut worst = f64::INFINITY;
        for (i, &eid) in el.edges.iter().enumerate() {
            let edge = mesh.edge(eid);
            kappa = kappa.min(edge.length / hd);
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            let best = apexes
                .iter()
                .filter(|&&p| triangle_inside(&pts, i, p))
                .map(|&p| (b - a).cross(p - a) / edge.length / hd)
                .fold(0.0, f64::max);
            worst = worst.min(best);
        }
        sigma_star = sigma_star.min(worst);
        pyramid_ok.push(worst >= sigma_threshold);
    }

    RegularityReport { rho_v, rho_e, kappa, pyramid_ok, sigma_star, sigma_threshold }
}

fn apex_candidates(pts: &[Point], centroid: Point) -> Vec<Point> {
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let mut out = vec![centroid];
    for i in 0..APEX_GRID {
        for j in 0..APEX_GRID {
            let s = (i as f64 + 0.5) / APEX_GRID as f64;
            let t = (j as f64 + 0.5) / APEX_GRID as f64;
            let p = Point::new(lo.x + s * (hi.x - lo.x), lo.y + t * (hi.y - lo.y));
            if geometry::contains_point(pts, p) {
                out.push(p);
            }
        }
    }
    out
}

/// Whether the triangle on side `i` of the polygon with apex `p` lies inside it.
fn triangle_inside(pts: &[Point], i: usize, p: Point) -> bool {
    let n = pts.len();
    let (a, b) = (pts[i], pts[(i + 1) % n]);
    if (b - a).cross(p - a) <= 0.0 {
        return false;
    }
    (0..n).filter(|&j| j != i).all(|j| {
        let (c, d) = (pts[j], pts[(j + 1) % n]);
        !geometry::segments_cross(a, p, c, d) && !geometry::segments_cross(b, p, c, d)
    })
}
