//! Planar geometry helpers shared by cut selection, cycle construction and
//! rendering: convex hulls, segment intersection, point/segment distance.
//! Complex numbers double as 2-vectors throughout.

use num_complex::Complex64;

/// 2D cross product of the vectors `a` and `b`.
pub fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Lexicographic order on (Re, Im), used wherever a deterministic point
/// ordering is required.
pub fn lex_less(a: Complex64, b: Complex64) -> bool {
    (a.re, a.im) < (b.re, b.im)
}

pub fn lex_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    (a.re, a.im)
        .partial_cmp(&(b.re, b.im))
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Diameter of a point set: the largest pairwise distance.
pub fn diameter(points: &[Complex64]) -> f64 {
    let mut d = 0.0f64;
    for (i, &p) in points.iter().enumerate() {
        for &q in &points[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

pub fn centroid(points: &[Complex64]) -> Complex64 {
    if points.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    points.iter().sum::<Complex64>() / points.len() as f64
}

/// Convex hull by monotone chain, vertices in counterclockwise order.
/// Collinear points are dropped from the hull boundary. Returns fewer than
/// three vertices when the input is degenerate (all collinear or tiny).
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(lex_cmp);
    pts.dedup_by(|a, b| (*a - *b).norm() == 0.0);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2
            && cross(lower[lower.len() - 1] - lower[lower.len() - 2], p - lower[lower.len() - 1])
                <= 0.0
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(upper[upper.len() - 1] - upper[upper.len() - 2], p - upper[upper.len() - 1])
                <= 0.0
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * d.re + (p - a).im * d.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Proper intersection test for open segments `(p1, p2)` and `(q1, q2)`.
/// Shared endpoints and touching configurations do not count.
pub fn segments_properly_intersect(
    p1: Complex64,
    p2: Complex64,
    q1: Complex64,
    q2: Complex64,
) -> bool {
    let d1 = p2 - p1;
    let d2 = q2 - q1;
    let denom = cross(d1, d2);
    if denom == 0.0 {
        return false;
    }
    let t = cross(q1 - p1, d2) / denom;
    let s = cross(q1 - p1, d1) / denom;
    t > 0.0 && t < 1.0 && s > 0.0 && s < 1.0
}

/// True when every point lies within `tol` of a single straight line.
pub fn all_collinear(points: &[Complex64], tol: f64) -> bool {
    if points.len() <= 2 {
        return true;
    }
    let mut far = points[0];
    let mut best = 0.0f64;
    for &p in points.iter() {
        let d = (p - points[0]).norm();
        if d > best {
            best = d;
            far = p;
        }
    }
    if best == 0.0 {
        return true;
    }
    let dir = (far - points[0]) / best;
    points
        .iter()
        .all(|&p| (cross(dir, p - points[0])).abs() <= tol)
}
