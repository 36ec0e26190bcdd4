//! Sheet-tracked contour integration and the period data driving the descent.
//!
//! All integration paths are closed polygons. Each polygon is intersected
//! with the branch cuts once at construction time; integration then walks the
//! segments, flipping the sheet sign at every recorded crossing, so the
//! integrand is the analytic continuation of the cut radical along the path.
//!
//! Two families of contours appear: a large origin-centered circle
//! (discretized as a polygon, which by closedness integrates identically)
//! capturing the expansion coefficients `T_l` at infinity, and stadium
//! polygons around selected branch point pairs (every cut but one, plus
//! bridges over a spanning tree of the cuts), giving the `2g` homology
//! cycles whose periods enter the Boutroux condition.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom;
use crate::quad::{integrate_segment_vec, GaussLegendre, QuadOpts};
use crate::radical::{CutSystem, Radical};

/// Clearance floor for cycle polygons, relative to the branch-point diameter.
const CLEARANCE_FLOOR_REL: f64 = 1e-6;
/// Segments on each stadium end cap. Odd, so that no interior cap vertex
/// lies on the stadium axis: for collinear branch points the neighboring
/// cut runs along that axis, and a vertex exactly on a cut is rejected at
/// every shrink radius.
const CAP_SEGMENTS: usize = 7;
/// Vertices on the large circle polygon.
const CIRCLE_SEGMENTS: usize = 64;

/// A closed polygonal path with precomputed cut crossings per segment.
#[derive(Debug, Clone)]
pub struct SheetPath {
    pub vertices: Vec<Complex64>,
    /// Crossing parameters per segment, ascending.
    crossings: Vec<Vec<(usize, f64)>>,
    pub total_crossings: usize,
}

impl SheetPath {
    /// Validate a closed polygon against the cut system. The first and last
    /// vertex must coincide; vertices must keep clear of the cuts; every
    /// crossing must be transversal.
    pub fn closed(vertices: Vec<Complex64>, cuts: &CutSystem) -> Result<SheetPath> {
        if vertices.len() < 3 {
            return Err(Error::ClearanceFailure("path needs at least 3 vertices".into()));
        }
        if (vertices[0] - vertices[vertices.len() - 1]).norm() != 0.0 {
            return Err(Error::ClearanceFailure("path is not closed".into()));
        }
        let tol = cuts.on_cut_tol();
        for &v in &vertices {
            if cuts.distance_to_cuts(v) < tol {
                return Err(Error::ClearanceFailure(format!("vertex {} too close to a cut", v)));
            }
        }
        let mut crossings = Vec::with_capacity(vertices.len() - 1);
        let mut total = 0usize;
        for w in vertices.windows(2) {
            let hits = cuts.segment_crossings(w[0], w[1])?;
            total += hits.len();
            crossings.push(hits);
        }
        Ok(SheetPath { vertices, crossings, total_crossings: total })
    }

    /// Closed cycles must cross the cut system an even number of times, or
    /// the sheet sign would not return to its start value.
    pub fn has_even_parity(&self) -> bool {
        self.total_crossings % 2 == 0
    }

    /// Integrate a vector integrand along the path with sheet tracking.
    /// The integrand receives the point and the current sheet sign.
    pub fn integrate(
        &self,
        rule: &GaussLegendre,
        opts: &QuadOpts,
        dim: usize,
        f: &mut dyn FnMut(Complex64, f64, &mut [Complex64]),
    ) -> Result<Vec<Complex64>> {
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        let mut sign = 1.0f64;
        for (seg, hits) in self.vertices.windows(2).zip(self.crossings.iter()) {
            let (a, b) = (seg[0], seg[1]);
            let mut t_prev = 0.0f64;
            for &(_, t) in hits {
                let za = a + (b - a) * t_prev;
                let zb = a + (b - a) * t;
                let s = sign;
                let part = integrate_segment_vec(rule, opts, za, zb, dim, &mut |z, out| {
                    f(z, s, out)
                })?;
                for (aa, &p) in acc.iter_mut().zip(part.iter()) {
                    *aa += p;
                }
                sign = -sign;
                t_prev = t;
            }
            let za = a + (b - a) * t_prev;
            let s = sign;
            let part = integrate_segment_vec(rule, opts, za, b, dim, &mut |z, out| f(z, s, out))?;
            for (aa, &p) in acc.iter_mut().zip(part.iter()) {
                *aa += p;
            }
        }
        Ok(acc)
    }
}

/// Counterclockwise polygon inscribed in the circle `|z| = r` with
/// `r = max(2.5 * max|branch point|, 2.0)`. All cuts lie strictly inside, so
/// the path never crosses them and carries the infinity-normalized branch.
pub fn big_circle(cuts: &CutSystem) -> Result<SheetPath> {
    let rmax = cuts
        .cuts
        .iter()
        .flat_map(|c| [c.a.norm(), c.b.norm()])
        .fold(0.0f64, f64::max);
    let radius = (2.5 * rmax).max(2.0);
    let n = CIRCLE_SEGMENTS;
    let mut vertices: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    vertices.push(vertices[0]);
    let path = SheetPath::closed(vertices, cuts)?;
    if path.total_crossings != 0 {
        return Err(Error::ClearanceFailure(
            "outer circle unexpectedly crosses a cut".into(),
        ));
    }
    Ok(path)
}

/// One homology cycle: a counterclockwise stadium polygon around a pair of
/// branch points, with the margin it was built at.
#[derive(Debug, Clone)]
pub struct Cycle {
    pub path: SheetPath,
    pub around: (Complex64, Complex64),
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct HomologyBasis {
    pub cycles: Vec<Cycle>,
}

/// Chamfer angles tried per radius: the side-to-cap junction sits at
/// `+-(pi/2 - delta)` from the stadium axis. A cut ending at a focus fixes a
/// bad vertex direction that is independent of the radius (shrinking alone
/// never escapes it), so the junction angle itself must move.
const CHAMFER_DELTAS: [f64; 5] = [0.14, 0.33, 0.07, 0.47, 0.21];

fn stadium_vertices(p: Complex64, q: Complex64, r: f64, delta: f64) -> Vec<Complex64> {
    let d = q - p;
    let len = d.norm();
    let u = if len == 0.0 { Complex64::new(1.0, 0.0) } else { d / len };
    let half = std::f64::consts::FRAC_PI_2;
    let mut verts: Vec<Complex64> = Vec::new();
    // counterclockwise: cap at q spanning [-(pi/2 - delta), pi/2 - delta],
    // chord to the p cap spanning [pi/2 + delta, 3 pi/2 - delta], chord back
    for k in 0..=CAP_SEGMENTS {
        let span = 2.0 * (half - delta);
        let theta = -(half - delta) + span * k as f64 / CAP_SEGMENTS as f64;
        verts.push(q + u * Complex64::from_polar(r, theta));
    }
    for k in 0..=CAP_SEGMENTS {
        let span = std::f64::consts::PI - 2.0 * delta;
        let theta = half + delta + span * k as f64 / CAP_SEGMENTS as f64;
        verts.push(p + u * Complex64::from_polar(r, theta));
    }
    verts.push(verts[0]);
    verts
}

/// Winding-safe containment count for validation: how many of `points` lie
/// inside the polygon (even-odd rule).
fn points_inside(polygon: &[Complex64], points: &[Complex64]) -> usize {
    points
        .iter()
        .filter(|&&p| {
            let mut inside = false;
            for w in polygon.windows(2) {
                let (a, b) = (w[0], w[1]);
                if (a.im > p.im) != (b.im > p.im) {
                    let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
                    if x > p.re {
                        inside = !inside;
                    }
                }
            }
            inside
        })
        .count()
}

/// Distance from the segment `[p, q]` to the nearest branch point other
/// than the endpoints themselves.
fn pair_clearance(p: Complex64, q: Complex64, points: &[Complex64]) -> f64 {
    let mut clear = f64::INFINITY;
    for &other in points {
        if (other - p).norm() == 0.0 || (other - q).norm() == 0.0 {
            continue;
        }
        clear = clear.min(geom::point_segment_distance(other, p, q));
    }
    clear
}

fn uf_find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Build the `2g` homology cycles: a stadium around every cut except the
/// last (cuts ordered by their lex-least endpoint), plus one bridge stadium
/// per edge of a spanning tree over the cuts. Tree edges and the bridged
/// endpoint pairs are chosen to maximize the clearance between the pair's
/// segment and the remaining branch points, so a pair whose segment passes
/// close to a third branch point is avoided whenever the cut set admits a
/// better route. Each stadium's margin starts at half its pair clearance and
/// shrinks (cycling the chamfer angles) on validation failures; below the
/// relative floor the construction fails with [`Error::ClearanceFailure`].
pub fn homology_basis(cuts: &CutSystem) -> Result<HomologyBasis> {
    let n = cuts.cuts.len();
    if n == 0 {
        return Err(Error::ClearanceFailure("no cuts".into()));
    }
    let points: Vec<Complex64> = cuts.cuts.iter().flat_map(|c| [c.a, c.b]).collect();
    let lex_pair = |x: Complex64, y: Complex64| {
        if geom::lex_less(x, y) {
            (x, y)
        } else {
            (y, x)
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (pi, _) = lex_pair(cuts.cuts[i].a, cuts.cuts[i].b);
        let (pj, _) = lex_pair(cuts.cuts[j].a, cuts.cuts[j].b);
        geom::lex_cmp(&pi, &pj)
    });

    // (p, q, clearance) per cycle, in canonical basis order
    let mut specs: Vec<(Complex64, Complex64, f64)> = Vec::with_capacity(2 * n - 2);
    for &ci in order.iter().take(n - 1) {
        let (p, q) = lex_pair(cuts.cuts[ci].a, cuts.cuts[ci].b);
        specs.push((p, q, pair_clearance(p, q, &points)));
    }
    if n >= 2 {
        let mut edges: Vec<(f64, usize, usize, Complex64, Complex64)> = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let ca = &cuts.cuts[order[a]];
                let cb = &cuts.cuts[order[b]];
                let mut best: Option<(f64, Complex64, Complex64)> = None;
                for &x in &[ca.a, ca.b] {
                    for &y in &[cb.a, cb.b] {
                        let w = pair_clearance(x, y, &points);
                        let better = match best {
                            None => true,
                            Some((bw, bx, by)) => {
                                w > bw
                                    || (w == bw
                                        && (geom::lex_cmp(&x, &bx).then(geom::lex_cmp(&y, &by))
                                            == std::cmp::Ordering::Less))
                            }
                        };
                        if better {
                            best = Some((w, x, y));
                        }
                    }
                }
                let (w, x, y) = best.unwrap();
                edges.push((w, a, b, x, y));
            }
        }
        edges.sort_by(|l, r| {
            r.0.partial_cmp(&l.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(l.1.cmp(&r.1))
                .then(l.2.cmp(&r.2))
        });
        let mut parent: Vec<usize> = (0..n).collect();
        let mut chosen: Vec<(usize, usize, Complex64, Complex64, f64)> = Vec::new();
        for (w, a, b, x, y) in edges {
            let (ra, rb) = (uf_find(&mut parent, a), uf_find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                chosen.push((a, b, x, y, w));
            }
        }
        chosen.sort_by(|l, r| l.0.cmp(&r.0).then(l.1.cmp(&r.1)));
        for (_, _, x, y, w) in chosen {
            let (p, q) = lex_pair(x, y);
            specs.push((p, q, w));
        }
    }
    build_cycles(cuts, specs)
}

/// Rebuild a basis with the same pair combinatorics as `pairs` (the
/// `around` pairs of a basis built for a nearby branch point set), matching
/// old endpoint positions to the nearest current branch point. Returns None
/// when the matching is ambiguous, the matched structure is no longer
/// (every cut but one) plus a spanning tree over the cuts, or a stadium
/// fails to build; callers then fall back to [`homology_basis`]. Keeping
/// the combinatorics fixed while it remains realizable keeps the functional
/// comparable between consecutive descent states.
pub fn homology_basis_hinted(
    cuts: &CutSystem,
    pairs: &[(Complex64, Complex64)],
) -> Option<HomologyBasis> {
    let n = cuts.cuts.len();
    if n == 0 || pairs.len() != 2 * n.saturating_sub(1) {
        return None;
    }
    let diameter = cuts.diameter.max(1e-300);
    let points: Vec<Complex64> = cuts.cuts.iter().flat_map(|c| [c.a, c.b]).collect();
    let match_point = |p: Complex64| -> Option<usize> {
        let mut best = (f64::INFINITY, 0usize);
        let mut second = f64::INFINITY;
        for (i, &q) in points.iter().enumerate() {
            let d = (q - p).norm();
            if d < best.0 {
                second = best.0;
                best = (d, i);
            } else if d < second {
                second = d;
            }
        }
        let unambiguous = best.0 < 0.1 * diameter && best.0 < 0.25 * second;
        unambiguous.then_some(best.1)
    };
    let mut specs: Vec<(Complex64, Complex64, f64)> = Vec::with_capacity(pairs.len());
    let mut around_cuts: Vec<usize> = Vec::new();
    let mut parent: Vec<usize> = (0..n).collect();
    for (k, &(hp, hq)) in pairs.iter().enumerate() {
        let i = match_point(hp)?;
        let j = match_point(hq)?;
        if i == j {
            return None;
        }
        let (ci, cj) = (i / 2, j / 2);
        if k + 1 < n {
            if ci != cj {
                return None;
            }
            around_cuts.push(ci);
        } else {
            if ci == cj {
                return None;
            }
            let (ra, rb) = (uf_find(&mut parent, ci), uf_find(&mut parent, cj));
            if ra == rb {
                return None;
            }
            parent[ra] = rb;
        }
        let (p, q) = if geom::lex_less(points[i], points[j]) {
            (points[i], points[j])
        } else {
            (points[j], points[i])
        };
        specs.push((p, q, pair_clearance(p, q, &points)));
    }
    around_cuts.sort_unstable();
    around_cuts.dedup();
    if around_cuts.len() + 1 != n {
        return None;
    }
    build_cycles(cuts, specs).ok()
}

fn build_cycles(
    cuts: &CutSystem,
    specs: Vec<(Complex64, Complex64, f64)>,
) -> Result<HomologyBasis> {
    let diameter = cuts.diameter.max(1e-300);
    let points: Vec<Complex64> = cuts.cuts.iter().flat_map(|c| [c.a, c.b]).collect();
    let floor = CLEARANCE_FLOOR_REL * diameter;
    let mut cycles = Vec::with_capacity(specs.len());
    for (p, q, clearance) in specs {
        let mut r = if clearance.is_finite() { 0.5 * clearance } else { 0.25 * diameter };
        r = r.min(0.5 * diameter);
        let mut built: Option<Cycle> = None;
        'radius: while r >= floor {
            for &delta in &CHAMFER_DELTAS {
                let verts = stadium_vertices(p, q, r, delta);
                if points_inside(&verts, &points) != 2 || points_inside(&verts, &[p, q]) != 2 {
                    continue;
                }
                match SheetPath::closed(verts, cuts) {
                    Ok(path) if path.has_even_parity() => {
                        built = Some(Cycle { path, around: (p, q), margin: r });
                        break 'radius;
                    }
                    _ => {}
                }
            }
            r *= 0.7;
        }
        match built {
            Some(c) => cycles.push(c),
            None => {
                return Err(Error::ClearanceFailure(format!(
                    "no valid stadium around branch pair {} and {}",
                    p, q
                )))
            }
        }
    }
    Ok(HomologyBasis { cycles })
}

impl HomologyBasis {
    /// Deterministically jitter every cycle vertex by up to `rel` of the
    /// cycle's margin and revalidate. The displacement stays well below the
    /// clearance, so the homotopy class is preserved.
    pub fn perturbed(
        &self,
        cuts: &CutSystem,
        rng: &mut impl rand::Rng,
        rel: f64,
    ) -> Result<HomologyBasis> {
        let mut cycles = Vec::with_capacity(self.cycles.len());
        for cycle in &self.cycles {
            let mut amplitude = rel.min(0.4) * cycle.margin;
            let mut done = None;
            for _ in 0..8 {
                let m = cycle.path.vertices.len();
                let mut verts: Vec<Complex64> = cycle
                    .path
                    .vertices
                    .iter()
                    .take(m - 1)
                    .map(|&v| {
                        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
                        let radius = rng.gen::<f64>().sqrt() * amplitude;
                        v + Complex64::from_polar(radius, angle)
                    })
                    .collect();
                verts.push(verts[0]);
                match SheetPath::closed(verts, cuts) {
                    Ok(path) if path.has_even_parity() => {
                        done = Some(Cycle {
                            path,
                            around: cycle.around,
                            margin: cycle.margin,
                        });
                        break;
                    }
                    _ => amplitude *= 0.5,
                }
            }
            cycles.push(done.ok_or_else(|| {
                Error::ClearanceFailure("could not perturb cycle within tolerance".into())
            })?);
        }
        Ok(HomologyBasis { cycles })
    }
}

/// The integrals summarizing one differential: the expansion coefficients
/// `T_0..T_R` at infinity and the `2g` cycle periods of `sqrt(Q) dz`.
#[derive(Debug, Clone)]
pub struct PeriodData {
    pub t: Vec<Complex64>,
    pub p: Vec<Complex64>,
}

/// Period data together with the derivative matrices of the deformation
/// system: `a[l][k] = (1/2 pi i) contour_integral z^(k-l) / sqrt(D E)` over
/// the outer circle, `b[j][k] = contour_integral z^k / sqrt(D E)` over
/// cycle j.
#[derive(Debug, Clone)]
pub struct PeriodSystem {
    pub data: PeriodData,
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
}

/// Number of free coefficients in the deformation polynomial.
fn unknown_count(genus: usize, r_order: usize) -> usize {
    genus + r_order
}

/// Compute `T`, `P`, and both derivative matrices in one sweep: a single
/// traversal of the outer circle and one traversal per cycle.
pub fn period_system(
    radical: &Radical,
    circle: &SheetPath,
    basis: &HomologyBasis,
    genus: usize,
    r_order: usize,
    rule: &GaussLegendre,
    opts: &QuadOpts,
) -> Result<PeriodSystem> {
    let nf = unknown_count(genus, r_order);
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);

    // Outer circle: T_l needs z^(-l) sqrt(Q) for l = 0..R; the a-matrix
    // needs z^m / sqrt(D E) for m = -(R-1) .. nf-1.
    let t_dim = r_order + 1;
    let a_dim = if r_order == 0 { 0 } else { nf + r_order - 1 };
    let dim = t_dim + a_dim;
    let raw = circle.integrate(rule, opts, dim, &mut |z, sign, out| {
        let sq = radical.sqrt_q_unchecked(z) * sign;
        let mut zl = Complex64::new(1.0, 0.0);
        for l in 0..t_dim {
            out[l] = sq / zl;
            zl *= z;
        }
        if a_dim > 0 {
            let inv_w = radical.sqrt_de_unchecked(z).inv() * sign;
            let zmin = z.powi(-(r_order as i32 - 1));
            let mut zm = zmin;
            for m in 0..a_dim {
                out[t_dim + m] = inv_w * zm;
                zm *= z;
            }
        }
    })?;

    let t: Vec<Complex64> = raw[..t_dim].iter().map(|v| v / two_pi_i).collect();
    let mut a = DMatrix::<Complex64>::zeros(r_order, nf);
    for l in 0..r_order {
        for k in 0..nf {
            let idx = k + r_order - 1 - l;
            a[(l, k)] = raw[t_dim + idx] / two_pi_i;
        }
    }

    // Cycles: the period of sqrt(Q) plus the b-matrix row z^k / sqrt(D E).
    let mut p = Vec::with_capacity(basis.cycles.len());
    let mut b = DMatrix::<Complex64>::zeros(basis.cycles.len(), nf);
    for (j, cycle) in basis.cycles.iter().enumerate() {
        let raw = cycle.path.integrate(rule, opts, 1 + nf, &mut |z, sign, out| {
            let w = radical.sqrt_de_unchecked(z);
            out[0] = radical.sqrt_q_unchecked(z) * sign;
            let inv_w = w.inv() * sign;
            let mut zk = Complex64::new(1.0, 0.0);
            for k in 0..nf {
                out[1 + k] = inv_w * zk;
                zk *= z;
            }
        })?;
        p.push(raw[0]);
        for k in 0..nf {
            b[(j, k)] = raw[1 + k];
        }
    }

    Ok(PeriodSystem { data: PeriodData { t, p }, a, b })
}

/// Just the periods, without the derivative matrices.
pub fn compute_periods(
    radical: &Radical,
    circle: &SheetPath,
    basis: &HomologyBasis,
    genus: usize,
    r_order: usize,
    rule: &GaussLegendre,
    opts: &QuadOpts,
) -> Result<PeriodData> {
    Ok(period_system(radical, circle, basis, genus, r_order, rule, opts)?.data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_point_setup() -> (Radical, SheetPath, HomologyBasis) {
        let cuts = CutSystem::select_cuts(&[c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let radical = Radical::new(
            cuts.clone(),
            Poly::constant(c(1.0, 0.0)),
            vec![c(-1.0, 0.0), c(1.0, 0.0)],
            c(1.0, 0.0),
            0,
        );
        let circle = big_circle(&radical.cuts).unwrap();
        let basis = HomologyBasis { cycles: Vec::new() };
        (radical, circle, basis)
    }

    #[test]
    fn two_point_t0_is_one() {
        // sqrt(Q) = 1/sqrt(z^2-1) has expansion 1/z + O(z^-3): T_0 = 1.
        let (radical, circle, basis) = two_point_setup();
        let rule = GaussLegendre::new(32);
        let data = compute_periods(&radical, &circle, &basis, 0, 0, &rule, &QuadOpts::default())
            .unwrap();
        assert_eq!(data.t.len(), 1);
        assert!((data.t[0] - c(1.0, 0.0)).norm() < 1e-10, "T0 = {}", data.t[0]);
        assert!(data.p.is_empty());
    }

    #[test]
    fn single_cycle_matches_residue_pair() {
        // Q = 1/((z^2-1)) with a cycle around both branch points equals the
        // outer circle by deformation: period = 2 pi i * T_0.
        let (radical, _, _) = two_point_setup();
        let rule = GaussLegendre::new(32);
        let verts = stadium_vertices(c(-1.0, 0.0), c(1.0, 0.0), 0.5, CHAMFER_DELTAS[0]);
        let path = SheetPath::closed(verts, &radical.cuts).unwrap();
        assert_eq!(path.total_crossings, 0);
        let got = path
            .integrate(&rule, &QuadOpts::default(), 1, &mut |z, sign, out| {
                out[0] = radical.sqrt_q_unchecked(z) * sign;
            })
            .unwrap();
        let expect = c(0.0, 2.0 * std::f64::consts::PI);
        assert!((got[0] - expect).norm() < 1e-9, "{} vs {}", got[0], expect);
    }

    #[test]
    fn doubled_traversal_doubles_the_integral() {
        let (radical, _, _) = two_point_setup();
        let rule = GaussLegendre::new(32);
        let verts = stadium_vertices(c(-1.0, 0.0), c(1.0, 0.0), 0.4, CHAMFER_DELTAS[0]);
        let single = SheetPath::closed(verts.clone(), &radical.cuts).unwrap();
        let mut doubled_verts = verts.clone();
        doubled_verts.extend_from_slice(&verts[1..]);
        let doubled = SheetPath::closed(doubled_verts, &radical.cuts).unwrap();
        let one = single
            .integrate(&rule, &QuadOpts::default(), 1, &mut |z, s, out| {
                out[0] = radical.sqrt_q_unchecked(z) * s;
            })
            .unwrap();
        let two = doubled
            .integrate(&rule, &QuadOpts::default(), 1, &mut |z, s, out| {
                out[0] = radical.sqrt_q_unchecked(z) * s;
            })
            .unwrap();
        assert!((two[0] - one[0] * 2.0).norm() < 1e-10);
    }

    #[test]
    fn crossing_cycle_has_even_parity() {
        // four branch points on a line: cuts [-2,-1] and [1,2]; a stadium
        // around the middle pair {-1, 1} crosses both cuts once.
        let pts = [c(-2.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let cuts = CutSystem::select_cuts(&pts).unwrap();
        let basis = homology_basis(&cuts).unwrap();
        assert_eq!(basis.cycles.len(), 2);
        for cycle in &basis.cycles {
            assert!(cycle.path.has_even_parity());
        }
        let middle = basis
            .cycles
            .iter()
            .find(|cy| {
                let (p, q) = cy.around;
                (p - c(-1.0, 0.0)).norm() < 1e-12 && (q - c(1.0, 0.0)).norm() < 1e-12
            })
            .expect("cycle around the middle pair");
        assert_eq!(middle.path.total_crossings, 2);
    }

    #[test]
    fn cut_cycle_periods_cancel_when_residue_at_infinity_vanishes() {
        // w^2 = z^4 - 1: 1/w = z^-2 + O(z^-6) has no residue at infinity,
        // so the periods of dz/w around the two cuts must cancel exactly.
        let pts = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let cuts = CutSystem::select_cuts(&pts).unwrap();
        let radical = Radical::new(
            cuts.clone(),
            Poly::constant(c(1.0, 0.0)),
            pts.to_vec(),
            c(1.0, 0.0),
            0,
        );
        let rule = GaussLegendre::new(32);
        let mut periods = Vec::new();
        for cut in &cuts.cuts {
            let verts = stadium_vertices(cut.a, cut.b, 0.3, CHAMFER_DELTAS[0]);
            let path = SheetPath::closed(verts, &cuts).unwrap();
            assert_eq!(path.total_crossings, 0);
            let got = path
                .integrate(&rule, &QuadOpts::default(), 1, &mut |z, s, out| {
                    out[0] = radical.sqrt_de_unchecked(z).inv() * s;
                })
                .unwrap()[0];
            assert!(got.norm() > 1.0, "cut-cycle period unexpectedly small: {}", got);
            periods.push(got);
        }
        assert_eq!(periods.len(), 2);
        assert!((periods[0] + periods[1]).norm() < 1e-9, "{} vs {}", periods[0], periods[1]);
    }
}
