//! Branch cut selection and single-valued evaluation of `sqrt(Q)`.
//!
//! The branch points of `w^2 = Q(z) = S^2(z) D(z) / E(z)` are the simple
//! roots of `D * E`. They are joined in pairs by straight cuts chosen by
//! peeling convex hulls: take every second side of the hull, remove the used
//! points, repeat. Nested peels cannot cross, so the resulting cut system is
//! automatically non-intersecting in general position.
//!
//! Off the cuts, `sqrt(D E)` is assembled as a product of per-cut factors
//!
//! `sqrt(conj(a - b) (z - a)) * sqrt(conj(a - b) (z - b)) / conj(a - b)`
//!
//! with principal square roots. Each factor is discontinuous exactly on its
//! segment `[a, b]` and tends to `+z` for large `z`, so the product is the
//! branch that behaves like `z^(g+1)` at infinity with no extra sign.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom;
use crate::poly::Poly;

/// Angular tolerance below which a cut crossing counts as tangential.
const TANGENT_SIN_TOL: f64 = 1e-8;
/// Parameter tolerance flagging crossings at segment or cut endpoints.
const ENDPOINT_PARAM_TOL: f64 = 1e-9;
/// Relative distance below which evaluation counts as on-cut.
const ON_CUT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Cut {
    pub a: Complex64,
    pub b: Complex64,
}

impl Cut {
    fn new(a: Complex64, b: Complex64) -> Self {
        Cut { a, b }
    }

    /// The per-cut radical factor: a branch of `sqrt((z - a)(z - b))` whose
    /// only discontinuity is the segment `[a, b]` and which is `+z + O(1)`
    /// at infinity.
    pub fn factor(&self, z: Complex64) -> Complex64 {
        let cd = (self.a - self.b).conj();
        (cd * (z - self.a)).sqrt() * (cd * (z - self.b)).sqrt() / cd
    }
}

#[derive(Debug, Clone)]
pub struct CutSystem {
    pub cuts: Vec<Cut>,
    /// Diameter of the branch point set, the length scale for tolerances.
    pub diameter: f64,
}

impl CutSystem {
    /// Pair up an even set of branch points by convex hull peeling.
    ///
    /// Within each peel the alternating side selection starts at the hull
    /// vertex with lexicographically smallest (Re, Im); an odd hull leaves
    /// its last vertex for the next peel. Collinear remainders fall back to
    /// pairing consecutive points along the line.
    pub fn select_cuts(branch_points: &[Complex64]) -> Result<CutSystem> {
        if branch_points.len() % 2 != 0 {
            return Err(Error::DegenerateHull(format!(
                "odd number of branch points: {}",
                branch_points.len()
            )));
        }
        let diameter = geom::diameter(branch_points);
        if branch_points.len() >= 2 && diameter == 0.0 {
            return Err(Error::DegenerateHull("coincident branch points".into()));
        }
        let mut remaining: Vec<Complex64> = branch_points.to_vec();
        let mut cuts: Vec<Cut> = Vec::new();
        let collinear_tol = 1e-12 * diameter.max(1.0);

        while !remaining.is_empty() {
            if remaining.len() == 2 {
                cuts.push(Cut::new(remaining[0], remaining[1]));
                remaining.clear();
                break;
            }
            if geom::all_collinear(&remaining, collinear_tol) {
                remaining.sort_by(geom::lex_cmp);
                for pair in remaining.chunks(2) {
                    cuts.push(Cut::new(pair[0], pair[1]));
                }
                remaining.clear();
                break;
            }
            let hull = geom::convex_hull(&remaining);
            if hull.len() < 3 {
                return Err(Error::DegenerateHull(format!(
                    "hull collapsed with {} points remaining",
                    remaining.len()
                )));
            }
            let start = (0..hull.len())
                .min_by(|&i, &j| geom::lex_cmp(&hull[i], &hull[j]))
                .unwrap();
            let h = hull.len();
            let pairs = h / 2;
            let mut used: Vec<Complex64> = Vec::new();
            for p in 0..pairs {
                let i = (start + 2 * p) % h;
                let j = (start + 2 * p + 1) % h;
                cuts.push(Cut::new(hull[i], hull[j]));
                used.push(hull[i]);
                used.push(hull[j]);
            }
            let before = remaining.len();
            remaining.retain(|&q| !used.iter().any(|&u| (u - q).norm() == 0.0));
            if remaining.len() + used.len() != before {
                return Err(Error::DegenerateHull("duplicate branch points".into()));
            }
        }

        let system = CutSystem { cuts, diameter };
        for i in 0..system.cuts.len() {
            for j in (i + 1)..system.cuts.len() {
                if geom::segments_properly_intersect(
                    system.cuts[i].a,
                    system.cuts[i].b,
                    system.cuts[j].a,
                    system.cuts[j].b,
                ) {
                    return Err(Error::DegenerateHull(format!(
                        "cuts {} and {} intersect",
                        i, j
                    )));
                }
            }
        }
        // No cut may pass through a branch point that is not its endpoint.
        for (ci, cut) in system.cuts.iter().enumerate() {
            for &p in branch_points {
                if (p - cut.a).norm() == 0.0 || (p - cut.b).norm() == 0.0 {
                    continue;
                }
                if geom::point_segment_distance(p, cut.a, cut.b) < 1e-12 * diameter.max(1.0) {
                    return Err(Error::DegenerateHull(format!(
                        "branch point {} lies on cut {}",
                        p, ci
                    )));
                }
            }
        }
        Ok(system)
    }

    /// Branch points in canonical order: cuts in selection order, endpoints
    /// within each cut sorted by (Re, Im). Drives the homology basis.
    pub fn ordered_branch_points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(2 * self.cuts.len());
        for cut in &self.cuts {
            if geom::lex_less(cut.a, cut.b) {
                out.push(cut.a);
                out.push(cut.b);
            } else {
                out.push(cut.b);
                out.push(cut.a);
            }
        }
        out
    }

    /// Distance from `z` to the nearest cut.
    pub fn distance_to_cuts(&self, z: Complex64) -> f64 {
        self.cuts
            .iter()
            .map(|c| geom::point_segment_distance(z, c.a, c.b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn on_cut_tol(&self) -> f64 {
        ON_CUT_REL_TOL * self.diameter.max(1.0)
    }

    /// Crossings of the open path segment `(a, b)` with all cuts, as
    /// `(cut index, parameter along the path)` sorted by parameter.
    ///
    /// Tangential incidences, crossings at cut endpoints (branch points) and
    /// path vertices on cuts are errors: the sheet parity would be unreliable
    /// and the caller must perturb its path.
    pub fn segment_crossings(&self, a: Complex64, b: Complex64) -> Result<Vec<(usize, f64)>> {
        let d1 = b - a;
        let len1 = d1.norm();
        if len1 == 0.0 {
            return Ok(Vec::new());
        }
        let mut hits: Vec<(usize, f64)> = Vec::new();
        for (idx, cut) in self.cuts.iter().enumerate() {
            let d2 = cut.b - cut.a;
            let len2 = d2.norm();
            let denom = geom::cross(d1, d2);
            let sin_angle = denom.abs() / (len1 * len2);
            let rhs = cut.a - a;
            if sin_angle < TANGENT_SIN_TOL {
                // Parallel lines: harmless unless the segments nearly overlap.
                let line_dist = geom::cross(d2, rhs).abs() / len2;
                let near = geom::point_segment_distance(cut.a, a, b)
                    .min(geom::point_segment_distance(cut.b, a, b));
                if line_dist < self.on_cut_tol() && near < len1 + len2 {
                    return Err(Error::TangentialCrossing(format!(
                        "segment parallel to cut {} within tolerance",
                        idx
                    )));
                }
                continue;
            }
            let t = geom::cross(rhs, d2) / denom;
            let s = geom::cross(rhs, d1) / denom;
            let t_in = t > ENDPOINT_PARAM_TOL && t < 1.0 - ENDPOINT_PARAM_TOL;
            let s_in = s > ENDPOINT_PARAM_TOL && s < 1.0 - ENDPOINT_PARAM_TOL;
            let t_near = t > -ENDPOINT_PARAM_TOL && t < 1.0 + ENDPOINT_PARAM_TOL;
            let s_near = s > -ENDPOINT_PARAM_TOL && s < 1.0 + ENDPOINT_PARAM_TOL;
            if t_in && s_in {
                hits.push((idx, t));
            } else if t_near && s_near && (!t_in || !s_in) {
                return Err(Error::TangentialCrossing(format!(
                    "crossing at endpoint of cut {} (t = {:.3e}, s = {:.3e})",
                    idx, t, s
                )));
            }
        }
        hits.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap());
        Ok(hits)
    }

    /// Combinatorial signature: index pairs of the cuts against the
    /// lex-sorted branch point list. Two states with the same signature pair
    /// their branch points the same way.
    pub fn signature(&self) -> Vec<(usize, usize)> {
        let mut sig = self.pair_indices(self.cuts.iter().map(|c| (c.a, c.b)));
        sig.sort();
        sig
    }

    /// Map point pairs to index pairs (smaller index first) against the
    /// lex-sorted branch point list.
    pub fn pair_indices(
        &self,
        pairs: impl IntoIterator<Item = (Complex64, Complex64)>,
    ) -> Vec<(usize, usize)> {
        let mut sorted: Vec<Complex64> = Vec::new();
        for cut in &self.cuts {
            sorted.push(cut.a);
            sorted.push(cut.b);
        }
        sorted.sort_by(geom::lex_cmp);
        let index_of = |p: Complex64| -> usize {
            sorted
                .iter()
                .enumerate()
                .min_by(|(_, x), (_, y)| {
                    ((*x - p).norm()).partial_cmp(&(*y - p).norm()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap()
        };
        pairs
            .into_iter()
            .map(|(a, b)| {
                let i = index_of(a);
                let j = index_of(b);
                (i.min(j), i.max(j))
            })
            .collect()
    }
}

/// Evaluator for the globally cut branch of `sqrt(Q)` and its companions.
#[derive(Debug, Clone)]
pub struct Radical {
    pub cuts: CutSystem,
    s: Poly,
    e_roots: Vec<Complex64>,
    /// Pinned leading coefficient: `t_R` for `R >= 1`, `t_0` for `R = 0`.
    lead: Complex64,
    r_order: usize,
}

impl Radical {
    pub fn new(cuts: CutSystem, s: Poly, e_roots: Vec<Complex64>, lead: Complex64, r_order: usize) -> Self {
        Radical { cuts, s, e_roots, lead, r_order }
    }

    fn guard(&self, z: Complex64) -> Result<()> {
        if self.cuts.distance_to_cuts(z) < self.cuts.on_cut_tol() {
            return Err(Error::OnCutEvaluation(z));
        }
        Ok(())
    }

    /// `W(z)`: the branch of `sqrt(D(z) E(z))` cut along the cut system,
    /// asymptotic to `+z^(g+1)`.
    pub fn sqrt_de(&self, z: Complex64) -> Result<Complex64> {
        self.guard(z)?;
        Ok(self.sqrt_de_unchecked(z))
    }

    pub fn sqrt_de_unchecked(&self, z: Complex64) -> Complex64 {
        let mut w = Complex64::new(1.0, 0.0);
        for cut in &self.cuts.cuts {
            w *= cut.factor(z);
        }
        w
    }

    pub fn inv_sqrt_de(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.sqrt_de(z)?.inv())
    }

    fn e_value(&self, z: Complex64) -> Complex64 {
        let mut e = Complex64::new(1.0, 0.0);
        for &r in &self.e_roots {
            e *= z - r;
        }
        e
    }

    /// The branch of `sqrt(Q)` with `sqrt(Q) ~ t_R z^(R-1)` at infinity
    /// (`t_0 / z` for `R = 0`).
    pub fn sqrt_q(&self, z: Complex64) -> Result<Complex64> {
        self.guard(z)?;
        Ok(self.sqrt_q_unchecked(z))
    }

    pub fn sqrt_q_unchecked(&self, z: Complex64) -> Complex64 {
        self.s.eval(z) * self.sqrt_de_unchecked(z) / self.e_value(z)
    }

    /// Asymptotic normalization check at a distant probe point:
    /// `sqrt(Q) * z^(1-R) / t_R` must be close to +1. A value near -1 would
    /// mean the branch assembly lost its sign; anything else is a bug.
    pub fn verify_normalization(&self) -> Result<()> {
        let span = self
            .cuts
            .cuts
            .iter()
            .flat_map(|c| [c.a.norm(), c.b.norm()])
            .fold(1.0f64, f64::max);
        let probe = Complex64::from_polar(1000.0 * span, 0.567);
        let w = self.sqrt_q_unchecked(probe);
        let ratio = w * probe.powi(1 - self.r_order as i32) / self.lead;
        if (ratio - Complex64::new(1.0, 0.0)).norm() > 0.2 {
            return Err(Error::DegenerateHull(format!(
                "radical normalization drifted: probe ratio {}",
                ratio
            )));
        }
        Ok(())
    }
}
