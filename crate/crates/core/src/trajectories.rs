//! Critical trajectory graph of `Q dz^2`.
//!
//! Trajectories are the curves along which `Q(z) dz^2 < 0`. The critical
//! ones emanate from the zeros and simple poles of `Q`: a simple pole emits
//! one, a simple zero three, and a zero of order `2m` (from a multiplicity
//! `m` root of `S`) emits `2m + 2`, at equal angles fixed by the leading
//! local coefficient. Each direction is traced with an adaptive embedded
//! Runge-Kutta pair on the unit-speed field `dz/ds = i conj(w)/|w|`,
//! `w = sqrt(Q)` continued by sign along the path. The accumulated level
//! integral `int w dz` is purely imaginary on an exact trajectory; its real
//! part measures drift and is projected away when it grows, keeping long
//! separatrices on course. Traced arcs are deduplicated (each bounded arc is
//! found once from either end) into a graph over the critical points.

use num_complex::Complex64;

use crate::descent::DifferentialState;
use crate::error::{Error, Result};
use crate::geom;

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CriticalKind {
    /// Simple pole of `Q`: one emitted trajectory.
    Pole,
    /// Simple zero of `Q` (root of `D`): three emitted trajectories.
    SimpleZero,
    /// Root of `S` with the given multiplicity: order `2m` zero of `Q`,
    /// `2m + 2` emitted trajectories.
    StagnationZero { multiplicity: usize },
}

impl CriticalKind {
    /// Order of `Q` at the point (`-1` for a pole).
    pub fn local_order(&self) -> i64 {
        match self {
            CriticalKind::Pole => -1,
            CriticalKind::SimpleZero => 1,
            CriticalKind::StagnationZero { multiplicity } => 2 * *multiplicity as i64,
        }
    }

    pub fn direction_count(&self) -> usize {
        (self.local_order() + 2) as usize
    }
}

#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub location: Complex64,
    pub kind: CriticalKind,
    /// Launch angles in `[0, 2pi)`, ascending.
    pub directions: Vec<f64>,
}

/// Angles solving `arg(c) + (k + 2) theta = pi (mod 2 pi)` where
/// `Q(z) ~ c (z - p)^k`: the directions along which `Q dz^2` is negative.
fn launch_directions(c: Complex64, order: i64) -> Vec<f64> {
    let count = (order + 2) as usize;
    let denom = order as f64 + 2.0;
    let base = std::f64::consts::PI - c.arg();
    let mut dirs: Vec<f64> = (0..count)
        .map(|j| ((base + TAU * j as f64) / denom).rem_euclid(TAU))
        .collect();
    dirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dirs
}

/// Group points whose mutual distance chains below `tol`.
fn cluster_indices(points: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() < tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Enumerate the critical points of `Q` with their launch directions.
/// Order: poles (input order), then `D` roots (lexicographic), then `S`
/// root clusters (lexicographic by representative).
pub fn critical_points(state: &DifferentialState) -> Result<Vec<CriticalPoint>> {
    let scale = state.scale();
    let cluster_tol = 1e-6 * scale;
    let ambiguity_tol = 10.0 * cluster_tol;
    let e = &state.spec.e_points;
    let mut nodes: Vec<CriticalPoint> = Vec::new();

    for (i, &p) in e.iter().enumerate() {
        let mut denom = Complex64::new(1.0, 0.0);
        for (j, &q) in e.iter().enumerate() {
            if j != i {
                denom *= p - q;
            }
        }
        let s_val = state.s.eval(p);
        let c = s_val * s_val * state.delta.eval(p) / denom;
        if c.norm() == 0.0 {
            return Err(Error::MultiplicityAmbiguity(format!(
                "vanishing local coefficient at pole {}",
                p
            )));
        }
        nodes.push(CriticalPoint {
            location: p,
            kind: CriticalKind::Pole,
            directions: launch_directions(c, -1),
        });
    }

    let mut droots = state.delta_roots.clone();
    droots.sort_by(geom::lex_cmp);
    for (i, &d) in droots.iter().enumerate() {
        let mut num = Complex64::new(1.0, 0.0);
        for (j, &q) in droots.iter().enumerate() {
            if j != i {
                num *= d - q;
            }
        }
        let mut e_val = Complex64::new(1.0, 0.0);
        for &q in e.iter() {
            e_val *= d - q;
        }
        let s_val = state.s.eval(d);
        let c = s_val * s_val * num / e_val;
        if c.norm() == 0.0 {
            return Err(Error::MultiplicityAmbiguity(format!(
                "vanishing local coefficient at zero {}",
                d
            )));
        }
        nodes.push(CriticalPoint {
            location: d,
            kind: CriticalKind::SimpleZero,
            directions: launch_directions(c, 1),
        });
    }

    if state.s.degree() > 0 {
        let sroots = state.s.roots()?;
        let groups = cluster_indices(&sroots, cluster_tol);
        // reject configurations where the cluster split is borderline
        for (gi, ga) in groups.iter().enumerate() {
            for gb in groups.iter().skip(gi + 1) {
                for &ia in ga {
                    for &ib in gb {
                        let d = (sroots[ia] - sroots[ib]).norm();
                        if d < ambiguity_tol {
                            return Err(Error::MultiplicityAmbiguity(format!(
                                "stagnation roots {} and {} separated by {:.3e}, inside the ambiguity band",
                                sroots[ia], sroots[ib], d
                            )));
                        }
                    }
                }
            }
        }
        let mut clusters: Vec<(Complex64, Vec<usize>)> = groups
            .into_iter()
            .map(|g| {
                let rep = g.iter().map(|&i| sroots[i]).sum::<Complex64>() / g.len() as f64;
                (rep, g)
            })
            .collect();
        clusters.sort_by(|a, b| geom::lex_cmp(&a.0, &b.0));
        for (rep, members) in clusters {
            for &other in droots.iter().chain(e.iter()) {
                if (other - rep).norm() < ambiguity_tol {
                    return Err(Error::MultiplicityAmbiguity(format!(
                        "stagnation root {} too close to another critical point {}",
                        rep, other
                    )));
                }
            }
            let m = members.len();
            let lead = state.spec.lead();
            let mut outer = Complex64::new(1.0, 0.0);
            for (i, &sr) in sroots.iter().enumerate() {
                if !members.contains(&i) {
                    outer *= rep - sr;
                }
            }
            let mut e_val = Complex64::new(1.0, 0.0);
            for &q in e.iter() {
                e_val *= rep - q;
            }
            let c = lead * lead * outer * outer * state.delta.eval(rep) / e_val;
            if c.norm() == 0.0 {
                return Err(Error::MultiplicityAmbiguity(format!(
                    "vanishing local coefficient at stagnation point {}",
                    rep
                )));
            }
            nodes.push(CriticalPoint {
                location: rep,
                kind: CriticalKind::StagnationZero { multiplicity: m },
                directions: launch_directions(c, 2 * m as i64),
            });
        }
    }

    Ok(nodes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    /// Captured by the critical point with this node index.
    ReachedNode(usize),
    /// Returned to its own launch point without meeting any node.
    ClosedLoop,
    /// Left the disk of radius `escape_mult * scale` around the node centroid.
    Escaped,
    /// Step budget exhausted.
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<Complex64>,
    pub termination: Termination,
    pub source: usize,
    pub direction_index: usize,
    pub arclength: f64,
}

#[derive(Debug, Clone)]
pub struct TraceOpts {
    /// Capture radius relative to the branch set diameter.
    pub capture_rel: f64,
    /// Escape radius in branch set diameters, measured from the node centroid.
    pub escape_mult: f64,
    pub max_steps: usize,
    /// Absolute step error tolerance relative to the branch set diameter.
    pub atol_rel: f64,
    pub h_init_rel: f64,
    pub h_max_rel: f64,
    pub h_min_rel: f64,
    /// Launch offset in capture radii. The launch point sits off the true
    /// critical level by an error growing like a power of the offset, and
    /// the drift control preserves whatever level the trace starts on, so
    /// a large offset makes long arcs miss their terminal node.
    pub launch_mult: f64,
    /// Drift projection gate relative to the branch set diameter.
    pub level_tol_rel: f64,
}

impl Default for TraceOpts {
    fn default() -> Self {
        TraceOpts {
            capture_rel: 1e-3,
            escape_mult: 10.0,
            max_steps: 100_000,
            atol_rel: 1e-9,
            h_init_rel: 1e-3,
            h_max_rel: 0.05,
            h_min_rel: 1e-9,
            launch_mult: 1.0,
            level_tol_rel: 1e-6,
        }
    }
}

/// One Dormand-Prince 5(4) step: returns the fifth order endpoint and the
/// embedded error estimate.
fn dopri_step(f: &mut impl FnMut(Complex64) -> Complex64, z: Complex64, h: f64) -> (Complex64, f64) {
    let k1 = f(z);
    let k2 = f(z + h * (0.2 * k1));
    let k3 = f(z + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    let k4 = f(z + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    let k5 = f(z
        + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3
            - 212.0 / 729.0 * k4));
    let k6 = f(z
        + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
            + 49.0 / 176.0 * k4
            - 5103.0 / 18656.0 * k5));
    let z5 = z
        + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
            - 2187.0 / 6784.0 * k5
            + 11.0 / 84.0 * k6);
    let k7 = f(z5);
    let z4 = z
        + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4
            - 92097.0 / 339200.0 * k5
            + 187.0 / 2100.0 * k6
            + 1.0 / 40.0 * k7);
    (z5, (z5 - z4).norm())
}

/// Trace one critical trajectory from `nodes[source]` along direction
/// `direction_index`.
pub fn trace(
    state: &DifferentialState,
    nodes: &[CriticalPoint],
    source: usize,
    direction_index: usize,
    opts: &TraceOpts,
) -> Result<Trajectory> {
    let scale = state.scale();
    let capture = opts.capture_rel * scale;
    let launch = opts.launch_mult * capture;
    let atol = opts.atol_rel * scale;
    let h_max = opts.h_max_rel * scale;
    let h_min = opts.h_min_rel * scale;
    let locations: Vec<Complex64> = nodes.iter().map(|n| n.location).collect();
    let center = geom::centroid(&locations);
    let escape_r = opts.escape_mult * scale;
    let level_gate = 0.5 * opts.level_tol_rel * scale;

    let p = nodes[source].location;
    let theta = nodes[source].directions[direction_index];
    let dir = Complex64::from_polar(1.0, theta);
    let mut z = p + launch * dir;

    let continue_sign = |at: Complex64, w_ref: Complex64| -> Complex64 {
        let w = state.radical.sqrt_q_unchecked(at);
        if (w * w_ref.conj()).re >= 0.0 {
            w
        } else {
            -w
        }
    };
    let tangent = |w: Complex64| -> Complex64 {
        let n = w.norm();
        if n > 0.0 {
            Complex64::new(0.0, 1.0) * w.conj() / n
        } else {
            Complex64::new(0.0, 0.0)
        }
    };

    let w_raw = state.radical.sqrt_q_unchecked(z);
    if !w_raw.is_finite() || w_raw.norm() == 0.0 {
        return Err(Error::StiffRegion(z));
    }
    let mut w_ref = if (tangent(w_raw) * dir.conj()).re >= 0.0 {
        w_raw
    } else {
        -w_raw
    };
    if (tangent(w_ref) * dir.conj()).re < 0.2 {
        return Err(Error::StiffRegion(z));
    }

    let mut points = vec![p, z];
    let launch_point = z;
    let mut s_total = launch;
    let mut w_acc = Complex64::new(0.0, 0.0);
    let mut h = (opts.h_init_rel * scale).min(h_max);
    let mut rejections = 0usize;

    for _ in 0..opts.max_steps {
        let w_here = w_ref;
        let mut field = |at: Complex64| -> Complex64 {
            let w = continue_sign(at, w_here);
            let t = tangent(w);
            if t.norm() > 0.0 {
                t
            } else {
                tangent(w_here)
            }
        };
        let (z_new, err) = dopri_step(&mut field, z, h);
        if !z_new.is_finite() || err.is_nan() {
            return Err(Error::StiffRegion(z));
        }
        if err > atol {
            h *= (atol / err).powf(0.2) * 0.9;
            rejections += 1;
            if h < h_min || rejections > 200 {
                return Err(Error::StiffRegion(z));
            }
            continue;
        }
        rejections = 0;

        let z_mid = 0.5 * (z + z_new);
        let w_mid = continue_sign(z_mid, w_ref);
        let w_new = continue_sign(z_new, w_mid);
        w_acc += (z_new - z) / 6.0 * (w_ref + 4.0 * w_mid + w_new);
        let seg_start = z;
        z = z_new;
        w_ref = w_new;
        s_total += h;
        points.push(z);

        // project back onto the level set when the accumulated real part
        // corresponds to a displacement beyond the gate
        let wn = w_ref.norm();
        if wn > 0.0 && (w_acc.re / wn).abs() > level_gate {
            let shift = -w_acc.re * w_ref.conj() / (wn * wn);
            z += shift;
            w_acc += w_ref * shift;
            w_ref = continue_sign(z, w_ref);
            *points.last_mut().unwrap() = z;
        }

        if err > 0.0 {
            h = (h * (atol / err).powf(0.2) * 0.9).clamp(h * 0.2, h * 5.0);
        } else {
            h *= 5.0;
        }
        h = h.clamp(h_min, h_max);

        let exempt_source = s_total <= 3.0 * launch;
        let mut hit: Option<usize> = None;
        for (j, loc) in locations.iter().enumerate() {
            if exempt_source && j == source {
                continue;
            }
            if geom::point_segment_distance(*loc, seg_start, z) < capture {
                hit = Some(j);
                break;
            }
        }
        if let Some(j) = hit {
            points.push(locations[j]);
            return Ok(Trajectory {
                points,
                termination: Termination::ReachedNode(j),
                source,
                direction_index,
                arclength: s_total,
            });
        }
        if (z - center).norm() > escape_r {
            return Ok(Trajectory {
                points,
                termination: Termination::Escaped,
                source,
                direction_index,
                arclength: s_total,
            });
        }
        if s_total > 10.0 * launch && (z - launch_point).norm() < 0.5 * capture {
            return Ok(Trajectory {
                points,
                termination: Termination::ClosedLoop,
                source,
                direction_index,
                arclength: s_total,
            });
        }
    }

    Ok(Trajectory {
        points,
        termination: Termination::StepLimit,
        source,
        direction_index,
        arclength: s_total,
    })
}

#[derive(Debug, Clone)]
pub struct GraphEdge {
    pub from: usize,
    pub from_direction: usize,
    /// Landing node for bounded arcs, `None` for escaping or open ones.
    pub to: Option<usize>,
    pub termination: Termination,
    pub points: Vec<Complex64>,
    pub arclength: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryGraph {
    pub nodes: Vec<CriticalPoint>,
    pub edges: Vec<GraphEdge>,
    /// `(node, direction, error)` for traces that failed to complete.
    pub failures: Vec<(usize, usize, String)>,
}

/// Point at half the total polyline length.
fn polyline_midpoint(points: &[Complex64]) -> Complex64 {
    let total: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if total == 0.0 || points.len() < 2 {
        return points[0];
    }
    let mut acc = 0.0;
    for w in points.windows(2) {
        let seg = (w[1] - w[0]).norm();
        if acc + seg >= 0.5 * total {
            let t = (0.5 * total - acc) / seg;
            return w[0] + (w[1] - w[0]) * t;
        }
        acc += seg;
    }
    *points.last().unwrap()
}

/// Trace every direction of every critical point and assemble the graph.
/// A bounded arc is discovered twice, once from each endpoint; the second
/// discovery (same unordered endpoint pair, midpoint within 5% of the branch
/// set diameter) is dropped.
pub fn build_graph(state: &DifferentialState, opts: &TraceOpts) -> Result<TrajectoryGraph> {
    let nodes = critical_points(state)?;
    let scale = state.scale();
    let mut edges: Vec<GraphEdge> = Vec::new();
    let mut failures: Vec<(usize, usize, String)> = Vec::new();

    for i in 0..nodes.len() {
        for d in 0..nodes[i].directions.len() {
            match trace(state, &nodes, i, d, opts) {
                Ok(traj) => {
                    let to = match traj.termination {
                        Termination::ReachedNode(j) => Some(j),
                        _ => None,
                    };
                    let duplicate = if let Some(j) = to {
                        let mid = polyline_midpoint(&traj.points);
                        edges.iter().any(|e| {
                            e.to.map_or(false, |k| {
                                let same_pair = (e.from == i && k == j) || (e.from == j && k == i);
                                same_pair
                                    && (polyline_midpoint(&e.points) - mid).norm() < 0.05 * scale
                            })
                        })
                    } else {
                        false
                    };
                    if !duplicate {
                        edges.push(GraphEdge {
                            from: i,
                            from_direction: d,
                            to,
                            termination: traj.termination,
                            points: traj.points,
                            arclength: traj.arclength,
                        });
                    }
                }
                Err(e) => failures.push((i, d, e.to_string())),
            }
        }
    }

    Ok(TrajectoryGraph { nodes, edges, failures })
}

impl TrajectoryGraph {
    /// Component id per node, connected through bounded arcs.
    pub fn connected_components(&self) -> Vec<usize> {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for e in &self.edges {
            if let Some(j) = e.to {
                let (a, b) = (find(&mut parent, e.from), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let mut ids: Vec<usize> = vec![usize::MAX; n];
        let mut next = 0usize;
        for i in 0..n {
            let r = find(&mut parent, i);
            if ids[r] == usize::MAX {
                ids[r] = next;
                next += 1;
            }
            ids[i] = ids[r];
        }
        ids
    }

    /// Whether every node lies in a single component of bounded arcs.
    pub fn is_connected(&self) -> bool {
        self.connected_components().iter().all(|&c| c == 0)
    }

    /// Arc endpoints incident to each node (self loops count twice,
    /// unbounded arcs count once at their source).
    pub fn node_incidences(&self) -> Vec<usize> {
        let mut inc = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            inc[e.from] += 1;
            if let Some(j) = e.to {
                inc[j] += 1;
            }
        }
        inc
    }

    pub fn direction_counts(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.directions.len()).collect()
    }

    /// Every emitted direction accounted for by exactly one arc endpoint.
    pub fn degree_law_holds(&self) -> bool {
        self.failures.is_empty() && self.node_incidences() == self.direction_counts()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::{DifferentialState, ProblemSpec};
    use crate::poly::Poly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_point_state() -> DifferentialState {
        let spec = ProblemSpec {
            e_points: vec![c(-1.0, 0.0), c(1.0, 0.0)],
            phi: Vec::new(),
            t0: 1.0,
            l_degree: 0,
        };
        DifferentialState::assemble(&spec, Poly::constant(c(1.0, 0.0)), Poly::constant(c(1.0, 0.0)))
            .unwrap()
    }

    #[test]
    fn two_point_directions_face_each_other() {
        let state = two_point_state();
        let nodes = critical_points(&state).unwrap();
        assert_eq!(nodes.len(), 2);
        for n in &nodes {
            assert_eq!(n.kind, CriticalKind::Pole);
            assert_eq!(n.directions.len(), 1);
        }
        // pole at -1 launches toward +1 (angle 0), pole at +1 toward -1 (pi)
        assert!((nodes[0].directions[0] - 0.0).abs() < 1e-12);
        assert!((nodes[1].directions[0] - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn two_point_trace_follows_the_segment() {
        let state = two_point_state();
        let nodes = critical_points(&state).unwrap();
        let traj = trace(&state, &nodes, 0, 0, &TraceOpts::default()).unwrap();
        assert_eq!(traj.termination, Termination::ReachedNode(1));
        let a = c(-1.0, 0.0);
        let b = c(1.0, 0.0);
        let max_dev = traj
            .points
            .iter()
            .map(|&z| crate::geom::point_segment_distance(z, a, b))
            .fold(0.0f64, f64::max);
        assert!(max_dev < 1e-3, "max deviation {} off the segment", max_dev);
        assert!((traj.arclength - 2.0).abs() < 0.1);
    }

    #[test]
    fn two_point_graph_is_one_edge() {
        let state = two_point_state();
        let graph = build_graph(&state, &TraceOpts::default()).unwrap();
        assert!(graph.failures.is_empty());
        assert_eq!(graph.edges.len(), 1, "reverse trace must deduplicate");
        assert!(graph.is_connected());
        assert!(graph.degree_law_holds());
    }

    #[test]
    fn triangle_zero_directions_point_at_the_poles() {
        // poles at the cube roots of unity, zero of D pinned at the center
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        let spec = ProblemSpec {
            e_points: vec![c(1.0, 0.0), w, w * w],
            phi: Vec::new(),
            t0: 1.0,
            l_degree: 0,
        };
        let delta = Poly::from_roots(c(1.0, 0.0), &[c(0.0, 0.0)]);
        let state =
            DifferentialState::assemble(&spec, Poly::constant(c(1.0, 0.0)), delta).unwrap();
        let nodes = critical_points(&state).unwrap();
        assert_eq!(nodes.len(), 4);
        let zero = &nodes[3];
        assert_eq!(zero.kind, CriticalKind::SimpleZero);
        let expect = [0.0, TAU / 3.0, 2.0 * TAU / 3.0];
        for (got, want) in zero.directions.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-10, "direction {} vs {}", got, want);
        }
    }

    #[test]
    fn merged_square_center_emits_four_arcs() {
        // S carries a simple root at the origin, D is trivial: order 2 zero
        let spec = ProblemSpec {
            e_points: vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)],
            phi: Vec::new(),
            t0: 1.0,
            l_degree: 1,
        };
        let s = Poly::from_roots(c(1.0, 0.0), &[c(0.0, 0.0)]);
        let state = DifferentialState::assemble(&spec, s, Poly::constant(c(1.0, 0.0))).unwrap();
        let nodes = critical_points(&state).unwrap();
        assert_eq!(nodes.len(), 5);
        let center = &nodes[4];
        assert_eq!(center.kind, CriticalKind::StagnationZero { multiplicity: 1 });
        assert_eq!(center.directions.len(), 4);
        let expect = [0.0, 0.25 * TAU, 0.5 * TAU, 0.75 * TAU];
        for (got, want) in center.directions.iter().zip(expect.iter()) {
            assert!((got - want).abs() < 1e-10, "direction {} vs {}", got, want);
        }

        let graph = build_graph(&state, &TraceOpts::default()).unwrap();
        assert!(graph.failures.is_empty(), "failures: {:?}", graph.failures);
        assert_eq!(graph.edges.len(), 4);
        assert!(graph.is_connected());
        assert!(graph.degree_law_holds());
    }

    #[test]
    fn cluster_indices_groups_chains() {
        let pts = [c(0.0, 0.0), c(1e-8, 0.0), c(2e-8, 0.0), c(1.0, 0.0)];
        let groups = cluster_indices(&pts, 1.5e-8);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].len(), 3);
        assert_eq!(groups[1], vec![3]);
    }

    #[test]
    fn polyline_midpoint_is_halfway() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)];
        let mid = polyline_midpoint(&pts);
        assert!((mid - c(1.0, 0.0)).norm() < 1e-12);
    }
}
