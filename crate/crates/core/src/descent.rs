//! Gradient descent on the polynomial factors of `Q = S^2 D / E`.
//!
//! The functional being minimized is
//!
//! `F = 1/2 sum_l |T_l - t_l|^2 + 1/2 sum_j (Re P_j)^2`
//!
//! with `T_l` the expansion coefficients of `sqrt(Q)` at infinity and `P_j`
//! the cycle periods. Each iteration solves a square real linear system for
//! the polynomial correction `Fdot` that moves `T` straight toward its
//! target and kills the real parts of the periods, splits `Fdot` into
//! `(Sdot, Ddot)` through a Sylvester system, and takes an adaptive Euler
//! step. The correction is scaled so that dF/dt = -F along the flow, making
//! F decay exponentially in flow time.
//!
//! Two discrete events interrupt the smooth flow: a pair of `D` roots that
//! comes closer than the merge threshold collapses into a double zero moved
//! into `S` (degree bookkeeping `L -> L+1`, `M -> M-2`), and a combinatorial
//! change of the cut pairing makes the functional momentarily incomparable
//! across the change, so the acceptance baseline resets there.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom;
use crate::periods::{
    big_circle, homology_basis, HomologyBasis, PeriodData, PeriodSystem, SheetPath,
};
use crate::poly::{sylvester_residual, sylvester_split, Poly};
use crate::quad::{GaussLegendre, QuadOpts};
use crate::radical::{CutSystem, Radical};

const CONDITION_LIMIT: f64 = 1e12;
const MERGE_REL: f64 = 1e-4;
const POLE_COLLISION_REL: f64 = 1e-7;
const LEAD_DRIFT_TOL: f64 = 1e-9;

/// The data of one problem instance: fixed simple poles `E`, the polar part
/// coefficients at infinity, and the initial degree of `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// Locations of the prescribed simple poles (roots of `E`), distinct.
    pub e_points: Vec<Complex64>,
    /// `[t_1, .., t_R]`: derivative of the polynomial part of the potential
    /// is `t_1 + t_2 z + .. + t_R z^(R-1)`. Empty for the capacity problem.
    pub phi: Vec<Complex64>,
    /// Residue target at infinity; must be real, and nonzero when `phi` is
    /// empty.
    pub t0: f64,
    /// Initial degree of the stagnation factor `S`.
    pub l_degree: usize,
}

impl ProblemSpec {
    pub fn r_order(&self) -> usize {
        self.phi.len()
    }

    pub fn n_poles(&self) -> usize {
        self.e_points.len()
    }

    /// Degree of `D` for the initial `L`: `M = 2R - 2 + N - 2L`.
    pub fn m_degree(&self) -> Result<usize> {
        let m = 2 * self.r_order() as i64 - 2 + self.n_poles() as i64
            - 2 * self.l_degree as i64;
        if m < 0 {
            return Err(Error::ConfigError(format!(
                "degree bookkeeping gives negative deg D = {}",
                m
            )));
        }
        Ok(m as usize)
    }

    /// Targets `[t_0, t_1, .., t_R]` in one vector.
    pub fn targets(&self) -> Vec<Complex64> {
        let mut t = Vec::with_capacity(self.r_order() + 1);
        t.push(Complex64::new(self.t0, 0.0));
        t.extend_from_slice(&self.phi);
        t
    }

    /// Pinned leading coefficient of `S`: `t_R`, or `t_0` when `R = 0`.
    pub fn lead(&self) -> Complex64 {
        if self.phi.is_empty() {
            Complex64::new(self.t0, 0.0)
        } else {
            *self.phi.last().unwrap()
        }
    }

    pub fn e_diameter(&self) -> f64 {
        geom::diameter(&self.e_points).max(1e-12)
    }

    pub fn validate(&self) -> Result<()> {
        if self.e_points.is_empty() {
            return Err(Error::ConfigError("at least one pole is required".into()));
        }
        for (i, &a) in self.e_points.iter().enumerate() {
            for &b in &self.e_points[i + 1..] {
                if (a - b).norm() < 1e-12 * self.e_diameter().max(1.0) {
                    return Err(Error::ConfigError(format!("poles {} and {} coincide", a, b)));
                }
            }
        }
        if self.phi.is_empty() {
            if self.t0 == 0.0 {
                return Err(Error::ConfigError(
                    "t0 must be nonzero for the capacity problem".into(),
                ));
            }
        } else if self.phi.last().unwrap().norm() == 0.0 {
            return Err(Error::ConfigError("leading polar coefficient t_R is zero".into()));
        }
        let m = self.m_degree()?;
        if (m + self.n_poles()) < 2 {
            return Err(Error::ConfigError("fewer than two branch points".into()));
        }
        Ok(())
    }
}

/// A concrete differential: polynomial data plus all derived geometry.
/// `L` and `M` are implicit in the degrees of `s` and `delta` and can differ
/// from the configured `l_degree` after merges.
#[derive(Debug, Clone)]
pub struct DifferentialState {
    pub spec: ProblemSpec,
    pub s: Poly,
    pub delta: Poly,
    pub delta_roots: Vec<Complex64>,
    pub radical: Radical,
    pub basis: HomologyBasis,
    pub circle: SheetPath,
    pub genus: usize,
}

impl DifferentialState {
    /// Validate polynomial invariants, find the `D` roots, and build the
    /// cut system, homology basis and outer circle.
    pub fn assemble(spec: &ProblemSpec, s: Poly, delta: Poly) -> Result<Self> {
        let droots = delta.roots()?;
        Self::assemble_with_roots(spec, s, delta, droots)
    }

    pub fn assemble_with_roots(
        spec: &ProblemSpec,
        s: Poly,
        delta: Poly,
        delta_roots: Vec<Complex64>,
    ) -> Result<Self> {
        Self::assemble_with_hint(spec, s, delta, delta_roots, None)
    }

    /// Like [`Self::assemble_with_roots`], but first tries to rebuild the
    /// homology basis with the same pair combinatorics as `hint` (a nearby
    /// state's basis). While the hinted combinatorics remain realizable the
    /// functional stays comparable across consecutive descent states; a
    /// fresh construction is a chart switch.
    pub fn assemble_with_hint(
        spec: &ProblemSpec,
        s: Poly,
        delta: Poly,
        delta_roots: Vec<Complex64>,
        hint: Option<&[(Complex64, Complex64)]>,
    ) -> Result<Self> {
        spec.validate()?;
        let r = spec.r_order() as i64;
        let l = s.degree() as i64;
        let m = delta.degree() as i64;
        let n = spec.n_poles() as i64;
        let m_eff = if delta.degree() == 0 { 0 } else { m };
        if 2 * l + m_eff - n != 2 * (r - 1) {
            return Err(Error::ConfigError(format!(
                "degree relation violated: 2*{} + {} - {} != 2({} - 1)",
                l, m_eff, n, r
            )));
        }
        let lead = spec.lead();
        if (s.leading() - lead).norm() > LEAD_DRIFT_TOL * (1.0 + lead.norm()) {
            return Err(Error::ConfigError(format!(
                "leading coefficient of S drifted: {} vs {}",
                s.leading(),
                lead
            )));
        }
        if delta.degree() > 0
            && (delta.leading() - Complex64::new(1.0, 0.0)).norm() > LEAD_DRIFT_TOL
        {
            return Err(Error::ConfigError("D is no longer monic".into()));
        }

        let mut branch_points: Vec<Complex64> = spec.e_points.clone();
        if delta.degree() > 0 {
            branch_points.extend_from_slice(&delta_roots);
        }
        let diam = geom::diameter(&branch_points).max(1e-12);
        for &d in &delta_roots {
            for &e in &spec.e_points {
                if (d - e).norm() < POLE_COLLISION_REL * diam {
                    return Err(Error::DegenerateHull(format!(
                        "zero {} collides with pole {}",
                        d, e
                    )));
                }
            }
        }

        let cuts = CutSystem::select_cuts(&branch_points)?;
        let genus = branch_points.len() / 2 - 1;
        let radical = Radical::new(
            cuts.clone(),
            s.clone(),
            spec.e_points.clone(),
            lead,
            spec.r_order(),
        );
        radical.verify_normalization()?;
        let basis = hint
            .and_then(|pairs| crate::periods::homology_basis_hinted(&radical.cuts, pairs))
            .map_or_else(|| homology_basis(&radical.cuts), Ok)?;
        if basis.cycles.len() != 2 * genus {
            return Err(Error::ClearanceFailure(format!(
                "expected {} cycles, built {}",
                2 * genus,
                basis.cycles.len()
            )));
        }
        let circle = big_circle(&radical.cuts)?;
        Ok(DifferentialState {
            spec: spec.clone(),
            s,
            delta,
            delta_roots,
            radical,
            basis,
            circle,
            genus,
        })
    }

    /// Current degree of `S`.
    pub fn l_degree(&self) -> usize {
        self.s.degree()
    }

    /// Current degree of `D`.
    pub fn m_degree(&self) -> usize {
        self.delta.degree()
    }

    /// Branch point set diameter, the length scale for all tolerances.
    pub fn scale(&self) -> f64 {
        self.radical.cuts.diameter.max(1e-12)
    }

    /// Chart identity: the cut pairing plus the branch point pairs enclosed
    /// by the homology cycles, both as lex-sorted point index pairs. The
    /// functional compares period targets cycle by cycle, so a change in
    /// either part makes functional values incomparable across the change.
    pub fn cut_signature(&self) -> Vec<(usize, usize)> {
        let mut sig = self.radical.cuts.signature();
        sig.extend(
            self.radical
                .cuts
                .pair_indices(self.basis.cycles.iter().map(|c| c.around)),
        );
        sig
    }

    /// Period data and deformation matrices at this state.
    pub fn period_system(&self, rule: &GaussLegendre, opts: &QuadOpts) -> Result<PeriodSystem> {
        crate::periods::period_system(
            &self.radical,
            &self.circle,
            &self.basis,
            self.genus,
            self.spec.r_order(),
            rule,
            opts,
        )
    }

    /// Period data on a caller-supplied homology basis (certificate checks).
    pub fn periods_on_basis(
        &self,
        basis: &HomologyBasis,
        rule: &GaussLegendre,
        opts: &QuadOpts,
    ) -> Result<PeriodData> {
        Ok(crate::periods::period_system(
            &self.radical,
            &self.circle,
            basis,
            self.genus,
            self.spec.r_order(),
            rule,
            opts,
        )?
        .data)
    }

    /// Q(z), away from poles.
    pub fn q_value(&self, z: Complex64) -> Complex64 {
        let s = self.s.eval(z);
        let mut num = s * s;
        for &d in &self.delta_roots {
            num *= z - d;
        }
        let mut den = Complex64::new(1.0, 0.0);
        for &e in &self.spec.e_points {
            den *= z - e;
        }
        num / den
    }
}

/// Value of the descent functional from period data.
pub fn functional_value(spec: &ProblemSpec, periods: &PeriodData) -> f64 {
    let targets = spec.targets();
    let mut f = 0.0f64;
    for (t, target) in periods.t.iter().zip(targets.iter()) {
        f += 0.5 * (t - target).norm_sqr();
    }
    for p in &periods.p {
        f += 0.5 * p.re * p.re;
    }
    f
}

/// Convenience wrapper: periods plus functional in one call.
pub fn functional(state: &DifferentialState, rule: &GaussLegendre, opts: &QuadOpts) -> Result<f64> {
    let sys = state.period_system(rule, opts)?;
    Ok(functional_value(&state.spec, &sys.data))
}

/// One solved deformation direction.
#[derive(Debug, Clone)]
pub struct Deformation {
    pub fdot: Poly,
    pub sdot: Poly,
    pub ddot: Poly,
    /// Sylvester split residual relative to `||Fdot||`.
    pub split_residual_rel: f64,
    /// Condition estimate of the real deformation system.
    pub condition: f64,
}

impl Deformation {
    pub fn is_zero(&self) -> bool {
        self.fdot.is_zero()
    }
}

/// Solve the real block system for `Fdot`, scaled so that the flow satisfies
/// dF/dt = -F, then split into `(Sdot, Ddot)`.
///
/// Block structure, with `x = [Re f; Im f]`:
///
/// ```text
/// [ Im A   Re A ]       [ Im (t - T) ]      rows 0..R
/// [ Re A  -Im A ]  x =  [ Re (t - T) ]      rows R..2R
/// [ Re B  -Im B ]       [ -Re P      ]      rows 2R..2R+2g
/// ```
pub fn solve_deformation(
    state: &DifferentialState,
    sys: &PeriodSystem,
) -> Result<Deformation> {
    let r = state.spec.r_order();
    let g2 = state.basis.cycles.len();
    let nf = state.genus + r;
    debug_assert_eq!(g2, 2 * state.genus);
    debug_assert_eq!(nf, state.l_degree() + state.m_degree());
    if nf == 0 {
        return Ok(Deformation {
            fdot: Poly::zero(),
            sdot: Poly::zero(),
            ddot: Poly::zero(),
            split_residual_rel: 0.0,
            condition: 1.0,
        });
    }

    let rows = 2 * r + g2;
    let mut mat = DMatrix::<f64>::zeros(rows, 2 * nf);
    let mut rhs = DVector::<f64>::zeros(rows);
    let targets = state.spec.targets();
    for l in 0..r {
        for k in 0..nf {
            let a = sys.a[(l, k)];
            mat[(l, k)] = a.im;
            mat[(l, nf + k)] = a.re;
            mat[(r + l, k)] = a.re;
            mat[(r + l, nf + k)] = -a.im;
        }
        let gap = targets[l] - sys.data.t[l];
        rhs[l] = gap.im;
        rhs[r + l] = gap.re;
    }
    for j in 0..g2 {
        for k in 0..nf {
            let b = sys.b[(j, k)];
            mat[(2 * r + j, k)] = b.re;
            mat[(2 * r + j, nf + k)] = -b.im;
        }
        rhs[2 * r + j] = -sys.data.p[j].re;
    }

    let svd = mat.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::IllConditionedSystem(condition));
    }

    let x = mat
        .lu()
        .solve(&rhs)
        .ok_or(Error::IllConditionedSystem(f64::INFINITY))?;
    // half scale: with it the flow gives dF/dt = -F exactly
    let coeffs: Vec<Complex64> = (0..nf)
        .map(|k| Complex64::new(x[k], x[nf + k]) * 0.5)
        .collect();
    let fdot = Poly::new(coeffs);
    let (sdot, ddot) = sylvester_split(&state.s, &state.delta, &fdot)?;
    let split_residual_rel = if fdot.is_zero() {
        0.0
    } else {
        sylvester_residual(&state.s, &state.delta, &sdot, &ddot, &fdot) / fdot.coeff_norm()
    };
    Ok(Deformation { fdot, sdot, ddot, split_residual_rel, condition })
}

/// Euler step of the polynomial data; geometry is rebuilt by the caller.
/// The pinned leading coefficients are untouched because the corrections
/// have strictly smaller degree.
pub fn euler_step(state: &DifferentialState, def: &Deformation, dt: f64) -> (Poly, Poly) {
    let s2 = &state.s + &def.sdot.scale(Complex64::new(dt, 0.0));
    let d2 = &state.delta + &def.ddot.scale(Complex64::new(dt, 0.0));
    debug_assert!((s2.leading() - state.s.leading()).norm() == 0.0);
    debug_assert!(
        state.delta.degree() == 0 || (d2.leading() - state.delta.leading()).norm() == 0.0
    );
    (s2, d2)
}

#[derive(Debug, Clone)]
pub struct MergeEvent {
    /// Index into the accepted-value history at which the merge fired.
    pub history_index: usize,
    pub midpoint: Complex64,
    pub pair_distance: f64,
}

/// Find the closest pair of `D` roots; if they are closer than the merge
/// threshold, divide the pair out of `D` and plant a simple root of `S` at
/// the midpoint. Returns the rebuilt polynomials.
pub fn merge_check(
    s: &Poly,
    delta_roots: &[Complex64],
    scale: f64,
) -> Option<(Poly, Poly, Complex64, f64)> {
    if delta_roots.len() < 2 {
        return None;
    }
    let mut best = (0usize, 1usize, f64::INFINITY);
    for i in 0..delta_roots.len() {
        for j in (i + 1)..delta_roots.len() {
            let d = (delta_roots[i] - delta_roots[j]).norm();
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    if best.2 >= MERGE_REL * scale {
        return None;
    }
    let (i, j, dist) = best;
    let mid = (delta_roots[i] + delta_roots[j]) * 0.5;
    let remaining: Vec<Complex64> = delta_roots
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i && *k != j)
        .map(|(_, &z)| z)
        .collect();
    let s_new = s * &Poly::from_roots(Complex64::new(1.0, 0.0), &[mid]);
    let delta_new = Poly::from_roots(Complex64::new(1.0, 0.0), &remaining);
    Some((s_new, delta_new, mid, dist))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DescentStatus {
    Converged,
    Stalled,
    MergedAndRestarted,
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct DescentOpts {
    pub f_exit: f64,
    pub max_iter: usize,
    pub dt0: f64,
    pub dt_max: f64,
    pub dt_floor: f64,
    pub quad: QuadOpts,
    /// Record every n-th accepted state for post-hoc checks (0 = off).
    pub record_stride: usize,
}

impl Default for DescentOpts {
    fn default() -> Self {
        DescentOpts {
            f_exit: 1e-10,
            max_iter: 20_000,
            dt0: 0.01,
            dt_max: 0.5,
            dt_floor: 1e-12,
            quad: QuadOpts::default(),
            record_stride: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentReport {
    pub status: DescentStatus,
    pub iterations: usize,
    pub final_f: f64,
    /// Functional values along accepted states, starting with the initial.
    pub f_history: Vec<f64>,
    pub merges: Vec<MergeEvent>,
    /// Accepted steps at which the cut pairing changed combinatorially.
    pub chart_switches: Vec<usize>,
    pub max_split_residual_rel: f64,
    pub max_condition: f64,
    pub state: DifferentialState,
    pub periods: PeriodData,
    /// Stride-sampled accepted states as `(f_history index, state)`.
    pub recorded: Vec<(usize, DifferentialState)>,
}

/// Progress callback data, one call per accepted step.
pub struct IterInfo {
    pub iteration: usize,
    pub f: f64,
    pub dt: f64,
    pub merged: bool,
}

/// Uniform draws in the disk of radius 1.5x the pole diameter around the
/// pole centroid, with spacing guards, until the state assembles.
pub fn random_init(spec: &ProblemSpec, seed: u64) -> Result<DifferentialState> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = geom::centroid(&spec.e_points);
    let diam = spec.e_diameter().max(1.0);
    let radius = 1.5 * diam;
    let min_sep = 1e-3 * diam;
    let m = spec.m_degree()?;
    let l = spec.l_degree;

    for _ in 0..64 {
        let mut placed: Vec<Complex64> = Vec::new();
        let mut ok = true;
        for _ in 0..(m + l) {
            let mut found = None;
            for _ in 0..200 {
                let u: f64 = rng.gen();
                let v: f64 = rng.gen();
                let z = center
                    + Complex64::from_polar(radius * u.sqrt(), std::f64::consts::TAU * v);
                let clear = spec
                    .e_points
                    .iter()
                    .chain(placed.iter())
                    .all(|&p| (p - z).norm() >= min_sep);
                if clear {
                    found = Some(z);
                    break;
                }
            }
            match found {
                Some(z) => placed.push(z),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let droots = &placed[..m];
        let sroots = &placed[m..];
        let delta = Poly::from_roots(Complex64::new(1.0, 0.0), droots);
        let s = Poly::from_roots(spec.lead(), sroots);
        match DifferentialState::assemble_with_roots(spec, s, delta, droots.to_vec()) {
            Ok(state) => return Ok(state),
            Err(_) => continue,
        }
    }
    Err(Error::NonConvergence(
        "no valid random initialization found".into(),
    ))
}

pub fn run(state: DifferentialState, opts: &DescentOpts) -> DescentReport {
    run_with_observer(state, opts, |_| {})
}

/// The descent loop: solve the deformation, attempt an Euler step, grow the
/// step size on success and halve it after reverting an increase. Merges and
/// cut-pairing changes reset the comparison baseline.
pub fn run_with_observer(
    state: DifferentialState,
    opts: &DescentOpts,
    mut observer: impl FnMut(&IterInfo),
) -> DescentReport {
    let rule = GaussLegendre::new(opts.quad.order);
    let mut state = state;
    let mut dt = opts.dt0;
    let mut merges: Vec<MergeEvent> = Vec::new();
    let mut chart_switches: Vec<usize> = Vec::new();
    let mut recorded: Vec<(usize, DifferentialState)> = Vec::new();
    let mut max_split = 0.0f64;
    let mut max_cond = 0.0f64;
    let mut iterations = 0usize;
    let mut last_was_merge = false;

    macro_rules! finish {
        ($status:expr, $sys:expr, $hist:expr) => {
            return DescentReport {
                status: $status,
                iterations,
                final_f: *$hist.last().unwrap(),
                f_history: $hist,
                merges,
                chart_switches,
                max_split_residual_rel: max_split,
                max_condition: max_cond,
                state,
                periods: $sys.data.clone(),
                recorded,
            }
        };
    }

    let mut sys = match state.period_system(&rule, &opts.quad) {
        Ok(s) => s,
        Err(e) => {
            let empty = PeriodSystem {
                data: PeriodData { t: Vec::new(), p: Vec::new() },
                a: DMatrix::zeros(0, 0),
                b: DMatrix::zeros(0, 0),
            };
            let hist = vec![f64::INFINITY];
            finish!(DescentStatus::Failed(e.to_string()), empty, hist);
        }
    };
    let mut f = functional_value(&state.spec, &sys.data);
    let mut history = vec![f];

    loop {
        if f < opts.f_exit {
            finish!(DescentStatus::Converged, sys, history);
        }
        if iterations >= opts.max_iter {
            let status = if last_was_merge {
                DescentStatus::MergedAndRestarted
            } else {
                DescentStatus::Stalled
            };
            finish!(status, sys, history);
        }

        let def = match solve_deformation(&state, &sys) {
            Ok(d) => d,
            Err(Error::SingularSylvester(msg)) => {
                // shared root between S and D: the merge rule is the only way out
                match merge_check(&state.s, &state.delta_roots, 10.0 * state.scale()) {
                    Some((s2, d2, mid, dist)) => {
                        match DifferentialState::assemble(&state.spec, s2, d2) {
                            Ok(ns) => match ns.period_system(&rule, &opts.quad) {
                                Ok(nsys) => {
                                    state = ns;
                                    sys = nsys;
                                    f = functional_value(&state.spec, &sys.data);
                                    merges.push(MergeEvent {
                                        history_index: history.len(),
                                        midpoint: mid,
                                        pair_distance: dist,
                                    });
                                    history.push(f);
                                    dt = opts.dt0;
                                    last_was_merge = true;
                                    continue;
                                }
                                Err(e) => {
                                    finish!(DescentStatus::Failed(e.to_string()), sys, history)
                                }
                            },
                            Err(e) => finish!(DescentStatus::Failed(e.to_string()), sys, history),
                        }
                    }
                    None => finish!(DescentStatus::Failed(msg), sys, history),
                }
            }
            Err(e) => finish!(DescentStatus::Failed(e.to_string()), sys, history),
        };
        max_split = max_split.max(def.split_residual_rel);
        max_cond = max_cond.max(def.condition);

        if def.is_zero() {
            // nothing to move; only quadrature noise keeps F above zero
            finish!(DescentStatus::Converged, sys, history);
        }

        // attempt loop: try dt, revert and halve while F increases
        loop {
            if dt < opts.dt_floor {
                finish!(DescentStatus::Stalled, sys, history);
            }
            iterations += 1;
            if iterations > opts.max_iter {
                let status = if last_was_merge {
                    DescentStatus::MergedAndRestarted
                } else {
                    DescentStatus::Stalled
                };
                finish!(status, sys, history);
            }
            let (s2, d2) = euler_step(&state, &def, dt);
            let basis_hint: Vec<(Complex64, Complex64)> =
                state.basis.cycles.iter().map(|c| c.around).collect();
            let built = Poly::roots(&d2).and_then(|droots2| {
                let scale = state.scale();
                if let Some((s3, d3, mid, dist)) = merge_check(&s2, &droots2, scale) {
                    DifferentialState::assemble(&state.spec, s3, d3)
                        .map(|ns| (ns, Some((mid, dist))))
                } else {
                    DifferentialState::assemble_with_hint(
                        &state.spec,
                        s2,
                        d2,
                        droots2,
                        Some(&basis_hint),
                    )
                    .map(|ns| (ns, None))
                }
            });
            let outcome = built.and_then(|(cand, merge_info)| {
                cand.period_system(&rule, &opts.quad)
                    .map(|csys| (cand, merge_info, csys))
            });
            match outcome {
                Ok((cand, merge_info, csys)) => {
                    let f2 = functional_value(&cand.spec, &csys.data);
                    let merged = merge_info.is_some();
                    let chart_changed =
                        merged || cand.cut_signature() != state.cut_signature();
                    if merged || chart_changed || f2 <= f {
                        state = cand;
                        sys = csys;
                        f = f2;
                        if let Some((mid, dist)) = merge_info {
                            merges.push(MergeEvent {
                                history_index: history.len(),
                                midpoint: mid,
                                pair_distance: dist,
                            });
                            dt = opts.dt0;
                            last_was_merge = true;
                        } else {
                            if chart_changed {
                                chart_switches.push(history.len());
                            }
                            dt = (dt * 1.2).min(opts.dt_max);
                            last_was_merge = false;
                        }
                        history.push(f);
                        if opts.record_stride > 0
                            && history.len() % opts.record_stride == 0
                            && recorded.len() < 64
                        {
                            recorded.push((history.len() - 1, state.clone()));
                        }
                        observer(&IterInfo { iteration: iterations, f, dt, merged });
                        break;
                    }
                    dt *= 0.5;
                }
                Err(_) => {
                    dt *= 0.5;
                }
            }
        }
    }
}
