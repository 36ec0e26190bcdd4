//! The descent direction checked against finite differences of the
//! functional, the polynomial split verified by pointwise evaluation, and
//! the run loop checked for monotone decrease and a vanishing flow at the
//! minimum.

use boutroux::descent::{
    euler_step, functional, functional_value, merge_check, random_init, run, solve_deformation,
    Deformation, DescentOpts, DescentStatus, DifferentialState, ProblemSpec,
};
use boutroux::poly::Poly;
use boutroux::quad::{GaussLegendre, QuadOpts};
use boutroux::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Functional after an Euler step of length `h`, rebuilt in the same chart.
fn f_along(
    state: &DifferentialState,
    def: &Deformation,
    h: f64,
    rule: &GaussLegendre,
    opts: &QuadOpts,
) -> f64 {
    let (s2, d2) = euler_step(state, def, h);
    let droots = if d2.degree() > 0 {
        d2.roots().unwrap()
    } else {
        Vec::new()
    };
    let hint: Vec<(Complex64, Complex64)> =
        state.basis.cycles.iter().map(|cy| cy.around).collect();
    let moved =
        DifferentialState::assemble_with_hint(&state.spec, s2, d2, droots, Some(&hint)).unwrap();
    assert_eq!(
        moved.cut_signature(),
        state.cut_signature(),
        "finite-difference probe left the chart"
    );
    functional(&moved, rule, opts).unwrap()
}

/// Richardson-extrapolated central difference of the functional along the
/// solved flow direction; must equal -F to one percent.
fn check_flow_derivative(spec: &ProblemSpec, seed: u64) {
    let state = random_init(spec, seed).unwrap();
    let rule = GaussLegendre::new(32);
    let opts = QuadOpts::default();
    let sys = state.period_system(&rule, &opts).unwrap();
    let f0 = functional_value(spec, &sys.data);
    assert!(f0 > 1e-6, "random state unexpectedly near the minimum");
    let def = solve_deformation(&state, &sys).unwrap();

    let h = 1e-3;
    let coarse = (f_along(&state, &def, h, &rule, &opts)
        - f_along(&state, &def, -h, &rule, &opts))
        / (2.0 * h);
    let fine = (f_along(&state, &def, 0.5 * h, &rule, &opts)
        - f_along(&state, &def, -0.5 * h, &rule, &opts))
        / h;
    let deriv = (4.0 * fine - coarse) / 3.0;
    assert!(
        (deriv + f0).abs() < 0.01 * f0,
        "dF/dt = {} but F = {}",
        deriv,
        f0
    );
}

#[test]
fn finite_difference_matches_flow_decay() {
    let spec = ProblemSpec {
        e_points: vec![c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)],
        phi: vec![c(1.0, 0.0)],
        t0: 0.0,
        l_degree: 0,
    };
    check_flow_derivative(&spec, 11);
}

#[test]
fn finite_difference_with_nontrivial_s_factor() {
    let spec = ProblemSpec {
        e_points: vec![c(0.0, -1.0), c(0.0, 1.0)],
        phi: vec![c(0.0, -1.0), c(0.0, 0.0), c(1.0, 0.0)],
        t0: 0.0,
        l_degree: 1,
    };
    check_flow_derivative(&spec, 3);
}

#[test]
fn split_identity_holds_at_sample_points() {
    // fdot = sdot * delta + (1/2) s * ddot, checked by evaluation on a
    // circle rather than through coefficient arithmetic.
    let spec = ProblemSpec {
        e_points: vec![c(0.0, -1.0), c(0.0, 1.0)],
        phi: vec![c(0.0, -1.0), c(0.0, 0.0), c(1.0, 0.0)],
        t0: 0.0,
        l_degree: 1,
    };
    let state = random_init(&spec, 3).unwrap();
    let rule = GaussLegendre::new(32);
    let opts = QuadOpts::default();
    let sys = state.period_system(&rule, &opts).unwrap();
    let def = solve_deformation(&state, &sys).unwrap();
    assert!(!def.fdot.is_zero());
    assert!(def.split_residual_rel < 1e-12);
    let scale = def.fdot.coeff_norm();
    for k in 0..12 {
        let z = Complex64::from_polar(2.0, std::f64::consts::TAU * k as f64 / 12.0);
        let lhs = def.fdot.eval(z);
        let rhs = def.sdot.eval(z) * state.delta.eval(z)
            + state.s.eval(z) * def.ddot.eval(z) * 0.5;
        assert!(
            (lhs - rhs).norm() < 1e-10 * scale * (1.0 + z.norm().powi(4)),
            "split mismatch at {}: {} vs {}",
            z,
            lhs,
            rhs
        );
    }
}

#[test]
fn triangle_run_converges_with_monotone_history() {
    let w = 0.8660254037844386;
    let spec = ProblemSpec {
        e_points: vec![c(1.0, 0.0), c(-0.5, w), c(-0.5, -w)],
        phi: vec![],
        t0: 1.0,
        l_degree: 0,
    };
    let state = random_init(&spec, 1).unwrap();
    let opts = DescentOpts {
        f_exit: 1e-12,
        record_stride: 25,
        ..DescentOpts::default()
    };
    let report = run(state, &opts);
    assert_eq!(report.status, DescentStatus::Converged);
    assert!(report.final_f < 1e-12);

    // Accepted steps only ever decrease F except across a chart switch,
    // where the basis and hence the functional are rebuilt.
    for i in 1..report.f_history.len() {
        if report.chart_switches.contains(&i) {
            continue;
        }
        assert!(
            report.f_history[i] < report.f_history[i - 1] * (1.0 + 1e-12),
            "F rose at accepted step {}: {} -> {}",
            i,
            report.f_history[i - 1],
            report.f_history[i]
        );
    }

    // Recorded snapshots reproduce their own history entries.
    assert!(!report.recorded.is_empty());
    let rule = GaussLegendre::new(opts.quad.order);
    for (idx, snap) in &report.recorded {
        let f = functional(snap, &rule, &opts.quad).unwrap();
        let hist = report.f_history[*idx];
        assert!(
            (f - hist).abs() <= 1e-9 * (1.0 + hist),
            "snapshot {} gives F = {} but history says {}",
            idx,
            f,
            hist
        );
    }

    // At the minimum the solved flow direction collapses.
    let sys = report
        .state
        .period_system(&rule, &opts.quad)
        .unwrap();
    let def = solve_deformation(&report.state, &sys).unwrap();
    assert!(
        def.fdot.coeff_norm() < 1e-3,
        "flow at the minimum: {}",
        def.fdot.coeff_norm()
    );

    // The lone zero of D migrates to the centroid of the three poles.
    assert_eq!(report.state.delta_roots.len(), 1);
    assert!(report.state.delta_roots[0].norm() < 1e-4);
}

#[test]
fn random_init_reproducible_across_calls() {
    let spec = ProblemSpec {
        e_points: vec![c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)],
        phi: vec![c(1.0, 0.0)],
        t0: 0.0,
        l_degree: 0,
    };
    let a = random_init(&spec, 7).unwrap();
    let b = random_init(&spec, 7).unwrap();
    assert_eq!(a.delta.coeffs(), b.delta.coeffs());
    assert_eq!(a.s.coeffs(), b.s.coeffs());
    let other = random_init(&spec, 8).unwrap();
    assert_ne!(a.delta.coeffs(), other.delta.coeffs());
}

#[test]
fn merge_divides_out_the_close_pair() {
    let s = Poly::from_roots(c(1.0, 0.0), &[c(5.0, 0.0)]);
    let roots = [c(0.1, 0.0), c(0.1, 1e-9), c(3.0, 0.0)];
    let (s_new, delta_new, mid, dist) = merge_check(&s, &roots, 2.0).unwrap();
    assert!((mid - c(0.1, 5e-10)).norm() < 1e-15);
    assert!((dist - 1e-9).abs() < 1e-20);
    assert_eq!(s_new.degree(), 2);
    assert!(s_new.eval(mid).norm() < 1e-12);
    assert_eq!(delta_new.degree(), 1);
    assert!(delta_new.eval(c(3.0, 0.0)).norm() < 1e-12);

    // Distant roots never trigger a merge.
    assert!(merge_check(&s, &[c(0.0, 0.0), c(1.0, 0.0)], 1.0).is_none());
}
