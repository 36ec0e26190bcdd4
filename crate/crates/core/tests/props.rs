//! Randomized invariants: root finding round-trips, the polynomial split
//! identity, cut system combinatorics, branch sign flips across cuts, the
//! normalization of the radical at infinity, and polynomial exactness of the
//! quadrature rule.

use boutroux::descent::{random_init, ProblemSpec};
use boutroux::poly::{sylvester_residual, sylvester_split, Poly};
use boutroux::quad::{integrate_segment_vec, GaussLegendre, QuadOpts};
use boutroux::radical::CutSystem;
use boutroux::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex_in(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(re, im)| Complex64::new(re, im))
}

fn separated(points: &[Complex64], min: f64) -> bool {
    points.iter().enumerate().all(|(i, a)| {
        points
            .iter()
            .skip(i + 1)
            .all(|b| (a - b).norm() >= min)
    })
}

fn segments_cross(a: Complex64, b: Complex64, p: Complex64, q: Complex64) -> bool {
    let orient = |u: Complex64, v: Complex64, w: Complex64| {
        let d1 = v - u;
        let d2 = w - u;
        d1.re * d2.im - d1.im * d2.re
    };
    orient(a, b, p) * orient(a, b, q) < 0.0 && orient(p, q, a) * orient(p, q, b) < 0.0
}

proptest! {
    #[test]
    fn roots_round_trip(
        roots in proptest::collection::vec(complex_in(2.0), 1..7),
        lead in complex_in(2.0),
    ) {
        prop_assume!(separated(&roots, 0.05));
        prop_assume!(lead.norm() > 0.3);
        let p = Poly::from_roots(lead, &roots);
        let found = p.roots().unwrap();
        prop_assert_eq!(found.len(), roots.len());
        for r in &roots {
            let nearest = found.iter().map(|f| (f - r).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-8, "root {} recovered to {}", r, nearest);
        }
    }

    #[test]
    fn split_identity_residual_stays_tiny(
        s_roots in proptest::collection::vec(complex_in(2.0), 2),
        d_roots in proptest::collection::vec(complex_in(2.0), 3),
        coeffs in proptest::collection::vec(complex_in(2.0), 5),
    ) {
        prop_assume!(separated(&s_roots, 0.2));
        prop_assume!(separated(&d_roots, 0.2));
        prop_assume!(s_roots.iter().all(|a| d_roots.iter().all(|b| (a - b).norm() >= 0.2)));
        let fdot = Poly::new(coeffs);
        prop_assume!(!fdot.is_zero());
        let s = Poly::from_roots(c(1.0, 0.0), &s_roots);
        let d = Poly::from_roots(c(1.0, 0.0), &d_roots);
        let (sdot, ddot) = sylvester_split(&s, &d, &fdot).unwrap();
        prop_assert!(sdot.degree() <= 1 || sdot.is_zero());
        prop_assert!(ddot.degree() <= 2 || ddot.is_zero());
        let res = sylvester_residual(&s, &d, &sdot, &ddot, &fdot);
        prop_assert!(res < 1e-12 * fdot.coeff_norm(), "residual {}", res);
    }

    #[test]
    fn cuts_pair_every_point_without_crossing(
        points in proptest::collection::vec(complex_in(2.0), 2..=8),
    ) {
        prop_assume!(points.len() % 2 == 0);
        prop_assume!(separated(&points, 0.1));
        let cuts = CutSystem::select_cuts(&points).unwrap();
        prop_assert_eq!(cuts.cuts.len(), points.len() / 2);
        for p in &points {
            let hits = cuts
                .cuts
                .iter()
                .flat_map(|cut| [cut.a, cut.b])
                .filter(|e| (e - p).norm() < 1e-12)
                .count();
            prop_assert_eq!(hits, 1, "point {} is endpoint of {} cuts", p, hits);
        }
        for (i, ci) in cuts.cuts.iter().enumerate() {
            for cj in cuts.cuts.iter().skip(i + 1) {
                prop_assert!(
                    !segments_cross(ci.a, ci.b, cj.a, cj.b),
                    "cuts ({}, {}) and ({}, {}) cross",
                    ci.a, ci.b, cj.a, cj.b
                );
            }
        }
    }

    #[test]
    fn branch_flips_sign_across_a_cut(
        points in proptest::collection::vec(complex_in(2.0), 2..=6),
    ) {
        prop_assume!(points.len() % 2 == 0);
        prop_assume!(separated(&points, 0.1));
        let cuts = CutSystem::select_cuts(&points).unwrap();
        let radical = boutroux::radical::Radical::new(
            cuts.clone(),
            Poly::constant(c(1.0, 0.0)),
            points.clone(),
            c(1.0, 0.0),
            0,
        );
        let cut = &cuts.cuts[0];
        let mid = 0.5 * (cut.a + cut.b);
        let normal = Complex64::new(0.0, 1.0) * (cut.b - cut.a) / (cut.b - cut.a).norm();
        let eps = 1e-7 * cuts.diameter;
        let above = radical.sqrt_de_unchecked(mid + normal * eps);
        let below = radical.sqrt_de_unchecked(mid - normal * eps);
        prop_assert!(
            (above + below).norm() < 1e-3 * above.norm(),
            "no sign flip: {} vs {}",
            above,
            below
        );
    }

    #[test]
    fn radical_matches_prescribed_growth_at_infinity(
        seed in 0u64..64,
        pick in 0usize..2,
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let spec = if pick == 0 {
            ProblemSpec {
                e_points: vec![c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)],
                phi: vec![],
                t0: 1.0,
                l_degree: 0,
            }
        } else {
            ProblemSpec {
                e_points: vec![c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)],
                phi: vec![c(1.0, 0.0)],
                t0: 0.0,
                l_degree: 0,
            }
        };
        let state = random_init(&spec, seed).unwrap();
        let r = spec.r_order() as i32;
        let z = Complex64::from_polar(1e6, angle);
        let w = state.radical.sqrt_q_unchecked(z);
        let ratio = w * z.powi(1 - r) / spec.lead();
        prop_assert!(
            (ratio - c(1.0, 0.0)).norm() < 1e-5,
            "asymptotic ratio {}",
            ratio
        );
    }

    #[test]
    fn quadrature_is_exact_on_polynomials(
        coeffs in proptest::collection::vec(complex_in(1.0), 1..12),
        a in complex_in(2.0),
        b in complex_in(2.0),
    ) {
        prop_assume!((a - b).norm() > 0.1);
        let p = Poly::new(coeffs);
        let rule = GaussLegendre::new(8);
        let opts = QuadOpts::default();
        let got = integrate_segment_vec(&rule, &opts, a, b, 1, &mut |z, out| {
            out[0] = p.eval(z);
        })
        .unwrap()[0];
        // antiderivative evaluated at the endpoints
        let anti = Poly::new(
            std::iter::once(c(0.0, 0.0))
                .chain(
                    p.coeffs()
                        .iter()
                        .enumerate()
                        .map(|(k, &v)| v / (k as f64 + 1.0)),
                )
                .collect::<Vec<_>>(),
        );
        let expect = anti.eval(b) - anti.eval(a);
        prop_assert!(
            (got - expect).norm() < 1e-11 * (1.0 + expect.norm()),
            "{} vs {}",
            got,
            expect
        );
    }
}
