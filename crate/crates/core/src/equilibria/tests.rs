use super::*;
use crate::finite_diff;
use approx::assert_relative_eq;

fn iso(b: f64, c: f64, k: f64) -> CanonicalTriangleParams {
    CanonicalTriangleParams::isosceles(b, c, k).unwrap()
}

/// Gradient from central differences of the potential value, independent of
/// the analytic gradient.
fn fd_gradient_norm(p: &CanonicalTriangleParams, at: Position) -> f64 {
    finite_diff::gradient(|q| p.value(q), at).norm()
}

fn positions(records: &[EquilibriumRecord]) -> Vec<(EquilibriumLabel, Position, Stability)> {
    records
        .iter()
        .map(|r| (r.label, r.position, r.stability))
        .collect()
}

#[test]
fn k_star_examples() {
    assert_eq!(k_star(6.0, 1.0), 18.0);
    assert_eq!(k_star(2.5, 2.5), 0.5);
    let c = 1.7;
    assert_relative_eq!(k_star(3f64.sqrt() * c, c), 1.5, max_relative = 1e-15);
}

#[test]
fn k_zero_examples() {
    let k0 = k_zero(6.0, 1.0).unwrap();
    assert!((k0 - (12.0 * 34f64.sqrt() - 68.0)).abs() < 1e-12);
    assert!((k0 - 1.971_422_738_14).abs() < 1e-10);
    assert_eq!(k_zero(2f64.sqrt(), 1.0).map(|k| k.abs() < 1e-7), Some(true));
    assert_eq!(
        k_zero(3.0, 3.0 / 2f64.sqrt()).map(|k| k.abs() < 1e-7),
        Some(true)
    );
    assert_eq!(k_zero(1.0, 1.0), None);
}

#[test]
fn at_k_zero_the_lower_axis_root_loses_stability() {
    // At K_0 the off-axis pair merges with Pc and the first Hessian entry
    // there vanishes.
    let p = iso(6.0, 1.0, k_zero(6.0, 1.0).unwrap());
    let beta = 0.5 * (-6.0 - (36.0 - 2.0 * p.gain).sqrt());
    let h = p.hessian(Position::new(0.0, beta));
    assert!(h.xx.abs() < 1e-9 * h.norm(), "H11 = {}", h.xx);
    let y_de = p.gain * 6.0 / (p.gain - 4.0);
    assert_relative_eq!(y_de, beta, max_relative = 1e-10);
}

#[test]
fn enumerate_above_k_star_is_unique() {
    let eq = enumerate_isosceles(&iso(6.0, 1.0, 20.0)).unwrap();
    assert_eq!(
        positions(&eq),
        vec![(
            EquilibriumLabel::Pa,
            Position::new(0.0, 6.0),
            Stability::Stable
        )]
    );
}

#[test]
fn enumerate_between_thresholds() {
    let p = iso(6.0, 1.0, 4.0);
    let eq = enumerate_isosceles(&p).unwrap();
    assert_eq!(eq.len(), 3);
    let s7 = 7f64.sqrt();
    let expected = [
        (EquilibriumLabel::Pa, 6.0, Stability::Stable),
        (EquilibriumLabel::Pb, -3.0 + s7, Stability::Unstable),
        (EquilibriumLabel::Pc, -3.0 - s7, Stability::Saddle),
    ];
    for (r, (label, y, st)) in eq.iter().zip(expected) {
        assert_eq!(r.label, label);
        assert_eq!(r.position.x, 0.0);
        assert_relative_eq!(r.position.y, y, max_relative = 1e-14);
        assert_eq!(r.stability, st, "{label}");
        assert!(fd_gradient_norm(&p, r.position) < 1e-6);
    }
}

#[test]
fn enumerate_below_k_zero_gives_five() {
    let p = iso(6.0, 1.0, 1.0);
    let eq = enumerate_isosceles(&p).unwrap();
    let got: Vec<_> = eq.iter().map(|r| (r.label, r.stability)).collect();
    assert_eq!(
        got,
        vec![
            (EquilibriumLabel::Pa, Stability::Stable),
            (EquilibriumLabel::Pb, Stability::Unstable),
            (EquilibriumLabel::Pc, Stability::Stable),
            (EquilibriumLabel::Pd, Stability::Saddle),
            (EquilibriumLabel::Pe, Stability::Saddle),
        ]
    );
    // y = K b / (K − 4) = −2, x² = 36 − 2 − 4 = 30.
    let pd = eq[3].position;
    assert_relative_eq!(pd.y, -2.0, max_relative = 1e-14);
    assert_relative_eq!(pd.x, 30f64.sqrt(), max_relative = 1e-14);
    assert_eq!(eq[4].position, Position::new(-pd.x, pd.y));
    for r in &eq {
        assert!(
            fd_gradient_norm(&p, r.position) < 1e-6,
            "{} {:?}",
            r.label,
            r.position
        );
    }
}

#[test]
fn enumerate_rejects_non_isosceles() {
    assert!(
        enumerate_isosceles(&CanonicalTriangleParams::new(0.5, 1.0, 1.0, 1.0).unwrap()).is_err()
    );
}

#[test]
fn no_off_axis_roots_at_gain_four() {
    let eq = enumerate_isosceles(&iso(6.0, 1.0, 4.0)).unwrap();
    assert!(eq.iter().all(|r| r.position.x == 0.0));
}

#[test]
fn double_root_reported_once_and_degenerate() {
    // b² = 2Kc² at K = K_*.
    let eq = enumerate_isosceles(&iso(1.0, 1.0, 0.5)).unwrap();
    assert_eq!(eq.len(), 2);
    assert_eq!(eq[1].label, EquilibriumLabel::Pb);
    assert_eq!(eq[1].position, Position::new(0.0, -0.5));
    assert_eq!(eq[1].stability, Stability::Degenerate);
    let report = case_table(&iso(1.0, 1.0, 0.5)).unwrap();
    assert!(!report.globally_convergent);
    assert!(report
        .to_string()
        .contains("boundary: Pb at [0, -0.5] is Degenerate"));
}

#[test]
fn classification_matches_finite_difference_hessian() {
    for (b, c, k) in [
        (6.0, 1.0, 1.0),
        (6.0, 1.0, 4.0),
        (2.5f64.sqrt(), 1.0, 1.0),
        (2.0, 0.7, 0.3),
    ] {
        let p = iso(b, c, k);
        for r in enumerate_isosceles(&p).unwrap() {
            let h = finite_diff::hessian(|q| p.value(q), r.position);
            let fd = classify(h.eigenvalues(), 1e-4 * h.norm());
            assert_eq!(fd, r.stability, "b={b} c={c} K={k} {}", r.label);
        }
    }
}

#[test]
fn case_table_examples() {
    let r20 = case_table(&iso(6.0, 1.0, 20.0)).unwrap();
    assert!(r20.globally_convergent);
    assert!(r20.almost_globally_convergent);
    assert!(r20
        .to_string()
        .contains("globally convergent: yes (K > K_* = 18)"));

    let r4 = case_table(&iso(6.0, 1.0, 4.0)).unwrap();
    assert!(!r4.globally_convergent);
    assert!(r4.almost_globally_convergent);

    let r1 = case_table(&iso(6.0, 1.0, 1.0)).unwrap();
    assert!(!r1.almost_globally_convergent);
    assert_eq!(r1.count(Stability::Stable), 2);
    assert_eq!(r1.count(Stability::Saddle), 2);
    assert_eq!(
        r1.get(EquilibriumLabel::Pc).unwrap().stability,
        Stability::Stable
    );

    let absent = case_table(&iso(1.0, 1.0, 0.2)).unwrap();
    assert!(absent.to_string().contains("K_0 = absent"));
}

#[test]
fn between_two_and_eight_thirds_the_lower_root_is_stable() {
    // 2 < b²/c² < 8/3 with K below K_0: the Hessian at Pc is positive
    // definite, so Pc is a second stable equilibrium.
    let p = iso(2.5f64.sqrt(), 1.0, 1.0);
    assert!(p.gain <= k_zero(p.b, p.c).unwrap());
    let r = case_table(&p).unwrap();
    let pc = r.get(EquilibriumLabel::Pc).unwrap();
    assert_eq!(pc.stability, Stability::Stable);
    assert!(pc.hessian.xx > 1.6 && pc.hessian.yy > 3.8);
    assert_eq!(r.equilibria.len(), 5);
    assert_eq!(r.count(Stability::Saddle), 2);
    assert_eq!(
        r.get(EquilibriumLabel::Pb).unwrap().stability,
        Stability::Unstable
    );
}

#[test]
fn large_k_examples() {
    let eq = enumerate_general_large_k(3.0, 1.0, 1.0).unwrap();
    let got: Vec<_> = eq
        .iter()
        .map(|r| (r.label, r.position, r.stability))
        .collect();
    assert_eq!(
        got,
        vec![
            (
                EquilibriumLabel::Pa,
                Position::new(3.0, 1.0),
                Stability::Stable
            ),
            (
                EquilibriumLabel::Pb,
                Position::new(-1.0, 1.0),
                Stability::Saddle
            ),
            (
                EquilibriumLabel::Pc,
                Position::new(-2.0, 1.0),
                Stability::Stable
            ),
        ]
    );
    assert_relative_eq!(eq[1].eigenvalues[0], -8.0, max_relative = 1e-12);
    assert_relative_eq!(eq[2].eigenvalues[0], 10.0, max_relative = 1e-12);

    let one = enumerate_general_large_k(1.0, 1.0, 1.0).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].position, Position::new(1.0, 1.0));
    let zero = enumerate_general_large_k(0.0, 2.0, 1.0).unwrap();
    assert_eq!(zero.len(), 1);
    assert_eq!(zero[0].position, Position::new(0.0, 2.0));
}

#[test]
fn large_k_double_root_is_degenerate() {
    let a = 8f64.sqrt();
    let eq = enumerate_general_large_k(a, 1.0, 1.0).unwrap();
    assert_eq!(eq.len(), 2);
    assert_eq!(eq[1].stability, Stability::Degenerate);
    assert_relative_eq!(eq[1].position.x, -0.5 * a);
}

#[test]
fn large_k_sign_rule_for_negative_a() {
    // Mirror image: the root nearer the far leader is the stable one.
    let eq = enumerate_general_large_k(-3.0, 1.0, 1.0).unwrap();
    let stable: Vec<_> = eq
        .iter()
        .filter(|r| r.stability == Stability::Stable)
        .map(|r| r.position.x)
        .collect();
    assert_eq!(stable, vec![-3.0, 2.0]);
}

#[test]
fn large_k_roots_are_limits_of_finite_gain_roots() {
    let seeds = grid_seeds((-6.0, 6.0), (-6.0, 6.0), 25);
    let limit = enumerate_general_large_k(3.0, 1.0, 1.0).unwrap();
    let near = |roots: &[EquilibriumRecord], target: Position| {
        roots
            .iter()
            .map(|r| r.position.distance(target))
            .fold(f64::INFINITY, f64::min)
    };
    let d_lo = near(
        &refine_numeric(
            &CanonicalTriangleParams::new(3.0, 1.0, 1.0, 1e3).unwrap(),
            &seeds,
        )
        .roots,
        limit[2].position,
    );
    let d_hi = near(
        &refine_numeric(
            &CanonicalTriangleParams::new(3.0, 1.0, 1.0, 1e5).unwrap(),
            &seeds,
        )
        .roots,
        limit[2].position,
    );
    assert!(d_hi < d_lo && d_hi < 1e-2, "{d_lo} {d_hi}");
}

#[test]
fn newton_recovers_isosceles_set() {
    let p = iso(6.0, 1.0, 4.0);
    let found = refine_numeric(&p, &grid_seeds((-10.0, 10.0), (-10.0, 10.0), 41));
    let analytic = enumerate_isosceles(&p).unwrap();
    assert_eq!(found.roots.len(), analytic.len());
    for r in &analytic {
        let m = found
            .roots
            .iter()
            .find(|n| n.position.distance(r.position) < 1e-8)
            .expect("matched");
        assert_eq!(m.stability, r.stability);
        assert_eq!(m.label, EquilibriumLabel::Numeric);
    }
}

#[test]
fn newton_finds_second_stable_root_for_obtuse_target() {
    let p = CanonicalTriangleParams::new(3.0, 1.0, 1.0, 80.0).unwrap();
    let found = refine_numeric(&p, &grid_seeds((-6.0, 6.0), (-6.0, 6.0), 41));
    let stable: Vec<_> = found
        .roots
        .iter()
        .filter(|r| r.stability == Stability::Stable)
        .collect();
    assert_eq!(stable.len(), 2);
    assert!(stable
        .iter()
        .any(|r| r.position.distance(Position::new(3.0, 1.0)) < 1e-8));
    let wrong = stable.iter().find(|r| r.position.x < 0.0).unwrap();
    assert!(wrong.position.distance(Position::new(-2.0, 1.0)) < 0.25);
    assert!(fd_gradient_norm(&p, wrong.position) < 1e-6);
    assert!((wrong.position.x - -1.855_366_126_6).abs() < 1e-8);
    assert!((wrong.position.y - 1.150_544_855_8).abs() < 1e-8);
}

#[test]
fn newton_single_root_in_uniqueness_region() {
    let p = iso(1.0, 1.0, 10.0);
    let found = refine_numeric(&p, &grid_seeds((-3.0, 3.0), (-3.0, 3.0), 21));
    assert_eq!(found.roots.len(), 1);
    assert!(found.roots[0].position.distance(Position::new(0.0, 1.0)) < 1e-12);
    assert!(found.failures.is_empty());
}

#[test]
fn newton_output_is_deterministic_and_sorted() {
    let p = iso(6.0, 1.0, 1.0);
    let seeds = grid_seeds((-8.0, 8.0), (-8.0, 8.0), 17);
    let mut reversed = seeds.clone();
    reversed.reverse();
    let a = refine_numeric(&p, &seeds);
    let b = refine_numeric(&p, &seeds);
    assert_eq!(a, b);
    let c = refine_numeric(&p, &reversed);
    assert_eq!(a.roots.len(), c.roots.len());
    for (x, y) in a.roots.iter().zip(&c.roots) {
        assert!(x.position.distance(y.position) < 1e-8);
    }
    assert!(a
        .roots
        .windows(2)
        .all(|w| (w[0].position.x, w[0].position.y) < (w[1].position.x, w[1].position.y)));
}

#[test]
fn grid_seeds_layout() {
    let g = grid_seeds((0.0, 2.0), (10.0, 12.0), 3);
    assert_eq!(g.len(), 9);
    assert_eq!(g[0], Position::new(0.0, 10.0));
    assert_eq!(g[1], Position::new(1.0, 10.0));
    assert_eq!(g[3], Position::new(0.0, 11.0));
    assert_eq!(
        grid_seeds((0.0, 2.0), (10.0, 12.0), 1),
        vec![Position::new(1.0, 11.0)]
    );
}

#[test]
fn canonical_params_validation() {
    assert!(CanonicalTriangleParams::new(0.0, 0.0, 1.0, 1.0).is_err());
    assert!(CanonicalTriangleParams::new(0.0, 1.0, -1.0, 1.0).is_err());
    assert!(CanonicalTriangleParams::new(0.0, 1.0, 1.0, 0.0).is_err());
    assert!(CanonicalTriangleParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
    let p = CanonicalTriangleParams::new(3.0, 1.0, 1.0, 2.0).unwrap();
    let report = crate::formation::validate_spec(&p.formation_spec());
    assert!(report.is_valid(), "{report}");
    assert_eq!(p.signed_area(), 1.0);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn k_zero_never_exceeds_k_star(h in 2f64.sqrt()..20.0, c in 0.1f64..10.0) {
            let b = h * c;
            let k0 = k_zero(b, c).unwrap();
            prop_assert!(k0 <= k_star(b, c) * (1.0 + 1e-12));
        }

        #[test]
        fn two_minus_k_zero_is_a_square(h in 2f64.sqrt()..10.0) {
            let k0 = k_zero(h, 1.0).unwrap();
            let s = h - (h * h - 2.0).sqrt();
            prop_assert!(((2.0 - k0) - s * s).abs() <= 1e-12 * h * h);
        }

        #[test]
        fn off_axis_roots_are_saddles(b in 0.5f64..10.0, c in 0.1f64..3.0, k in 0.01f64..3.99) {
            let p = iso(b, c, k);
            for r in enumerate_isosceles(&p).unwrap() {
                if matches!(r.label, EquilibriumLabel::Pd | EquilibriumLabel::Pe) {
                    prop_assert!(r.hessian.det() < 0.0);
                    prop_assert_eq!(r.stability, Stability::Saddle);
                }
            }
        }

        #[test]
        fn unique_iff_above_k_star(b in 0.5f64..10.0, c in 0.1f64..3.0, frac in 0.01f64..3.0) {
            let k = frac * k_star(b, c);
            prop_assume!((frac - 1.0).abs() > 1e-6);
            let eq = enumerate_isosceles(&iso(b, c, k)).unwrap();
            prop_assert_eq!(eq.len() == 1, k > k_star(b, c));
        }

        #[test]
        fn correct_equilibrium_always_stable(a in -5f64..5.0, b in 0.1f64..10.0, c in 0.1f64..3.0, k in 0.01f64..500.0) {
            let p = CanonicalTriangleParams::new(a, b, c, k).unwrap();
            let r = EquilibriumRecord::from_hessian(p.target(), p.hessian(p.target()), EquilibriumLabel::Pa);
            prop_assert_eq!(r.stability, Stability::Stable);
            prop_assert!(p.gradient(p.target()).norm() <= 1e-12 * p.length_scale().powi(3) * k.max(1.0));
            if a == 0.0 {
                prop_assert_eq!(enumerate_isosceles(&p).unwrap()[0].stability, Stability::Stable);
            }
        }

        #[test]
        fn gain_at_least_two_is_almost_global(b in 0.5f64..10.0, c in 0.1f64..3.0, k in 2.0f64..50.0) {
            prop_assert!(case_table(&iso(b, c, k)).unwrap().almost_globally_convergent);
        }

        #[test]
        fn analytic_roots_are_critical_points(b in 0.5f64..10.0, c in 0.1f64..3.0, k in 0.01f64..50.0) {
            let p = iso(b, c, k);
            let scale = 1e-11 * p.length_scale().powi(3) * k.max(1.0);
            for r in enumerate_isosceles(&p).unwrap() {
                prop_assert!(p.gradient(r.position).norm() <= scale, "{} {:?}", r.label, r.position);
            }
        }
    }
}
