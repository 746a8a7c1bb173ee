//! Property tests for the rate algebra, evolution identities, certificate
//! propagation and spectrum structure.

use approx::assert_relative_eq;
use proptest::prelude::*;

use mudich_core::dichotomy::{
    propagate_dichotomy, verify_dichotomy, verify_growth, DichotomyCertificate, GrowthCertificate,
    Projector,
};
use mudich_core::evolution::{EvolutionOperator, Method};
use mudich_core::rate::{translate, GrowthRate};
use mudich_core::spectrum::{estimate_spectrum, resolvent_test, ExtendedReal};
use mudich_core::system::{shift_system, translate_system, LinearSystem};
use mudich_core::{PairGrid, WindowSchedule};

fn rate_catalog() -> Vec<GrowthRate> {
    vec![
        GrowthRate::Exponential,
        GrowthRate::Polynomial,
        GrowthRate::superexponential(2.0).unwrap(),
        GrowthRate::subexponential(0.5).unwrap(),
    ]
}

fn system_catalog() -> Vec<LinearSystem> {
    vec![
        LinearSystem::poly_decay(),
        LinearSystem::abs_ramp(2.0),
        LinearSystem::oscillatory_damping(1.0, 0.2),
        LinearSystem::constant(-1.0),
        LinearSystem::cosine(0.3, 1.0, 2.0).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_semigroup(
        a in -40.0f64..40.0,
        b in -40.0f64..40.0,
        t in -40.0f64..40.0,
        idx in 0usize..4,
    ) {
        let mu = &rate_catalog()[idx];
        let lhs = translate(&translate(mu, a).unwrap(), b).unwrap();
        let rhs = translate(mu, a + b).unwrap();
        prop_assert!((lhs.log_eval(t) - rhs.log_eval(t)).abs() < 1e-10);
    }

    #[test]
    fn exponential_translation_fixed_point(tau in -1e6f64..1e6, t in -1e6f64..1e6) {
        let moved = translate(&GrowthRate::Exponential, tau).unwrap();
        prop_assert_eq!(moved.log_eval(t), t);
    }

    #[test]
    fn log_derivative_matches_finite_differences(
        t in -45.0f64..45.0,
        idx in 0usize..4,
    ) {
        prop_assume!(t.abs() > GrowthRate::KINK_GUARD);
        let mu = &rate_catalog()[idx];
        let h = 1e-5;
        let fd = (mu.log_eval(t + h) - mu.log_eval(t - h)) / (2.0 * h);
        let an = mu.log_derivative(t);
        prop_assert!((an - fd).abs() <= 1e-6 * an.abs().max(1e-3), "{an} vs {fd}");
    }

    #[test]
    fn rates_strictly_increasing(
        t1 in -50.0f64..50.0,
        dt in 1e-6f64..10.0,
        idx in 0usize..4,
    ) {
        let mu = &rate_catalog()[idx];
        prop_assert!(mu.log_eval(t1) < mu.log_eval(t1 + dt));
    }

    #[test]
    fn cocycle_property_closed_form(
        t in -25.0f64..25.0,
        s in -25.0f64..25.0,
        r in -25.0f64..25.0,
        idx in 0usize..5,
    ) {
        let sys = &system_catalog()[idx];
        let op = EvolutionOperator::closed_form(sys).unwrap();
        let a = op.log_norm(t, s).unwrap() + op.log_norm(s, r).unwrap();
        let b = op.log_norm(t, r).unwrap();
        prop_assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn translation_identity_closed_form(
        t in -20.0f64..20.0,
        s in -20.0f64..20.0,
        tau in -20.0f64..20.0,
        idx in 0usize..5,
    ) {
        let sys = &system_catalog()[idx];
        let moved = translate_system(sys, tau).unwrap();
        let a = EvolutionOperator::closed_form(&moved).unwrap().log_norm(t, s).unwrap();
        let b = EvolutionOperator::closed_form(sys).unwrap()
            .log_norm(t + tau, s + tau).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn shift_identity_scalar(
        t in -20.0f64..20.0,
        s in -20.0f64..20.0,
        gamma in -3.0f64..3.0,
        sys_idx in 0usize..5,
        rate_idx in 0usize..4,
    ) {
        let sys = &system_catalog()[sys_idx];
        let mu = &rate_catalog()[rate_idx];
        let shifted = shift_system(sys, mu, gamma).unwrap();
        let lhs = EvolutionOperator::closed_form(&shifted).unwrap().log_norm(t, s).unwrap();
        let rhs = EvolutionOperator::closed_form(sys).unwrap().log_norm(t, s).unwrap()
            - gamma * (mu.log_eval(t) - mu.log_eval(s));
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn uniform_propagation_keeps_k_bit_exactly(
        k in 1.0f64..100.0,
        tau in -50.0f64..50.0,
    ) {
        let cert = DichotomyCertificate::new(
            Projector::Zero, k, None, Some(1.0), None, Some(0.0), GrowthRate::Polynomial,
        ).unwrap();
        let moved = propagate_dichotomy(&cert, tau).unwrap();
        prop_assert_eq!(moved.log_k().to_bits(), cert.log_k().to_bits());
    }
}

#[test]
fn translation_identity_runge_kutta() {
    let sys = LinearSystem::oscillatory_damping(1.0, 0.2);
    let op = EvolutionOperator::numeric(&sys, Method::RungeKutta { step: 1e-3 }).unwrap();
    for &(t, s, tau) in &[(2.0, -1.0, 3.0), (-4.0, 1.5, -2.5), (0.3, 5.0, 7.0)] {
        let moved = translate_system(&sys, tau).unwrap();
        let moved_op = EvolutionOperator::numeric(&moved, Method::RungeKutta { step: 1e-3 }).unwrap();
        let a = moved_op.log_norm(t, s).unwrap();
        let b = op.log_norm(t + tau, s + tau).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-5, max_relative = 1e-5);
    }
}

#[test]
fn shift_identity_diagonal_and_matrix() {
    let mu = GrowthRate::Exponential;
    let gamma = 0.7;
    // Diagonal in exact log-space.
    let diag = LinearSystem::constant_diagonal(&[-1.0, 0.5]).unwrap();
    let shifted = shift_system(&diag, &mu, gamma).unwrap();
    for &(t, s) in &[(3.0, -1.0), (-2.0, 4.0)] {
        let lhs = EvolutionOperator::auto(&shifted).log_norm(t, s).unwrap();
        let rhs = EvolutionOperator::auto(&diag).log_norm(t, s).unwrap() - gamma * (t - s);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-8);
    }
    // Dense matrix through RK4: the shift is a scalar multiple of the
    // identity, so it commutes with the evolution.
    let func: mudich_core::system::MatrixFn = std::sync::Arc::new(|t: f64| {
        nalgebra::DMatrix::from_row_slice(2, 2, &[-0.3, 1.0, -1.0, -0.3 + 0.1 * t.sin()])
    });
    let dense = LinearSystem::matrix(func, 2, "spiral").unwrap();
    let shifted = shift_system(&dense, &mu, gamma).unwrap();
    for &(t, s) in &[(2.0, 0.0), (-1.0, 3.0)] {
        let lhs = EvolutionOperator::auto(&shifted).log_norm(t, s).unwrap();
        let rhs = EvolutionOperator::auto(&dense).log_norm(t, s).unwrap() - gamma * (t - s);
        assert_relative_eq!(lhs, rhs, epsilon = 1e-8);
    }
}

#[test]
fn numeric_matches_closed_form_on_catalog() {
    for sys in system_catalog() {
        let exact = EvolutionOperator::closed_form(&sys).unwrap();
        let numeric = EvolutionOperator::numeric(&sys, Method::RungeKutta { step: 1e-3 }).unwrap();
        for &(t, s) in &[(20.0, 0.0), (0.0, -20.0), (7.0, -8.0), (-3.0, 12.0), (1.3, 0.9)] {
            let a = exact.log_norm(t, s).unwrap();
            let b = numeric.log_norm(t, s).unwrap();
            assert!(
                (a - b).abs() <= 1e-6 * a.abs().max(1.0),
                "{}: {a} vs {b} at ({t}, {s})",
                sys.label
            );
        }
    }
}

fn catalog_certificates() -> Vec<(LinearSystem, DichotomyCertificate)> {
    vec![
        (
            LinearSystem::poly_decay(),
            DichotomyCertificate::new(
                Projector::Zero,
                1.0,
                None,
                Some(1.0),
                None,
                Some(0.0),
                GrowthRate::Polynomial,
            )
            .unwrap(),
        ),
        (
            LinearSystem::abs_ramp(2.0),
            DichotomyCertificate::new(
                Projector::Zero,
                1.0,
                None,
                Some(1.0),
                None,
                Some(0.0),
                GrowthRate::quadratic(),
            )
            .unwrap(),
        ),
        (
            LinearSystem::oscillatory_damping(1.0, 0.2),
            DichotomyCertificate::new(
                Projector::Identity,
                (0.4f64).exp(),
                Some(-0.8),
                None,
                Some(0.4),
                None,
                GrowthRate::Exponential,
            )
            .unwrap(),
        ),
    ]
}

#[test]
fn propagation_soundness_across_catalog() {
    let grid = PairGrid::verification(30.0, 14, 28);
    for (sys, cert) in catalog_certificates() {
        for &tau in &[-5.0, -1.0, 0.0, 1.0, 5.0] {
            let moved_sys = translate_system(&sys, tau).unwrap();
            let moved_cert = propagate_dichotomy(&cert, tau).unwrap();
            let rep = verify_dichotomy(&moved_sys, &moved_cert, &grid).unwrap();
            assert!(
                rep.pass,
                "{} at tau = {tau}: margin {:.3e}",
                sys.label, rep.worst_margin
            );
        }
    }
}

#[test]
fn weak_comparison_transfer_at_grid_level() {
    // Certificates transfer from a rate to a weakly slower one with the
    // comparison constant measured on the same grid.
    let grid = PairGrid::verification(50.0, 16, 32);
    let cases: Vec<(LinearSystem, DichotomyCertificate, GrowthRate)> = vec![
        (
            LinearSystem::constant(-1.0),
            DichotomyCertificate::new(
                Projector::Identity,
                1.0,
                Some(-1.0),
                None,
                None,
                None,
                GrowthRate::Exponential,
            )
            .unwrap(),
            GrowthRate::Polynomial,
        ),
        (
            LinearSystem::abs_ramp(2.0),
            DichotomyCertificate::new(
                Projector::Zero,
                1.0,
                None,
                Some(1.0),
                None,
                None,
                GrowthRate::quadratic(),
            )
            .unwrap(),
            GrowthRate::Exponential,
        ),
    ];
    for (sys, cert, sigma) in cases {
        let mu = cert.rate().clone();
        // log M = sup over the same grid of (dlog sigma - dlog mu), t >= s.
        let log_m = grid
            .forward
            .iter()
            .map(|&(t, s)| sigma.log_ratio(t, s) - mu.log_ratio(t, s))
            .fold(0.0f64, f64::max);
        let transferred = DichotomyCertificate::with_log_k(
            cert.projector().clone(),
            cert.log_k() + log_m,
            cert.alpha(),
            cert.beta(),
            cert.theta(),
            cert.nu(),
            sigma.clone(),
        )
        .unwrap();
        let rep = verify_dichotomy(&sys, &transferred, &grid).unwrap();
        assert!(
            rep.pass,
            "{}: transferred margin {:.3e}",
            sys.label, rep.worst_margin
        );
    }
}

#[test]
fn spectrum_translation_invariance_on_catalog() {
    let windows = WindowSchedule::bohl_default();
    let cases: Vec<(LinearSystem, GrowthRate)> = vec![
        (LinearSystem::poly_decay(), GrowthRate::Polynomial),
        (LinearSystem::abs_ramp(2.0), GrowthRate::quadratic()),
        (LinearSystem::constant(-1.0), GrowthRate::Exponential),
        (LinearSystem::cosine(0.3, 1.0, 2.0).unwrap(), GrowthRate::Exponential),
    ];
    for (sys, rate) in cases {
        let base = estimate_spectrum(&sys, &rate, &windows).unwrap();
        for &tau in &[-3.0, 2.0, 7.0] {
            let moved = translate_system(&sys, tau).unwrap();
            let moved_rate = translate(&rate, tau).unwrap();
            let est = estimate_spectrum(&moved, &moved_rate, &windows).unwrap();
            assert_eq!(est.intervals.len(), base.intervals.len(), "{}", sys.label);
            for (a, b) in est.intervals.iter().zip(&base.intervals) {
                match (a.lo.finite(), b.lo.finite(), a.hi.finite(), b.hi.finite()) {
                    (Some(alo), Some(blo), Some(ahi), Some(bhi)) => {
                        assert!(
                            (alo - blo).abs() <= 5e-2 && (ahi - bhi).abs() <= 5e-2,
                            "{} tau={tau}: [{alo}, {ahi}] vs [{blo}, {bhi}]",
                            sys.label
                        );
                    }
                    _ => assert_eq!((a.lo, a.hi), (b.lo, b.hi), "{} tau={tau}", sys.label),
                }
            }
        }
    }
}

#[test]
fn resolvent_consistency_with_estimated_gaps() {
    let windows = WindowSchedule::bohl_default();
    // diag(-1, 2) under exp: gap midpoint in resolvent, interval midpoints not.
    let diag = LinearSystem::constant_diagonal(&[-1.0, 2.0]).unwrap();
    let rate = GrowthRate::Exponential;
    for gamma in [0.5, -3.0, 4.0] {
        let rep = resolvent_test(&diag, &rate, ExtendedReal::Finite(gamma), &windows).unwrap();
        assert!(rep.in_resolvent, "gamma = {gamma} should be resolvent");
    }
    for gamma in [-1.0, 2.0] {
        let rep = resolvent_test(&diag, &rate, ExtendedReal::Finite(gamma), &windows).unwrap();
        assert!(!rep.in_resolvent, "gamma = {gamma} sits on the spectrum");
    }
    // Scalar catalog systems: midpoints of estimated intervals are spectral.
    for (sys, rate) in [
        (LinearSystem::poly_decay(), GrowthRate::Polynomial),
        (LinearSystem::abs_ramp(2.0), GrowthRate::quadratic()),
    ] {
        let est = estimate_spectrum(&sys, &rate, &windows).unwrap();
        let iv = est.intervals[0];
        let mid = 0.5 * (iv.lo.finite().unwrap() + iv.hi.finite().unwrap());
        let inside = resolvent_test(&sys, &rate, ExtendedReal::Finite(mid), &windows).unwrap();
        assert!(!inside.in_resolvent, "{}", sys.label);
        let above = resolvent_test(
            &sys,
            &rate,
            ExtendedReal::Finite(iv.hi.finite().unwrap() + 1.0),
            &windows,
        )
        .unwrap();
        assert!(above.in_resolvent, "{}", sys.label);
    }
}

#[test]
fn growth_iff_bounded_spectrum() {
    let windows = WindowSchedule::bohl_default();
    let grid = PairGrid::verification(50.0, 16, 32);
    // Catalog systems with passing growth certificates have finite endpoints.
    let cases = vec![
        (LinearSystem::poly_decay(), GrowthRate::Polynomial),
        (LinearSystem::abs_ramp(2.0), GrowthRate::quadratic()),
        (LinearSystem::constant(-1.0), GrowthRate::Exponential),
    ];
    for (sys, rate) in cases {
        let cert = GrowthCertificate::new(1.5, 1.5, 0.0, rate.clone()).unwrap();
        let rep = verify_growth(&sys, &cert, &grid).unwrap();
        assert!(rep.pass, "{}", sys.label);
        let est = estimate_spectrum(&sys, &rate, &windows).unwrap();
        for iv in &est.intervals {
            assert!(iv.lo.is_finite() && iv.hi.is_finite(), "{}", sys.label);
        }
    }
    // Drift under the polynomial rate has no polynomial growth bound and an
    // unbounded spectrum.
    let est = estimate_spectrum(&LinearSystem::constant(1.0), &GrowthRate::Polynomial, &windows)
        .unwrap();
    assert!(est.intervals.iter().any(|iv| !iv.hi.is_finite()));
}
