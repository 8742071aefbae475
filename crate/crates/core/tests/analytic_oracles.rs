mod common;

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use blockade_core::analytics::*;
use blockade_core::correlations::g2_zero;
use blockade_core::hilbert::lowering;
use blockade_core::model::*;
use blockade_core::solver::{build_liouvillian, steady_state};
use blockade_core::C64;
use common::rng;
use proptest::prelude::*;
use rand::Rng;

fn full_g2(p: &MqParams, cutoff: usize) -> f64 {
    let s = two_mode_space(cutoff).unwrap();
    let l = build_liouvillian(&build_h_mq(p, &s).unwrap(), &collapse_ops(p, &s).unwrap()).unwrap();
    let rho = steady_state(&l).unwrap();
    g2_zero(&rho, &lowering(&s, MECHANICAL).unwrap()).unwrap()
}

#[test]
fn coefficient_special_cases() {
    let c = optimal_coefficients(0.0, 0.0, 1.0, 1.0);
    assert_eq!(c.a2, C64::new(0.0, 0.0));
    assert_eq!(c.a1, C64::new(0.0, 0.0));
    let c = optimal_coefficients(0.7, 0.0, 1.3, 0.4);
    let expected = 2f64.sqrt() * C64::new(0.7, -0.65) * C64::new(1.4, -0.85);
    assert!((c.a0 - expected).norm() < 1e-14);
    let (d, j) = no_qubit_drive_optimum(1.0, 1.0);
    assert_eq!(d, 0.0);
    assert_abs_diff_eq!(j, 0.5f64.sqrt(), epsilon = 1e-15);
    assert!(optimal_coefficients(d, j, 1.0, 1.0).a0.norm() < 1e-15);
    assert_abs_diff_eq!(no_qubit_drive_optimum(1.0, 0.0).1, 0.5);
    assert_abs_diff_eq!(no_qubit_drive_optimum(1.0, 5.0).1, 0.5 * 6f64.sqrt(), epsilon = 1e-15);
}

#[test]
fn roots_solve_quadratic_on_random_draws() {
    let mut g = rng(2024);
    for _ in 0..1000 {
        let delta = g.gen_range(-20.0..20.0);
        let j = g.gen_range(0.01..20.0);
        let kappa = g.gen_range(0.01..10.0);
        let gamma = g.gen_range(0.01..10.0);
        let coeffs = optimal_coefficients(delta, j, kappa, gamma);
        let roots = optimal_drive_roots(delta, j, kappa, gamma).unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let z = roots.root(branch);
            let residual = coeffs.eval(z).norm();
            assert!(residual <= 1e-10 * coeffs.scale(), "{delta} {j} {kappa} {gamma}: {residual}");
        }
    }
}

#[test]
fn root_ordering_follows_detuning_sign() {
    for d in [0.5, 3.0, 9.0] {
        let plus = optimal_drive_roots(d, 3.0, 1.0, 1.0).unwrap();
        let minus = optimal_drive_roots(-d, 3.0, 1.0, 1.0).unwrap();
        assert!(plus.eta_plus > plus.eta_minus);
        assert!(minus.eta_plus < minus.eta_minus);
    }
    assert!(optimal_drive_roots(1.0, 0.0, 1.0, 1.0).is_err());
}

#[test]
fn phases_jump_across_zero_detuning() {
    let left = optimal_drive_roots(-0.01, 3.0, 1.0, 1.0).unwrap();
    let right = optimal_drive_roots(0.01, 3.0, 1.0, 1.0).unwrap();
    let jump = |a: f64, b: f64| {
        let d = (a - b).abs();
        d.min(2.0 * PI - d)
    };
    assert!(jump(left.phi_plus, right.phi_plus) > PI / 4.0);
    assert!(jump(left.phi_minus, right.phi_minus) > PI / 4.0);
}

#[test]
fn two_phonon_amplitude_vanishes_on_optimal_manifold() {
    let mut g = rng(99);
    for _ in 0..200 {
        let delta = g.gen_range(-6.0..6.0);
        let j = g.gen_range(0.2..6.0);
        let gamma = g.gen_range(0.2..3.0);
        let eps = g.gen_range(0.001..0.01);
        let roots = optimal_drive_roots(delta, j, 1.0, gamma).unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let p = roots.drive(
                branch,
                MqParams {
                    delta,
                    j,
                    eps,
                    gamma,
                    ..MqParams::default()
                },
            );
            let amps = perturbative_amplitudes(&p).unwrap();
            assert!(amps.c2g.norm() < 1e-12, "{p:?}: {}", amps.c2g.norm());
        }
    }
    let (d, j) = no_qubit_drive_optimum(1.0, 1.0);
    let p = MqParams {
        delta: d,
        j,
        eps: 0.01,
        ..MqParams::default()
    };
    assert!(perturbative_amplitudes(&p).unwrap().c2g.norm() < 1e-12);
}

#[test]
fn weak_drive_hierarchy() {
    for (delta, j) in [(0.3, 1.0), (-1.0, 0.5), (2.0, 2.0)] {
        let p = MqParams {
            delta,
            j,
            eps: 0.01,
            omega: 0.005,
            phi: 0.4,
            ..MqParams::default()
        };
        let a = perturbative_amplitudes(&p).unwrap();
        let big = a.c0e.norm().max(a.c1g.norm());
        let small = a.c1e.norm().max(a.c2g.norm());
        assert!(big < 0.1);
        assert!(small * 10.0 < a.c0e.norm().min(a.c1g.norm()));
        assert!(perturbative_amplitudes(&MqParams { n_th: 0.1, ..p }).is_err());
    }
}

#[test]
fn perturbative_estimate_at_generic_point() {
    let p = MqParams {
        delta: 0.3,
        j: 1.0,
        eps: 0.005,
        ..MqParams::default()
    };
    let pert = perturbative_amplitudes(&p).unwrap().g2_zero();
    let full = full_g2(&p, 6);
    assert!((pert - full).abs() / full < 0.05, "{pert} vs {full}");
}

#[test]
fn perturbative_estimate_on_weak_drive_grid() {
    let mut checked = 0;
    for i in 0..9 {
        let delta = -2.0 + 0.5 * i as f64;
        for k in 0..7 {
            let j = 0.2 + 0.3 * k as f64;
            let p = MqParams {
                delta,
                j,
                eps: 0.01,
                ..MqParams::default()
            };
            let full = full_g2(&p, 5);
            if full < 0.02 {
                continue;
            }
            let pert = perturbative_amplitudes(&p).unwrap().g2_zero();
            assert!((pert - full).abs() / full < 0.1, "Δ={delta} J={j}: {pert} vs {full}");
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn thermal_occupation_values() {
    let n = thermal_occupation(6e9, 0.025);
    assert!((0.9e-5..=1.1e-5).contains(&n), "{n}");
    assert_eq!(thermal_occupation(6e9, 0.0), 0.0);
    // ħω = k_B T ln 2
    let temp = 1.0;
    let freq = K_B * temp * 2f64.ln() / (HBAR * 2.0 * PI);
    assert_abs_diff_eq!(thermal_occupation(freq, temp), 1.0, epsilon = 1e-12);
}

proptest! {
    #[test]
    fn thermal_occupation_is_monotone(f in 1e6..1e11f64, t in 1e-3..10.0f64, df in 1.001..2.0f64, dt in 1.001..2.0f64) {
        let n = thermal_occupation(f, t);
        prop_assert!(thermal_occupation(f * df, t) < n);
        prop_assert!(thermal_occupation(f, t * dt) > n);
    }
}

#[test]
fn adiabatic_elimination_limits() {
    let e = effective_mech_params(C64::new(0.0, 0.0), 10.0, 50.0, 1.0, 1e-3);
    assert_eq!(e.gamma_eff, 1.0);
    assert_eq!(e.n_eff, 1e-3);
    assert_eq!(e.gamma_om, 0.0);
    assert_eq!(e.delta_omega, 0.0);
    assert_abs_diff_eq!(e.n_om, 100.0 / (16.0 * 2500.0), epsilon = 1e-15);

    let g = C64::from_polar(0.3, 1.0);
    let e = effective_mech_params(g, 1.0, 100.0, 1.0, 0.0);
    let limit = 4.0 * g.norm_sqr() / 1.0;
    assert!((e.gamma_om - limit).abs() / limit < 0.01);
}

#[test]
fn readout_back_action_is_negligible_in_detection_regime() {
    // |G| = κ/10, Γ = 10κ, mechanical frequency far above Γ
    let n_th = 1e-3;
    for omega_m in [1e3, 1e4, 1e6] {
        let e = effective_mech_params(C64::new(0.1, 0.0), 10.0, omega_m, 1.0, n_th);
        assert!(e.gamma_om < 0.01 * 1.0);
        assert!(e.gamma_om * e.n_om < 0.01 * 1.0 * n_th);
        assert!((e.gamma_eff - 1.0).abs() < 0.01);
        assert!((e.n_eff - n_th).abs() / n_th < 0.01);
    }
}
