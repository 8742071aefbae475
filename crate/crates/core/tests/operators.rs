mod common;

use approx::assert_abs_diff_eq;
use blockade_core::hilbert::{lowering, number, FactorKind, OperatorMatrix};
use blockade_core::model::*;
use blockade_core::C64;
use common::{dense, hermitian_spectrum, restrict};
use proptest::prelude::*;

fn excitations(levels: &[usize]) -> usize {
    levels.iter().sum()
}

#[test]
fn space_dimensions() {
    use blockade_core::hilbert::make_space;
    let two = make_space([("m", FactorKind::Boson { cutoff: 5 }), ("q", FactorKind::Qubit)]).unwrap();
    assert_eq!(two.total_dim(), 12);
    let three = make_space([
        ("a", FactorKind::Boson { cutoff: 3 }),
        ("m", FactorKind::Boson { cutoff: 5 }),
        ("q", FactorKind::Qubit),
    ])
    .unwrap();
    assert_eq!(three.total_dim(), 48);
    assert_eq!(make_space([("q", FactorKind::Qubit)]).unwrap().total_dim(), 2);
    assert_eq!(two_mode_space(8).unwrap().total_dim(), 18);
    assert_eq!(three_mode_space(3, 6).unwrap().total_dim(), 56);
}

#[test]
fn free_hamiltonian_is_diagonal_ladder() {
    let s = two_mode_space(3).unwrap();
    let p = MqParams {
        delta: 1.0,
        ..MqParams::default()
    };
    let h = build_h_mq(&p, &s).unwrap();
    let mut expected: Vec<f64> = (0..s.total_dim()).map(|i| excitations(&s.levels_of(i)) as f64).collect();
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let ev = hermitian_spectrum(dense(&h));
    for (a, b) in ev.iter().zip(&expected) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
    assert_eq!(&expected[..4], &[0.0, 1.0, 1.0, 2.0]);
}

#[test]
fn jaynes_cummings_single_excitation_doublet() {
    // Smallest admissible cutoff is 2, so the {0, -J, +J} structure is read
    // off the manifolds with at most one excitation.
    let s = two_mode_space(2).unwrap();
    let p = MqParams {
        j: 1.0,
        ..MqParams::default()
    };
    let h = dense(&build_h_mq(&p, &s).unwrap());
    let low = restrict(&s, &h, |l| excitations(l) <= 1);
    let ev = hermitian_spectrum(low);
    assert_eq!(ev.len(), 3);
    for (a, b) in ev.iter().zip(&[-1.0, 0.0, 1.0]) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}

#[test]
fn dressed_spectrum_matches_diagonalisation() {
    for (j, delta) in [(10.0, 10.0), (0.7, -0.3), (3.0, 0.0)] {
        let s = two_mode_space(6).unwrap();
        let p = MqParams {
            j,
            delta,
            ..MqParams::default()
        };
        let h = dense(&build_h_mq(&p, &s).unwrap());
        for level in dressed_spectrum(j, delta, 4) {
            let block = restrict(&s, &h, |l| excitations(l) == level.n);
            let ev = hermitian_spectrum(block);
            assert_eq!(ev.len(), 2);
            assert_abs_diff_eq!(ev[0], level.lower, epsilon = 1e-10);
            assert_abs_diff_eq!(ev[1], level.upper, epsilon = 1e-10);
        }
    }
    let first = dressed_spectrum(10.0, 10.0, 2);
    assert_abs_diff_eq!(first[0].upper, 20.0);
    assert_abs_diff_eq!(first[0].lower, 0.0);
    assert_abs_diff_eq!(first[1].upper, 20.0 + 10.0 * 2f64.sqrt(), epsilon = 1e-12);
    assert_abs_diff_eq!(first[1].lower, 20.0 - 10.0 * 2f64.sqrt(), epsilon = 1e-12);
}

#[test]
fn uncoupled_readout_reduces_to_two_mode_model() {
    let p = MqParams {
        delta: 0.8,
        j: 1.3,
        eps: 0.2,
        omega: 0.4,
        phi: -2.0,
        ..MqParams::default()
    };
    let three = three_mode_space(3, 4).unwrap();
    let two = two_mode_space(4).unwrap();
    let dp = DetectionParams {
        base: p,
        g: C64::new(0.0, 0.0),
        cavity_damping: 10.0,
    };
    let h3 = build_h_total(&dp, &three).unwrap();
    let h2 = build_h_mq(&p, &two).unwrap();
    for r in 0..three.total_dim() {
        let lr = three.levels_of(r);
        for c in 0..three.total_dim() {
            let lc = three.levels_of(c);
            let mut expected = C64::new(0.0, 0.0);
            if lr[0] == lc[0] {
                let r2 = two.index_of(&lr[1..]).unwrap();
                let c2 = two.index_of(&lc[1..]).unwrap();
                expected += h2.get(r2, c2);
                if r == c {
                    expected += p.delta * lr[0] as f64;
                }
            }
            assert!((h3.get(r, c) - expected).norm() < 1e-14, "({r}, {c})");
        }
    }
}

#[test]
fn beam_splitter_doublet() {
    let s = three_mode_space(2, 2).unwrap();
    let dp = DetectionParams {
        base: MqParams::default(),
        g: C64::new(1.0, 0.0),
        cavity_damping: 1.0,
    };
    let h = dense(&build_h_total(&dp, &s).unwrap());
    // one photon or one phonon, qubit in |g⟩
    let block = restrict(&s, &h, |l| l[2] == 0 && l[0] + l[1] == 1);
    let ev = hermitian_spectrum(block);
    assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-12);
}

fn total_excitation(space: &blockade_core::hilbert::HilbertSpace) -> OperatorMatrix {
    space
        .factors()
        .iter()
        .map(|f| number(space, f.label()).unwrap())
        .fold(OperatorMatrix::zeros(space), |acc, n| &acc + &n)
}

#[test]
fn excitation_number_is_conserved_without_drives() {
    let two = two_mode_space(5).unwrap();
    let p = MqParams {
        delta: -1.7,
        j: 2.3,
        ..MqParams::default()
    };
    let h = build_h_mq(&p, &two).unwrap();
    assert!(h.commutator(&total_excitation(&two)).unwrap().max_abs() < 1e-12);

    let three = three_mode_space(3, 4).unwrap();
    let dp = DetectionParams {
        base: p,
        g: C64::from_polar(0.4, 0.9),
        cavity_damping: 10.0,
    };
    let h = build_h_total(&dp, &three).unwrap();
    assert!(h.commutator(&total_excitation(&three)).unwrap().max_abs() < 1e-12);

    // a drive breaks it
    let driven = MqParams { eps: 0.1, ..p };
    let h = build_h_mq(&driven, &two).unwrap();
    assert!(h.commutator(&total_excitation(&two)).unwrap().max_abs() > 1e-3);
}

#[test]
fn mechanical_lowering_in_product_space() {
    let s = two_mode_space(2).unwrap();
    let b = lowering(&s, MECHANICAL).unwrap();
    assert_eq!(b.dim(), 6);
    assert_eq!(b.nnz(), 4);
    let bd = b.adjoint();
    for i in 0..6 {
        for j in 0..6 {
            assert_eq!(bd.get(i, j), b.get(j, i).conj());
        }
    }
}

fn mq_params() -> impl Strategy<Value = MqParams> {
    (
        -20.0..20.0f64,
        0.0..15.0f64,
        0.0..2.0f64,
        0.0..2.0f64,
        -10.0..10.0f64,
        0.05..5.0f64,
        0.05..5.0f64,
        0.0..1.0f64,
    )
        .prop_map(|(delta, j, eps, omega, phi, kappa, gamma, n_th)| MqParams {
            delta,
            j,
            eps,
            omega,
            phi,
            kappa,
            gamma,
            n_th,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn two_mode_hamiltonian_is_hermitian(p in mq_params()) {
        let s = two_mode_space(4).unwrap();
        prop_assert!(build_h_mq(&p, &s).unwrap().hermiticity_residual() < 1e-12);
    }

    #[test]
    fn three_mode_hamiltonian_is_hermitian(p in mq_params(), g in 0.0..2.0f64, theta in -3.2..3.2f64) {
        let s = three_mode_space(2, 3).unwrap();
        let dp = DetectionParams { base: p, g: C64::from_polar(g, theta), cavity_damping: 10.0 };
        prop_assert!(build_h_total(&dp, &s).unwrap().hermiticity_residual() < 1e-12);
    }

    #[test]
    fn collapse_rates_are_non_negative(p in mq_params()) {
        let s = two_mode_space(3).unwrap();
        let ops = collapse_ops(&p, &s).unwrap();
        prop_assert!(ops.len() == 2 || ops.len() == 4);
        prop_assert!(ops.iter().all(|c| c.rate > 0.0));
    }
}
