mod common;

use crossing_core::ode::OdeOptions;
use crossing_core::schrodinger::{
    build_crossing_data, general_transfer, numeric_transfer_case_i, omega_case_i, omega_case_ii,
    predict_transfer_case_i, predict_transfer_case_ii, solve_schrodinger_ode, CrossingPoint, Endpoint, SchrodingerCase,
};
use crossing_core::{Complex64, Error};

use common::{schrodinger as problem, schrodinger_corpus as corpus};

#[test]
fn predictor_matches_general_formula() {
    for p in corpus(1e-3) {
        for point in [CrossingPoint::Plus, CrossingPoint::Minus] {
            let a = predict_transfer_case_i(&p, point).unwrap();
            let b = general_transfer(&p, point).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10, "{point:?}");
        }
    }
}

#[test]
fn transversal_value_and_sign() {
    let p = problem(&[0.0, -0.5], &[0.0, 0.5], 1.0, (-0.8, 0.8), 1e-3);
    let w = omega_case_i(&p).unwrap();
    let want = Complex64::from_polar(std::f64::consts::PI.sqrt(), -std::f64::consts::FRAC_PI_4);
    assert!((w - want).norm() < 1e-14);
    // swapping the potentials flips the sign of (V2 - V1)' and conjugates omega
    let q = problem(&[0.0, 0.5], &[0.0, -0.5], 1.0, (-0.8, 0.8), 1e-3);
    assert!((omega_case_i(&q).unwrap() - want.conj()).norm() < 1e-14);
}

#[test]
fn numeric_transfer_matches_prediction() {
    for p in corpus(1e-4) {
        for point in [CrossingPoint::Plus, CrossingPoint::Minus] {
            let got = numeric_transfer_case_i(&p, point).unwrap();
            let want = predict_transfer_case_i(&p, point).unwrap();
            for (g, w) in [(got.transfer.t12(), want.t12()), (got.transfer.t21(), want.t21())] {
                assert!((g - w).norm() < 0.05 * w.norm(), "{point:?}: {g} vs {w}");
            }
            // the other branch only carries the O(h) mismatch of the leading-order data
            let other = got.other_branch.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(other < 10.0 * p.h(), "{other}");
        }
    }
}

#[test]
fn conjugate_crossing_is_time_reversal() {
    // real potentials and coupling: T(0, -xi0) = conj(T(0, xi0))^{-1}
    let p = problem(&[0.0, -0.5], &[0.0, -0.5, 0.0, 1.0], 1.0, (-0.7, 0.7), 1e-4);
    let plus = numeric_transfer_case_i(&p, CrossingPoint::Plus).unwrap().transfer;
    let minus = numeric_transfer_case_i(&p, CrossingPoint::Minus).unwrap().transfer;
    let t = plus.entries;
    let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
    let inv = [[t[1][1] / det, -t[0][1] / det], [-t[1][0] / det, t[0][0] / det]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((minus.entries[i][j] - inv[i][j].conj()).norm() < 1e-3, "({i}, {j})");
        }
    }
}

#[test]
fn flux_is_conserved() {
    // the Wronskian-type flux sum_j Im(conj(u_j) h u_j') is constant along x
    let p = problem(&[0.0, -0.5], &[0.0, 0.5], 1.0, (-0.8, 0.8), 1e-3);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (sol, _) =
        solve_schrodinger_ode(&p, Endpoint::Left, [[one, zero], [zero, zero]], &OdeOptions::default()).unwrap();
    let flux = |k: usize| -> f64 {
        (0..2)
            .map(|j| (sol.u[j].values[k].conj() * sol.hu[j].values[k]).im)
            .sum()
    };
    let f0 = flux(0);
    for k in (0..sol.u[0].len()).step_by(997) {
        assert!((flux(k) - f0).abs() < 1e-8 * f0.abs(), "{k}");
    }
}

#[test]
fn turning_point_case() {
    let p = problem(&[0.0, -1.0], &[0.0, -2.0], 0.0, (-0.8, 0.8), 1e-3);
    assert_eq!(p.case().unwrap(), SchrodingerCase::TurningPoint);
    let [w1, w2] = omega_case_ii(&p).unwrap();
    assert!((w1 - 2.810_514_770_742_615_917_57).abs() < 1e-13);
    assert!((w2 - 1.405_257_385_371_307_958_79).abs() < 1e-13);
    assert!((w1 / w2 - 2.0).abs() < 1e-14);
    let d = build_crossing_data(&p, CrossingPoint::Origin).unwrap();
    assert_eq!(d.m, 2);
    let t = predict_transfer_case_ii(&p).unwrap();
    assert!(t.max_abs_diff(&general_transfer(&p, CrossingPoint::Origin).unwrap()) < 1e-12);
    assert!(matches!(
        numeric_transfer_case_i(&p, CrossingPoint::Plus),
        Err(Error::CaseMismatch(_)) | Err(Error::TurningPointInRange)
    ));
}

#[test]
fn identical_potentials_have_no_contact() {
    let p = problem(&[0.0, 1.0], &[0.0, 1.0], 1.0, (-0.8, 0.8), 1e-3);
    assert!(matches!(
        build_crossing_data(&p, CrossingPoint::Plus),
        Err(Error::NoFiniteContact { .. })
    ));
}
