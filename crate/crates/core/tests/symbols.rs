mod common;

use crossing_core::symbolcalc::{
    contact_order, iterated_bracket, normal_form_constants, omega_general, poisson_bracket, sign_s,
    transfer_predicted_general, CrossingData, Poly2,
};
use crossing_core::{Complex64, Error, Poly1};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::tangential_corpus;

fn int_poly() -> impl Strategy<Value = Poly2> {
    prop::collection::vec((0u32..4, 0u32..4, -5i32..=5), 0..8)
        .prop_map(|terms| Poly2::from_terms(terms.into_iter().map(|(i, j, c)| (i, j, f64::from(c)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bracket_antisymmetry(a in int_poly(), b in int_poly()) {
        prop_assert_eq!(poisson_bracket(&a, &b), -&poisson_bracket(&b, &a));
    }

    #[test]
    fn bracket_leibniz(a in int_poly(), b in int_poly(), c in int_poly()) {
        let lhs = poisson_bracket(&a, &(&b * &c));
        let rhs = &(&poisson_bracket(&a, &b) * &c) + &(&b * &poisson_bracket(&a, &c));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_jacobi(a in int_poly(), b in int_poly(), c in int_poly()) {
        let s = &(&poisson_bracket(&a, &poisson_bracket(&b, &c)) + &poisson_bracket(&b, &poisson_bracket(&c, &a)))
            + &poisson_bracket(&c, &poisson_bracket(&a, &b));
        prop_assert!(s.is_zero());
    }

    #[test]
    fn bracket_bilinear(a in int_poly(), b in int_poly(), c in int_poly(), k in -4i32..=4) {
        let k = f64::from(k);
        let lhs = poisson_bracket(&a, &(&b.scale(k) + &c));
        let rhs = &poisson_bracket(&a, &b).scale(k) + &poisson_bracket(&a, &c);
        prop_assert_eq!(lhs, rhs);
    }
}

/// `xi^2 + V(x) - E0`.
fn schrodinger_symbol(v: &Poly1, e0: f64) -> Poly2 {
    &(&Poly2::monomial(1.0, 0, 2) + &Poly2::from_poly1_x(v)) - &Poly2::constant(e0)
}

#[test]
fn schrodinger_bracket_at_crossing() {
    // H_{p1}^n p2 (0, xi0) = 2^n xi0^n (V2 - V1)^{(n)}(0), exact for integer data
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=3usize {
        for xi0 in [1.0, 2.0, 3.0] {
            for _ in 0..10 {
                let mut c1: Vec<f64> = (0..6).map(|_| f64::from(rng.gen_range(-4i32..=4))).collect();
                c1[0] = 0.0;
                let mut c2 = c1.clone();
                for (k, c) in c2.iter_mut().enumerate().skip(n) {
                    *c += f64::from(rng.gen_range(-3i32..=3));
                    if k == n && *c == c1[k] {
                        *c += 1.0;
                    }
                }
                let (v1, v2) = (Poly1::new(c1), Poly1::new(c2));
                let e0 = xi0 * xi0;
                let p1 = schrodinger_symbol(&v1, e0).shift(0.0, xi0);
                let p2 = schrodinger_symbol(&v2, e0).shift(0.0, xi0);
                let (m, b) = contact_order(&p1, &p2, 8).unwrap();
                let dv = v2.sub(&v1).deriv_at(n, 0.0);
                assert_eq!(m as usize, n);
                assert_eq!(b, 2f64.powi(n as i32) * xi0.powi(n as i32) * dv);
                // the conjugate crossing picks up (-1)^n
                let q1 = schrodinger_symbol(&v1, e0).shift(0.0, -xi0);
                let q2 = schrodinger_symbol(&v2, e0).shift(0.0, -xi0);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(iterated_bracket(&q1, &q2, n as u32).at_origin(), sign * b);
            }
        }
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

#[test]
fn tangential_sign_and_normal_form_constant() {
    for case in tangential_corpus(11, 60) {
        let d = CrossingData::from_symbols(&case.p1, &case.p2, one(), one(), 8).unwrap();
        let (c, _) = normal_form_constants(&case.p1, &case.p2, &d).unwrap();
        let (g1, g2) = (case.p1.gradient_at_origin(), case.p2.gradient_at_origin());
        let c_geom = (g1[0] * g2[0] + g1[1] * g2[1]) / (g2[0] * g2[0] + g2[1] * g2[1]);
        assert_eq!(sign_s(&d).unwrap(), d.s);
        assert_eq!(f64::from(d.s), c.signum());
        assert!((c - c_geom).abs() < 1e-12 * c.abs(), "{c} vs {c_geom}");
        assert!((c.abs() - d.c_prime).abs() < 1e-12 * d.c_prime);
    }
}

#[test]
fn tangential_bracket_symmetry() {
    // H_{p1}^m p2 = -c^{m-1} H_{p2}^m p1 at the crossing
    for case in tangential_corpus(12, 60) {
        let d = CrossingData::from_symbols(&case.p1, &case.p2, one(), one(), 8).unwrap();
        let (c, _) = normal_form_constants(&case.p1, &case.p2, &d).unwrap();
        let want = -c.powi(d.m as i32 - 1) * d.bracket_m_rev;
        assert!(
            (d.bracket_m - want).abs() <= 1e-10 * want.abs(),
            "{} vs {want}",
            d.bracket_m
        );
    }
}

#[test]
fn transfer_invariant_under_joint_rescaling() {
    // (p2, q2) -> (lambda p2, lambda q2) leaves T unchanged for lambda > 0
    for case in tangential_corpus(13, 30) {
        let q = Complex64::new(0.7, -0.2);
        let d = CrossingData::from_symbols(&case.p1, &case.p2, one(), q, 8).unwrap();
        let t = transfer_predicted_general(&d, 1e-3);
        for lambda in [0.5, 3.0] {
            let d2 = CrossingData::from_symbols(&case.p1, &case.p2.scale(lambda), one(), q * lambda, 8).unwrap();
            let t2 = transfer_predicted_general(&d2, 1e-3);
            assert!(t.max_abs_diff(&t2) < 1e-13, "lambda = {lambda}");
            // rescaling p2 alone moves only omega2, by lambda^{-1}
            let w = omega_general(&d);
            let w2 = omega_general(&d2);
            assert!((w2.omega1 - w.omega1).norm() < 1e-12 * w.omega1.norm());
            assert!((w2.omega2 * lambda - w.omega2).norm() < 1e-12 * w.omega2.norm());
        }
    }
}

#[test]
fn contact_order_errors() {
    let p = Poly2::xi();
    assert!(matches!(
        contact_order(&p, &p, 5),
        Err(Error::NoFiniteContact { max_m: 5 })
    ));
    let shifted = &p + &Poly2::constant(1.0);
    assert!(matches!(contact_order(&p, &shifted, 5), Err(Error::InvalidProblem(_))));
}
