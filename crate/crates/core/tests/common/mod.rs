//! Corpora shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use crossing_core::normalform::NormalFormProblem;
use crossing_core::schrodinger::SchrodingerProblem;
use crossing_core::symbolcalc::{contact_order, Poly2};
use crossing_core::{Bump, Poly1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bump() -> Bump {
    Bump::new(1.0, 0.2, 0.6)
}

/// `f = +-x^m`, m = 1..3, with bump couplings on [-1, 1].
pub fn model_corpus(h: f64) -> Vec<NormalFormProblem> {
    let mut out = Vec::new();
    for m in 1..=3usize {
        for s in [1.0, -1.0] {
            out.push(NormalFormProblem::new(Poly1::monomial(s, m), bump(), bump(), (-1.0, 1.0), h).unwrap());
        }
    }
    out
}

pub fn schrodinger(v1: &[f64], v2: &[f64], e0: f64, interval: (f64, f64), h: f64) -> SchrodingerProblem {
    SchrodingerProblem::new(
        Poly1::new(v1.to_vec()),
        Poly1::new(v2.to_vec()),
        bump(),
        e0,
        interval,
        h,
    )
    .unwrap()
}

/// Propagating crossings: transversal and tangential, several energies and
/// slopes. Tangential cases use a narrower interval to stay clear of turning
/// points.
pub fn schrodinger_corpus(h: f64) -> Vec<SchrodingerProblem> {
    vec![
        schrodinger(&[0.0, -0.5], &[0.0, 0.5], 1.0, (-0.8, 0.8), h),
        schrodinger(&[0.0, -0.5], &[0.0, 0.5], 2.0, (-0.8, 0.8), h),
        schrodinger(&[0.0, 0.3], &[0.0, -1.1], 1.7, (-0.8, 0.8), h),
        schrodinger(&[0.0, -0.5], &[0.0, -0.5, 1.0], 1.0, (-0.7, 0.7), h),
        schrodinger(&[0.0, -0.5], &[0.0, -0.5, -1.0], 2.0, (-0.7, 0.7), h),
        schrodinger(&[0.0, -0.5], &[0.0, -0.5, 0.0, 1.0], 1.0, (-0.7, 0.7), h),
        schrodinger(&[0.0, 2.0], &[0.0, 2.0, 1.0], 4.0, (-0.7, 0.7), h),
    ]
}

/// Random integer polynomial in (x, xi) of degree < 4 in each variable.
pub fn random_int_poly(rng: &mut ChaCha8Rng) -> Poly2 {
    let n = rng.gen_range(0..8);
    Poly2::from_terms((0..n).map(|_| {
        (
            rng.gen_range(0..4),
            rng.gen_range(0..4),
            f64::from(rng.gen_range(-5i32..=5)),
        )
    }))
}

pub struct Tangential {
    pub p1: Poly2,
    pub p2: Poly2,
}

/// Tangential pairs `p1 = s (xi - g(x))`, `p2 = lambda (p1 - d x^m) + e x^m xi`,
/// optionally moved by an integer symplectic linear map.
pub fn tangential_corpus(seed: u64, count: usize) -> Vec<Tangential> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = [
        [[1.0, 0.0], [0.0, 1.0]],
        [[1.0, 1.0], [0.0, 1.0]],
        [[2.0, 1.0], [1.0, 1.0]],
        [[0.0, -1.0], [1.0, 0.0]],
    ];
    let mut out = Vec::new();
    while out.len() < count {
        let m = rng.gen_range(2u32..=4);
        let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let g = Poly2::from_terms((1..=3).map(|i| (i, 0, f64::from(rng.gen_range(-2i32..=2)))));
        let p1 = (&Poly2::xi() - &g).scale(s);
        let lambda = f64::from(rng.gen_range(1i32..=3)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let d = f64::from(rng.gen_range(1i32..=4)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let e = f64::from(rng.gen_range(-2i32..=2));
        let p2 = &(&p1 - &Poly2::monomial(d, m, 0)).scale(lambda) + &Poly2::monomial(e, m, 1);
        let a = maps[rng.gen_range(0..maps.len())];
        let (p1, p2) = (p1.compose_linear(a), p2.compose_linear(a));
        match contact_order(&p1, &p2, 8) {
            Ok((k, _)) if k == m => out.push(Tangential { p1, p2 }),
            _ => continue,
        }
    }
    out
}
