//! Fixtures shared by the benchmarks.

use crossing_core::normalform::NormalFormProblem;
use crossing_core::oscquad::{AmplitudeSpec, PhaseSpec};
use crossing_core::schrodinger::SchrodingerProblem;
use crossing_core::symbolcalc::Poly2;
use crossing_core::{Bump, Poly1};

pub fn bump() -> Bump {
    Bump::new(1.0, 0.2, 0.6)
}

/// Phase `y^(m+1)/(m+1)` with a bump amplitude.
pub fn oscillatory(m: u32) -> (PhaseSpec, AmplitudeSpec) {
    let phase = PhaseSpec::monomial(1.0, m).expect("valid phase");
    let amp = AmplitudeSpec::bump(bump()).expect("valid amplitude");
    (phase, amp)
}

/// `f = x^m` on [-1, 1].
pub fn model(m: usize, h: f64) -> NormalFormProblem {
    NormalFormProblem::new(Poly1::monomial(1.0, m), bump(), bump(), (-1.0, 1.0), h).expect("valid model")
}

/// Transversal crossing of `-x/2` and `x/2` at unit energy.
pub fn schrodinger(h: f64) -> SchrodingerProblem {
    SchrodingerProblem::new(
        Poly1::new(vec![0.0, -0.5]),
        Poly1::new(vec![0.0, 0.5]),
        bump(),
        1.0,
        (-0.8, 0.8),
        h,
    )
    .expect("valid problem")
}

/// Dense polynomial in (x, xi) with every monomial up to `deg` in each variable.
pub fn dense_poly(deg: u32, seed: f64) -> Poly2 {
    Poly2::from_terms((0..=deg).flat_map(|i| (0..=deg).map(move |j| (i, j, ((i * 7 + j * 3) as f64 + seed).sin()))))
}
