//! Polynomial symbol calculus in `(x, xi)` and the crossing data derived from it.

mod crossing;
mod poly2;

pub use crossing::{normal_form_constants, omega_general, sign_s, transfer_predicted_general, CrossingData, Omega12};
pub use poly2::Poly2;

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// `H_a b = d_xi a * d_x b - d_x a * d_xi b`.
pub fn poisson_bracket(a: &Poly2, b: &Poly2) -> Poly2 {
    &(&a.d_xi() * &b.d_x()) - &(&a.d_x() * &b.d_xi())
}

/// `H_{p1}^k p2`.
pub fn iterated_bracket(p1: &Poly2, p2: &Poly2, k: u32) -> Poly2 {
    let mut out = p2.clone();
    for _ in 0..k {
        out = poisson_bracket(p1, &out);
    }
    out
}

/// Smallest `m <= max_m` with `H_{p1}^m p2(0,0) != 0`, and that value.
///
/// For integer-coefficient symbols the zero test is exact; otherwise a value
/// counts as zero below `1e-12` times the largest coefficient of the bracket.
pub fn contact_order(p1: &Poly2, p2: &Poly2, max_m: u32) -> Result<(u32, f64)> {
    for (name, p) in [("p1", p1), ("p2", p2)] {
        let v = p.at_origin();
        let tol = if p.has_integer_coeffs() {
            0.0
        } else {
            1e-12 * p.max_abs_coeff()
        };
        if v.abs() > tol {
            return Err(Error::InvalidProblem(format!(
                "{name}(0,0) = {v} but the crossing must sit at the origin"
            )));
        }
    }
    let exact = p1.has_integer_coeffs() && p2.has_integer_coeffs();
    let mut b = p2.clone();
    for m in 1..=max_m {
        b = poisson_bracket(p1, &b);
        let v = b.at_origin();
        let tol = if exact { 0.0 } else { 1e-12 * b.max_abs_coeff() };
        if v.abs() > tol {
            return Ok((m, v));
        }
    }
    Err(Error::NoFiniteContact { max_m })
}

/// `-arctan(d_x p / d_xi p)` at the origin, or `-pi/2` when `d_xi p = 0`.
pub fn theta_of(p: &Poly2) -> Result<f64> {
    theta_from_gradient(p.gradient_at_origin())
}

pub(crate) fn theta_from_gradient(g: [f64; 2]) -> Result<f64> {
    let [px, pxi] = g;
    if px == 0.0 && pxi == 0.0 {
        return Err(Error::ZeroGradient);
    }
    if pxi == 0.0 {
        Ok(-FRAC_PI_2)
    } else {
        Ok(-(px / pxi).atan())
    }
}
