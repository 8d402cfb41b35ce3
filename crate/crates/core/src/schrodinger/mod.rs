//! Coupled Schrödinger systems
//! `((hD)^2 + V_j - E0) u_j + h W u_k = 0`, `{j, k} = {1, 2}`,
//! with polynomial potentials and a bump coupling.
//!
//! Two configurations are handled. For `E0 > 0` and `V1(0) = V2(0) = 0` the
//! characteristics cross at `(0, ±sqrt(E0))` with contact order `n`, the
//! vanishing order of `V2 - V1` at 0. For `E0 = 0` both curves have a
//! turning point at the origin and the contact order is `2n`.
//!
//! With `p_j = xi^2 + V_j - E0` the first nonvanishing bracket is
//! `H_{p1}^n p2 (0, xi0) = 2^n xi0^n (V2 - V1)^{(n)}(0)` in the first case
//! (times `(-1)^n` at `(0, -xi0)`), and
//! `H_{p1}^{2n} p2 (0, 0) = (-1)^n (2n)!/n! V1'(0)^n (V2 - V1)^{(n)}(0)` in
//! the second. Both are checked against brute-force iterated brackets.

mod numeric;
mod wkb;

pub use numeric::{numeric_transfer_case_i, solve_schrodinger_ode, Endpoint, SchrodingerSolution, SchrodingerTransfer};
pub use wkb::{Branch, WkbBasis};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::{Bump, Poly1};
use crate::oscquad::{factorial, gamma_real, mu_m};
use crate::symbolcalc::{transfer_predicted_general, CrossingData, Poly2};
use crate::transfer::TransferMatrix;

/// Default number of grid samples per local wavelength.
pub const DEFAULT_SAMPLES_PER_PERIOD: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchrodingerCase {
    /// `E0 > 0`, crossings at `(0, ±sqrt(E0))`.
    Propagating,
    /// `E0 = 0`, common turning point at the origin.
    TurningPoint,
}

/// Which crossing of the two characteristic sets to look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingPoint {
    /// `(0, sqrt(E0))`.
    Plus,
    /// `(0, -sqrt(E0))`.
    Minus,
    /// `(0, 0)`, only for `E0 = 0`.
    Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerProblem {
    v: [Poly1; 2],
    w: Bump,
    e0: f64,
    h: f64,
    interval: (f64, f64),
    samples_per_period: f64,
    /// Vanishing order of `V2 - V1` at 0; `None` when the potentials agree.
    n: Option<u32>,
}

impl SchrodingerProblem {
    pub fn new(v1: Poly1, v2: Poly1, w: Bump, e0: f64, interval: (f64, f64), h: f64) -> Result<Self> {
        Self::with_resolution(v1, v2, w, e0, interval, h, DEFAULT_SAMPLES_PER_PERIOD)
    }

    pub fn with_resolution(
        v1: Poly1,
        v2: Poly1,
        w: Bump,
        e0: f64,
        interval: (f64, f64),
        h: f64,
        samples_per_period: f64,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        if !(h > 0.0) || !h.is_finite() {
            return bad(format!("h must be positive, got {h}"));
        }
        if !(e0 >= 0.0) || !e0.is_finite() {
            return bad(format!("E0 must be finite and nonnegative, got {e0}"));
        }
        let (x0, x1) = interval;
        if !(x0 < 0.0 && 0.0 < x1) || !x0.is_finite() || !x1.is_finite() {
            return bad(format!("interval ({x0}, {x1}) must contain 0 in its interior"));
        }
        if !(samples_per_period >= 16.0) {
            return bad(format!("need at least 16 samples per period, got {samples_per_period}"));
        }
        w.validate().map_err(Error::InvalidProblem)?;
        let (lo, hi) = w.support_interval();
        if !w.is_zero() && !(x0 < lo && hi < x1) {
            return bad(format!("coupling support [{lo}, {hi}] must lie inside ({x0}, {x1})"));
        }
        if v1.coeffs().iter().chain(v2.coeffs()).any(|c| !c.is_finite()) {
            return bad("potential coefficients must be finite".into());
        }
        let n = v2.sub(&v1).vanishing_order().map(|k| k as u32);
        Ok(SchrodingerProblem {
            v: [v1, v2],
            w,
            e0,
            h,
            interval,
            samples_per_period,
            n,
        })
    }

    pub fn at_h(&self, h: f64) -> Result<Self> {
        let [v1, v2] = self.v.clone();
        Self::with_resolution(v1, v2, self.w, self.e0, self.interval, h, self.samples_per_period)
    }

    pub fn v(&self, j: usize) -> &Poly1 {
        &self.v[j]
    }

    pub fn w(&self) -> &Bump {
        &self.w
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn samples_per_period(&self) -> f64 {
        self.samples_per_period
    }

    pub fn xi0(&self) -> f64 {
        self.e0.sqrt()
    }

    /// Vanishing order `n >= 1` of `V2 - V1` at 0.
    pub fn n(&self) -> Result<u32> {
        match self.n {
            // identical potentials: every bracket vanishes
            None => Err(Error::NoFiniteContact { max_m: u32::MAX }),
            Some(0) => Err(Error::CaseMismatch(format!(
                "V1(0) = {} and V2(0) = {} differ, the curves do not meet over x = 0",
                self.v[0].eval(0.0),
                self.v[1].eval(0.0)
            ))),
            Some(n) => Ok(n),
        }
    }

    /// `(V2 - V1)^{(n)}(0)`.
    pub fn delta_v_n(&self) -> Result<f64> {
        let n = self.n()?;
        Ok(self.v[1].sub(&self.v[0]).deriv_at(n as usize, 0.0))
    }

    pub fn case(&self) -> Result<SchrodingerCase> {
        for (j, v) in self.v.iter().enumerate() {
            if v.eval(0.0) != 0.0 {
                return Err(Error::CaseMismatch(format!(
                    "V{}(0) = {} must vanish",
                    j + 1,
                    v.eval(0.0)
                )));
            }
        }
        self.n()?;
        if self.e0 > 0.0 {
            return Ok(SchrodingerCase::Propagating);
        }
        for (j, v) in self.v.iter().enumerate() {
            if v.deriv_at(1, 0.0) == 0.0 {
                return Err(Error::CaseMismatch(format!(
                    "V{}'(0) must be nonzero at a turning point",
                    j + 1
                )));
            }
        }
        Ok(SchrodingerCase::TurningPoint)
    }

    fn expect_case(&self, want: SchrodingerCase) -> Result<()> {
        let got = self.case()?;
        if got != want {
            return Err(Error::CaseMismatch(format!("expected {want:?}, problem is {got:?}")));
        }
        Ok(())
    }

    /// Symbol `xi^2 + V_j(x) - E0`.
    pub fn symbol(&self, j: usize) -> Poly2 {
        &(&Poly2::monomial(1.0, 0, 2) + &Poly2::from_poly1_x(&self.v[j])) - &Poly2::constant(self.e0)
    }

    /// Smallest `E0 - V_j` over the interval; the WKB basis needs it positive.
    pub fn min_kinetic(&self) -> f64 {
        let (x0, x1) = self.interval;
        let n = 4096;
        let mut out = f64::INFINITY;
        for v in &self.v {
            for i in 0..=n {
                let x = x0 + (x1 - x0) * i as f64 / n as f64;
                out = out.min(self.e0 - v.eval(x));
            }
        }
        out
    }

    pub fn wkb_basis(&self) -> Result<WkbBasis> {
        WkbBasis::new(self.v[0].clone(), self.v[1].clone(), self.e0)
    }
}

/// Crossing data of the symbols recentred at the requested point, with
/// `q1(0,0) = q2(0,0) = W(0)`.
pub fn build_crossing_data(prob: &SchrodingerProblem, point: CrossingPoint) -> Result<CrossingData> {
    let case = prob.case()?;
    let xi0 = match (case, point) {
        (SchrodingerCase::Propagating, CrossingPoint::Plus) => prob.xi0(),
        (SchrodingerCase::Propagating, CrossingPoint::Minus) => -prob.xi0(),
        (SchrodingerCase::TurningPoint, CrossingPoint::Origin) => 0.0,
        _ => {
            return Err(Error::CaseMismatch(format!("{point:?} is not a crossing for {case:?}")));
        }
    };
    let n = prob.n()?;
    let recentre = |j: usize| {
        let p = prob.symbol(j).shift(0.0, xi0);
        // xi0^2 - E0 is a rounding error, not data
        &p - &Poly2::constant(p.at_origin())
    };
    let (p1, p2) = (recentre(0), recentre(1));
    let q = Complex64::new(prob.w().eval(0.0), 0.0);
    let data = CrossingData::from_symbols(&p1, &p2, q, q, 2 * n + 4)?;
    let want = match case {
        SchrodingerCase::Propagating => n,
        SchrodingerCase::TurningPoint => 2 * n,
    };
    if data.m != want {
        return Err(Error::CaseMismatch(format!(
            "contact order {} where {want} was expected",
            data.m
        )));
    }
    Ok(data)
}

/// The general crossing formula applied to [`build_crossing_data`].
pub fn general_transfer(prob: &SchrodingerProblem, point: CrossingPoint) -> Result<TransferMatrix> {
    Ok(transfer_predicted_general(&build_crossing_data(prob, point)?, prob.h()))
}

/// `omega = mu_n(-sgn(dV) pi/(2(n+1))) Gamma((n+2)/(n+1)) (2 (n+1)! / |dV|)^{1/(n+1)}`
/// with `dV = (V2 - V1)^{(n)}(0)`.
pub fn omega_case_i(prob: &SchrodingerProblem) -> Result<Complex64> {
    prob.expect_case(SchrodingerCase::Propagating)?;
    let n = prob.n()?;
    let dv = prob.delta_v_n()?;
    let k = f64::from(n) + 1.0;
    let theta = -dv.signum() * PI / (2.0 * k);
    let size = (2.0 * factorial(n + 1) / dv.abs()).powf(1.0 / k);
    Ok(mu_m(n, theta) * (gamma_real((k + 1.0) / k)? * size))
}

/// Factors taking `omega` to the anti-diagonal prefactors in the
/// `c_j`-normalized WKB basis: `(|dp2|/|dp1|)^{1/(n+1)} xi0^{-n/(n+1)}` and
/// its counterpart with the gradients swapped. Both are 1 when `E0 = 1` and
/// `|V1'(0)| = |V2'(0)|`.
pub fn basis_factors(prob: &SchrodingerProblem) -> Result<[f64; 2]> {
    prob.expect_case(SchrodingerCase::Propagating)?;
    let n = f64::from(prob.n()?);
    let xi0 = prob.xi0();
    let g = [0, 1].map(|j| prob.v(j).deriv_at(1, 0.0).hypot(2.0 * xi0));
    let k = n + 1.0;
    let scale = xi0.powf(-n / k);
    Ok([(g[1] / g[0]).powf(1.0 / k) * scale, (g[0] / g[1]).powf(1.0 / k) * scale])
}

/// Leading-order transfer matrix at `(0, ±sqrt(E0))`:
/// `I - i h^{1/(n+1)} [[0, w1 W(0)], [w2 W(0), 0]]` with `(w1, w2)` equal to
/// `(omega, conj omega)` at the `Plus` crossing and swapped at `Minus`, each
/// scaled by [`basis_factors`].
pub fn predict_transfer_case_i(prob: &SchrodingerProblem, point: CrossingPoint) -> Result<TransferMatrix> {
    let omega = omega_case_i(prob)?;
    let (w1, w2) = match point {
        CrossingPoint::Plus => (omega, omega.conj()),
        CrossingPoint::Minus => (omega.conj(), omega),
        CrossingPoint::Origin => {
            return Err(Error::CaseMismatch("the origin is not a crossing when E0 > 0".into()));
        }
    };
    let [k1, k2] = basis_factors(prob)?;
    let w0 = prob.w().eval(0.0);
    Ok(TransferMatrix::from_off_diagonal(
        prob.h(),
        prob.n()?,
        w1 * (k1 * w0),
        w2 * (k2 * w0),
    ))
}

/// `omega_j = 2 (|V_k'| / |V_j'| (2n+1) n! / (|V_j'|^n |dV|))^{1/(2n+1)}
/// Gamma((2n+2)/(2n+1)) cos(pi / (2(2n+1)))`.
pub fn omega_case_ii(prob: &SchrodingerProblem) -> Result<[f64; 2]> {
    prob.expect_case(SchrodingerCase::TurningPoint)?;
    let n = prob.n()?;
    let dv = prob.delta_v_n()?.abs();
    let d = [0, 1].map(|j| prob.v(j).deriv_at(1, 0.0).abs());
    let k = 2.0 * f64::from(n) + 1.0;
    let common = 2.0 * gamma_real((k + 1.0) / k)? * (PI / (2.0 * k)).cos();
    let one = |j: usize| {
        let o = 1 - j;
        let inner = d[o] / d[j] * k * factorial(n) / (d[j].powi(n as i32) * dv);
        common * inner.powf(1.0 / k)
    };
    Ok([one(0), one(1)])
}

/// `I - i h^{1/(2n+1)} [[0, omega_1 W(0)], [omega_2 W(0), 0]]`.
pub fn predict_transfer_case_ii(prob: &SchrodingerProblem) -> Result<TransferMatrix> {
    let [w1, w2] = omega_case_ii(prob)?;
    let w0 = prob.w().eval(0.0);
    let m = 2 * prob.n()?;
    Ok(TransferMatrix::from_off_diagonal(
        prob.h(),
        m,
        Complex64::new(w1 * w0, 0.0),
        Complex64::new(w2 * w0, 0.0),
    ))
}
