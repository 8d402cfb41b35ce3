use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{contact_order, iterated_bracket, theta_from_gradient, Poly2};
use crate::error::{Error, Result};
use crate::oscquad::{factorial, gamma_ratio, mu_m};
use crate::transfer::TransferMatrix;

/// Everything the leading-order transfer matrix depends on, read off at a
/// crossing recentred to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingData {
    pub m: u32,
    /// `H_{p1}^m p2(0,0)`.
    pub bracket_m: f64,
    /// `H_{p2}^m p1(0,0)`, computed directly.
    pub bracket_m_rev: f64,
    pub grad1: [f64; 2],
    pub grad2: [f64; 2],
    pub theta1: f64,
    pub theta2: f64,
    pub s: i8,
    pub q1_0: Complex64,
    pub q2_0: Complex64,
    /// `|grad1| / |grad2|`.
    pub c_prime: f64,
}

fn norm(g: [f64; 2]) -> f64 {
    g[0].hypot(g[1])
}

/// Sign of the product of `<H_{p_j}(0,0), tau(theta_j)>` over both symbols.
fn sign_from(grads: [[f64; 2]; 2], thetas: [f64; 2]) -> Result<i8> {
    let mut prod = 1.0;
    for (g, t) in grads.iter().zip(thetas) {
        if g[0] == 0.0 && g[1] == 0.0 {
            return Err(Error::ZeroGradient);
        }
        // H_p(0,0) = (d_xi p, -d_x p), tau = (cos t, sin t)
        let inner = g[1] * t.cos() - g[0] * t.sin();
        if inner == 0.0 {
            return Err(Error::DegenerateS);
        }
        prod *= inner.signum();
    }
    Ok(prod as i8)
}

impl CrossingData {
    /// Reads the crossing data of `(p1, p2)` at the origin.
    pub fn from_symbols(p1: &Poly2, p2: &Poly2, q1_0: Complex64, q2_0: Complex64, max_m: u32) -> Result<Self> {
        let (m, bracket_m) = contact_order(p1, p2, max_m)?;
        let bracket_m_rev = iterated_bracket(p2, p1, m).at_origin();
        let (grad1, grad2) = (p1.gradient_at_origin(), p2.gradient_at_origin());
        let theta1 = theta_from_gradient(grad1)?;
        let theta2 = theta_from_gradient(grad2)?;
        let s = sign_from([grad1, grad2], [theta1, theta2])?;
        let data = CrossingData {
            m,
            bracket_m,
            bracket_m_rev,
            grad1,
            grad2,
            theta1,
            theta2,
            s,
            q1_0,
            q2_0,
            c_prime: norm(grad1) / norm(grad2),
        };
        data.validate()?;
        Ok(data)
    }

    /// Data of the reduced model with symbols `xi` and `xi - f(x)`.
    pub fn reduced_model(m: u32, f_m_0: f64, r1_0: f64, r2_0: f64) -> Self {
        CrossingData {
            m,
            bracket_m: -f_m_0,
            bracket_m_rev: f_m_0,
            grad1: [0.0, 1.0],
            grad2: [0.0, 1.0],
            theta1: 0.0,
            theta2: 0.0,
            s: 1,
            q1_0: Complex64::new(r1_0, 0.0),
            q2_0: Complex64::new(r2_0, 0.0),
            c_prime: 1.0,
        }
    }

    pub fn is_tangential(&self) -> bool {
        self.m >= 2
    }

    pub fn validate(&self) -> Result<()> {
        let (n1, n2) = (norm(self.grad1), norm(self.grad2));
        if n1 == 0.0 || n2 == 0.0 {
            return Err(Error::ZeroGradient);
        }
        if self.m == 0 || self.bracket_m == 0.0 || self.bracket_m_rev == 0.0 {
            return Err(Error::InvalidProblem(
                "contact order needs nonvanishing brackets".into(),
            ));
        }
        if ((self.c_prime - n1 / n2) / self.c_prime).abs() > 1e-12 {
            return Err(Error::InvalidProblem(format!(
                "c' = {} disagrees with |grad1|/|grad2| = {}",
                self.c_prime,
                n1 / n2
            )));
        }
        if self.is_tangential() && (self.theta1 - self.theta2).abs() > 1e-12 {
            return Err(Error::InvalidProblem(format!(
                "tangential crossing with theta1 = {} != theta2 = {}",
                self.theta1, self.theta2
            )));
        }
        for t in [self.theta1, self.theta2] {
            if !(-PI / 2.0..PI / 2.0).contains(&t) {
                return Err(Error::InvalidProblem(format!("theta {t} outside [-pi/2, pi/2)")));
            }
        }
        Ok(())
    }
}

/// The sign `s` recomputed from the gradients and angles stored in `data`.
pub fn sign_s(data: &CrossingData) -> Result<i8> {
    sign_from([data.grad1, data.grad2], [data.theta1, data.theta2])
}

/// `(c, f^{(m)}(0))` of the normal form `xi`, `xi - f(x)` for a tangential
/// crossing: `c = s |grad p1| / |grad p2|`, `f^{(m)}(0) = -c H_{p1}^m p2(0,0)`.
pub fn normal_form_constants(p1: &Poly2, p2: &Poly2, data: &CrossingData) -> Result<(f64, f64)> {
    if data.m == 1 {
        return Err(Error::TransversalUnsupported);
    }
    let (n1, n2) = (norm(p1.gradient_at_origin()), norm(p2.gradient_at_origin()));
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroGradient);
    }
    let c = f64::from(data.s) * n1 / n2;
    Ok((c, -c * data.bracket_m))
}

/// Anti-diagonal prefactors of the leading-order transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Omega12 {
    pub omega1: Complex64,
    pub omega2: Complex64,
}

fn omega_one(m: u32, s: i8, bracket: f64, grad_ratio: f64) -> Complex64 {
    let k = m as f64 + 1.0;
    let theta = -(f64::from(s) * bracket).signum() * PI / (2.0 * k);
    let size = (grad_ratio * factorial(m + 1) / bracket.abs()).powf(1.0 / k);
    mu_m(m, theta) * (2.0 * gamma_ratio(m) * size)
}

/// `omega1` uses `H_{p1}^m p2(0,0)` and `|grad p2|/|grad p1|`; `omega2` the
/// same with the indices swapped.
pub fn omega_general(data: &CrossingData) -> Omega12 {
    let ratio = norm(data.grad2) / norm(data.grad1);
    Omega12 {
        omega1: omega_one(data.m, data.s, data.bracket_m, ratio),
        omega2: omega_one(data.m, data.s, data.bracket_m_rev, 1.0 / ratio),
    }
}

/// `I - i h^{1/(m+1)} [[0, omega1 q1(0,0)], [omega2 q2(0,0), 0]]`.
pub fn transfer_predicted_general(data: &CrossingData, h: f64) -> TransferMatrix {
    let w = omega_general(data);
    TransferMatrix::from_off_diagonal(h, data.m, w.omega1 * data.q1_0, w.omega2 * data.q2_0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_2PI: f64 = 2.506_628_274_631_000_502_416;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn sign_examples() {
        // equal flows
        let p1 = &Poly2::xi() - &Poly2::monomial(1.0, 2, 0);
        let d = CrossingData::from_symbols(&Poly2::xi(), &p1, one(), one(), 6).unwrap();
        assert_eq!(d.s, 1);
        assert_eq!(sign_s(&d).unwrap(), 1);
        // anti-parallel flows
        let p2 = &Poly2::monomial(1.0, 2, 0) - &Poly2::xi();
        let d = CrossingData::from_symbols(&Poly2::xi(), &p2, one(), one(), 6).unwrap();
        assert_eq!(d.s, -1);
    }

    #[test]
    fn normal_form_examples() {
        let p1 = Poly2::xi();
        let p2 = &Poly2::xi() - &Poly2::monomial(1.0, 2, 0);
        let d = CrossingData::from_symbols(&p1, &p2, one(), one(), 6).unwrap();
        assert_eq!(normal_form_constants(&p1, &p2, &d).unwrap(), (1.0, 2.0));
        let p2 = p2.scale(3.0);
        let d = CrossingData::from_symbols(&p1, &p2, one(), one(), 6).unwrap();
        let (c, f) = normal_form_constants(&p1, &p2, &d).unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-15 && (f - 2.0).abs() < 1e-15);
        let p2 = &Poly2::monomial(1.0, 2, 0) - &Poly2::xi();
        let d = CrossingData::from_symbols(&p1, &p2, one(), one(), 6).unwrap();
        assert!(normal_form_constants(&p1, &p2, &d).unwrap().0 < 0.0);
        let p2 = &Poly2::xi() - &Poly2::x();
        let d = CrossingData::from_symbols(&p1, &p2, one(), one(), 6).unwrap();
        assert_eq!(normal_form_constants(&p1, &p2, &d), Err(Error::TransversalUnsupported));
    }

    #[test]
    fn model_omega() {
        // f = x: omega = sqrt(2 pi) e^{i pi/4}, omega2 its conjugate
        let w = omega_general(&CrossingData::reduced_model(1, 1.0, 1.0, 1.0));
        assert!((w.omega1 - Complex64::from_polar(SQRT_2PI, PI / 4.0)).norm() < 1e-14);
        assert!((w.omega2 - w.omega1.conj()).norm() < 1e-14);
        // even m gives real prefactors
        for m in [2, 4] {
            let w = omega_general(&CrossingData::reduced_model(m, -3.0, 1.0, 1.0));
            assert_eq!(w.omega1.im, 0.0);
            assert_eq!(w.omega2.im, 0.0);
        }
        // f = x^2 / 2 * 2 (f'' = 2)
        let w = omega_general(&CrossingData::reduced_model(2, 2.0, 1.0, 1.0));
        assert!((w.omega1.re - 2.230_707_051_824_495_741_43).abs() < 1e-12);
    }

    #[test]
    fn predicted_transfer_examples() {
        let mut d = CrossingData::reduced_model(1, 1.0, 0.0, 0.0);
        let t = transfer_predicted_general(&d, 1e-3);
        assert_eq!(t.max_abs_diff(&TransferMatrix::identity(1e-3, t.kind)), 0.0);
        d.q1_0 = one();
        d.q2_0 = one();
        let t = transfer_predicted_general(&d, 1e-4);
        let want21 = Complex64::new(0.0, -1e-2) * Complex64::from_polar(SQRT_2PI, -PI / 4.0);
        let want12 = Complex64::new(0.0, -1e-2) * Complex64::from_polar(SQRT_2PI, PI / 4.0);
        assert!((t.t21() - want21).norm() < 1e-15);
        assert!((t.t12() - want12).norm() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_data() {
        let mut d = CrossingData::reduced_model(2, 1.0, 1.0, 1.0);
        d.theta2 = 0.3;
        assert!(d.validate().is_err());
        d.theta2 = 0.0;
        d.c_prime = 2.0;
        assert!(d.validate().is_err());
    }
}
