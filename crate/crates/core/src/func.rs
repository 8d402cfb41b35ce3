//! Real functions of one variable used to describe problems: polynomials for
//! phases and potentials, smooth compactly supported bumps for couplings.

use serde::{Deserialize, Serialize};

/// Univariate real polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly1 {
    coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly1 { coeffs }
    }

    /// `c * x^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Poly1::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly1 {
        Poly1::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Poly1 {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        Poly1::new(out)
    }

    /// k-th derivative evaluated at x.
    pub fn deriv_at(&self, k: usize, x: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate().skip(k).rev() {
            // falling factorial j (j-1) ... (j-k+1)
            let ff: f64 = ((j - k + 1)..=j).map(|v| v as f64).product();
            acc = acc * x + c * ff;
        }
        acc
    }

    /// Coefficient-wise `self - other`.
    pub fn sub(&self, other: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly1::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) - other.coeffs.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    /// Order of vanishing at 0: smallest k with a nonzero k-th coefficient.
    pub fn vanishing_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0)
    }

    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let n = 2048;
        (0..=n)
            .map(|i| self.eval(lo + (hi - lo) * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

/// Smooth bump: equal to `amplitude` on `|x - center| <= plateau`, zero for
/// `|x - center| >= support`, C-infinity everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub amplitude: f64,
    #[serde(default)]
    pub center: f64,
    pub plateau: f64,
    pub support: f64,
}

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn dpsi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        psi(t) / (t * t)
    }
}

/// Smooth step, 0 for t <= 0 and 1 for t >= 1.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = psi(t);
        a / (a + psi(1.0 - t))
    }
}

fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let (a, b) = (psi(t), psi(1.0 - t));
        (dpsi(t) * b + a * dpsi(1.0 - t)) / ((a + b) * (a + b))
    }
}

impl Bump {
    pub fn new(amplitude: f64, plateau: f64, support: f64) -> Self {
        Bump {
            amplitude,
            center: 0.0,
            plateau,
            support,
        }
    }

    pub fn zero() -> Self {
        Bump::new(0.0, 0.0, 1.0)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.plateau >= 0.0 && self.support > self.plateau) {
            return Err(format!(
                "bump needs 0 <= plateau < support, got plateau {} support {}",
                self.plateau, self.support
            ));
        }
        if !self.amplitude.is_finite() || !self.center.is_finite() {
            return Err("bump parameters must be finite".into());
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    /// Closed support interval.
    pub fn support_interval(&self) -> (f64, f64) {
        (self.center - self.support, self.center + self.support)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let d = (x - self.center).abs();
        let t = (self.support - d) / (self.support - self.plateau);
        self.amplitude * smooth_step(t)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let d = x - self.center;
        let w = self.support - self.plateau;
        let t = (self.support - d.abs()) / w;
        -self.amplitude * d.signum() * smooth_step_deriv(t) / w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_derivatives() {
        // 1 + 2x + 3x^2 + x^3
        let p = Poly1::new(vec![1.0, 2.0, 3.0, 1.0]);
        assert_eq!(p.eval(2.0), 1.0 + 4.0 + 12.0 + 8.0);
        assert_eq!(p.deriv_at(1, 2.0), 2.0 + 12.0 + 12.0);
        assert_eq!(p.deriv_at(2, 2.0), 6.0 + 12.0);
        assert_eq!(p.deriv_at(3, 0.5), 6.0);
        assert_eq!(p.deriv_at(4, 0.5), 0.0);
        assert_eq!(p.derivative().eval(2.0), p.deriv_at(1, 2.0));
        assert_eq!(p.antiderivative().derivative(), p);
        assert_eq!(Poly1::monomial(2.0, 3).vanishing_order(), Some(3));
    }

    #[test]
    fn bump_shape() {
        let b = Bump::new(2.0, 0.2, 0.6);
        assert_eq!(b.eval(0.0), 2.0);
        assert_eq!(b.eval(0.2), 2.0);
        assert_eq!(b.eval(0.6), 0.0);
        assert_eq!(b.eval(-0.7), 0.0);
        assert!(b.eval(0.4) > 0.0 && b.eval(0.4) < 2.0);
        // finite-difference check of the derivative
        for &x in &[-0.5, -0.3, 0.25, 0.41, 0.55] {
            let e = 1e-6;
            let fd = (b.eval(x + e) - b.eval(x - e)) / (2.0 * e);
            assert!((fd - b.deriv(x)).abs() < 1e-6, "x={x}: {fd} vs {}", b.deriv(x));
        }
        assert!(Bump::new(1.0, 0.5, 0.5).validate().is_err());
    }
}
