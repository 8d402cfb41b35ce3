use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::func::Poly1;
use crate::quadrature::integrate_panels;

/// Leading-order WKB data `sigma_j e^{± i phi_j / h}` for both equations,
/// with `phi_j = int_0^x sqrt(E0 - V_j)` and
/// `sigma_j = c_j (1 - V_j/E0)^{-1/4}`, `c_j = (1 + V_j'(0)^2 / (4 E0))^{1/4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WkbBasis {
    e0: f64,
    v: [Poly1; 2],
    c: [f64; 2],
}

/// Sign of the exponent of the WKB branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

impl WkbBasis {
    pub fn new(v1: Poly1, v2: Poly1, e0: f64) -> Result<Self> {
        if !(e0 > 0.0) {
            return Err(Error::CaseMismatch("a WKB basis needs E0 > 0".into()));
        }
        let c = [&v1, &v2].map(|v| {
            let d = v.deriv_at(1, 0.0);
            (1.0 + d * d / (4.0 * e0)).powf(0.25)
        });
        Ok(WkbBasis { e0, v: [v1, v2], c })
    }

    /// Normalization constants `c_j`.
    pub fn c(&self, j: usize) -> f64 {
        self.c[j]
    }

    /// `phi_j'(x) = sqrt(E0 - V_j(x))`.
    pub fn phase_deriv(&self, j: usize, x: f64) -> f64 {
        (self.e0 - self.v[j].eval(x)).max(0.0).sqrt()
    }

    pub fn phase(&self, j: usize, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        integrate_panels(0.0, x, 16, |y| self.phase_deriv(j, y))
    }

    pub fn amplitude(&self, j: usize, x: f64) -> f64 {
        self.c[j] * (1.0 - self.v[j].eval(x) / self.e0).powf(-0.25)
    }

    /// Columns `(sigma e^{± i phi/h}, ± i phi' sigma e^{± i phi/h})` of the
    /// matrix mapping `(a+, a-)` to `(u, h u')`.
    pub fn branch_matrix(&self, j: usize, x: f64, h: f64) -> [[Complex64; 2]; 2] {
        let (phi, dphi, sigma) = (self.phase(j, x), self.phase_deriv(j, x), self.amplitude(j, x));
        let col = |b: Branch| {
            let e = Complex64::from_polar(sigma, b.sign() * phi / h);
            (e, e * Complex64::new(0.0, b.sign() * dphi))
        };
        let (p, dp) = col(Branch::Plus);
        let (m, dm) = col(Branch::Minus);
        [[p, m], [dp, dm]]
    }

    /// `(u, h u')` of `a+ w+ + a- w-` at `x`, derivatives at leading order.
    pub fn synthesize(&self, j: usize, x: f64, h: f64, alpha: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.branch_matrix(j, x, h);
        [
            m[0][0] * alpha[0] + m[0][1] * alpha[1],
            m[1][0] * alpha[0] + m[1][1] * alpha[1],
        ]
    }

    /// Inverse of [`WkbBasis::synthesize`]. `|det M| = 2 c_j^2 sqrt(E0)` away
    /// from turning points, so failure means `E0 - V_j(x) <= h`.
    pub fn decompose(&self, j: usize, x: f64, h: f64, u: Complex64, hu: Complex64) -> Result<[Complex64; 2]> {
        let m = self.branch_matrix(j, x, h);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if !(self.e0 - self.v[j].eval(x) > h) || !det.norm().is_finite() || det.norm() < h {
            return Err(Error::IllConditioned { x, det: det.norm() });
        }
        Ok([(m[1][1] * u - m[0][1] * hu) / det, (m[0][0] * hu - m[1][0] * u) / det])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> WkbBasis {
        WkbBasis::new(Poly1::new(vec![0.0, -0.5]), Poly1::new(vec![0.0, 0.5]), 1.0).unwrap()
    }

    #[test]
    fn normalization_and_phase() {
        let b = basis();
        assert!((b.amplitude(0, 0.0) - (1.0f64 + 1.0 / 16.0).powf(0.25)).abs() < 1e-15);
        // phi_2(x) = int_0^x sqrt(1 - y/2) = (4/3)(1 - (1 - x/2)^{3/2})
        let x = 0.7;
        let exact = 4.0 / 3.0 * (1.0 - (1.0f64 - x / 2.0).powf(1.5));
        assert!((b.phase(1, x) - exact).abs() < 1e-15);
        assert!((b.phase(1, -x) - 4.0 / 3.0 * (1.0 - (1.0f64 + x / 2.0).powf(1.5))).abs() < 1e-15);
    }

    #[test]
    fn synthesize_decompose_round_trip() {
        let b = basis();
        let h = 1e-3;
        let alpha = [Complex64::new(0.3, -1.2), Complex64::new(-0.7, 0.25)];
        for j in 0..2 {
            let [u, hu] = b.synthesize(j, 0.75, h, alpha);
            let back = b.decompose(j, 0.75, h, u, hu).unwrap();
            assert!((back[0] - alpha[0]).norm() < 1e-12 && (back[1] - alpha[1]).norm() < 1e-12);
            // conjugate input gives swapped conjugate coefficients
            let back = b.decompose(j, 0.75, h, u.conj(), hu.conj()).unwrap();
            assert!((back[0] - alpha[1].conj()).norm() < 1e-12);
            assert!((back[1] - alpha[0].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn turning_point_is_ill_conditioned() {
        let b = WkbBasis::new(Poly1::new(vec![0.0, 1.0]), Poly1::new(vec![0.0, 1.0]), 1.0).unwrap();
        assert!(matches!(
            b.decompose(0, 1.0, 1e-3, 1.0.into(), 0.0.into()),
            Err(Error::IllConditioned { .. })
        ));
    }
}
