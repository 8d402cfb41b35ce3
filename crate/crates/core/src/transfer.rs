use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferKind {
    Predicted,
    Extracted,
}

/// 2x2 transfer matrix mapping incoming to outgoing WKB coefficients, tagged
/// with the semiclassical parameter it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub entries: [[Complex64; 2]; 2],
    pub h: f64,
    pub kind: TransferKind,
}

impl TransferMatrix {
    pub fn identity(h: f64, kind: TransferKind) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        TransferMatrix {
            entries: [[one, zero], [zero, one]],
            h,
            kind,
        }
    }

    /// `I - i h^{1/(m+1)} [[0, a], [b, 0]]`.
    pub fn from_off_diagonal(h: f64, m: u32, a: Complex64, b: Complex64) -> Self {
        let scale = Complex64::new(0.0, -h.powf(1.0 / (m as f64 + 1.0)));
        let mut t = Self::identity(h, TransferKind::Predicted);
        t.entries[0][1] = scale * a;
        t.entries[1][0] = scale * b;
        t
    }

    /// Builds a matrix from its two columns.
    pub fn from_columns(h: f64, col0: [Complex64; 2], col1: [Complex64; 2], kind: TransferKind) -> Self {
        TransferMatrix {
            entries: [[col0[0], col1[0]], [col0[1], col1[1]]],
            h,
            kind,
        }
    }

    pub fn t11(&self) -> Complex64 {
        self.entries[0][0]
    }
    pub fn t12(&self) -> Complex64 {
        self.entries[0][1]
    }
    pub fn t21(&self) -> Complex64 {
        self.entries[1][0]
    }
    pub fn t22(&self) -> Complex64 {
        self.entries[1][1]
    }

    /// Entries in row-major order `t11, t12, t21, t22`.
    pub fn flat(&self) -> [Complex64; 4] {
        [self.t11(), self.t12(), self.t21(), self.t22()]
    }

    pub fn is_finite(&self) -> bool {
        self.flat().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Entrywise absolute differences in row-major order.
    pub fn abs_diff(&self, other: &TransferMatrix) -> [f64; 4] {
        let (a, b) = (self.flat(), other.flat());
        [
            (a[0] - b[0]).norm(),
            (a[1] - b[1]).norm(),
            (a[2] - b[2]).norm(),
            (a[3] - b[3]).norm(),
        ]
    }

    pub fn max_abs_diff(&self, other: &TransferMatrix) -> f64 {
        self.abs_diff(other).into_iter().fold(0.0, f64::max)
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        let e = &self.entries;
        [e[0][0] * v[0] + e[0][1] * v[1], e[1][0] * v[0] + e[1][1] * v[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_diagonal_layout() {
        let t = TransferMatrix::from_off_diagonal(1e-4, 1, Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0));
        assert_eq!(t.t11(), Complex64::new(1.0, 0.0));
        assert!((t.t12() - Complex64::new(0.0, -1e-2)).norm() < 1e-16);
        assert!((t.t21() - Complex64::new(2e-2, 0.0)).norm() < 1e-16);
        let c = TransferMatrix::from_columns(
            1.0,
            [1.0.into(), 2.0.into()],
            [3.0.into(), 4.0.into()],
            TransferKind::Extracted,
        );
        assert_eq!(c.t12(), Complex64::new(3.0, 0.0));
        assert_eq!(c.t21(), Complex64::new(2.0, 0.0));
        assert_eq!(c.apply([1.0.into(), 0.0.into()]), [1.0.into(), 2.0.into()]);
    }
}
