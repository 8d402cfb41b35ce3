use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Complex samples on the uniform grid `x_k = x0 + k*dx`, `k = 0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub values: Vec<Complex64>,
    pub x0: f64,
    pub dx: f64,
}

impl GridFunction {
    pub fn new(values: Vec<Complex64>, x0: f64, dx: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::GridTooCoarse("a grid needs at least two samples".into()));
        }
        if !(dx > 0.0 && dx.is_finite() && x0.is_finite()) {
            return Err(Error::GridTooCoarse(format!("invalid spacing {dx}")));
        }
        Ok(GridFunction { values, x0, dx })
    }

    /// Samples `f` at `n` points spanning `[lo, hi]`.
    pub fn sample<F: FnMut(f64) -> Complex64>(lo: f64, hi: f64, n: usize, mut f: F) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::GridTooCoarse(format!(
                "cannot sample [{lo}, {hi}] with {n} points"
            )));
        }
        let dx = (hi - lo) / (n - 1) as f64;
        let values = (0..n).map(|k| f(lo + dx * k as f64)).collect();
        GridFunction::new(values, lo, dx)
    }

    pub fn sample_real<F: FnMut(f64) -> f64>(lo: f64, hi: f64, n: usize, mut f: F) -> Result<Self> {
        Self::sample(lo, hi, n, |x| Complex64::new(f(x), 0.0))
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        GridFunction {
            values,
            x0: self.x0,
            dx: self.dx,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + self.dx * k as f64
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.x(k))
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn index_of(&self, x: f64) -> usize {
        let k = ((x - self.x0) / self.dx).round();
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup norm restricted to grid points in `[lo, hi]`.
    pub fn sup_norm_on(&self, lo: f64, hi: f64) -> f64 {
        self.xs()
            .zip(&self.values)
            .filter(|(x, _)| *x >= lo && *x <= hi)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn map<F: FnMut(f64, Complex64) -> Complex64>(&self, mut f: F) -> Self {
        let values = self.values.iter().enumerate().map(|(k, &v)| f(self.x(k), v)).collect();
        self.with_values(values)
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.len() == other.len() && self.x0 == other.x0 && self.dx == other.dx
    }

    /// Pointwise `self - other` on a shared grid.
    pub fn sub(&self, other: &GridFunction) -> Self {
        assert!(self.same_grid(other), "grid mismatch");
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with_values(self.values.iter().map(|v| v * c).collect())
    }

    /// Cumulative integral from the left endpoint, same grid.
    pub fn cumulative_integral(&self) -> Self {
        self.with_values(quadrature::cumulative_integral(&self.values, self.dx))
    }

    pub fn integral(&self) -> Complex64 {
        quadrature::total_integral(&self.values, self.dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_and_indexing() {
        let g = GridFunction::sample_real(-1.0, 1.0, 201, |x| x * x).unwrap();
        assert_eq!(g.len(), 201);
        assert!((g.x_end() - 1.0).abs() < 1e-15);
        assert_eq!(g.index_of(0.0), 100);
        assert_eq!(g.index_of(-5.0), 0);
        assert!((g.sup_norm() - 1.0).abs() < 1e-15);
        assert!((g.integral().re - 2.0 / 3.0).abs() < 1e-13);
        assert!(GridFunction::sample_real(0.0, 1.0, 1, |x| x).is_err());
    }
}
