//! The reduced crossing `hD u1 = -h r1 u2`, `(hD - f) u2 = -h r2 u1` on an
//! interval `[x0, x1]` around the crossing point 0.
//!
//! With `F(x) = int_0^x f` and `u2 = e^{iF/h} w2` the system is equivalent to
//! the Volterra equations
//!
//! ```text
//! u1 = a1 - i Γ+(w2),   w2 = a2 - i Γ-(u1),
//! Γ± v(x) = int_{x0}^x e^{±iF(y)/h} r(y) v(y) dy   (r1 for Γ+, r2 for Γ-)
//! ```
//!
//! which are solved either by a Neumann series in `K1 = -Γ+Γ-`, `K2 = -Γ-Γ+`
//! or by direct integration of the ODE.

mod solve;

pub use solve::{
    extract_transfer, extract_transfer_with, model_transfer, neumann_solve, ode_oracle, predicted_transfer,
    ModelSolution, NeumannSolution, Solver, DEFAULT_WINDOW,
};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::func::{Bump, Poly1};
use crate::grid::GridFunction;
use crate::quadrature::{GaussLegendre, KahanSum};

/// Reduced problem with polynomial `f` and bump couplings `r1`, `r2`
/// (multiplication operators). The uniform grid is built on construction.
#[derive(Debug, Clone)]
pub struct NormalFormProblem {
    f: Poly1,
    r1: Bump,
    r2: Bump,
    interval: (f64, f64),
    h: f64,
    m: u32,
    samples_per_period: f64,
    // grid data
    dx: f64,
    n: usize,
    big_f: Vec<f64>,
    phase: Vec<Complex64>,
}

pub const DEFAULT_SAMPLES_PER_PERIOD: f64 = 32.0;

impl NormalFormProblem {
    pub fn new(f: Poly1, r1: Bump, r2: Bump, interval: (f64, f64), h: f64) -> Result<Self> {
        Self::with_resolution(f, r1, r2, interval, h, DEFAULT_SAMPLES_PER_PERIOD)
    }

    pub fn with_resolution(
        f: Poly1,
        r1: Bump,
        r2: Bump,
        interval: (f64, f64),
        h: f64,
        samples_per_period: f64,
    ) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidProblem(format!("h must be positive, got {h}")));
        }
        let (x0, x1) = interval;
        if !(x0 < 0.0 && 0.0 < x1 && x1.is_finite() && x0.is_finite()) {
            return Err(Error::InvalidProblem(format!("interval [{x0}, {x1}] must straddle 0")));
        }
        if samples_per_period < 16.0 {
            return Err(Error::GridTooCoarse(format!(
                "{samples_per_period} samples per period is below the minimum of 16"
            )));
        }
        let m = f
            .vanishing_order()
            .ok_or_else(|| Error::InvalidProblem("f must not vanish identically".into()))?;
        if m == 0 {
            return Err(Error::InvalidProblem("f(0) must be 0".into()));
        }
        for (name, r) in [("r1", &r1), ("r2", &r2)] {
            r.validate().map_err(Error::InvalidProblem)?;
            if r.is_zero() {
                continue;
            }
            let (lo, hi) = r.support_interval();
            if lo <= x0 || hi >= x1 {
                return Err(Error::InvalidProblem(format!(
                    "support of {name} [{lo}, {hi}] is not inside ({x0}, {x1})"
                )));
            }
            // f must keep a constant sign on each side of 0 within the support.
            let samples = 4000;
            let xs: Vec<f64> = (0..=samples)
                .map(|i| lo + (hi - lo) * i as f64 / samples as f64)
                .collect();
            for w in xs.windows(2) {
                let (a, b) = (w[0], w[1]);
                if a <= 0.0 && b >= 0.0 {
                    continue;
                }
                let (fa, fb) = (f.eval(a), f.eval(b));
                if fa == 0.0 || fb == 0.0 || fa.signum() != fb.signum() {
                    return Err(Error::InvalidProblem(format!(
                        "f vanishes in [{a}, {b}] inside supp {name}"
                    )));
                }
            }
        }
        let fmax = f.max_abs_on(x0, x1);
        let mut dx = (x1 - x0) / 400.0;
        if fmax > 0.0 {
            dx = dx.min(2.0 * PI * h / (samples_per_period * fmax));
        }
        let n = ((x1 - x0) / dx).ceil() as usize + 1;
        let dx = (x1 - x0) / (n - 1) as f64;
        let big_f = antiderivative_on_grid(|x| f.eval(x), x0, dx, n);
        let phase = big_f.iter().map(|&v| Complex64::from_polar(1.0, v / h)).collect();
        Ok(NormalFormProblem {
            f,
            r1,
            r2,
            interval,
            h,
            m: m as u32,
            samples_per_period,
            dx,
            n,
            big_f,
            phase,
        })
    }

    /// Same problem at another `h`.
    pub fn at_h(&self, h: f64) -> Result<Self> {
        Self::with_resolution(
            self.f.clone(),
            self.r1,
            self.r2,
            self.interval,
            h,
            self.samples_per_period,
        )
    }

    pub fn f(&self) -> &Poly1 {
        &self.f
    }
    pub fn r1(&self) -> &Bump {
        &self.r1
    }
    pub fn r2(&self) -> &Bump {
        &self.r2
    }
    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn grid_len(&self) -> usize {
        self.n
    }

    pub fn x(&self, k: usize) -> f64 {
        self.interval.0 + self.dx * k as f64
    }

    /// `f^{(m)}(0)`.
    pub fn f_m_0(&self) -> f64 {
        self.f.deriv_at(self.m as usize, 0.0)
    }

    /// Smallest interval holding both supports, or `None` for zero couplings.
    pub fn coupling_support(&self) -> Option<(f64, f64)> {
        [self.r1, self.r2]
            .iter()
            .filter(|r| !r.is_zero())
            .map(|r| r.support_interval())
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    /// Samples of `e^{iF/h}` on the grid.
    pub fn phase(&self) -> &[Complex64] {
        &self.phase
    }

    /// `v` sampled on the problem grid.
    pub fn sample<F: FnMut(f64) -> Complex64>(&self, mut v: F) -> GridFunction {
        let values = (0..self.n).map(|k| v(self.x(k))).collect();
        GridFunction {
            values,
            x0: self.interval.0,
            dx: self.dx,
        }
    }

    pub fn constant(&self, c: Complex64) -> GridFunction {
        self.sample(|_| c)
    }

    fn check_grid(&self, v: &GridFunction) -> Result<()> {
        if v.len() != self.n || v.x0 != self.interval.0 || v.dx != self.dx {
            return Err(Error::GridTooCoarse(format!(
                "function sampled with {} points of spacing {} does not live on the problem grid ({} points, spacing {})",
                v.len(),
                v.dx,
                self.n,
                self.dx
            )));
        }
        Ok(())
    }
}

/// Values of `int_0^{x_k} f` at `x_k = x0 + k dx`, with an 8-point
/// Gauss-Legendre rule on every cell.
pub fn antiderivative_on_grid<F: Fn(f64) -> f64>(f: F, x0: f64, dx: f64, n: usize) -> Vec<f64> {
    let rule = GaussLegendre::order8();
    let mut out = Vec::with_capacity(n);
    let mut acc = KahanSum::default();
    out.push(0.0);
    for k in 0..n.saturating_sub(1) {
        let a = x0 + dx * k as f64;
        acc.add(rule.integrate(a, a + dx, &f));
        out.push(acc.value());
    }
    // Re-anchor so that the value at 0 vanishes.
    let offset = if x0 <= 0.0 && x0 + dx * (n - 1) as f64 >= 0.0 {
        let k = (((0.0 - x0) / dx).floor() as usize).min(n.saturating_sub(1));
        let xk = x0 + dx * k as f64;
        out[k] + rule.integrate(xk, 0.0, &f)
    } else {
        -rule.integrate(0.0, x0, &f)
    };
    for v in &mut out {
        *v -= offset;
    }
    out
}

/// `F = int_0^x f` on the problem grid (imaginary parts zero).
pub fn antiderivative_f(prob: &NormalFormProblem) -> GridFunction {
    let values = prob.big_f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    GridFunction {
        values,
        x0: prob.interval.0,
        dx: prob.dx,
    }
}

fn gamma(prob: &NormalFormProblem, v: &GridFunction, plus: bool) -> Result<GridFunction> {
    prob.check_grid(v)?;
    let r = if plus { &prob.r1 } else { &prob.r2 };
    if r.is_zero() {
        return Ok(v.with_values(vec![Complex64::new(0.0, 0.0); v.len()]));
    }
    let integrand: Vec<Complex64> = v
        .values
        .iter()
        .zip(&prob.phase)
        .enumerate()
        .map(|(k, (&val, &e))| {
            let rk = r.eval(prob.x(k));
            if rk == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let e = if plus { e } else { e.conj() };
                e * val * rk
            }
        })
        .collect();
    Ok(v.with_values(crate::quadrature::cumulative_integral(&integrand, prob.dx)))
}

/// `Γ+ v(x) = int_{x0}^x e^{iF/h} r1 v`. For multiplication couplings the
/// conjugated coupling `e^{-iF/h} r1 e^{iF/h}` is `r1` itself.
pub fn gamma_plus(prob: &NormalFormProblem, v: &GridFunction) -> Result<GridFunction> {
    gamma(prob, v, true)
}

/// `Γ- v(x) = int_{x0}^x e^{-iF/h} r2 v`.
pub fn gamma_minus(prob: &NormalFormProblem, v: &GridFunction) -> Result<GridFunction> {
    gamma(prob, v, false)
}

/// `(K1 v, K2 v) = (-Γ+Γ- v, -Γ-Γ+ v)`.
pub fn k_operators(prob: &NormalFormProblem, v: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    Ok((k1(prob, v)?, k2(prob, v)?))
}

pub(crate) fn k1(prob: &NormalFormProblem, v: &GridFunction) -> Result<GridFunction> {
    Ok(gamma_plus(prob, &gamma_minus(prob, v)?)?.scale(Complex64::new(-1.0, 0.0)))
}

pub(crate) fn k2(prob: &NormalFormProblem, v: &GridFunction) -> Result<GridFunction> {
    Ok(gamma_minus(prob, &gamma_plus(prob, v)?)?.scale(Complex64::new(-1.0, 0.0)))
}
