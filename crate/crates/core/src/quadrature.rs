//! Quadrature building blocks: Gauss-Legendre rules and a high-order
//! cumulative integrator for samples on a uniform grid.

use num_complex::Complex64;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 15-point rule.
    pub fn order15() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(15))
    }

    /// Shared 8-point rule, exact for polynomials of degree <= 15.
    pub fn order8() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(8))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum();
        s * half
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let s: Complex64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| f(mid + half * t) * w)
            .sum();
        s * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite 8-point Gauss-Legendre integral of a smooth real function over
/// `[a, b]` split into `panels` equal pieces.
pub fn integrate_panels<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let rule = GaussLegendre::order8();
    let step = (b - a) / panels as f64;
    let mut acc = KahanSum::default();
    for k in 0..panels {
        let lo = a + step * k as f64;
        acc.add(rule.integrate(lo, lo + step, &mut f));
    }
    acc.value()
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const STENCIL: usize = 10;

/// Weights `w[s][j] = int_s^{s+1} L_j(t) dt` for Lagrange basis polynomials on
/// nodes 0..STENCIL.
fn stencil_weights() -> &'static [[f64; STENCIL]; STENCIL - 1] {
    static W: OnceLock<[[f64; STENCIL]; STENCIL - 1]> = OnceLock::new();
    W.get_or_init(|| {
        let rule = GaussLegendre::new(8);
        let mut w = [[0.0; STENCIL]; STENCIL - 1];
        for (s, row) in w.iter_mut().enumerate() {
            for (j, wj) in row.iter_mut().enumerate() {
                *wj = rule.integrate(s as f64, s as f64 + 1.0, |t| {
                    (0..STENCIL)
                        .filter(|&k| k != j)
                        .map(|k| (t - k as f64) / (j as f64 - k as f64))
                        .product()
                });
            }
        }
        w
    })
}

/// Integral of the degree-9 interpolant over cell `[i, i+1]` of a uniform grid
/// with unit spacing.
#[inline]
fn cell_integral(values: &[Complex64], i: usize) -> Complex64 {
    let n = values.len();
    let w = stencil_weights();
    let start = i.saturating_sub(STENCIL / 2 - 1).min(n - STENCIL);
    let row = &w[i - start];
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &wj) in row.iter().enumerate() {
        acc += values[start + j] * wj;
    }
    acc
}

/// Cumulative integral `out[k] = int_{x_0}^{x_k} g` of uniformly spaced samples,
/// using local degree-9 interpolation (falls back to the trapezoid rule on
/// grids shorter than the stencil).
pub fn cumulative_integral(values: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
    out.push(Complex64::new(0.0, 0.0));
    for i in 0..n - 1 {
        let c = if n >= STENCIL {
            cell_integral(values, i)
        } else {
            (values[i] + values[i + 1]) * 0.5
        };
        re.add(c.re * dx);
        im.add(c.im * dx);
        out.push(Complex64::new(re.value(), im.value()));
    }
    out
}

/// Definite integral over the whole grid.
pub fn total_integral(values: &[Complex64], dx: f64) -> Complex64 {
    cumulative_integral(values, dx).last().copied().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        let rule = GaussLegendre::order15();
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact for degree 29
        let v = rule.integrate(0.0, 1.0, |x| x.powi(29));
        assert!((v - 1.0 / 30.0).abs() < 1e-15);
        let v = GaussLegendre::order8().integrate(-1.0, 2.0, |x| x.powi(15) + x);
        let exact = (2f64.powi(16) - 1.0) / 16.0 + 1.5;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn stencil_weights_sum_to_one() {
        for row in stencil_weights() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn cumulative_exact_on_polynomials() {
        let n = 40;
        let dx = 0.05;
        let vals: Vec<Complex64> = (0..n)
            .map(|i| {
                let x = i as f64 * dx;
                Complex64::new(x.powi(9) - 3.0 * x.powi(4), x)
            })
            .collect();
        let cum = cumulative_integral(&vals, dx);
        for (i, c) in cum.iter().enumerate() {
            let x = i as f64 * dx;
            let exact = Complex64::new(x.powi(10) / 10.0 - 3.0 * x.powi(5) / 5.0, x * x / 2.0);
            assert!((c - exact).norm() < 1e-12, "i={i}");
        }
    }

    #[test]
    fn cumulative_resolves_oscillation() {
        // 32 samples per period of e^{ikx}
        let k = 200.0;
        let dx = 2.0 * std::f64::consts::PI / (32.0 * k);
        let n = (1.0 / dx) as usize;
        let vals: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, k * i as f64 * dx)).collect();
        let cum = cumulative_integral(&vals, dx);
        let worst = cum
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let x = i as f64 * dx;
                let exact = (Complex64::from_polar(1.0, k * x) - 1.0) / Complex64::new(0.0, k);
                (c - exact).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-11, "worst error {worst:e}");
    }
}
