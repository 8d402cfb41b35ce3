use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{gamma_minus, gamma_plus, k1, k2, NormalFormProblem};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::ode::{self, OdeOptions, OdeStats};
use crate::symbolcalc::{transfer_predicted_general, CrossingData};
use crate::transfer::{TransferKind, TransferMatrix};

/// Number of grid points averaged when reading off outgoing coefficients.
pub const DEFAULT_WINDOW: usize = 65;

#[derive(Debug, Clone)]
pub struct ModelSolution {
    pub u1: GridFunction,
    pub u2: GridFunction,
}

#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub u1: GridFunction,
    pub u2: GridFunction,
    /// Estimated norm of `K1`, `K2` (largest of `|K1(1)|` and observed term ratios).
    pub contraction: f64,
    /// Bound on the sup norm of the dropped tail of the series.
    pub residual_bound: f64,
    pub terms: usize,
}

impl From<NeumannSolution> for ModelSolution {
    fn from(s: NeumannSolution) -> Self {
        ModelSolution { u1: s.u1, u2: s.u2 }
    }
}

/// Sums `sum_{k=0}^{terms} K^k g`; returns the sum and the largest observed
/// ratio `|K^{k+1} g| / |K^k g|`.
fn neumann_series(
    prob: &NormalFormProblem,
    g: GridFunction,
    terms: usize,
    k: fn(&NormalFormProblem, &GridFunction) -> Result<GridFunction>,
) -> Result<(GridFunction, f64)> {
    let mut sum = g.values.clone();
    let mut term = g;
    let mut ratio: f64 = 0.0;
    for _ in 0..terms {
        let next = k(prob, &term)?;
        let (a, b) = (term.sup_norm(), next.sup_norm());
        if a > 0.0 {
            ratio = ratio.max(b / a);
        }
        for (s, v) in sum.iter_mut().zip(&next.values) {
            *s += v;
        }
        if b == 0.0 {
            break;
        }
        term = next;
    }
    Ok((term.with_values(sum), ratio))
}

/// Truncated Neumann series for `u1 = (I + Γ+Γ-)^{-1}(a1 - i a2 Γ+(1))` and
/// `u2 = e^{iF/h} (I + Γ-Γ+)^{-1}(a2 - i a1 Γ-(1))`.
pub fn neumann_solve(prob: &NormalFormProblem, alpha: [Complex64; 2], terms: usize) -> Result<NeumannSolution> {
    if terms == 0 {
        return Err(Error::InvalidProblem(
            "the Neumann series needs at least one term".into(),
        ));
    }
    let one = prob.constant(Complex64::new(1.0, 0.0));
    let k_one = k1(prob, &one)?.sup_norm();
    if k_one >= 0.5 {
        return Err(Error::NotContractive { estimate: k_one });
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let gp = gamma_plus(prob, &one)?;
    let gm = gamma_minus(prob, &one)?;
    let g1 = gp.map(|_, v| alpha[0] + minus_i * alpha[1] * v);
    let g2 = gm.map(|_, v| alpha[1] + minus_i * alpha[0] * v);
    let data_norm = g1.sup_norm().max(g2.sup_norm());
    let (u1, r1) = neumann_series(prob, g1, terms, k1)?;
    let (w2, r2) = neumann_series(prob, g2, terms, k2)?;
    let q = k_one.max(r1).max(r2);
    let residual_bound = if q < 1.0 {
        q.powi(terms as i32 + 1) / (1.0 - q) * data_norm
    } else {
        f64::INFINITY
    };
    let u2 = w2.with_values(w2.values.iter().zip(prob.phase()).map(|(w, e)| w * e).collect());
    Ok(NeumannSolution {
        u1,
        u2,
        contraction: q,
        residual_bound,
        terms,
    })
}

/// Direct integration of `u1' = -i r1 u2`, `u2' = i f/h u2 - i r2 u1` from
/// `u1(x0) = a1`, `u2(x0) = a2 e^{iF(x0)/h}`, sampled on the problem grid.
pub fn ode_oracle(prob: &NormalFormProblem, alpha: [Complex64; 2]) -> Result<ModelSolution> {
    ode_oracle_with(prob, alpha, &OdeOptions::default()).map(|(s, _)| s)
}

pub fn ode_oracle_with(
    prob: &NormalFormProblem,
    alpha: [Complex64; 2],
    opts: &OdeOptions,
) -> Result<(ModelSolution, OdeStats)> {
    let (x0, _) = prob.interval();
    let h = prob.h();
    let (f, r1, r2) = (prob.f().clone(), *prob.r1(), *prob.r2());
    // Exact polynomial antiderivative keeps the oracle independent of the grid quadrature.
    let big_f0 = f.antiderivative().eval(x0);
    let y0 = [alpha[0], alpha[1] * Complex64::from_polar(1.0, big_f0 / h)];
    let xs: Vec<f64> = (0..prob.grid_len()).map(|k| prob.x(k)).collect();
    let minus_i = Complex64::new(0.0, -1.0);
    let rhs = |x: f64, y: &[Complex64; 2]| {
        let (a, b) = (r1.eval(x), r2.eval(x));
        [
            minus_i * a * y[1],
            Complex64::new(0.0, f.eval(x) / h) * y[1] + minus_i * b * y[0],
        ]
    };
    let (ys, stats) = ode::integrate(rhs, &xs, y0, opts)?;
    let grid = prob.constant(Complex64::new(0.0, 0.0));
    let u1 = grid.with_values(ys.iter().map(|y| y[0]).collect());
    let u2 = grid.with_values(ys.iter().map(|y| y[1]).collect());
    Ok((ModelSolution { u1, u2 }, stats))
}

/// Outgoing coefficients `(u1, e^{-iF/h} u2)` averaged over `window` grid
/// points around `x1 - eps`.
fn outgoing(prob: &NormalFormProblem, sol: &ModelSolution, eps: f64, window: usize) -> Result<[Complex64; 2]> {
    let n = prob.grid_len();
    let window = window.max(1).min(n);
    let (_, x1) = prob.interval();
    let center = sol.u1.index_of(x1 - eps);
    let half = window / 2;
    let lo = center.saturating_sub(half).min(n - window);
    let hi = lo + window - 1;
    if let Some((_, s_hi)) = prob.coupling_support() {
        if prob.x(lo) <= s_hi {
            return Err(Error::WindowInsideSupport {
                lo: prob.x(lo),
                hi: prob.x(hi),
            });
        }
    }
    let mut acc = [Complex64::new(0.0, 0.0); 2];
    for k in lo..=hi {
        acc[0] += sol.u1.values[k];
        acc[1] += sol.u2.values[k] * prob.phase()[k].conj();
    }
    let w = window as f64;
    Ok([acc[0] / w, acc[1] / w])
}

/// Transfer matrix whose columns are the outgoing coefficients of the
/// solutions started from `(1, 0)` and `(0, 1)`.
pub fn extract_transfer(
    prob: &NormalFormProblem,
    e1: &ModelSolution,
    e2: &ModelSolution,
    eps: f64,
) -> Result<TransferMatrix> {
    extract_transfer_with(prob, e1, e2, eps, DEFAULT_WINDOW)
}

pub fn extract_transfer_with(
    prob: &NormalFormProblem,
    e1: &ModelSolution,
    e2: &ModelSolution,
    eps: f64,
    window: usize,
) -> Result<TransferMatrix> {
    let c0 = outgoing(prob, e1, eps, window)?;
    let c1 = outgoing(prob, e2, eps, window)?;
    Ok(TransferMatrix::from_columns(prob.h(), c0, c1, TransferKind::Extracted))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Solver {
    #[default]
    Ode,
    Neumann {
        terms: usize,
    },
}

/// Default extraction offset: the window sits halfway between the coupling
/// support and the right endpoint.
pub(crate) fn default_eps(prob: &NormalFormProblem) -> f64 {
    let (_, x1) = prob.interval();
    let s_hi = prob.coupling_support().map(|s| s.1).unwrap_or(0.0);
    0.5 * (x1 - s_hi)
}

/// Solves for both unit incoming states and extracts the transfer matrix.
pub fn model_transfer(prob: &NormalFormProblem, solver: Solver) -> Result<TransferMatrix> {
    let unit = |j: usize| {
        let mut a = [Complex64::new(0.0, 0.0); 2];
        a[j] = Complex64::new(1.0, 0.0);
        a
    };
    let solve = |a: [Complex64; 2]| -> Result<ModelSolution> {
        match solver {
            Solver::Ode => ode_oracle(prob, a),
            Solver::Neumann { terms } => neumann_solve(prob, a, terms).map(Into::into),
        }
    };
    let (e1, e2) = rayon::join(|| solve(unit(0)), || solve(unit(1)));
    extract_transfer(prob, &e1?, &e2?, default_eps(prob))
}

/// Leading-order prediction `I - i h^{1/(m+1)} [[0, r1(0) w], [r2(0) conj(w), 0]]`.
pub fn predicted_transfer(prob: &NormalFormProblem) -> TransferMatrix {
    let data = CrossingData::reduced_model(prob.m(), prob.f_m_0(), prob.r1().eval(0.0), prob.r2().eval(0.0));
    transfer_predicted_general(&data, prob.h())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{Bump, Poly1};

    fn model(m: usize, h: f64, r: Bump) -> NormalFormProblem {
        NormalFormProblem::new(Poly1::monomial(1.0, m), r, r, (-1.0, 1.0), h).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn decoupled_is_exact() {
        let prob = model(1, 1e-2, Bump::zero());
        let sol = neumann_solve(&prob, [c(2.0, 0.0), c(0.0, 3.0)], 8).unwrap();
        for k in 0..prob.grid_len() {
            assert_eq!(sol.u1.values[k], c(2.0, 0.0));
            assert!((sol.u2.values[k] - c(0.0, 3.0) * prob.phase()[k]).norm() < 1e-15);
        }
        let t = model_transfer(&prob, Solver::Neumann { terms: 8 }).unwrap();
        assert!(t.max_abs_diff(&TransferMatrix::identity(t.h, t.kind)) < 1e-14);
        let ode = ode_oracle(&prob, [c(2.0, 0.0), c(0.0, 3.0)]).unwrap();
        assert!(ode.u2.sub(&sol.u2).sup_norm() < 1e-9);
    }

    #[test]
    fn neumann_matches_ode() {
        let prob = model(1, 1e-2, Bump::new(1.0, 0.2, 0.6));
        for alpha in [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.3, -0.2), c(0.5, 1.0)]] {
            let n = neumann_solve(&prob, alpha, 8).unwrap();
            let o = ode_oracle(&prob, alpha).unwrap();
            let d = n.u1.sub(&o.u1).sup_norm().max(n.u2.sub(&o.u2).sup_norm());
            assert!(d < 1e-7, "difference {d:e}, bound {:e}", n.residual_bound);
        }
    }

    #[test]
    fn ode_conserves_norm() {
        let prob = model(2, 1e-2, Bump::new(0.8, 0.2, 0.6));
        let o = ode_oracle(&prob, [c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        for k in 0..prob.grid_len() {
            let e = o.u1.values[k].norm_sqr() + o.u2.values[k].norm_sqr();
            assert!((e - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn not_contractive_at_large_h() {
        let prob = model(1, 0.5, Bump::new(2.0, 0.2, 0.6));
        assert!(matches!(
            neumann_solve(&prob, [c(1.0, 0.0), c(0.0, 0.0)], 8),
            Err(Error::NotContractive { .. })
        ));
    }

    #[test]
    fn window_must_avoid_support() {
        let prob = model(1, 1e-2, Bump::new(1.0, 0.2, 0.6));
        let a = ode_oracle(&prob, [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let b = ode_oracle(&prob, [c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            extract_transfer(&prob, &a, &b, 0.5),
            Err(Error::WindowInsideSupport { .. })
        ));
        let t = extract_transfer(&prob, &a, &b, 0.2).unwrap();
        let t2 = extract_transfer_with(&prob, &a, &b, 0.1, 2 * DEFAULT_WINDOW).unwrap();
        assert!(t.max_abs_diff(&t2) < 1e-6);
    }
}
