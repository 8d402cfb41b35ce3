use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CrossingPoint, SchrodingerCase, SchrodingerProblem, WkbBasis};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::normalform::DEFAULT_WINDOW;
use crate::ode::{self, OdeOptions, OdeStats};
use crate::transfer::{TransferKind, TransferMatrix};

/// `u_j` and `h u_j'` on a uniform grid over the problem interval.
#[derive(Debug, Clone)]
pub struct SchrodingerSolution {
    pub u: [GridFunction; 2],
    pub hu: [GridFunction; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

/// Numerically extracted transfer matrix, plus the coefficients of the
/// opposite branch read off at the outgoing end (columns as in `transfer`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerTransfer {
    pub transfer: TransferMatrix,
    pub other_branch: [[Complex64; 2]; 2],
    pub stats: OdeStats,
}

fn grid(prob: &SchrodingerProblem) -> Result<(f64, f64, usize)> {
    if prob.min_kinetic() <= 0.0 {
        return Err(Error::TurningPointInRange);
    }
    let (x0, x1) = prob.interval();
    let kmax = (0..=4096)
        .map(|i| x0 + (x1 - x0) * i as f64 / 4096.0)
        .flat_map(|x| [0, 1].map(|j| prob.e0() - prob.v(j).eval(x)))
        .fold(0.0, f64::max)
        .sqrt();
    let dx = ((x1 - x0) / 400.0).min(2.0 * PI * prob.h() / (prob.samples_per_period() * kmax));
    let n = ((x1 - x0) / dx).ceil() as usize + 1;
    Ok((x0, (x1 - x0) / (n - 1) as f64, n))
}

/// Integrates the system as a first-order system in `(u1, h u1', u2, h u2')`
/// from the given endpoint, where `alpha[j] = (a+, a-)` are the WKB
/// coefficients of `u_j` there.
pub fn solve_schrodinger_ode(
    prob: &SchrodingerProblem,
    start: Endpoint,
    alpha: [[Complex64; 2]; 2],
    opts: &OdeOptions,
) -> Result<(SchrodingerSolution, OdeStats)> {
    if prob.case()? != SchrodingerCase::Propagating {
        return Err(Error::TurningPointInRange);
    }
    let basis = prob.wkb_basis()?;
    let (x0, dx, n) = grid(prob)?;
    let h = prob.h();
    let mut xs: Vec<f64> = (0..n).map(|k| x0 + dx * k as f64).collect();
    if start == Endpoint::Right {
        xs.reverse();
    }
    let [a, b] = [0, 1].map(|j| basis.synthesize(j, xs[0], h, alpha[j]));
    let y0 = [a[0], a[1], b[0], b[1]];
    let (v1, v2, w, e0) = (prob.v(0).clone(), prob.v(1).clone(), *prob.w(), prob.e0());
    let rhs = |x: f64, y: &[Complex64; 4]| {
        let (d1, d2, c) = ((v1.eval(x) - e0) / h, (v2.eval(x) - e0) / h, w.eval(x));
        [y[1] / h, y[0] * d1 + y[2] * c, y[3] / h, y[2] * d2 + y[0] * c]
    };
    let (mut ys, stats) = ode::integrate(rhs, &xs, y0, opts)?;
    if start == Endpoint::Right {
        ys.reverse();
    }
    let col = |i: usize| GridFunction {
        values: ys.iter().map(|y| y[i]).collect(),
        x0,
        dx,
    };
    Ok((
        SchrodingerSolution {
            u: [col(0), col(2)],
            hu: [col(1), col(3)],
        },
        stats,
    ))
}

/// WKB coefficients of `u_j` averaged over `window` grid points centred at `x`.
fn coefficients(
    sol: &SchrodingerSolution,
    basis: &WkbBasis,
    h: f64,
    x: f64,
    window: usize,
) -> Result<[[Complex64; 2]; 2]> {
    let n = sol.u[0].len();
    let window = window.max(1).min(n);
    let lo = sol.u[0].index_of(x).saturating_sub(window / 2).min(n - window);
    let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
    for k in lo..lo + window {
        let xk = sol.u[0].x(k);
        for j in 0..2 {
            let c = basis.decompose(j, xk, h, sol.u[j].values[k], sol.hu[j].values[k])?;
            acc[j][0] += c[0];
            acc[j][1] += c[1];
        }
    }
    let w = window as f64;
    Ok(acc.map(|r| r.map(|c| c / w)))
}

/// Transfer matrix of the crossing at `(0, ±sqrt(E0))` from two ODE solves.
///
/// At `Plus` the `+` branch travels left to right: unit `+` data is imposed at
/// the left end and `+` coefficients are read off near the right end. At
/// `Minus` the `-` branch travels right to left, so the solves start from the
/// right end.
pub fn numeric_transfer_case_i(prob: &SchrodingerProblem, point: CrossingPoint) -> Result<SchrodingerTransfer> {
    let (start, branch) = match point {
        CrossingPoint::Plus => (Endpoint::Left, 0),
        CrossingPoint::Minus => (Endpoint::Right, 1),
        CrossingPoint::Origin => {
            return Err(Error::CaseMismatch("no WKB transfer through a turning point".into()));
        }
    };
    let basis = prob.wkb_basis()?;
    let (x0, x1) = prob.interval();
    let (s_lo, s_hi) = if prob.w().is_zero() {
        (0.0, 0.0)
    } else {
        prob.w().support_interval()
    };
    let (_, dx, _) = grid(prob)?;
    let (x_read, gap) = match start {
        Endpoint::Left => {
            let x = 0.5 * (s_hi + x1);
            (x, x - s_hi)
        }
        Endpoint::Right => {
            let x = 0.5 * (x0 + s_lo);
            (x, s_lo - x)
        }
    };
    // shrink the averaging window at coarse h so it stays clear of the coupling
    let half = ((gap / dx).floor() as usize).saturating_sub(1).min(DEFAULT_WINDOW / 2);
    if gap <= dx {
        return Err(Error::WindowInsideSupport {
            lo: x_read - dx,
            hi: x_read + dx,
        });
    }
    let window = 2 * half + 1;
    let opts = OdeOptions::default();
    let solve = |j: usize| {
        let mut alpha = [[Complex64::new(0.0, 0.0); 2]; 2];
        alpha[j][branch] = Complex64::new(1.0, 0.0);
        let (sol, stats) = solve_schrodinger_ode(prob, start, alpha, &opts)?;
        Ok::<_, Error>((coefficients(&sol, &basis, prob.h(), x_read, window)?, stats))
    };
    let (e1, e2) = rayon::join(|| solve(0), || solve(1));
    let ((c1, s1), (c2, s2)) = (e1?, e2?);
    let other = 1 - branch;
    let transfer = TransferMatrix::from_columns(
        prob.h(),
        [c1[0][branch], c1[1][branch]],
        [c2[0][branch], c2[1][branch]],
        TransferKind::Extracted,
    );
    Ok(SchrodingerTransfer {
        transfer,
        other_branch: [[c1[0][other], c2[0][other]], [c1[1][other], c2[1][other]]],
        stats: OdeStats {
            accepted: s1.accepted + s2.accepted,
            rejected: s1.rejected + s2.rejected,
            evals: s1.evals + s2.evals,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::{Bump, Poly1};
    use crate::schrodinger::predict_transfer_case_i;

    fn problem(w: Bump, h: f64) -> SchrodingerProblem {
        SchrodingerProblem::new(
            Poly1::new(vec![0.0, -0.5]),
            Poly1::new(vec![0.0, 0.5]),
            w,
            1.0,
            (-0.8, 0.8),
            h,
        )
        .unwrap()
    }

    #[test]
    fn decoupled_transfer_is_identity_to_order_h() {
        let h = 2e-3;
        let t = numeric_transfer_case_i(&problem(Bump::zero(), h), CrossingPoint::Plus).unwrap();
        let id = TransferMatrix::identity(h, TransferKind::Extracted);
        assert!(t.transfer.max_abs_diff(&id) < 2.0 * h, "{:?}", t.transfer);
    }

    #[test]
    fn transversal_crossing_both_points() {
        let h = 1e-3;
        let p = problem(Bump::new(1.0, 0.2, 0.6), h);
        for point in [CrossingPoint::Plus, CrossingPoint::Minus] {
            let got = numeric_transfer_case_i(&p, point).unwrap().transfer;
            let want = predict_transfer_case_i(&p, point).unwrap();
            for (g, w) in [(got.t12(), want.t12()), (got.t21(), want.t21())] {
                assert!((g - w).norm() < 0.15 * w.norm(), "{point:?}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn turning_point_in_range_is_rejected() {
        let p = SchrodingerProblem::new(
            Poly1::new(vec![0.0, -2.0]),
            Poly1::new(vec![0.0, 2.0]),
            Bump::new(1.0, 0.2, 0.6),
            1.0,
            (-0.8, 0.8),
            1e-3,
        )
        .unwrap();
        assert_eq!(
            numeric_transfer_case_i(&p, CrossingPoint::Plus).unwrap_err(),
            Error::TurningPointInRange
        );
    }
}
