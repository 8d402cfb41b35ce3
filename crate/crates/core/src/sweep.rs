//! Geometric h-sweeps of extracted against predicted transfer matrices,
//! log-log power-law fits and threshold verdicts.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalform::{model_transfer, predicted_transfer, NormalFormProblem, Solver};
use crate::schrodinger::{
    numeric_transfer_case_i, predict_transfer_case_i, CrossingPoint, SchrodingerCase, SchrodingerProblem,
};
use crate::transfer::TransferMatrix;

/// `n` points geometrically spaced from `hi` down to `lo`.
pub fn geometric_h_grid(hi: f64, lo: f64, n: usize) -> Result<Vec<f64>> {
    if !(hi > lo && lo > 0.0) || n < 2 {
        return Err(Error::InvalidProblem(format!(
            "need hi > lo > 0 and n >= 2, got {hi}, {lo}, {n}"
        )));
    }
    let ratio = (lo / hi).ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|k| match k {
            0 => hi,
            k if k == n - 1 => lo,
            k => hi * (ratio * k as f64).exp(),
        })
        .collect())
}

/// Model default: 12 points from `1e-1` to `1e-4`.
pub fn default_model_grid() -> Vec<f64> {
    geometric_h_grid(1e-1, 1e-4, 12).expect("static grid")
}

/// Schrödinger default: 8 points from `1e-2` to `1e-4`.
pub fn default_schrodinger_grid() -> Vec<f64> {
    geometric_h_grid(1e-2, 1e-4, 8).expect("static grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// Coefficient of `log log(1/h)` when fitted.
    pub log_power: Option<f64>,
    pub residual_rms: f64,
    pub points: usize,
}

/// Least squares for `log y = exponent log h + log amplitude`, plus a free
/// `log log(1/h)` regressor when `with_log` is set.
pub fn fit_power_law(points: &[(f64, f64)], with_log: bool) -> Result<PowerFit> {
    let k = if with_log { 3 } else { 2 };
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut rows = Vec::with_capacity(points.len());
    for &(h, y) in points {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::DegenerateFit(format!(
                "magnitude {y} at h = {h} is not positive"
            )));
        }
        if !(h > 0.0) || (with_log && !(h < 1.0)) {
            return Err(Error::DegenerateFit(format!("h = {h} is outside the fit domain")));
        }
        let mut r = vec![1.0, h.ln()];
        if with_log {
            r.push((1.0 / h).ln().ln());
        }
        rows.push((r, y.ln()));
    }
    // normal equations; the regressors are O(10) so conditioning is harmless
    let mut a = vec![vec![0.0; k + 1]; k];
    for (r, t) in &rows {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += r[i] * r[j];
            }
            a[i][k] += r[i] * t;
        }
    }
    let beta = solve_dense(a).ok_or_else(|| Error::DegenerateFit("regressors are collinear".into()))?;
    let sq: f64 = rows
        .iter()
        .map(|(r, t)| {
            let fit: f64 = r.iter().zip(&beta).map(|(x, b)| x * b).sum();
            (t - fit).powi(2)
        })
        .sum();
    Ok(PowerFit {
        exponent: beta[1],
        amplitude: beta[0].exp(),
        log_power: with_log.then(|| beta[2]),
        residual_rms: (sq / rows.len() as f64).sqrt(),
        points: rows.len(),
    })
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    let scale = a.iter().flat_map(|r| r[..n].iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..=n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    Some(x)
}

#[derive(Debug, Clone)]
pub enum SweepProblem {
    Model {
        problem: NormalFormProblem,
        solver: Solver,
    },
    Schrodinger {
        problem: SchrodingerProblem,
        point: CrossingPoint,
    },
}

impl SweepProblem {
    pub fn contact_order(&self) -> Result<u32> {
        match self {
            SweepProblem::Model { problem, .. } => Ok(problem.m()),
            SweepProblem::Schrodinger { problem, .. } => problem.n(),
        }
    }

    pub fn predicted(&self, h: f64) -> Result<TransferMatrix> {
        match self {
            SweepProblem::Model { problem, .. } => Ok(predicted_transfer(&problem.at_h(h)?)),
            SweepProblem::Schrodinger { problem, point } => predict_transfer_case_i(&problem.at_h(h)?, *point),
        }
    }

    pub fn extracted(&self, h: f64) -> Result<TransferMatrix> {
        match self {
            SweepProblem::Model { problem, solver } => model_transfer(&problem.at_h(h)?, *solver),
            SweepProblem::Schrodinger { problem, point } => {
                numeric_transfer_case_i(&problem.at_h(h)?, *point).map(|t| t.transfer)
            }
        }
    }
}

/// Absolute and relative entry errors in the order `t11, t12, t21, t22`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryErrors {
    pub abs: [f64; 4],
    /// `None` where the predicted entry is zero.
    pub rel: [Option<f64>; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub extracted: Option<TransferMatrix>,
    pub predicted: TransferMatrix,
    pub errors: Option<EntryErrors>,
    pub status: RowStatus,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

/// Thresholds for the verdicts of [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepTolerances {
    /// Allowed deviation of the off-diagonal exponents from `1/(m+1)`.
    pub exponent: f64,
    /// Relative deviation of the fitted off-diagonal prefactor.
    pub prefactor: f64,
    /// Phase of extracted over predicted off-diagonals at the smallest h.
    pub phase: f64,
    /// `|t11 - 1|` exponent window `[2/(m+1) - below, 2/(m+1) + above]`.
    pub diagonal_below: f64,
    pub diagonal_above: f64,
    /// Absolute error bound used instead of fits when the coupling vanishes.
    pub zero_signal: f64,
}

impl Default for SweepTolerances {
    fn default() -> Self {
        SweepTolerances {
            exponent: 0.02,
            prefactor: 0.10,
            phase: 0.10,
            diagonal_below: 0.10,
            diagonal_above: 0.15,
            zero_signal: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// `None` when the quantity could not be measured.
    pub observed: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

impl Verdict {
    pub fn within(observed: f64, lower: f64, upper: f64) -> Self {
        Verdict {
            observed: Some(observed),
            lower,
            upper,
            passed: observed >= lower && observed <= upper,
        }
    }

    pub fn unmeasured(lower: f64, upper: f64) -> Self {
        Verdict {
            observed: None,
            lower,
            upper,
            passed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub m: u32,
    pub rows: Vec<SweepRow>,
    pub fits: BTreeMap<String, PowerFit>,
    pub verdicts: BTreeMap<String, Verdict>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.values().all(|v| v.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = (&String, &Verdict)> {
        self.verdicts.iter().filter(|(_, v)| !v.passed)
    }

    pub fn ok_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.is_ok())
    }
}

fn entry_errors(got: &TransferMatrix, want: &TransferMatrix) -> EntryErrors {
    let abs = got.abs_diff(want);
    let w = want.flat();
    let mut rel = [None; 4];
    for i in 0..4 {
        if w[i].norm() > 0.0 {
            rel[i] = Some(abs[i] / w[i].norm());
        }
    }
    EntryErrors { abs, rel }
}

fn check_grid(h_values: &[f64]) -> Result<()> {
    if h_values.len() < 4 {
        return Err(Error::InvalidProblem(format!(
            "a sweep needs at least 4 h values, got {}",
            h_values.len()
        )));
    }
    if h_values.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(Error::InvalidProblem("h values must be positive".into()));
    }
    if h_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidProblem("h values must be strictly decreasing".into()));
    }
    if h_values[0] / h_values[h_values.len() - 1] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidProblem("h values must span at least two decades".into()));
    }
    Ok(())
}

/// Extracts and predicts the transfer matrix at every `h`, then fits and
/// judges the result. Rows are computed concurrently; a failed row is kept
/// with its error and left out of the fits.
pub fn run_sweep(problem: &SweepProblem, h_values: &[f64], tol: &SweepTolerances) -> Result<SweepReport> {
    check_grid(h_values)?;
    if let SweepProblem::Schrodinger { problem: p, .. } = problem {
        if p.case()? != SchrodingerCase::Propagating {
            return Err(Error::CaseMismatch("numeric sweeps need E0 > 0".into()));
        }
    }
    let m = problem.contact_order()?;
    let rows = h_values
        .par_iter()
        .map(|&h| {
            let predicted = problem.predicted(h)?;
            let row = match problem.extracted(h) {
                Ok(t) => SweepRow {
                    h,
                    errors: Some(entry_errors(&t, &predicted)),
                    extracted: Some(t),
                    predicted,
                    status: RowStatus::Ok,
                },
                Err(e) => {
                    log::warn!("sweep row h = {h:e} failed: {e}");
                    SweepRow {
                        h,
                        extracted: None,
                        predicted,
                        errors: None,
                        status: RowStatus::Failed { error: e.to_string() },
                    }
                }
            };
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assess(m, rows, tol))
}

/// Fits and verdicts for a finished set of rows.
pub fn assess(m: u32, rows: Vec<SweepRow>, tol: &SweepTolerances) -> SweepReport {
    let mut fits = BTreeMap::new();
    let mut verdicts = BTreeMap::new();
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let n_ok = ok.len() as f64;
    verdicts.insert(
        "rows_ok".to_string(),
        Verdict::within(n_ok, rows.len() as f64, rows.len() as f64),
    );

    let zero_signal = rows
        .iter()
        .all(|r| r.predicted.t12() == Complex64::new(0.0, 0.0) && r.predicted.t21() == Complex64::new(0.0, 0.0));
    if zero_signal {
        let worst = ok
            .iter()
            .filter_map(|r| r.errors)
            .flat_map(|e| e.abs)
            .fold(0.0, f64::max);
        verdicts.insert("max_abs_error".into(), Verdict::within(worst, 0.0, tol.zero_signal));
        return SweepReport {
            m,
            rows,
            fits,
            verdicts,
        };
    }
    let k = f64::from(m) + 1.0;
    let smallest = ok.last().copied();
    let entries: [(&str, fn(&TransferMatrix) -> Complex64); 2] =
        [("t12", TransferMatrix::t12), ("t21", TransferMatrix::t21)];
    for (name, get) in entries {
        let pts: Vec<(f64, f64)> = ok
            .iter()
            .map(|r| (r.h, get(r.extracted.as_ref().unwrap()).norm()))
            .collect();
        let expected = smallest
            .map(|r| get(&r.predicted).norm() / r.h.powf(1.0 / k))
            .unwrap_or(0.0);
        match fit_power_law(&pts, false) {
            Ok(fit) => {
                fits.insert(name.to_string(), fit);
                verdicts.insert(
                    format!("{name}.exponent"),
                    Verdict::within(fit.exponent, 1.0 / k - tol.exponent, 1.0 / k + tol.exponent),
                );
                verdicts.insert(
                    format!("{name}.prefactor"),
                    Verdict::within(
                        fit.amplitude,
                        expected * (1.0 - tol.prefactor),
                        expected * (1.0 + tol.prefactor),
                    ),
                );
            }
            Err(e) => {
                log::warn!("{name} fit failed: {e}");
                verdicts.insert(
                    format!("{name}.exponent"),
                    Verdict::unmeasured(1.0 / k - tol.exponent, 1.0 / k + tol.exponent),
                );
            }
        }
        if let Some(r) = smallest {
            let ratio = get(r.extracted.as_ref().unwrap()) / get(&r.predicted);
            verdicts.insert(
                format!("{name}.phase"),
                Verdict::within(ratio.arg().abs(), 0.0, tol.phase),
            );
        }
    }
    let pts: Vec<(f64, f64)> = ok
        .iter()
        .map(|r| (r.h, (r.extracted.as_ref().unwrap().t11() - 1.0).norm()))
        .collect();
    let target = 2.0 / k;
    match fit_power_law(&pts, m == 1) {
        Ok(fit) => {
            fits.insert("t11".to_string(), fit);
            verdicts.insert(
                "t11.exponent".into(),
                Verdict::within(fit.exponent, target - tol.diagonal_below, target + tol.diagonal_above),
            );
        }
        Err(e) => {
            log::warn!("diagonal fit failed: {e}");
            verdicts.insert(
                "t11.exponent".into(),
                Verdict::unmeasured(target - tol.diagonal_below, target + tol.diagonal_above),
            );
        }
    }
    SweepReport {
        m,
        rows,
        fits,
        verdicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_power_laws() {
        let hs = geometric_h_grid(1e-1, 1e-5, 9).unwrap();
        let pts: Vec<_> = hs.iter().map(|&h| (h, 3.0 * h.sqrt())).collect();
        let f = fit_power_law(&pts, false).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-12 && (f.amplitude - 3.0).abs() < 1e-10 && f.residual_rms < 1e-12);
        let pts: Vec<_> = hs.iter().map(|&h| (h, h.powf(2.0 / 3.0) * (1.0 / h).ln())).collect();
        let f = fit_power_law(&pts, true).unwrap();
        assert!((f.exponent - 2.0 / 3.0).abs() < 1e-6);
        assert!((f.log_power.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_fits() {
        assert!(matches!(
            fit_power_law(&[(0.1, 1.0), (0.01, 0.0), (0.001, 1.0)], false),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            fit_power_law(&[(0.1, 1.0), (0.01, 1.0)], false),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            fit_power_law(&[(0.1, 1.0); 4], false),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn grids() {
        let g = default_model_grid();
        assert_eq!(g.len(), 12);
        assert_eq!((g[0], g[11]), (1e-1, 1e-4));
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        assert!(check_grid(&[1e-1, 1e-2, 1e-3]).is_err());
        assert!(check_grid(&[1e-1, 5e-2, 2e-2, 1.1e-2]).is_err());
        assert!(check_grid(&default_schrodinger_grid()).is_ok());
    }
}
