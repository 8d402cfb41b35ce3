//! Dispatch of a validated config to the core routines.

use crossing_core::normalform::{model_transfer, predicted_transfer, NormalFormProblem};
use crossing_core::schrodinger::{
    build_crossing_data, numeric_transfer_case_i, omega_case_i, omega_case_ii, predict_transfer_case_i,
    predict_transfer_case_ii, CrossingPoint, SchrodingerCase, SchrodingerProblem,
};
use crossing_core::sweep::{
    default_model_grid, default_schrodinger_grid, run_sweep, EntryErrors, RowStatus, SweepProblem, SweepReport,
    SweepRow, Verdict,
};
use crossing_core::symbolcalc::{omega_general, poisson_bracket, transfer_predicted_general, CrossingData, Poly2};
use crossing_core::{Complex64, Poly1, TransferMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{Mode, ModelConfig, ProblemConfig, RunConfig, SchrodingerConfig, SymbolsConfig};
use crate::CliError;

/// Result of a run: the JSON summary, CSV rows, and whether verdicts were
/// enforced and passed.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: Value,
    pub rows: Vec<SweepRow>,
    /// `Some` only in `verify` mode.
    pub passed: Option<bool>,
    /// Some row hit a numerical failure.
    pub row_failures: bool,
}

fn config_err(e: crossing_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn numerical_err(e: crossing_core::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

fn model_problem(m: &ModelConfig, h: f64) -> Result<NormalFormProblem, CliError> {
    let f = match (&m.f, m.m) {
        (Some(f), _) => Poly1::new(f.clone()),
        (None, Some(k)) => Poly1::monomial(1.0, k as usize),
        (None, None) => return Err(CliError::Config("model problem needs `f` or `m`".into())),
    };
    NormalFormProblem::with_resolution(f, m.r1, m.r2, m.interval, h, m.samples_per_period).map_err(config_err)
}

/// Coefficients of `p(x0 + y)` in `y`.
fn taylor_shift(p: &Poly1, x0: f64) -> Poly1 {
    if x0 == 0.0 {
        return p.clone();
    }
    let n = p.coeffs().len();
    let mut fact = 1.0;
    let coeffs = (0..n)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            p.deriv_at(k, x0) / fact
        })
        .collect();
    Poly1::new(coeffs)
}

fn schrodinger_problem(s: &SchrodingerConfig, h: f64) -> Result<(SchrodingerProblem, CrossingPoint), CliError> {
    let v1 = taylor_shift(&Poly1::new(s.v1.clone()), s.x0);
    let v2 = taylor_shift(&Poly1::new(s.v2.clone()), s.x0);
    let interval = (s.interval.0 - s.x0, s.interval.1 - s.x0);
    let p = SchrodingerProblem::with_resolution(v1, v2, s.w, s.e0, interval, h, s.samples_per_period)
        .map_err(config_err)?;
    let point = match (p.case().map_err(config_err)?, s.point) {
        (SchrodingerCase::Propagating, None) => CrossingPoint::Plus,
        (SchrodingerCase::TurningPoint, None) => CrossingPoint::Origin,
        (SchrodingerCase::Propagating, Some(CrossingPoint::Origin)) => {
            return Err(CliError::Config("problem.point `origin` needs e0 = 0".into()))
        }
        (SchrodingerCase::TurningPoint, Some(pt)) if pt != CrossingPoint::Origin => {
            return Err(CliError::Config("e0 = 0 has its crossing at `origin`".into()))
        }
        (_, Some(pt)) => pt,
    };
    Ok((p, point))
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn symbols_data(s: &SymbolsConfig) -> Result<CrossingData, CliError> {
    let p1 = Poly2::from_terms(s.p1.iter().copied());
    let p2 = Poly2::from_terms(s.p2.iter().copied());
    CrossingData::from_symbols(&p1, &p2, complex(s.q1), complex(s.q2), s.max_m).map_err(config_err)
}

fn require_h(cfg: &RunConfig, mode: Mode) -> Result<f64, CliError> {
    cfg.h.ok_or_else(|| CliError::Config(format!("mode {mode} needs `h`")))
}

fn predicted_row(h: f64, predicted: TransferMatrix) -> SweepRow {
    SweepRow {
        h,
        extracted: None,
        predicted,
        errors: None,
        status: RowStatus::Ok,
    }
}

fn solved_row(h: f64, extracted: TransferMatrix, predicted: TransferMatrix) -> SweepRow {
    let abs = extracted.abs_diff(&predicted);
    let w = predicted.flat();
    let mut rel = [None; 4];
    for i in 0..4 {
        if w[i].norm() > 0.0 {
            rel[i] = Some(abs[i] / w[i].norm());
        }
    }
    SweepRow {
        h,
        extracted: Some(extracted),
        predicted,
        errors: Some(EntryErrors { abs, rel }),
        status: RowStatus::Ok,
    }
}

fn predict(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let h = require_h(cfg, Mode::Predict)?;
    let (t, extra) = match &cfg.problem {
        ProblemConfig::Model(m) => {
            let p = model_problem(m, h)?;
            let t = predicted_transfer(&p);
            (t, json!({ "contact_order": p.m(), "f_m_0": p.f_m_0() }))
        }
        ProblemConfig::Schrodinger(s) => {
            let (p, point) = schrodinger_problem(s, h)?;
            let data = build_crossing_data(&p, point).map_err(config_err)?;
            if point == CrossingPoint::Origin {
                let t = predict_transfer_case_ii(&p).map_err(config_err)?;
                let w = omega_case_ii(&p).map_err(config_err)?;
                (
                    t,
                    json!({ "contact_order": data.m, "point": point, "crossing": data, "omega": w }),
                )
            } else {
                let t = predict_transfer_case_i(&p, point).map_err(config_err)?;
                let w = omega_case_i(&p).map_err(config_err)?;
                (
                    t,
                    json!({ "contact_order": data.m, "point": point, "crossing": data, "omega": w }),
                )
            }
        }
        ProblemConfig::Symbols(s) => {
            let data = symbols_data(s)?;
            let t = transfer_predicted_general(&data, h);
            (
                t,
                json!({ "contact_order": data.m, "crossing": data, "omega": omega_general(&data) }),
            )
        }
    };
    let mut summary = json!({ "mode": Mode::Predict, "h": h, "transfer": t });
    merge(&mut summary, extra);
    Ok(RunOutput {
        summary,
        rows: vec![predicted_row(h, t)],
        passed: None,
        row_failures: false,
    })
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn solve_model(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let h = require_h(cfg, Mode::SolveModel)?;
    let ProblemConfig::Model(m) = &cfg.problem else {
        return Err(CliError::Config("solve-model needs a `model` problem".into()));
    };
    let p = model_problem(m, h)?;
    let predicted = predicted_transfer(&p);
    let extracted = model_transfer(&p, m.solver).map_err(numerical_err)?;
    let row = solved_row(h, extracted, predicted);
    let summary = json!({
        "mode": Mode::SolveModel,
        "h": h,
        "contact_order": p.m(),
        "solver": m.solver,
        "extracted": extracted,
        "predicted": predicted,
        "errors": row.errors,
    });
    Ok(RunOutput {
        summary,
        rows: vec![row],
        passed: None,
        row_failures: false,
    })
}

fn solve_schrodinger(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let h = require_h(cfg, Mode::SolveSchrodinger)?;
    let ProblemConfig::Schrodinger(s) = &cfg.problem else {
        return Err(CliError::Config(
            "solve-schrodinger needs a `schrodinger` problem".into(),
        ));
    };
    let (p, point) = schrodinger_problem(s, h)?;
    if point == CrossingPoint::Origin {
        return Err(CliError::Config("solve-schrodinger needs e0 > 0".into()));
    }
    let predicted = predict_transfer_case_i(&p, point).map_err(config_err)?;
    let sol = numeric_transfer_case_i(&p, point).map_err(numerical_err)?;
    let row = solved_row(h, sol.transfer, predicted);
    let summary = json!({
        "mode": Mode::SolveSchrodinger,
        "h": h,
        "point": point,
        "contact_order": p.n().map_err(config_err)?,
        "extracted": sol.transfer,
        "predicted": predicted,
        "errors": row.errors,
        "other_branch": sol.other_branch,
        "ode_stats": sol.stats,
    });
    Ok(RunOutput {
        summary,
        rows: vec![row],
        passed: None,
        row_failures: false,
    })
}

fn sweep_problem(cfg: &RunConfig) -> Result<(SweepProblem, Vec<f64>), CliError> {
    let grid = match &cfg.h_grid {
        Some(g) => Some(g.resolve()?),
        None => None,
    };
    match &cfg.problem {
        ProblemConfig::Model(m) => {
            let hs = grid.unwrap_or_else(default_model_grid);
            let problem = model_problem(m, hs[0])?;
            Ok((
                SweepProblem::Model {
                    problem,
                    solver: m.solver,
                },
                hs,
            ))
        }
        ProblemConfig::Schrodinger(s) => {
            let hs = grid.unwrap_or_else(default_schrodinger_grid);
            let (problem, point) = schrodinger_problem(s, hs[0])?;
            Ok((SweepProblem::Schrodinger { problem, point }, hs))
        }
        ProblemConfig::Symbols(_) => Err(CliError::Config(
            "sweeps need a `model` or `schrodinger` problem".into(),
        )),
    }
}

/// Antisymmetry, Leibniz rule and Jacobi identity on random integer
/// polynomials; returns the number of triples that broke any of them.
fn bracket_spot_check(seed: u64, count: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut poly = || {
        let n = rng.gen_range(0..8);
        Poly2::from_terms((0..n).map(|_| {
            (
                rng.gen_range(0..4),
                rng.gen_range(0..4),
                f64::from(rng.gen_range(-5i32..=5)),
            )
        }))
    };
    (0..count)
        .filter(|_| {
            let (a, b, c) = (poly(), poly(), poly());
            let anti = poisson_bracket(&a, &b) == -&poisson_bracket(&b, &a);
            let leibniz =
                poisson_bracket(&a, &(&b * &c)) == &(&poisson_bracket(&a, &b) * &c) + &(&b * &poisson_bracket(&a, &c));
            let jacobi = (&(&poisson_bracket(&a, &poisson_bracket(&b, &c))
                + &poisson_bracket(&b, &poisson_bracket(&c, &a)))
                + &poisson_bracket(&c, &poisson_bracket(&a, &b)))
                .is_zero();
            !(anti && leibniz && jacobi)
        })
        .count()
}

fn sweep_summary(mode: Mode, report: &SweepReport, seed: Option<u64>) -> Value {
    let failed: Vec<Value> = report
        .rows
        .iter()
        .filter_map(|r| match &r.status {
            RowStatus::Failed { error } => Some(json!({ "h": r.h, "error": error })),
            RowStatus::Ok => None,
        })
        .collect();
    let mut v = json!({
        "mode": mode,
        "contact_order": report.m,
        "rows": report.rows.len(),
        "h": report.rows.iter().map(|r| r.h).collect::<Vec<_>>(),
        "failed_rows": failed,
        "fits": report.fits,
        "verdicts": report.verdicts,
        "passed": report.passed(),
    });
    if let Some(s) = seed {
        merge(&mut v, json!({ "seed": s }));
    }
    v
}

fn sweep(cfg: &RunConfig, mode: Mode, seed: u64) -> Result<RunOutput, CliError> {
    let (problem, hs) = sweep_problem(cfg)?;
    let mut report = run_sweep(&problem, &hs, &cfg.tolerances).map_err(config_err)?;
    let row_failures = report.rows.iter().any(|r| !r.is_ok());
    let (seed, passed) = if mode == Mode::Verify {
        let broken = bracket_spot_check(seed, 100) as f64;
        report
            .verdicts
            .insert("brackets.random".into(), Verdict::within(broken, 0.0, 0.0));
        (Some(seed), Some(report.passed()))
    } else {
        (None, None)
    };
    let summary = sweep_summary(mode, &report, seed);
    Ok(RunOutput {
        summary,
        rows: report.rows,
        passed,
        row_failures,
    })
}

/// Runs `cfg` in `mode`. A `mode` key in the config must agree.
pub fn run(mode: Mode, cfg: &RunConfig, seed: u64) -> Result<RunOutput, CliError> {
    if let Some(m) = cfg.mode {
        if m != mode {
            return Err(CliError::Config(format!(
                "config says mode {m} but the subcommand is {mode}"
            )));
        }
    }
    match mode {
        Mode::Predict => predict(cfg),
        Mode::SolveModel => solve_model(cfg),
        Mode::SolveSchrodinger => solve_schrodinger(cfg),
        Mode::Sweep | Mode::Verify => sweep(cfg, mode, seed),
    }
}
