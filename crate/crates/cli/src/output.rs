//! CSV rows with fixed columns and fixed 17-digit float formatting.

use std::io::Write;

use crossing_core::sweep::{RowStatus, SweepRow};
use crossing_core::TransferMatrix;

use crate::CliError;

const ENTRIES: [&str; 4] = ["t11", "t12", "t21", "t22"];

pub fn header() -> Vec<String> {
    let mut cols = vec!["h".to_string()];
    for prefix in ["ext", "pred"] {
        for e in ENTRIES {
            cols.push(format!("{prefix}_{e}_re"));
            cols.push(format!("{prefix}_{e}_im"));
        }
    }
    for e in ENTRIES {
        cols.push(format!("abs_err_{e}"));
    }
    cols.push("status".into());
    cols
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_matrix(out: &mut Vec<String>, t: Option<&TransferMatrix>) {
    match t {
        Some(t) => {
            for z in t.flat() {
                out.push(fmt_f64(z.re));
                out.push(fmt_f64(z.im));
            }
        }
        None => out.extend(vec![String::new(); 8]),
    }
}

pub fn record(row: &SweepRow) -> Vec<String> {
    let mut out = vec![fmt_f64(row.h)];
    push_matrix(&mut out, row.extracted.as_ref());
    push_matrix(&mut out, Some(&row.predicted));
    match &row.errors {
        Some(e) => out.extend(e.abs.iter().map(|v| fmt_f64(*v))),
        None => out.extend(vec![String::new(); 4]),
    }
    let status = match (&row.status, &row.extracted) {
        (RowStatus::Failed { .. }, _) => "failed",
        (RowStatus::Ok, Some(_)) => "ok",
        (RowStatus::Ok, None) => "predicted",
    };
    out.push(status.into());
    out
}

pub fn write_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Output(e.to_string());
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header()).map_err(err)?;
    for row in rows {
        wtr.write_record(record(row)).map_err(err)?;
    }
    wtr.flush().map_err(|e| CliError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crossing_core::{Complex64, TransferKind};

    #[test]
    fn header_and_record_have_the_same_width() {
        let t = TransferMatrix::identity(1e-2, TransferKind::Predicted);
        let row = SweepRow {
            h: 1e-2,
            extracted: None,
            predicted: t,
            errors: None,
            status: RowStatus::Ok,
        };
        assert_eq!(header().len(), 22);
        assert_eq!(record(&row).len(), 22);
        assert_eq!(record(&row)[0], "1.0000000000000000e-2");
        assert_eq!(record(&row)[21], "predicted");
    }

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(fmt_f64(Complex64::new(0.1, 0.0).re), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
    }
}
