use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::model::VerificationReport;

use super::ExperimentOutcome;

pub const CSV_HEADER: [&str; 12] = [
    "experiment",
    "n",
    "datum_id",
    "weight_id",
    "schedule_param",
    "lhs",
    "rhs",
    "abs_residual",
    "rel_residual",
    "extrapolated_limit",
    "limit_error",
    "pass",
];

/// 17 significant digits.
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV row per report row. The extrapolated limit, when the report has
/// one, is repeated on every row of that report.
pub fn write_csv<W: Write>(out: W, experiment: &str, reports: &[VerificationReport]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for report in reports {
        let (limit, limit_error) = match report.limit {
            Some(l) => (float(l.limit), float(l.error)),
            None => (String::new(), String::new()),
        };
        let n = report.dimension.to_string();
        for row in &report.rows {
            w.write_record([
                experiment,
                &n,
                &report.datum,
                &report.weight,
                &row.param.to_string(),
                &float(row.lhs),
                &float(row.rhs),
                &float(row.abs_residual),
                &float(row.rel_residual),
                &limit,
                &limit_error,
                if row.pass { "true" } else { "false" },
            ])?;
        }
    }
    w.flush()
}

pub(crate) fn write_csv_file(path: &Path, experiment: &str, reports: &[VerificationReport]) -> io::Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    write_csv(&mut file, experiment, reports)?;
    file.flush()
}

/// Plain-text summary: one block per experiment, failing rows named.
pub(crate) fn summary(outcomes: &[ExperimentOutcome]) -> String {
    let mut s = String::new();
    for o in outcomes {
        let status = if o.pass() { "PASS" } else { "FAIL" };
        s.push_str(&format!("{status} {} ({})\n", o.name, o.kind));
        match &o.result {
            Err(e) => s.push_str(&format!("  error: {e}\n")),
            Ok(reports) => {
                for r in reports {
                    let status = if r.pass { "pass" } else { "FAIL" };
                    s.push_str(&format!(
                        "  {status} n={} datum={} weight={}",
                        r.dimension, r.datum, r.weight
                    ));
                    if let Some(l) = r.limit {
                        s.push_str(&format!(" limit={:.10e}±{:.2e}", l.limit, l.error));
                    }
                    s.push('\n');
                    for row in r.failing_rows() {
                        s.push_str(&format!(
                            "    failing row {}: lhs={:.10e} rhs={:.10e} rel_residual={:.3e}\n",
                            row.param, row.lhs, row.rhs, row.rel_residual
                        ));
                    }
                    for note in &r.notes {
                        s.push_str(&format!("    note: {note}\n"));
                    }
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LimitEstimate, ReportRow, ScheduleParam};

    #[test]
    fn csv_layout() {
        let mut r = VerificationReport::new("identity", 1, "g", "psi_eps(1)", 1e-6);
        r.rows
            .push(ReportRow::compare(ScheduleParam::Value(0.5), 1.0, 1.0, 1.0, 1e-6));
        r.rows
            .push(ReportRow::compare(ScheduleParam::Limit, 2.0, 1.0, 1.0, 1e-6));
        r.limit = Some(LimitEstimate {
            limit: 2.0,
            error: 0.1,
            exponent: None,
        });
        let mut buf = Vec::new();
        write_csv(&mut buf, "quick", &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(
            lines[1],
            "quick,1,g,psi_eps(1),5.0000000000000000e-1,1.0000000000000000e0,1.0000000000000000e0,\
             0.0000000000000000e0,0.0000000000000000e0,2.0000000000000000e0,1.0000000000000001e-1,true"
        );
        assert!(lines[2].starts_with("quick,1,g,psi_eps(1),inf,"));
        assert!(lines[2].ends_with(",false"));
    }
}
