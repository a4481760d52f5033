//! Trajectory CSV, JSON-lines reports and the report table.

use std::fmt::Write as _;

use algebroid_core::dynamics::Trajectory;
use algebroid_core::expr::variable_names;
use algebroid_core::verify::VerificationReport;
use serde::Serialize;

/// Shortest decimal that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn trajectory_csv(tr: &Trajectory, n: usize) -> String {
    let m = tr.states.first().map_or(0, |s| s.fiber.len());
    let mut header = vec!["t".to_string()];
    header.extend(variable_names(n, m, tr.side.fiber_prefix()));
    header.extend(tr.monitors.iter().map(|(name, _)| name.clone()));
    let mut out = header.join(",");
    out.push('\n');
    for (k, (t, s)) in tr.times.iter().zip(&tr.states).enumerate() {
        let mut row = vec![num(*t)];
        row.extend(s.x.iter().chain(&s.fiber).map(|v| num(*v)));
        // an aborted step may have stored no monitor value
        row.extend(tr.monitors.iter().map(|(_, series)| series.get(k).map_or(String::new(), |v| num(*v))));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ReportLine<'a> {
    check: &'a str,
    model: &'a str,
    samples: usize,
    skipped: usize,
    max_residual: f64,
    tol: f64,
    passed: bool,
    expected_fail: bool,
    seed: u64,
}

/// One JSON object per line. Non-finite residuals serialize as `null`.
pub fn reports_jsonl(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let line = ReportLine {
            check: &r.check,
            model: &r.model,
            samples: r.samples,
            skipped: r.skipped,
            max_residual: r.max_residual,
            tol: r.tol,
            passed: r.passed,
            expected_fail: r.expected_fail,
            seed: r.seed,
        };
        out.push_str(&serde_json::to_string(&line).expect("report serializes"));
        out.push('\n');
    }
    out
}

pub fn reports_table(reports: &[VerificationReport]) -> String {
    let cw = reports.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
    let mw = reports.iter().map(|r| r.model.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<15} {:<cw$} {:<mw$} {:>7} {:>7} {:>12} {:>9}",
        "status", "check", "model", "samples", "skipped", "max_residual", "tol"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<15} {:<cw$} {:<mw$} {:>7} {:>7} {:>12.3e} {:>9.1e}",
            r.status(),
            r.check,
            r.model,
            r.samples,
            r.skipped,
            r.max_residual,
            r.tol
        );
    }
    out
}
