//! CSV and JSON emission with fixed 12-significant-digit floats.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::OutputFormat;
use super::run::{CellSummary, ExperimentOutput, TrialResult};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 19] = [
    "trial",
    "scenario",
    "case",
    "eta0",
    "theta_true",
    "alpha_true",
    "beta_true",
    "n_z",
    "axis_x",
    "axis_y",
    "axis_z",
    "alpha_hat",
    "success_emp",
    "success_analytic",
    "success_oracle",
    "z_score",
    "shots_learn",
    "shots_holdout",
    "status",
];

const DIGITS: usize = 12;

/// `printf("%.12g")`: 12 significant digits, trailing zeros dropped.
pub fn format_g12(x: f64) -> String {
    format_sig(x, DIGITS)
}

fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to 12 significant digits; the shortest round-trip rendering of
/// the result then has at most 12 digits.
pub fn round_g12(x: f64) -> f64 {
    if x.is_finite() {
        format_g12(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_g12).unwrap_or_default()
}

pub fn render_csv(rows: &[TrialResult]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let fields = [
            r.trial.to_string(),
            r.scenario.to_string(),
            r.case.map(|c| c.to_string()).unwrap_or_default(),
            format_g12(r.eta0),
            format_g12(r.theta_true),
            format_g12(r.alpha_true),
            format_g12(r.beta_true),
            opt(r.n_z),
            opt(r.axis.map(|a| a.x)),
            opt(r.axis.map(|a| a.y)),
            opt(r.axis.map(|a| a.z)),
            opt(r.alpha_hat),
            opt(r.success_emp),
            opt(r.success_analytic),
            opt(r.success_oracle),
            opt(r.z_score),
            r.shots_learn.to_string(),
            r.shots_holdout.to_string(),
            r.status.clone(),
        ];
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

#[derive(Serialize)]
struct JsonRow<'a> {
    trial: u64,
    cell: u64,
    scenario: &'a str,
    case: Option<String>,
    eta0: f64,
    theta_true: f64,
    alpha_true: f64,
    beta_true: f64,
    n_z: Option<f64>,
    axis_x: Option<f64>,
    axis_y: Option<f64>,
    axis_z: Option<f64>,
    alpha_hat: Option<f64>,
    theta_hat: Option<f64>,
    n_hat_x: Option<f64>,
    n_hat_y: Option<f64>,
    n_hat_z: Option<f64>,
    success_emp: Option<f64>,
    success_oriented: Option<f64>,
    swapped: Option<bool>,
    holdout_correct: Option<u64>,
    success_analytic: Option<f64>,
    success_oracle: Option<f64>,
    z_score: Option<f64>,
    shots_learn: u64,
    shots_holdout: u64,
    qubits_consumed: u64,
    status: &'a str,
}

#[derive(Serialize)]
struct JsonSummary {
    cell: u64,
    scenario: String,
    eta0: f64,
    theta: f64,
    alpha: f64,
    beta: f64,
    n_z: Option<f64>,
    trials: u64,
    ok_trials: u64,
    holdout_total: u64,
    pooled_success: Option<f64>,
    success_analytic: Option<f64>,
    pooled_z: Option<f64>,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    rows: Vec<JsonRow<'a>>,
    summary: Vec<JsonSummary>,
}

fn r12(x: Option<f64>) -> Option<f64> {
    x.map(round_g12)
}

fn json_row(r: &TrialResult) -> JsonRow<'_> {
    JsonRow {
        trial: r.trial,
        cell: r.cell,
        scenario: r.scenario.as_str(),
        case: r.case.map(|c| c.to_string()),
        eta0: round_g12(r.eta0),
        theta_true: round_g12(r.theta_true),
        alpha_true: round_g12(r.alpha_true),
        beta_true: round_g12(r.beta_true),
        n_z: r12(r.n_z),
        axis_x: r12(r.axis.map(|a| a.x)),
        axis_y: r12(r.axis.map(|a| a.y)),
        axis_z: r12(r.axis.map(|a| a.z)),
        alpha_hat: r12(r.alpha_hat),
        theta_hat: r12(r.theta_hat),
        n_hat_x: r12(r.n_hat.map(|a| a.x)),
        n_hat_y: r12(r.n_hat.map(|a| a.y)),
        n_hat_z: r12(r.n_hat.map(|a| a.z)),
        success_emp: r12(r.success_emp),
        success_oriented: r12(r.success_oriented),
        swapped: r.swapped,
        holdout_correct: r.holdout_correct,
        success_analytic: r12(r.success_analytic),
        success_oracle: r12(r.success_oracle),
        z_score: r12(r.z_score),
        shots_learn: r.shots_learn,
        shots_holdout: r.shots_holdout,
        qubits_consumed: r.qubits_consumed,
        status: &r.status,
    }
}

fn json_summary(s: &CellSummary) -> JsonSummary {
    JsonSummary {
        cell: s.cell,
        scenario: s.scenario.to_string(),
        eta0: round_g12(s.eta0),
        theta: round_g12(s.theta),
        alpha: round_g12(s.alpha),
        beta: round_g12(s.beta),
        n_z: r12(s.n_z),
        trials: s.trials,
        ok_trials: s.ok_trials,
        holdout_total: s.holdout_total,
        pooled_success: r12(s.pooled_success),
        success_analytic: r12(s.success_analytic),
        pooled_z: r12(s.pooled_z),
    }
}

pub fn render_json(output: &ExperimentOutput) -> String {
    let doc = JsonDoc {
        rows: output.rows.iter().map(json_row).collect(),
        summary: output.summary.iter().map(json_summary).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("rows serialize");
    text.push('\n');
    text
}

pub fn render(output: &ExperimentOutput, format: OutputFormat) -> Result<String> {
    if output.rows.is_empty() {
        return Err(Error::Contract("no results to emit".into()));
    }
    Ok(match format {
        OutputFormat::Csv => render_csv(&output.rows),
        OutputFormat::Json => render_json(output),
    })
}

/// Writes results to `path`, or to stdout when `path` is `None`.
pub fn emit_results(output: &ExperimentOutput, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let text = render(output, format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.to_path_buf(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Human-readable per-cell summary.
pub fn render_summary(summary: &[CellSummary]) -> String {
    let mut out = String::new();
    for s in summary {
        let _ = writeln!(
            out,
            "cell {}: {} eta0={} theta={} alpha={}{} ok={}/{} pooled={} analytic={} z={}",
            s.cell,
            s.scenario,
            format_sig(s.eta0, 6),
            format_sig(s.theta, 6),
            format_sig(s.alpha, 6),
            s.n_z.map(|z| format!(" nz={}", format_sig(z, 6))).unwrap_or_default(),
            s.ok_trials,
            s.trials,
            s.pooled_success.map_or("-".into(), |p| format_sig(p, 6)),
            s.success_analytic.map_or("-".into(), |p| format_sig(p, 6)),
            s.pooled_z.map_or("-".into(), |z| format_sig(z, 3)),
        );
    }
    out
}
