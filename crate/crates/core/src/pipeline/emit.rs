//! Report serialization.
//!
//! JSON keys follow struct field order. Every float in JSON or text output
//! carries 6 significant digits; undefined values are `null` in JSON and
//! `undefined` in text.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use super::analysis::{AnalysisReport, CohortReport, ComparisonReport, FitReport, RecordRow, SummaryReport};

pub const SIGNIFICANT_DIGITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Json,
    #[default]
    Text,
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits; `-0` becomes `0`.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// `%g`-style rendering with [`SIGNIFICANT_DIGITS`] significant digits.
pub fn format_g(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let v = round_sig(v);
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(f) = n.as_f64() {
                *value = serde_json::Number::from_f64(round_sig(f)).map_or(Value::Null, Value::Number);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes `value` as pretty JSON with every float rounded.
pub fn to_rounded_json<S: Serialize>(value: &S) -> Vec<u8> {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_value(&mut v);
    let mut out = serde_json::to_vec_pretty(&v).expect("json value serializes");
    out.push(b'\n');
    out
}

pub fn emit_report(report: &AnalysisReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_rounded_json(report),
        Format::Text => text_report(report).into_bytes(),
    }
}

/// Per-student gain table.
pub fn emit_gains(report: &AnalysisReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_rounded_json(&report.records),
        Format::Text => {
            let mut out = String::new();
            let header = ["student_id", "cohort", "initial", "final", "gain", "increase", "log_diff", "initial_z", "gain_z", "group"];
            let rows: Vec<Vec<String>> = report.records.iter().map(record_cells).collect();
            table(&mut out, &header, &rows);
            out.into_bytes()
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), format_g)
}

fn record_cells(r: &RecordRow) -> Vec<String> {
    vec![
        r.student_id.clone(),
        r.cohort.clone(),
        format_g(r.initial),
        format_g(r.final_score),
        format_g(r.gain),
        opt(r.increase),
        opt(r.log_diff),
        opt(r.initial_z),
        format_g(r.gain_z),
        r.group.unwrap_or("undefined").to_string(),
    ]
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "  {}", parts.join("  ").trim_end());
    };
    line(out, &mut header.iter().copied());
    for row in rows {
        line(out, &mut row.iter().map(String::as_str));
    }
}

fn text_report(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let o = &report.options;
    let _ = writeln!(out, "source: {}", report.source);
    let _ = writeln!(out, "scale: {}", report.scale);
    let _ = writeln!(
        out,
        "options: bins={} bandwidth={} z_threshold={} z_scope={} ci_level={} variance_model={}",
        o.bins.map_or("auto".to_string(), |b| b.to_string()),
        o.bandwidth.map_or("auto".to_string(), format_g),
        format_g(o.z_threshold),
        o.z_scope,
        format_g(o.ci_level),
        o.variance_model
    );
    let _ = writeln!(out, "records: {} read, {} included, {} excluded", report.record_count, report.included_count, report.exclusions.len());
    if !report.exclusions.is_empty() {
        let _ = writeln!(out, "\nexclusions");
        let rows: Vec<Vec<String>> = report
            .exclusions
            .iter()
            .map(|e| vec![e.student_id.clone(), e.cohort.clone(), format_g(e.initial), format_g(e.final_score), e.reason.clone()])
            .collect();
        table(&mut out, &["student_id", "cohort", "initial", "final", "reason"], &rows);
    }
    for c in &report.cohorts {
        cohort_text(&mut out, c);
    }
    cohort_text(&mut out, &report.combined);
    if let Some(c) = &report.comparison {
        comparison_text(&mut out, c);
    }
    out
}

fn summary_rows(c: &CohortReport) -> Vec<Vec<String>> {
    let row = |name: &str, s: &SummaryReport| {
        vec![
            name.to_string(),
            s.n.to_string(),
            format_g(s.mean),
            opt(s.sd),
            opt(s.skewness),
            opt(s.kurtosis_pearson),
            opt(s.kurtosis_excess),
        ]
    };
    let s = &c.summaries;
    let mut rows = vec![row("gain", &s.gain)];
    match &s.increase {
        Some(inc) => rows.push(row("increase", inc)),
        None => rows.push(vec!["increase".into(), "0".into(), "undefined".into(), "undefined".into(), "undefined".into(), "undefined".into(), "undefined".into()]),
    }
    rows.push(row("initial", &s.initial));
    rows.push(row("final", &s.final_score));
    rows
}

fn fit_row(f: &FitReport) -> Vec<String> {
    let coefficients = match &f.coefficients {
        Some(c) => c.iter().map(|&v| format_g(v)).collect::<Vec<_>>().join(" "),
        None => "undefined".into(),
    };
    vec![
        format!("{}~{}", f.response, f.predictor),
        f.degree.to_string(),
        f.n.to_string(),
        coefficients,
        opt(f.r_squared),
        f.error.clone().unwrap_or_default(),
    ]
}

fn cohort_text(out: &mut String, c: &CohortReport) {
    let _ = writeln!(out, "\ncohort {} (n = {})", c.label, c.n);
    table(out, &["variable", "n", "mean", "sd", "skewness", "kurtosis_pearson", "kurtosis_excess"], &summary_rows(c));
    let _ = writeln!(
        out,
        "  mean gain: hake = {}  mean_individual = {}",
        format_g(c.mean_gain.hake),
        format_g(c.mean_gain.mean_individual)
    );
    let e = &c.extremes;
    let _ = writeln!(
        out,
        "  extreme gains (|z| > {}): high {}/{}  low {}/{}",
        format_g(e.z_threshold),
        e.high,
        e.denominator,
        e.low,
        e.denominator
    );
    let q = &c.quadrants;
    let _ = writeln!(
        out,
        "  quadrants (initial/gain vs mean): below/below {}/{}  below/above {}/{}  above/below {}/{}  above/above {}/{}",
        q.below_below, q.denominator, q.below_above, q.denominator, q.above_below, q.denominator, q.above_above, q.denominator
    );
    match (&c.groups, &c.groups_note) {
        (Some(g), _) => {
            let _ = writeln!(
                out,
                "  groups: VERY_HIGH {}/{}  LOW_A {}/{}  LOW_B {}/{}  LOW_C {}/{}  NONE {}/{}",
                g.very_high, g.denominator, g.low_a, g.denominator, g.low_b, g.denominator, g.low_c, g.denominator, g.none, g.denominator
            );
        }
        (None, note) => {
            let _ = writeln!(out, "  groups: undefined ({})", note.as_deref().unwrap_or("unavailable"));
        }
    }
    let rows: Vec<Vec<String>> = c.fits.iter().map(fit_row).collect();
    table(out, &["fit", "degree", "n", "coefficients (ascending)", "r_squared", "error"], &rows);
}

fn comparison_text(out: &mut String, c: &ComparisonReport) {
    let _ = writeln!(out, "\ncomparison {} vs {} ({} test)", c.cohort_a, c.cohort_b, c.variance_model);
    let _ = writeln!(out, "  n: {} / {}", c.n_a, c.n_b);
    let _ = writeln!(out, "  mean gain: {} / {}", format_g(c.mean_a), format_g(c.mean_b));
    let _ = writeln!(
        out,
        "  difference ({} - {}): {}  {}% CI [{}, {}]",
        c.cohort_a,
        c.cohort_b,
        format_g(c.diff_a_minus_b),
        format_g(c.ci_level * 100.0),
        format_g(c.ci_low),
        format_g(c.ci_high)
    );
    let _ = writeln!(out, "  t = {}  df = {}  p = {}", format_g(c.t_stat), format_g(c.df), format_g(c.p_value));
    let _ = writeln!(
        out,
        "  cohen's d ({} - {}) = {}  probability of superiority = {}",
        c.cohort_b,
        c.cohort_a,
        format_g(c.cohens_d_b_minus_a),
        format_g(c.prob_superiority)
    );
}
