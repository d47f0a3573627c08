//! Report documents.
//!
//! JSON reports have a fixed field order and every float rounded to 12
//! significant digits, so identical runs produce byte-identical output.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::netsim::{AggregateReport, AggregateStats, ScenarioConfig, Stat, TrialReport};

pub const SCHEMA_VERSION: &str = "1.0";

/// Significant digits kept for every float in JSON output.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("non-finite number at {0}")]
    NonFinite(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("csv output is not utf-8")]
    Utf8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub scenario: ScenarioConfig,
    pub aggregate: AggregateStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<Vec<TrialReport>>,
}

impl ReportDocument {
    pub fn new(scenario: ScenarioConfig, result: AggregateReport, include_trials: bool) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            scenario,
            aggregate: result.aggregate,
            trials: include_trials.then_some(result.trials),
        }
    }
}

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_floats(value: &mut Value, path: &mut String) -> Result<(), ReportError> {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let rounded = serde_json::Number::from_f64(round_significant(x))
                .ok_or_else(|| ReportError::NonFinite(path.clone()))?;
            *n = rounded;
        }
        Value::Array(items) => {
            for (i, item) in items.iter_mut().enumerate() {
                let len = path.len();
                let _ = write!(path, "[{i}]");
                round_floats(item, path)?;
                path.truncate(len);
            }
        }
        Value::Object(map) => {
            for (key, item) in map.iter_mut() {
                let len = path.len();
                let _ = write!(path, ".{key}");
                round_floats(item, path)?;
                path.truncate(len);
            }
        }
        _ => {}
    }
    Ok(())
}

fn check_finite(doc: &ReportDocument) -> Result<(), ReportError> {
    // serde_json turns NaN into null silently; catch it before that.
    let mut bad = None;
    let mut visit = |label: &str, x: f64| {
        if !x.is_finite() && bad.is_none() {
            bad = Some(label.to_string());
        }
    };
    let agg = &doc.aggregate;
    for (label, stat) in [
        ("aggregate.fidelity", Some(&agg.fidelity)),
        ("aggregate.chsh", agg.chsh.as_ref()),
        ("aggregate.qber", agg.qber.as_ref()),
    ] {
        if let Some(s) = stat {
            for x in [s.mean, s.stddev, s.min, s.max] {
                visit(label, x);
            }
        }
    }
    for t in doc.trials.iter().flatten() {
        visit("trials.mean_fidelity", t.mean_fidelity);
        t.fidelities.iter().for_each(|&f| visit("trials.fidelities", f));
        t.chsh_values().for_each(|x| visit("trials.agents.S", x));
        t.qber_values().for_each(|x| visit("trials.agents.qber", x));
    }
    match bad {
        Some(label) => Err(ReportError::NonFinite(label)),
        None => Ok(()),
    }
}

pub fn render_json(doc: &ReportDocument) -> Result<String, ReportError> {
    check_finite(doc)?;
    let mut value = serde_json::to_value(doc)?;
    round_floats(&mut value, &mut String::from("$"))?;
    let mut out = serde_json::to_string_pretty(&value)?;
    out.push('\n');
    Ok(out)
}

/// Columns: `trial, mean_fidelity, residual_shift, chsh_min, qber_max,
/// compromised_count`. `residual_shift` lists the per-position shifts as
/// digits; `chsh_min` is the smallest `|S|` among the trial's Ekert91
/// sessions; empty cells mean no such session.
pub fn render_csv(trials: &[TrialReport]) -> Result<String, ReportError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "trial",
        "mean_fidelity",
        "residual_shift",
        "chsh_min",
        "qber_max",
        "compromised_count",
    ])?;
    let num = |x: Option<f64>| x.map(|v| round_significant(v).to_string()).unwrap_or_default();
    for t in trials {
        let shift: String = t.residual_shift.iter().map(|s| char::from(b'0' + s)).collect();
        let chsh_min = t.chsh_values().map(f64::abs).reduce(f64::min);
        let qber_max = t.qber_values().reduce(f64::max);
        writer.write_record([
            t.trial_index.to_string(),
            num(Some(t.mean_fidelity)),
            shift,
            num(chsh_min),
            num(qber_max),
            t.compromised_sessions.to_string(),
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| ReportError::Csv(e.into_error().into()))?;
    String::from_utf8(bytes).map_err(|_| ReportError::Utf8)
}

fn stat_line(out: &mut String, label: &str, stat: Option<&Stat>) {
    match stat {
        Some(s) => {
            let _ = writeln!(
                out,
                "  {label:<10} mean {:.6}  sd {:.6}  min {:.6}  max {:.6}  (n = {})",
                s.mean, s.stddev, s.min, s.max, s.count
            );
        }
        None => {
            let _ = writeln!(out, "  {label:<10} n/a");
        }
    }
}

pub fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let sc = &doc.scenario;
    let agg = &doc.aggregate;
    let _ = writeln!(out, "controlled teleportation report (schema {})", doc.schema_version);
    let _ = writeln!(out, "  message qubits  {}", sc.m);
    let agents: Vec<String> = sc
        .agents
        .iter()
        .map(|a| {
            let role = if sc.collaborators.contains(&a.id) {
                "collaborates"
            } else {
                "withholds"
            };
            format!("{} ({:?}, {role})", a.id, a.protocol)
        })
        .collect();
    let _ = writeln!(
        out,
        "  agents          {}",
        if agents.is_empty() {
            "none".into()
        } else {
            agents.join(", ")
        }
    );
    let _ = writeln!(
        out,
        "  trials          {}  (master seed {})",
        agg.trials, sc.master_seed
    );
    let _ = writeln!(out, "results");
    stat_line(&mut out, "fidelity", Some(&agg.fidelity));
    stat_line(&mut out, "CHSH S", agg.chsh.as_ref());
    stat_line(&mut out, "QBER", agg.qber.as_ref());
    let _ = writeln!(out, "  exact trials      {}/{}", agg.exact_trials, agg.trials);
    let _ = writeln!(out, "  corrupted trials  {}/{}", agg.corrupted_trials, agg.trials);
    let _ = writeln!(
        out,
        "  compromised key sessions discarded  {}",
        agg.compromised_sessions
    );
    if let Some(trials) = &doc.trials {
        let _ = writeln!(out, "trials");
        for t in trials {
            let _ = writeln!(
                out,
                "  #{:<4} announced {}  decoded {}  true {}  mean fidelity {:.6}",
                t.trial_index,
                t.announced_codes.rendered(),
                t.decoded_codes.rendered(),
                t.true_codes.rendered(),
                t.mean_fidelity
            );
        }
    }
    out
}

pub fn render(doc: &ReportDocument, format: Format) -> Result<String, ReportError> {
    match format {
        Format::Json => render_json(doc),
        Format::Csv => render_csv(doc.trials.as_deref().unwrap_or(&[])),
        Format::Text => Ok(render_text(doc)),
    }
}
