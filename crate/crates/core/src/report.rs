//! Plain-text tables for a result bundle.

use std::fmt::Write;

use serde::Serialize;

use crate::analysis::Stats;
use crate::bundle::ResultBundle;

/// The serialized name of a unit enum variant.
fn label<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        _ => "?".into(),
    }
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.digits$}"))
}

pub fn leaderboard_table(bundle: &ResultBundle) -> String {
    let mut out = String::new();
    let width = bundle.leaderboard.iter().map(|r| r.model_id.len()).max().unwrap_or(5).max(5);
    writeln!(out, "{:<width$}  {:>7}  {:>7}  {:>6}  {:>8}", "model", "theta", "acc %", "rank θ", "rank acc").unwrap();
    for row in &bundle.leaderboard {
        let mark = if row.flip { " *" } else { "" };
        writeln!(
            out,
            "{:<width$}  {:>7.3}  {:>7.1}  {:>6}  {:>8}{mark}",
            row.model_id, row.composite, row.overall_accuracy, row.rank_theta, row.rank_accuracy
        )
        .unwrap();
        if let Some(note) = &row.tie_note {
            writeln!(out, "{:<width$}    ({note})", "").unwrap();
        }
    }
    if bundle.leaderboard.iter().any(|r| r.flip) {
        out.push_str("* ability and accuracy ranks differ\n");
    }
    out
}

pub fn reliability_table(bundle: &ResultBundle) -> String {
    let mut out = String::new();
    writeln!(out, "{:<12}  {:>6}  {:>8}  {:>11}  {:>6}  {}", "topic", "items", "excluded", "reliability", "cycles", "converged")
        .unwrap();
    for fit in &bundle.fits {
        writeln!(
            out,
            "{:<12}  {:>6}  {:>8}  {:>11}  {:>6}  {}",
            fit.topic,
            fit.fitted_items().count(),
            fit.exclusions.excluded.len(),
            fmt_opt(fit.reliability, 3),
            fit.em_cycles,
            if fit.converged { "yes" } else { "no" }
        )
        .unwrap();
    }
    out
}

pub fn item_summary_table(bundle: &ResultBundle) -> String {
    let Some(s) = &bundle.item_summary else {
        return "no fitted items\n".into();
    };
    let mut out = String::new();
    writeln!(out, "{} fitted items", s.n_items).unwrap();
    writeln!(out, "{:<14}  {:>7}  {:>7}  {:>7}  {:>7}", "", "mean", "median", "q25", "q75").unwrap();
    let mut row = |name: &str, st: &Stats| {
        writeln!(out, "{name:<14}  {:>7.3}  {:>7.3}  {:>7.3}  {:>7.3}", st.mean, st.median, st.q25, st.q75).unwrap();
    };
    row("discrimination", &s.a);
    row("difficulty", &s.b);
    row("accuracy", &s.accuracy);
    out
}

/// Sorted by ability per dollar, as efficiency tables usually are.
pub fn pareto_table(bundle: &ResultBundle) -> String {
    let mut points = bundle.pareto.clone();
    points.sort_by(|x, y| y.theta_per_dollar.total_cmp(&x.theta_per_dollar).then_with(|| x.model_id.cmp(&y.model_id)));
    let width = points.iter().map(|p| p.model_id.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    writeln!(out, "{:<width$}  {:>7}  {:>9}  {:>7}  {}", "model", "theta", "theta/$", "theta/s", "frontier").unwrap();
    for p in &points {
        writeln!(
            out,
            "{:<width$}  {:>7.3}  {:>9.3}  {:>7.3}  {}",
            p.model_id,
            p.theta,
            p.theta_per_dollar,
            p.theta_per_second,
            if p.dominated { "" } else { "yes" }
        )
        .unwrap();
    }
    out
}

pub fn audit_table(bundle: &ResultBundle) -> String {
    if bundle.audit.entries.is_empty() {
        return "none\n".into();
    }
    let mut out = String::new();
    writeln!(out, "{:<16}  {:<12}  {:>7}  {:>7}  {:<28}  {}", "item", "topic", "a", "b", "status", "flags").unwrap();
    for e in &bundle.audit.entries {
        let kinds: Vec<String> = e.flag_kinds.iter().map(label).collect();
        writeln!(
            out,
            "{:<16}  {:<12}  {:>7.3}  {:>7.3}  {:<28}  {}",
            e.item_id,
            e.topic.abbr(),
            e.a,
            e.b,
            label(&e.status),
            kinds.join(",")
        )
        .unwrap();
        if !e.top_missers.is_empty() {
            writeln!(out, "    missed by top models: {}", e.top_missers.join(", ")).unwrap();
        }
    }
    out
}

/// All report sections in order.
pub fn render_report(bundle: &ResultBundle) -> String {
    let sections = [
        ("Leaderboard", leaderboard_table(bundle)),
        ("Reliability", reliability_table(bundle)),
        ("Item parameters", item_summary_table(bundle)),
        ("Cost and latency efficiency", pareto_table(bundle)),
        ("Audit worklist", audit_table(bundle)),
    ];
    let mut out = String::new();
    for (i, (title, body)) in sections.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "== {title} ==").unwrap();
        out.push_str(body);
    }
    out
}
