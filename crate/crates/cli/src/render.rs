//! Output rendering for reward reports: aligned table, JSON records, CSV.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use tree_shapley::io::format_rational;
use tree_shapley::scalar::round_half_away;
use tree_shapley::{NodeId, Rational, RewardReport};

use crate::config::OutputFormat;

/// Integer display value (round half away from zero).
pub fn display_value(r: &Rational) -> BigInt {
    round_half_away(r)
}

pub fn cell(r: &Rational, exact: bool) -> String {
    if exact {
        format_rational(r)
    } else {
        display_value(r).to_string()
    }
}

#[derive(Serialize)]
struct Record<'a> {
    mechanism: &'a str,
    node: NodeId,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    exact: String,
    display: serde_json::Value,
}

pub(crate) fn json_integer(v: &BigInt) -> serde_json::Value {
    match v.to_i64() {
        Some(x) => serde_json::Value::from(x),
        None => serde_json::Value::from(v.to_string()),
    }
}

pub fn render_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

pub fn render_report(
    report: &RewardReport,
    labels: &BTreeMap<NodeId, String>,
    format: OutputFormat,
    exact: bool,
) -> String {
    match format {
        OutputFormat::Table => {
            let s = report.summary;
            let mut rows = Vec::new();
            let mut header = vec!["mechanism".to_string()];
            if let Some((_, first)) = report.rows.first() {
                header.extend(first.ids().map(|id| labels.get(&id).cloned().unwrap_or_else(|| id.to_string())));
            }
            header.push("total".into());
            rows.push(header);
            for (spec, alloc) in &report.rows {
                let mut row = vec![spec.label().to_string()];
                row.extend(alloc.values().map(|x| cell(x, exact)));
                row.push(cell(alloc.total(), exact));
                rows.push(row);
            }
            format!("# nodes {} height {} referrals {}\n{}", s.nodes, s.height, s.referrals, render_table(&rows))
        }
        OutputFormat::Records => {
            let mut out = String::new();
            for (spec, alloc) in &report.rows {
                for (id, x) in alloc.iter() {
                    let rec = Record {
                        mechanism: spec.label(),
                        node: id,
                        label: labels.get(&id).map(String::as_str),
                        exact: format_rational(x),
                        display: json_integer(&display_value(x)),
                    };
                    out.push_str(&serde_json::to_string(&rec).expect("records serialize"));
                    out.push('\n');
                }
            }
            out
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["mechanism", "node", "label", "exact", "display"]).expect("in-memory write");
            for (spec, alloc) in &report.rows {
                for (id, x) in alloc.iter() {
                    w.write_record([
                        spec.label().to_string(),
                        id.to_string(),
                        labels.get(&id).cloned().unwrap_or_default(),
                        format_rational(x),
                        display_value(x).to_string(),
                    ])
                    .expect("in-memory write");
                }
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
        }
    }
}
