//! Serialisation of result tables to csv, json and aligned text.
//!
//! Floats are written in their shortest round-trip form, so identical
//! inputs give identical bytes and csv and json carry the same values.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::SpanCategory;
use crate::eval::EvalReport;
use crate::model::SuggestionTable;
use crate::synth::GridResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}` (csv, json or text)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum Report {
    Eval(EvalReport),
    Suggestions(SuggestionTable),
    Grid(GridResult),
    Categories(Vec<SpanCategory>),
}

impl Report {
    pub fn header(&self) -> &'static [&'static str] {
        match self {
            Report::Eval(_) => &["group", "balanced_accuracy", "auroc", "support"],
            Report::Suggestions(_) => &["group", "suggested_count", "top_words"],
            Report::Grid(_) => &[
                "alpha",
                "eta",
                "xi",
                "tokens",
                "run",
                "accuracy",
                "majority_baseline",
            ],
            Report::Categories(_) => &["doc_id", "span_id", "category"],
        }
    }

    /// Table body as strings, in emission order.
    pub fn records(&self) -> Vec<Vec<String>> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        match self {
            Report::Eval(r) => r
                .rows
                .iter()
                .chain(&r.total_row)
                .map(|row| {
                    vec![
                        row.group.clone(),
                        row.balanced_accuracy.to_string(),
                        opt(row.auroc),
                        row.support.to_string(),
                    ]
                })
                .collect(),
            Report::Suggestions(t) => t
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.group.clone(),
                        row.suggested_count.to_string(),
                        row.top_words.join(";"),
                    ]
                })
                .collect(),
            Report::Grid(g) => g
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.alpha.to_string(),
                        r.eta.to_string(),
                        r.xi.to_string(),
                        r.tokens.to_string(),
                        r.run.to_string(),
                        r.accuracy.to_string(),
                        r.majority_baseline.to_string(),
                    ]
                })
                .collect(),
            Report::Categories(c) => c
                .iter()
                .map(|s| {
                    vec![
                        s.doc_id.clone(),
                        s.span_id.to_string(),
                        s.category.to_string(),
                    ]
                })
                .collect(),
        }
    }
}

pub fn emit_report(report: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(report.header()).expect("in-memory write");
            for rec in report.records() {
                w.write_record(&rec).expect("in-memory write");
            }
            w.into_inner().expect("in-memory write")
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("serialisable report");
            out.push(b'\n');
            out
        }
        Format::Text => {
            let mut text = aligned(report.header(), &report.records());
            if let Report::Grid(g) = report {
                text.push('\n');
                text.push_str(&heat_map(g));
            }
            text.into_bytes()
        }
    }
}

pub fn parse_report_json(bytes: &[u8]) -> Result<Report, serde_json::Error> {
    serde_json::from_slice(bytes)
}

fn aligned(header: &[&str], records: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for rec in records {
        for (w, cell) in widths.iter_mut().zip(rec) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let row: Vec<String> = cells
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        out.push_str(row.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for rec in records {
        line(&mut rec.iter().map(String::as_str));
    }
    out
}

const SHADES: [char; 5] = [' ', '░', '▒', '▓', '█'];

/// Mean accuracy per cell, one block per corpus size: alpha down,
/// (eta, xi) across.
fn heat_map(grid: &GridResult) -> String {
    let means = grid.cell_means();
    let mut sizes: Vec<usize> = means.iter().map(|c| c.tokens).collect();
    sizes.dedup();
    sizes.sort_unstable();
    sizes.dedup();
    let mut out = String::new();
    for tokens in sizes {
        let cells: Vec<_> = means.iter().filter(|c| c.tokens == tokens).collect();
        let mut alphas: Vec<f64> = Vec::new();
        let mut cols: Vec<(f64, f64)> = Vec::new();
        for c in &cells {
            if !alphas.contains(&c.alpha) {
                alphas.push(c.alpha);
            }
            if !cols.contains(&(c.eta, c.xi)) {
                cols.push((c.eta, c.xi));
            }
        }
        let _ = writeln!(out, "tokens = {tokens}  (rows: alpha, columns: eta/xi)");
        let _ = write!(out, "{:>8}", "");
        for (eta, xi) in &cols {
            let _ = write!(out, " {:>9}", format!("{eta}/{xi}"));
        }
        out.push('\n');
        for alpha in &alphas {
            let _ = write!(out, "{alpha:>8}");
            for (eta, xi) in &cols {
                match cells
                    .iter()
                    .find(|c| c.alpha == *alpha && c.eta == *eta && c.xi == *xi)
                {
                    Some(c) => {
                        let shade = SHADES[((c.accuracy.clamp(0.0, 1.0) * 4.0).round()) as usize];
                        let _ = write!(out, " {shade}{shade}{:>7.3}", c.accuracy);
                    }
                    None => {
                        let _ = write!(out, " {:>9}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Category;
    use crate::eval::EvalRow;
    use crate::model::SuggestionRow;
    use crate::synth::GridRow;

    fn eval_report() -> EvalReport {
        EvalReport {
            group_by: "author".into(),
            rows: vec![EvalRow {
                group: "A, B".into(),
                balanced_accuracy: 0.1 + 0.2,
                auroc: None,
                support: 3,
            }],
            total_row: Some(EvalRow {
                group: "(total)".into(),
                balanced_accuracy: 2.0 / 3.0,
                auroc: Some(1.0),
                support: 3,
            }),
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::Eval(EvalReport::empty("author"));
        assert_eq!(
            emit_report(&r, Format::Csv),
            b"group,balanced_accuracy,auroc,support\n"
        );
        let r = Report::Suggestions(SuggestionTable {
            group_by: "author".into(),
            rows: vec![],
        });
        assert_eq!(
            emit_report(&r, Format::Csv),
            b"group,suggested_count,top_words\n"
        );
    }

    #[test]
    fn csv_quotes_and_blank_auroc() {
        let text =
            String::from_utf8(emit_report(&Report::Eval(eval_report()), Format::Csv)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "\"A, B\",0.30000000000000004,,3");
        assert_eq!(lines[2], "(total),0.6666666666666666,1,3");
    }

    #[test]
    fn json_roundtrips() {
        for r in [
            Report::Eval(eval_report()),
            Report::Categories(vec![SpanCategory {
                doc_id: "d".into(),
                span_id: 2,
                category: Category::Spelling,
            }]),
        ] {
            let bytes = emit_report(&r, Format::Json);
            assert_eq!(parse_report_json(&bytes).unwrap(), r);
        }
    }

    #[test]
    fn text_is_aligned() {
        let t = Report::Suggestions(SuggestionTable {
            group_by: "author".into(),
            rows: vec![
                SuggestionRow {
                    group: "Brecht".into(),
                    suggested_count: 2,
                    top_words: vec!["und".into(), "Brief".into()],
                },
                SuggestionRow {
                    group: "X".into(),
                    suggested_count: 10,
                    top_words: vec![],
                },
            ],
        });
        let text = String::from_utf8(emit_report(&t, Format::Text)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "group   suggested_count  top_words");
        assert_eq!(lines[1], "Brecht  2                und;Brief");
        assert_eq!(lines[2], "X       10");
    }

    #[test]
    fn grid_text_has_heat_map() {
        let row = |alpha, accuracy| GridRow {
            alpha,
            eta: 0.5,
            xi: 0.1,
            tokens: 100,
            run: 0,
            accuracy,
            majority_baseline: 0.6,
        };
        let g = Report::Grid(GridResult {
            rows: vec![row(0.1, 1.0), row(1.0, 0.0)],
        });
        let text = String::from_utf8(emit_report(&g, Format::Text)).unwrap();
        assert!(text.contains("tokens = 100"));
        assert!(text.contains("██  1.000"));
        assert!(text.contains("    0.000"));
    }
}
