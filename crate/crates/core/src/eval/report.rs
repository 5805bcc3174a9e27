use std::fmt::Write as _;

use super::{EvalError, MetricsReport};

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub model: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision/recall/F1 per model, sorted by F1 (descending, stable).
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

pub fn comparison_report(reports: &[MetricsReport]) -> Result<ComparisonTable, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::Argument(
            "comparison needs at least one report".into(),
        ));
    }
    Ok(ComparisonTable::from_rows(
        reports
            .iter()
            .map(|r| ComparisonRow {
                model: r.model.clone(),
                precision: r.overall.precision,
                recall: r.overall.recall,
                f1: r.overall.f1,
            })
            .collect(),
    ))
}

impl ComparisonTable {
    pub fn from_rows(mut rows: Vec<ComparisonRow>) -> Self {
        rows.sort_by(|a, b| b.f1.total_cmp(&a.f1));
        ComparisonTable { rows }
    }

    /// Aligned plain text, three decimals.
    pub fn render_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.model.chars().count())
            .max()
            .unwrap_or(0)
            .max("Model".len());
        let mut out = String::new();
        writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}  {:>9}",
            "Model", "Precision", "Recall", "F1"
        )
        .unwrap();
        writeln!(out, "{}", "-".repeat(width + 33)).unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:<width$}  {:>9.3}  {:>9.3}  {:>9.3}",
                r.model, r.precision, r.recall, r.f1
            )
            .unwrap();
        }
        out
    }

    /// Tab-separated values with a header row, three decimals.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("model\tprecision\trecall\tf1\n");
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{:.3}\t{:.3}\t{:.3}",
                r.model, r.precision, r.recall, r.f1
            )
            .unwrap();
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<Self, EvalError> {
        let mut lines = text.lines();
        if lines.next() != Some("model\tprecision\trecall\tf1") {
            return Err(EvalError::Argument("missing comparison header".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| EvalError::Argument(format!("row {}: bad number {s:?}", i + 1)))
            };
            if f.len() != 4 {
                return Err(EvalError::Argument(format!(
                    "row {}: expected 4 fields",
                    i + 1
                )));
            }
            rows.push(ComparisonRow {
                model: f[0].to_string(),
                precision: num(f[1])?,
                recall: num(f[2])?,
                f1: num(f[3])?,
            });
        }
        Ok(ComparisonTable { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(m: &str, p: f64, r: f64, f: f64) -> ComparisonRow {
        ComparisonRow {
            model: m.into(),
            precision: p,
            recall: r,
            f1: f,
        }
    }

    #[test]
    fn sorted_descending() {
        let t = ComparisonTable::from_rows(vec![
            row("svc", 0.84, 0.17, 0.282),
            row("dnn", 0.965, 0.957, 0.961),
        ]);
        assert_eq!(t.rows[0].model, "dnn");
        assert!(t.render_text().lines().nth(2).unwrap().starts_with("dnn"));
    }

    #[test]
    fn single_row() {
        let t = ComparisonTable::from_rows(vec![row("only", 0.5, 0.5, 0.5)]);
        assert_eq!(t.render_tsv().lines().count(), 2);
    }

    #[test]
    fn tsv_round_trip_at_three_decimals() {
        let t = ComparisonTable::from_rows(vec![
            row("a", 0.965, 0.957, 0.961),
            row("b b", 0.1, 0.2, 0.133),
        ]);
        let back = ComparisonTable::parse_tsv(&t.render_tsv()).unwrap();
        assert_eq!(back, t);
        assert!(comparison_report(&[]).is_err());
    }
}
