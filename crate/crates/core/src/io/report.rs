use std::fmt::Write;
use std::str::FromStr;

use crate::combiner::Method;
use crate::error::Error;
use crate::evaluation::ComparisonTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::validation("format", format!("unknown report format `{other}`"))),
        }
    }
}

fn row_label(method: Method) -> &'static str {
    match method {
        Method::TopModel => "Top Performing Model",
        Method::Average => "Averaging Prediction",
        Method::Product => "Product Rule",
        Method::Negation => "Negation Rule",
    }
}

/// Renders a comparison table. Output depends only on the table contents.
pub fn write_report(table: &ComparisonTable, format: ReportFormat) -> Vec<u8> {
    let mut out = String::new();
    match format {
        ReportFormat::Text => {
            let _ = writeln!(out, "{:<22} {:>8} {:>8} {:>16}", "Methodology", "Matches", "Total", "Performance (%)");
            let _ = writeln!(out, "{}", "-".repeat(22 + 1 + 8 + 1 + 8 + 1 + 16));
            for row in &table.rows {
                let _ = writeln!(
                    out,
                    "{:<22} {:>8} {:>8} {:>16}",
                    row_label(row.method),
                    row.matches,
                    row.total,
                    row.percent()
                );
            }
        }
        ReportFormat::Csv => {
            out.push_str("method,matches,total,accuracy_pct\n");
            for row in &table.rows {
                let _ = writeln!(out, "{},{},{},{}", row.method, row.matches, row.total, row.percent());
            }
        }
    }
    out.into_bytes()
}
