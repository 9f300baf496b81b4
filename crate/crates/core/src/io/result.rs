use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::solvers::SolveResult;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Table,
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{}", v + 0.0))
}

/// Renders a result as pretty JSON or as a fixed-width summary.
pub fn emit_result(result: &SolveResult, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(result).expect("results always serialize");
            s.push('\n');
            s
        }
        OutputFormat::Table => {
            let mut s = String::new();
            let status = serde_json::to_value(result.status).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            let _ = writeln!(s, "{:<12} {:<12} {:>24} {:>10} {:>10} {:>14}", "solver", "status", "objective", "iterations", "cuts", "max_violation");
            let _ = writeln!(
                s,
                "{:<12} {:<12} {:>24} {:>10} {:>10} {:>14.3e}",
                result.solver.to_string(),
                status,
                num(result.objective),
                result.stats.iterations,
                result.stats.cuts_added,
                result.max_violation
            );
            if !result.x.is_empty() {
                let _ = writeln!(s, "\n{:<24} {:>24}", "variable", "value");
                for (name, v) in result.var_names.iter().zip(&result.x) {
                    let _ = writeln!(s, "{name:<24} {v:>24}");
                }
            }
            for r in &result.rules {
                let slopes: Vec<String> = r.slopes.iter().map(|(p, v)| format!("{v}*{p}")).collect();
                let mut rule = format!("{}", r.intercept);
                for term in slopes {
                    rule.push_str(" + ");
                    rule.push_str(&term);
                }
                let _ = writeln!(s, "rule {:<19} {rule}", r.adjustable);
            }
            if !result.worst_case.is_empty() {
                let _ = writeln!(s, "\n{:<24} {:>24}", "constraint", "worst_slack");
                for r in &result.worst_case {
                    let _ = writeln!(s, "{:<24} {:>24}", r.label, num(r.slack));
                }
            }
            s
        }
    }
}
