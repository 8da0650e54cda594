//! Output emitters. CSV carries 17 significant digits per number,
//! which is enough for every binary64 value to survive a parse back;
//! json-lines uses serde_json's shortest round-trip float encoding.

use gfcalc::{ConvergenceStudy, ResidualReport, SampledResult};
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Result<Self, String> {
        match text {
            "csv" => Ok(OutputFormat::Csv),
            "json-lines" => Ok(OutputFormat::JsonLines),
            other => Err(format!(
                "unknown format `{other}`; expected csv or json-lines"
            )),
        }
    }
}

pub fn sampled(result: &SampledResult, format: OutputFormat) -> String {
    let grid = result.grid();
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("t,value\n");
            for i in 1..=grid.intervals() {
                out.push_str(&format!("{:.16e},{:.16e}\n", grid.node(i), result.value(i)));
            }
            out
        }
        OutputFormat::JsonLines => {
            let mut out = String::new();
            for i in 1..=grid.intervals() {
                out.push_str(&json!({"t": grid.node(i), "value": result.value(i)}).to_string());
                out.push('\n');
            }
            out
        }
    }
}

pub fn report(r: &ResidualReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = format!(
                "# check={} tol={:.16e} max_abs={:.16e} l1={:.16e} passed={}\nt,residual\n",
                r.check_name, r.tolerance_used, r.max_abs, r.l1, r.passed
            );
            for (t, res) in r.nodes.iter().zip(&r.residuals) {
                out.push_str(&format!("{t:.16e},{res:.16e}\n"));
            }
            out
        }
        OutputFormat::JsonLines => {
            let mut line = json!({
                "check_name": r.check_name,
                "nodes": r.nodes,
                "residuals": r.residuals,
                "max_abs": r.max_abs,
                "l1": r.l1,
                "tolerance_used": r.tolerance_used,
                "passed": r.passed,
            })
            .to_string();
            line.push('\n');
            line
        }
    }
}

pub fn study(s: &ConvergenceStudy, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("N,max_abs\n");
            for (n, e) in &s.samples {
                out.push_str(&format!("{n},{e:.16e}\n"));
            }
            match s.fitted_order {
                Some(order) => out.push_str(&format!("# fitted_order={order:.3}\n")),
                None => out.push_str("# errors at rounding level; order fit skipped\n"),
            }
            out
        }
        OutputFormat::JsonLines => {
            let mut line = json!({
                "samples": s.samples,
                "fitted_order": s.fitted_order,
                "at_rounding_level": s.at_rounding_level,
            })
            .to_string();
            line.push('\n');
            line
        }
    }
}
