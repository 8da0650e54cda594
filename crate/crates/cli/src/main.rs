//! `gfc`: build Sonine kernel pairs, apply the fractional operators to
//! closed-form or tabulated functions, and run the certification checks
//! from the library's verify module.
//!
//! Exit codes: 0 on success, 1 when a verification check fails (the
//! report is still written), 2 on configuration errors.

mod output;
mod parse;

use clap::{Parser, Subcommand};
use gfcalc::verify::{
    check_ftc1, check_ftc2, check_laplace_condition, check_pair_condition, convergence_study,
    default_tolerance, CheckKind, StudyTarget,
};
use gfcalc::{FunctionSpec, Grid, Kernel, OperatorKind, OperatorRequest, ResidualReport};
use output::OutputFormat;
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "gfc", version, about = "general fractional integrals and derivatives")]
struct Cli {
    /// TOML file supplying any of the long flags; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// write results here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json-lines (default: csv for apply, json-lines for checks)
    #[arg(long, global = true)]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// list the built-in kernel pair catalog
    Kernels,
    /// apply an operator to a function on a grid, emitting (t, value)
    Apply {
        /// gfi | gfd_rl | gfd_caputo
        #[arg(long)]
        op: Option<String>,
        #[arg(long)]
        pair: Option<String>,
        #[arg(long = "fn")]
        function: Option<String>,
        /// T=<real>,N=<int>,r=<real>, any subset
        #[arg(long)]
        grid: Option<String>,
    },
    /// residuals of the order-n pair condition kappa*k = h_n
    VerifyPair {
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// residuals of the Laplace-domain pair condition at given p
    LaplaceCheck {
        #[arg(long)]
        pair: Option<String>,
        /// comma-separated Laplace parameters, all >= 1
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// residuals of the fundamental theorems for a pair and function
    FtcCheck {
        #[arg(long)]
        pair: Option<String>,
        #[arg(long = "fn")]
        function: Option<String>,
        /// 1, 2, or both
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// re-run a check over several mesh sizes and fit the error order
    Converge {
        /// pair | ftc1 | index
        #[arg(long)]
        check: Option<String>,
        #[arg(long)]
        pair: Option<String>,
        #[arg(long = "fn")]
        function: Option<String>,
        /// two power-kernel exponents for the index-law target
        #[arg(long)]
        alphas: Option<String>,
        /// comma-separated mesh sizes, strictly increasing
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long)]
        grid: Option<String>,
    },
}

/// File counterpart of the flags; unknown keys are configuration errors.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    op: Option<String>,
    pair: Option<String>,
    #[serde(rename = "fn")]
    function: Option<String>,
    grid: Option<String>,
    tol: Option<f64>,
    p: Option<String>,
    which: Option<String>,
    check: Option<String>,
    alphas: Option<String>,
    sizes: Option<String>,
    out: Option<PathBuf>,
    format: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, String> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("config {}: {e}", path.display()))?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| format!("config {}: {e}", path.display()))?
        }
        None => FileConfig::default(),
    };

    let out = cli.out.clone().or(file.out.clone());
    let format = match cli.format.as_deref().or(file.format.as_deref()) {
        Some(text) => Some(OutputFormat::parse(text)?),
        None => None,
    };

    // grid precedence: flag > config file > GFC_DEFAULT_GRID > built-in
    let base_grid = match std::env::var("GFC_DEFAULT_GRID") {
        Ok(text) => parse::parse_grid_triple(&text)
            .map_err(|e| format!("GFC_DEFAULT_GRID: {e}"))?,
        Err(_) => Grid::default(),
    };
    let grid_of = |flag: &Option<String>| -> Result<Grid, String> {
        match flag.as_deref().or(file.grid.as_deref()) {
            Some(text) => parse::parse_grid_update(text, &base_grid),
            None => Ok(base_grid.clone()),
        }
    };
    let pair_of = |flag: &Option<String>| -> Result<_, String> {
        let text = flag
            .as_deref()
            .or(file.pair.as_deref())
            .ok_or("missing --pair (or `pair` in the config file)")?;
        parse::parse_pair(text)
    };
    let function_of = |flag: &Option<String>| -> Result<FunctionSpec, String> {
        match flag.as_deref().or(file.function.as_deref()) {
            Some(text) => parse::parse_function(text),
            None => Ok(FunctionSpec::one()),
        }
    };

    match &cli.command {
        Command::Kernels => {
            let mut text = String::new();
            for (name, pair) in gfcalc::standard_pairs() {
                text.push_str(&format!("{name}:\n"));
                for line in pair.record().lines() {
                    text.push_str(&format!("  {line}\n"));
                }
            }
            emit(&out, &text)?;
            Ok(0)
        }
        Command::Apply {
            op,
            pair,
            function,
            grid,
        } => {
            let op = match op.as_deref().or(file.op.as_deref()) {
                Some("gfi") => OperatorKind::Gfi,
                Some("gfd_rl") => OperatorKind::GfdRl,
                Some("gfd_caputo") => OperatorKind::GfdCaputo,
                Some(other) => {
                    return Err(format!(
                        "unknown op `{other}`; expected gfi, gfd_rl, or gfd_caputo"
                    ))
                }
                None => return Err("missing --op (or `op` in the config file)".into()),
            };
            let request = OperatorRequest {
                pair: pair_of(pair)?,
                operator: op,
                f: function_of(function)?,
                grid: grid_of(grid)?,
            };
            let result = request.run().map_err(|e| e.to_string())?;
            emit(&out, &output::sampled(&result, format.unwrap_or(OutputFormat::Csv)))?;
            Ok(0)
        }
        Command::VerifyPair { pair, grid, tol } => {
            let tol = tol
                .or(file.tol)
                .unwrap_or(default_tolerance(CheckKind::PairCondition));
            let report = check_pair_condition(&pair_of(pair)?, &grid_of(grid)?, tol)
                .map_err(|e| e.to_string())?;
            finish_reports(&out, format, &[report])
        }
        Command::LaplaceCheck { pair, p, tol } => {
            let p_values = match p.as_deref().or(file.p.as_deref()) {
                Some(text) => parse::parse_f64_list(text)?,
                None => vec![1.0, 2.0, 5.0, 10.0],
            };
            let tol = tol
                .or(file.tol)
                .unwrap_or(default_tolerance(CheckKind::LaplaceCondition));
            let report = check_laplace_condition(&pair_of(pair)?, &p_values, tol)
                .map_err(|e| e.to_string())?;
            finish_reports(&out, format, &[report])
        }
        Command::FtcCheck {
            pair,
            function,
            which,
            grid,
            tol,
        } => {
            let pair = pair_of(pair)?;
            let f = function_of(function)?;
            let grid = grid_of(grid)?;
            let which = which.as_deref().or(file.which.as_deref()).unwrap_or("both");
            let mut reports = Vec::new();
            if which == "1" || which == "both" {
                let tol = tol.or(file.tol).unwrap_or(default_tolerance(CheckKind::Ftc1));
                reports.push(check_ftc1(&pair, &f, &grid, tol).map_err(|e| e.to_string())?);
            }
            if which == "2" || which == "both" {
                let tol = tol.or(file.tol).unwrap_or(default_tolerance(CheckKind::Ftc2));
                reports.push(check_ftc2(&pair, &f, &grid, tol).map_err(|e| e.to_string())?);
            }
            if reports.is_empty() {
                return Err(format!("unknown --which `{which}`; expected 1, 2, or both"));
            }
            finish_reports(&out, format, &reports)
        }
        Command::Converge {
            check,
            pair,
            function,
            alphas,
            sizes,
            grid,
        } => {
            let f = function_of(function)?;
            let target = match check.as_deref().or(file.check.as_deref()).unwrap_or("pair") {
                "pair" => StudyTarget::PairCondition(pair_of(pair)?),
                "ftc1" => StudyTarget::Ftc1(pair_of(pair)?, f),
                "index" => {
                    let text = alphas
                        .as_deref()
                        .or(file.alphas.as_deref())
                        .ok_or("index study needs --alphas a,b (power exponents)")?;
                    let values = parse::parse_f64_list(text)?;
                    let [a, b] = values.as_slice() else {
                        return Err(format!(
                            "--alphas needs exactly two exponents, got {}",
                            values.len()
                        ));
                    };
                    StudyTarget::IndexLaw(
                        Kernel::power(*a).map_err(|e| e.to_string())?,
                        Kernel::power(*b).map_err(|e| e.to_string())?,
                        f,
                    )
                }
                other => {
                    return Err(format!(
                        "unknown --check `{other}`; expected pair, ftc1, or index"
                    ))
                }
            };
            let sizes = match sizes.as_deref().or(file.sizes.as_deref()) {
                Some(text) => parse::parse_usize_list(text)?,
                None => vec![256, 512, 1024, 2048],
            };
            let grid = grid_of(grid)?;
            let study = convergence_study(&target, &sizes, grid.t_max(), grid.grading())
                .map_err(|e| e.to_string())?;
            emit(
                &out,
                &output::study(&study, format.unwrap_or(OutputFormat::JsonLines)),
            )?;
            Ok(0)
        }
    }
}

/// Write every report, then fail the run if any check failed.
fn finish_reports(
    out: &Option<PathBuf>,
    format: Option<OutputFormat>,
    reports: &[ResidualReport],
) -> Result<i32, String> {
    let format = format.unwrap_or(OutputFormat::JsonLines);
    let mut text = String::new();
    for report in reports {
        text.push_str(&output::report(report, format));
    }
    emit(out, &text)?;
    Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
