//! Descriptor mini-grammars for pairs, functions, and grids. Every
//! error names the offending token and its byte offset in the
//! descriptor, so a bad flag is found without guesswork.

use gfcalc::{FunctionSpec, Grid, KernelPair};
use std::path::Path;

/// `key=value` items split on commas, each with the byte offset of its
/// value; `a=` values may themselves contain `;`-separated numbers.
fn key_values(text: &str, start: usize) -> Result<Vec<(&str, &str, usize)>, String> {
    let mut out = Vec::new();
    let mut offset = start;
    for item in text.split(',') {
        let Some(eq) = item.find('=') else {
            return Err(format!(
                "expected key=value at offset {offset}, got `{item}`"
            ));
        };
        out.push((&item[..eq], &item[eq + 1..], offset + eq + 1));
        offset += item.len() + 1;
    }
    Ok(out)
}

fn real(value: &str, key: &str, offset: usize) -> Result<f64, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: `{value}` at offset {offset} is not a number"))
}

fn integer(value: &str, key: &str, offset: usize) -> Result<u32, String> {
    value
        .parse()
        .map_err(|_| format!("{key}: `{value}` at offset {offset} is not an integer"))
}

/// `power:alpha=<real>,n=<int>` | `bessel:nu=<real>,n=<int>` |
/// `series:alpha=<real>,a=<c0;c1;...>[,terms=<int>]`, optionally
/// followed by `,lift=<int>` to raise an order-1 pair.
pub fn parse_pair(text: &str) -> Result<KernelPair, String> {
    let (family, rest) = text
        .split_once(':')
        .ok_or_else(|| format!("pair descriptor `{text}` is missing `family:`"))?;
    let items = key_values(rest, family.len() + 1)?;

    let mut alpha = None;
    let mut nu = None;
    let mut n = None;
    let mut coeffs: Option<Vec<f64>> = None;
    let mut terms = None;
    let mut lift = None;
    for (key, value, offset) in items {
        match key {
            "alpha" => alpha = Some(real(value, key, offset)?),
            "nu" => nu = Some(real(value, key, offset)?),
            "n" => n = Some(integer(value, key, offset)?),
            "a" => {
                let mut c = Vec::new();
                let mut at = offset;
                for piece in value.split(';') {
                    c.push(real(piece, "a", at)?);
                    at += piece.len() + 1;
                }
                coeffs = Some(c);
            }
            "terms" => terms = Some(integer(value, key, offset)? as usize),
            "lift" => lift = Some(integer(value, key, offset)?),
            other => {
                return Err(format!(
                    "unknown pair key `{other}` at offset {offset}; \
                     expected alpha, nu, n, a, terms, or lift"
                ))
            }
        }
    }

    let missing = |key: &str| format!("pair family `{family}` needs `{key}=`");
    let pair = match family {
        "power" => KernelPair::power(
            alpha.ok_or_else(|| missing("alpha"))?,
            n.ok_or_else(|| missing("n"))?,
        ),
        "bessel" => KernelPair::bessel(
            nu.ok_or_else(|| missing("nu"))?,
            n.ok_or_else(|| missing("n"))?,
        ),
        "series" => {
            let a = coeffs.ok_or_else(|| missing("a"))?;
            let keep = terms.unwrap_or(12);
            KernelPair::series(&a, alpha.ok_or_else(|| missing("alpha"))?, keep)
        }
        other => {
            return Err(format!(
                "unknown pair family `{other}`; expected power, bessel, or series"
            ))
        }
    }
    .map_err(|e| e.to_string())?;

    match lift {
        Some(m) => pair.lift(m).map_err(|e| e.to_string()),
        None => Ok(pair),
    }
}

/// `one | monomial:m=<int> | poly:c0,c1,... | exp:lambda=<real> |
/// sin:omega=<real> | table:<path>`.
pub fn parse_function(text: &str) -> Result<FunctionSpec, String> {
    if text == "one" {
        return Ok(FunctionSpec::one());
    }
    let (kind, rest) = text.split_once(':').ok_or_else(|| {
        format!(
            "unknown function `{text}` at offset 0; \
             expected one, monomial:, poly:, exp:, sin:, or table:"
        )
    })?;
    let start = kind.len() + 1;
    match kind {
        "monomial" => {
            let items = key_values(rest, start)?;
            match items.as_slice() {
                [("m", value, offset)] => Ok(FunctionSpec::Monomial {
                    power: integer(value, "m", *offset)?,
                }),
                _ => Err(format!("monomial takes exactly `m=<int>`, got `{rest}`")),
            }
        }
        "poly" => {
            let mut coeffs = Vec::new();
            let mut at = start;
            for piece in rest.split(',') {
                coeffs.push(real(piece, "poly coefficient", at)?);
                at += piece.len() + 1;
            }
            Ok(FunctionSpec::Polynomial { coeffs })
        }
        "exp" => {
            let items = key_values(rest, start)?;
            match items.as_slice() {
                [("lambda", value, offset)] => Ok(FunctionSpec::Exponential {
                    rate: real(value, "lambda", *offset)?,
                }),
                _ => Err(format!("exp takes exactly `lambda=<real>`, got `{rest}`")),
            }
        }
        "sin" => {
            let items = key_values(rest, start)?;
            match items.as_slice() {
                [("omega", value, offset)] => Ok(FunctionSpec::Sinusoid {
                    omega: real(value, "omega", *offset)?,
                }),
                _ => Err(format!("sin takes exactly `omega=<real>`, got `{rest}`")),
            }
        }
        "table" => read_table(Path::new(rest)),
        other => Err(format!(
            "unknown function kind `{other}` at offset 0; \
             expected one, monomial, poly, exp, sin, or table"
        )),
    }
}

/// Two-column `t,value` CSV, optional header line, strictly increasing t.
fn read_table(path: &Path) -> Result<FunctionSpec, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("table {}: {e}", path.display()))?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('t')) {
            continue;
        }
        let (t, v) = line.split_once(',').ok_or_else(|| {
            format!(
                "table {} line {}: expected `t,value`, got `{line}`",
                path.display(),
                lineno + 1
            )
        })?;
        let parse = |s: &str, what| -> Result<f64, String> {
            s.trim().parse().map_err(|_| {
                format!(
                    "table {} line {}: {what} `{s}` is not a number",
                    path.display(),
                    lineno + 1
                )
            })
        };
        points.push((parse(t, "t")?, parse(v, "value")?));
    }
    FunctionSpec::tabulated(points).map_err(|e| format!("table {}: {e}", path.display()))
}

/// `T=<real>,N=<int>,r=<real>` in any order and any subset; missing
/// parts keep the base grid's values.
pub fn parse_grid_update(text: &str, base: &Grid) -> Result<Grid, String> {
    let mut t_max = base.t_max();
    let mut intervals = base.intervals();
    let mut grading = base.grading();
    for (key, value, offset) in key_values(text, 0)? {
        match key {
            "T" => t_max = real(value, key, offset)?,
            "N" => intervals = integer(value, key, offset)? as usize,
            "r" => grading = real(value, key, offset)?,
            other => {
                return Err(format!(
                    "unknown grid key `{other}` at offset {offset}; expected T, N, or r"
                ))
            }
        }
    }
    Grid::new(t_max, intervals, grading).map_err(|e| e.to_string())
}

/// Bare `T,N,r` triple, the GFC_DEFAULT_GRID format.
pub fn parse_grid_triple(text: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let [t, n, r] = parts.as_slice() else {
        return Err(format!("expected `T,N,r`, got `{text}`"));
    };
    let t_max = real(t, "T", 0)?;
    let intervals = integer(n, "N", 0)? as usize;
    let grading = real(r, "r", 0)?;
    Grid::new(t_max, intervals, grading).map_err(|e| e.to_string())
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    let mut at = 0;
    for piece in text.split(',') {
        out.push(real(piece, "list entry", at)?);
        at += piece.len() + 1;
    }
    Ok(out)
}

pub fn parse_usize_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    let mut at = 0;
    for piece in text.split(',') {
        out.push(integer(piece, "list entry", at)? as usize);
        at += piece.len() + 1;
    }
    Ok(out)
}
