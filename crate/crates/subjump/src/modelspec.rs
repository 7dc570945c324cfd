//! Text grammar for tail models, regimes, and limit directions.
//!
//! The grammar is the one used by the CLI and by config files:
//!
//! ```text
//! stable(alpha=0.5,c=1)     gamma(rate=1)     logcorr(p=2)
//! rapid0                    steps(1:1,2:1)    table(path/to/tail.csv)
//! ```
//!
//! [`TailModel::describe`] emits the canonical form of each model, and
//! [`parse_model`] accepts it back (round-trip identity). Whitespace around
//! tokens is tolerated; everything else is strict, and every rejection names
//! the offending token.
//!
//! Parsing is split from loading so that the grammar itself is a pure
//! function of the input string: [`parse_model`] never touches the
//! filesystem, and `table(...)` parses to a [`ParsedModel::TableFile`] path
//! that [`load_model`] resolves by reading a two-column `x,tail` CSV.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tail::{Direction, Regime, TailModel};

/// Outcome of parsing a model expression without touching the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedModel {
    /// A fully constructed model (every family except `table`).
    Ready(TailModel),
    /// A `table(path)` expression; the caller decides how to read `path`.
    TableFile(String),
}

/// Parse a model expression. Pure syntax: `table(...)` is returned as a
/// path, not read.
pub fn parse_model(spec: &str) -> Result<ParsedModel> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::ModelSpec("empty model expression".into()));
    }
    let (name, args) = split_call(spec)?;
    match name {
        "stable" => {
            let [alpha, c] = keyed_args(name, args, ["alpha", "c"])?;
            Ok(ParsedModel::Ready(wrap(TailModel::stable(alpha, c))?))
        }
        "gamma" => {
            let [rate] = keyed_args(name, args, ["rate"])?;
            Ok(ParsedModel::Ready(wrap(TailModel::gamma_sub(rate))?))
        }
        "logcorr" => {
            let [p] = keyed_args(name, args, ["p"])?;
            Ok(ParsedModel::Ready(wrap(TailModel::log_corrected(p))?))
        }
        "rapid0" => {
            if args.is_some() {
                return Err(Error::ModelSpec(
                    "rapid0 takes no arguments; write it bare".into(),
                ));
            }
            Ok(ParsedModel::Ready(TailModel::rapid_at_zero()))
        }
        "steps" => {
            let atoms = atom_args(require_args(name, args)?)?;
            Ok(ParsedModel::Ready(wrap(TailModel::step_measure(&atoms))?))
        }
        "table" => {
            let path = require_args(name, args)?.trim();
            if path.is_empty() {
                return Err(Error::ModelSpec("table(...) needs a file path".into()));
            }
            Ok(ParsedModel::TableFile(path.to_string()))
        }
        other => Err(Error::ModelSpec(format!(
            "unknown model family '{other}'; expected one of \
             stable, gamma, logcorr, rapid0, steps, table"
        ))),
    }
}

/// Parse a model expression and resolve `table(path)` against the
/// filesystem (relative paths against the working directory).
pub fn load_model(spec: &str) -> Result<TailModel> {
    match parse_model(spec)? {
        ParsedModel::Ready(model) => Ok(model),
        ParsedModel::TableFile(path) => load_table(Path::new(&path)),
    }
}

/// Read a two-column `x,tail` CSV file into a table-backed model.
pub fn load_table(path: &Path) -> Result<TailModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read table file '{}': {e}", path.display())))?;
    let pairs = parse_table(&text)?;
    TailModel::from_table(&pairs)
}

/// Parse table text: one `x,tail` row per line, values comma-separated.
/// Blank lines and `#` comment lines are skipped.
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(xs), Some(vs), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Table(format!(
                "line {}: expected exactly two comma-separated values, got '{line}'",
                lineno + 1
            )));
        };
        let x = table_number(xs, lineno)?;
        let v = table_number(vs, lineno)?;
        pairs.push((x, v));
    }
    Ok(pairs)
}

/// Parse a regime declaration: `regvar(alpha=0.5)`, `slowvar`, `rapid`, or
/// `cond-iii`.
pub fn parse_regime(spec: &str) -> Result<Regime> {
    let spec = spec.trim();
    let (name, args) = split_call(spec)?;
    match name {
        "regvar" => {
            let [alpha] = keyed_args(name, args, ["alpha"])?;
            Ok(Regime::RegVar { alpha })
        }
        "slowvar" | "rapid" | "cond-iii" => {
            if args.is_some() {
                return Err(Error::ModelSpec(format!("{name} takes no arguments")));
            }
            Ok(match name {
                "slowvar" => Regime::SlowVar,
                "rapid" => Regime::Rapid,
                _ => Regime::CondIii,
            })
        }
        other => Err(Error::ModelSpec(format!(
            "unknown regime '{other}'; expected regvar(alpha=...), slowvar, rapid, or cond-iii"
        ))),
    }
}

/// Canonical text form of a regime; [`parse_regime`] accepts it back.
pub fn describe_regime(regime: Regime) -> String {
    match regime {
        Regime::RegVar { alpha } => format!("regvar(alpha={alpha})"),
        Regime::SlowVar => "slowvar".to_string(),
        Regime::Rapid => "rapid".to_string(),
        Regime::CondIii => "cond-iii".to_string(),
    }
}

/// Parse a limit direction: `at-zero` or `at-infinity`.
pub fn parse_direction(spec: &str) -> Result<Direction> {
    match spec.trim() {
        "at-zero" => Ok(Direction::AtZero),
        "at-infinity" => Ok(Direction::AtInfinity),
        other => Err(Error::ModelSpec(format!(
            "unknown direction '{other}'; expected at-zero or at-infinity"
        ))),
    }
}

// ===== grammar pieces =====

/// Split `name(args)` or a bare `name`; rejects dangling parens and
/// trailing text after the closing paren.
fn split_call(spec: &str) -> Result<(&str, Option<&str>)> {
    match spec.find('(') {
        None => {
            if spec.contains(')') {
                return Err(Error::ModelSpec(format!(
                    "unbalanced ')' in '{spec}'"
                )));
            }
            Ok((spec, None))
        }
        Some(open) => {
            let name = spec[..open].trim_end();
            let rest = &spec[open + 1..];
            let Some(close) = rest.rfind(')') else {
                return Err(Error::ModelSpec(format!(
                    "missing ')' after '{name}(' in '{spec}'"
                )));
            };
            let trailing = rest[close + 1..].trim();
            if !trailing.is_empty() {
                return Err(Error::ModelSpec(format!(
                    "unexpected trailing text '{trailing}' after '{name}(...)'"
                )));
            }
            Ok((name, Some(&rest[..close])))
        }
    }
}

fn require_args<'a>(name: &str, args: Option<&'a str>) -> Result<&'a str> {
    args.ok_or_else(|| Error::ModelSpec(format!("{name} needs arguments: {name}(...)")))
}

/// Parse `key=value` arguments with a fixed key set, each required exactly
/// once, in any order.
fn keyed_args<const N: usize>(
    name: &str,
    args: Option<&str>,
    keys: [&str; N],
) -> Result<[f64; N]> {
    let body = require_args(name, args)?;
    let mut values = [None; N];
    for tok in body.split(',') {
        let tok = tok.trim();
        let Some((key, val)) = tok.split_once('=') else {
            return Err(Error::ModelSpec(format!(
                "expected key=value in {name}(...), got '{tok}'"
            )));
        };
        let key = key.trim();
        let Some(slot) = keys.iter().position(|&k| k == key) else {
            return Err(Error::ModelSpec(format!(
                "unknown key '{key}' in {name}(...); expected {}",
                keys.join(", ")
            )));
        };
        if values[slot].is_some() {
            return Err(Error::ModelSpec(format!(
                "duplicate key '{key}' in {name}(...)"
            )));
        }
        values[slot] = Some(number(val, name)?);
    }
    for (slot, key) in keys.iter().enumerate() {
        if values[slot].is_none() {
            return Err(Error::ModelSpec(format!(
                "missing key '{key}' in {name}(...)"
            )));
        }
    }
    Ok(values.map(|v| v.unwrap()))
}

/// Parse `pos:mass` atoms for `steps(...)`.
fn atom_args(body: &str) -> Result<Vec<(f64, f64)>> {
    let mut atoms = Vec::new();
    for tok in body.split(',') {
        let tok = tok.trim();
        let Some((pos, mass)) = tok.split_once(':') else {
            return Err(Error::ModelSpec(format!(
                "expected position:mass in steps(...), got '{tok}'"
            )));
        };
        atoms.push((number(pos, "steps")?, number(mass, "steps")?));
    }
    Ok(atoms)
}

fn number(tok: &str, context: &str) -> Result<f64> {
    let tok = tok.trim();
    tok.parse::<f64>().map_err(|_| {
        Error::ModelSpec(format!("'{tok}' in {context}(...) is not a number"))
    })
}

fn table_number(tok: &str, lineno: usize) -> Result<f64> {
    let tok = tok.trim();
    tok.parse::<f64>()
        .map_err(|_| Error::Table(format!("line {}: '{tok}' is not a number", lineno + 1)))
}

/// Constructor rejections become model-expression diagnostics so a bad CLI
/// `--model` string is reported as such, with the constructor's reason.
fn wrap(built: std::result::Result<TailModel, Error>) -> Result<TailModel> {
    built.map_err(|e| match e {
        Error::Domain(msg) => Error::ModelSpec(msg),
        other => other,
    })
}
