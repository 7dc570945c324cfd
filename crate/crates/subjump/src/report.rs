//! Machine-readable output tables and their re-parser.
//!
//! Every file the CLI emits — raw sample tables, limit-law tabulations, and
//! verification summaries — uses one schema: a comma-separated header line,
//! data rows, then a footer of `# key = value` metadata lines. Numbers are
//! rendered with 17 significant digits so parsing a file back reproduces the
//! exact bit pattern, and rendering is fully deterministic (no wall-clock,
//! stable key order) so identical runs produce byte-identical files.
//!
//! [`Report::parse`] is the inverse of [`Report::render`]: it accepts
//! exactly the documented schema and rejects anything else with the
//! offending line.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sim::RatioSample;
use crate::stats::Cell;

/// Schema version stamped into every footer.
pub const FORMAT_VERSION: &str = "1";

/// Render a float with 17 significant digits (round-trip exact).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A rectangular table with string cells and a metadata footer.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
    meta: BTreeMap<String, String>,
}

impl Report {
    /// A new table with the given column names. Column names must be
    /// nonempty, unique, and free of the delimiter characters.
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        let columns: Vec<String> = columns.into_iter().map(Into::into).collect();
        assert!(!columns.is_empty(), "a report needs at least one column");
        for c in &columns {
            assert!(field_ok(c), "column name {c:?} breaks the schema");
        }
        let mut unique = columns.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), columns.len(), "duplicate column name");
        Report {
            columns,
            rows: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    /// Append a row; the field count must match the header.
    pub fn push_row<S: Into<String>>(&mut self, fields: impl IntoIterator<Item = S>) {
        let fields: Vec<String> = fields.into_iter().map(Into::into).collect();
        assert_eq!(
            fields.len(),
            self.columns.len(),
            "row width does not match the header"
        );
        for f in &fields {
            assert!(field_ok(f), "field {f:?} breaks the schema");
        }
        self.rows.push(fields);
    }

    /// Set a footer entry. Values must be single-line, `#`-free, and
    /// trimmed; keys follow the column-name rules and are `=`-free.
    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        assert!(field_ok(key) && !key.contains('='), "meta key {key:?} breaks the schema");
        assert!(meta_value_ok(&value), "meta value {value:?} breaks the schema");
        self.meta.insert(key.to_string(), value);
    }

    /// Serialize: header, rows, `# key = value` footer in sorted key order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out
    }

    /// Parse a rendered report. The exact inverse of [`Report::render`] on
    /// its image; off-schema text is rejected with the offending line.
    ///
    /// Accepted fields and footer entries satisfy the same rules
    /// [`Report::new`], [`push_row`](Report::push_row), and
    /// [`set_meta`](Report::set_meta) enforce, so a parsed report always
    /// re-renders into text that parses back to the same report.
    pub fn parse(text: &str) -> Result<Report> {
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        let mut meta = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            let at = |msg: String| Error::Table(format!("line {}: {msg}", lineno + 1));
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if comment.is_empty() {
                    continue;
                }
                let Some((k, v)) = comment.split_once('=') else {
                    return Err(at(format!("expected '# key = value', got '{line}'")));
                };
                let k = k.trim();
                if k.is_empty() {
                    return Err(at("metadata key is empty".into()));
                }
                if !field_ok(k) {
                    return Err(at(format!("metadata key {k:?} breaks the schema")));
                }
                let v = v.trim();
                if !meta_value_ok(v) {
                    return Err(at(format!("metadata value {v:?} breaks the schema")));
                }
                if meta.insert(k.to_string(), v.to_string()).is_some() {
                    return Err(at(format!("duplicate metadata key '{k}'")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|f| f.trim().to_string()).collect();
            if let Some(bad) = fields.iter().find(|f| !field_ok(f)) {
                return Err(at(match (columns.is_none(), bad.is_empty()) {
                    (true, true) => "header has an empty column name".to_string(),
                    (false, true) => "row has an empty field".to_string(),
                    _ => format!("field {bad:?} breaks the schema"),
                }));
            }
            match &columns {
                None => {
                    let mut unique = fields.clone();
                    unique.sort();
                    unique.dedup();
                    if unique.len() != fields.len() {
                        return Err(at("header has a duplicate column name".into()));
                    }
                    columns = Some(fields);
                }
                Some(cols) => {
                    if fields.len() != cols.len() {
                        return Err(at(format!(
                            "expected {} fields, got {}",
                            cols.len(),
                            fields.len()
                        )));
                    }
                    rows.push(fields);
                }
            }
        }
        let Some(columns) = columns else {
            return Err(Error::Table("no header line found".into()));
        };
        Ok(Report {
            columns,
            rows,
            meta,
        })
    }

    fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Table(format!("no column named '{name}'")))
    }

    /// Extract one column parsed as numbers.
    pub fn f64_column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row[idx].parse::<f64>().map_err(|_| {
                    Error::Table(format!(
                        "column '{name}' row {i}: '{}' is not a number",
                        row[idx]
                    ))
                })
            })
            .collect()
    }

    /// Extract one column as raw strings.
    pub fn str_column(&self, name: &str) -> Result<Vec<&str>> {
        let idx = self.column_index(name)?;
        Ok(self.rows.iter().map(|row| row[idx].as_str()).collect())
    }

    /// Fetch a required footer entry.
    pub fn require_meta(&self, key: &str) -> Result<&str> {
        self.meta
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Table(format!("missing metadata key '{key}'")))
    }
}

// One gate for the builder and the parser alike: a kept field must re-render
// into a line that reads back identically, so it cannot start with '#' (the
// line would reclassify as a comment), contain a delimiter or line break, or
// change under the trimming applied on re-parse.
fn field_ok(s: &str) -> bool {
    !s.is_empty()
        && !s.contains(',')
        && !s.contains('\n')
        && !s.contains('\r')
        && !s.starts_with('#')
        && s.trim() == s
}

fn meta_value_ok(s: &str) -> bool {
    !s.contains('\n') && !s.contains('\r') && !s.contains('#') && s.trim() == s
}

/// Build the raw-sample table for a set of completed cells.
///
/// One row per kept sample: `t,replicate,kind,k,value,capped,degenerate`,
/// with flags as 0/1. `replicate` is the row's index within its cell, which
/// equals the simulation replicate id whenever no replicate was dropped for
/// a tolerated truncation failure (per-cell drop counts sit in the footer).
pub fn sample_report(cells: &[Cell]) -> Report {
    let mut report = Report::new(["t", "replicate", "kind", "k", "value", "capped", "degenerate"]);
    let mut capped = 0usize;
    let mut degenerate = 0usize;
    let mut failures = 0usize;
    for cell in cells {
        for (i, s) in cell.samples.iter().enumerate() {
            report.push_row(sample_row(cell.t, i, s));
        }
        capped += cell.capped_count();
        degenerate += cell.degenerate_count();
        failures += cell.truncation_failures;
    }
    report.set_meta("version", FORMAT_VERSION);
    report.set_meta("capped", capped.to_string());
    report.set_meta("degenerate", degenerate.to_string());
    report.set_meta("truncation-failures", failures.to_string());
    report
}

fn sample_row(t: f64, replicate: usize, s: &RatioSample) -> [String; 7] {
    [
        fmt_f64(t),
        replicate.to_string(),
        s.kind.label().to_string(),
        s.kind.k().to_string(),
        fmt_f64(s.value),
        (s.capped as u8).to_string(),
        (s.degenerate as u8).to_string(),
    ]
}
