//! GFN1 grid files, OPM1 matrix files and canonical JSON/CSV emission.

use std::fmt::Write as _;

use dpl_core::lab::ScalingTable;
use dpl_core::{CheckReport, GridFunction, OperatorMatrix};
use serde_json::Value;

use crate::error::{Error, Result};

/// Fixed 17-significant-digit float, the only float spelling in emitted files.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_error(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

/// Parses `key=value` tokens of a header line in a fixed key order.
fn header_fields<'a>(line: &'a str, keys: &[&str], lineno: usize) -> Result<Vec<&'a str>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != keys.len() {
        return Err(format_error(
            lineno,
            format!("expected header fields {}", keys.join(" ")),
        ));
    }
    tokens
        .iter()
        .zip(keys)
        .map(|(tok, key)| match tok.split_once('=') {
            Some((k, v)) if k == *key && !v.is_empty() => Ok(v),
            _ => Err(format_error(
                lineno,
                format!("expected `{key}=<value>`, found `{tok}`"),
            )),
        })
        .collect()
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| format_error(line, format!("`{s}` is not a nonnegative integer")))
}

fn parse_values<'a>(tokens: impl Iterator<Item = &'a str>, first_line: usize) -> Result<Vec<f64>> {
    tokens
        .map(|t| {
            let v: f64 = t
                .parse()
                .map_err(|_| format_error(first_line, format!("`{t}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format_error(first_line, format!("non-finite value `{t}`")))
            }
        })
        .collect()
}

pub fn write_gfn(f: &GridFunction) -> String {
    let mut out = format!("gfn 1\ndim={} depth={}\n", f.dim(), f.depth());
    for v in f.values() {
        out.push_str(&float(*v));
        out.push('\n');
    }
    out
}

pub fn read_gfn(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("gfn 1") {
        return Err(format_error(1, "missing `gfn 1` magic line"));
    }
    let header = lines
        .next()
        .ok_or_else(|| format_error(2, "missing header"))?;
    let fields = header_fields(header, &["dim", "depth"], 2)?;
    let (dim, depth) = (parse_usize(fields[0], 2)?, parse_usize(fields[1], 2)?);
    if dim == 0 || dim * depth > 30 {
        return Err(format_error(
            2,
            format!("unsupported shape dim={dim} depth={depth}"),
        ));
    }
    let values = parse_values(lines.flat_map(str::split_whitespace), 3)?;
    let expected = 1usize << (dim * depth);
    if values.len() != expected {
        return Err(format_error(
            3,
            format!("expected {expected} values, found {}", values.len()),
        ));
    }
    Ok(GridFunction::new(dim, depth, values)?)
}

pub fn write_opm(m: &OperatorMatrix) -> String {
    let n = m.size();
    let mut out = format!("opm 1\ndim={} depth={} kind={}\n", m.dim, m.depth, m.kind);
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| float(m.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_opm(text: &str) -> Result<OperatorMatrix> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("opm 1") {
        return Err(format_error(1, "missing `opm 1` magic line"));
    }
    let header = lines
        .next()
        .ok_or_else(|| format_error(2, "missing header"))?;
    let fields = header_fields(header, &["dim", "depth", "kind"], 2)?;
    let (dim, depth) = (parse_usize(fields[0], 2)?, parse_usize(fields[1], 2)?);
    if dim == 0 || dim * depth > 15 {
        return Err(format_error(
            2,
            format!("unsupported shape dim={dim} depth={depth}"),
        ));
    }
    let values = parse_values(lines.flat_map(str::split_whitespace), 3)?;
    let n = 1usize << (dim * depth);
    if values.len() != n * n {
        return Err(format_error(
            3,
            format!("expected {} values, found {}", n * n, values.len()),
        ));
    }
    Ok(OperatorMatrix::new(dim, depth, fields[2], values)?)
}

/// Pretty JSON with sorted keys, two-space indentation and [`float`] numbers.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                write!(out, "{i}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                out.push_str(&float(n.as_f64().expect("finite number")));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("string escapes"));
                out.push_str(": ");
                write_value(out, &map[*key], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

pub const REPORT_CSV_HEADER: &str = "region,lhs,rhs,ratio";
pub const SCALING_CSV_HEADER: &str = "alpha,a2d,a2r,norm,ratio,slope";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_float(v: f64) -> String {
    if v.is_finite() {
        float(v)
    } else {
        String::new()
    }
}

pub fn emit(report: &CheckReport, format: Format) -> String {
    match format {
        Format::Json => canonical_json(&serde_json::to_value(report).expect("report serializes")),
        Format::Csv => {
            let mut out = format!("{REPORT_CSV_HEADER}\n");
            for row in &report.rows {
                let cells = [
                    csv_field(&row.region),
                    csv_float(row.lhs),
                    csv_float(row.rhs),
                    csv_float(row.ratio()),
                ];
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
    }
}

pub fn parse_report(json: &str) -> Result<CheckReport> {
    serde_json::from_str(json).map_err(|e| format_error(e.line(), e.to_string()))
}

pub fn scaling_csv(table: &ScalingTable) -> String {
    let mut out = format!("{SCALING_CSV_HEADER}\n");
    for r in &table.rows {
        let cells = [r.alpha, r.a2d, r.a2r, r.norm, r.ratio, table.slope].map(csv_float);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
