//! Formatting: 12 significant digits in JSON, 9 in tables, full precision in CSV.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const JSON_DIGITS: usize = 12;
pub const TABLE_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Fixed notation with `digits` significant digits for moderate magnitudes,
/// scientific otherwise.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..digits as i32).contains(&e) {
        let decimals = (digits as i32 - 1 - e).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"), JSON_DIGITS);
            if let Some(m) = serde_json::Number::from_f64(x) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("reports always serialize");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("values always serialize");
    s.push('\n');
    s
}

/// Two-column `name value` listing.
pub struct Table {
    /// `(name, table text, csv text)`
    rows: Vec<(String, String, String)>,
}

impl Table {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn text(mut self, name: &str, value: impl Into<String>) -> Self {
        let v = value.into();
        self.rows.push((name.into(), v.clone(), v));
        self
    }

    pub fn num(mut self, name: &str, value: f64) -> Self {
        self.rows.push((name.into(), sig(value, TABLE_DIGITS), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v, _) in &self.rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }

    /// `name,value` rows at full precision.
    pub fn csv(&self) -> String {
        let mut out = String::from("name,value\n");
        for (k, _, v) in &self.rows {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}

/// Writes to `--out` when given, stdout otherwise.
pub fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
