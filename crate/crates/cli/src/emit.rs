use std::fmt;
use std::io::Write;

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Emit, RunConfig};

/// Failure to write a report; mapped to its own exit code.
#[derive(Debug)]
pub struct OutputError(pub String);

impl fmt::Display for OutputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot write output: {}", self.0)
    }
}

impl std::error::Error for OutputError {}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Table {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub struct Output {
    pub json: Value,
    pub table: Table,
}

impl Output {
    pub fn new(result: impl Serialize, table: Table) -> Result<Output> {
        Ok(Output { json: serde_json::to_value(result)?, table })
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn render(out: &Output, config: &RunConfig) -> Result<Vec<u8>> {
    match config.emit {
        Emit::Json => {
            let mut body = out.json.clone();
            let cfg = serde_json::to_value(config)?;
            match &mut body {
                Value::Object(m) => {
                    m.insert("config".into(), cfg);
                }
                _ => body = json!({ "config": cfg, "result": body }),
            }
            let mut bytes = serde_json::to_vec_pretty(&body)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Emit::Csv => {
            let mut bytes = format!("# config: {}\n", serde_json::to_string(config)?).into_bytes();
            let mut w = csv::Writer::from_writer(&mut bytes);
            w.write_record(&out.table.header)?;
            for row in &out.table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            drop(w);
            Ok(bytes)
        }
    }
}

pub fn write(out: &Output, config: &RunConfig) -> Result<()> {
    let bytes = render(out, config)?;
    match &config.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| OutputError(format!("{path}: {e}")))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).map_err(|e| OutputError(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}
