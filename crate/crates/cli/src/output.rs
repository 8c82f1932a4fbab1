//! Rendering of module reports as JSON, CSV or text.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub struct Rendered {
    json: String,
    value: Value,
    headline: String,
    pub code: u8,
    /// Top-level array of records used as the CSV table, if any.
    table: Option<&'static str>,
}

impl Rendered {
    pub fn new<T: Serialize>(report: &T, headline: String, code: u8, table: Option<&'static str>) -> Self {
        let json = serde_json::to_string(report).expect("reports serialize");
        let value = serde_json::to_value(report).expect("reports serialize");
        Self { json, value, headline, code, table }
    }

    fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => format!("{}\n", self.json).into_bytes(),
            Format::Text => {
                let mut s = format!("{}\n", self.headline);
                for (k, v) in flatten(&self.value) {
                    s.push_str(&format!("{k}: {v}\n"));
                }
                s.into_bytes()
            }
            Format::Csv => self.csv(),
        }
    }

    fn csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let records = self
            .table
            .and_then(|key| self.value.get(key))
            .and_then(Value::as_array)
            .filter(|rows| rows.iter().all(Value::is_object) && !rows.is_empty());
        let result = match records {
            Some(rows) => {
                let header: Vec<&String> = rows[0].as_object().expect("checked").keys().collect();
                w.write_record(&header).and_then(|()| {
                    rows.iter().try_for_each(|r| w.write_record(header.iter().map(|h| scalar(&r[h.as_str()]))))
                })
            }
            None => w.write_record(["field", "value"]).and_then(|()| {
                flatten(&self.value).into_iter().try_for_each(|(k, v)| w.write_record([k, v]))
            }),
        };
        result.expect("writing to memory");
        w.into_inner().expect("writing to memory")
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), Failure> {
        let bytes = self.render(format);
        match out {
            Some(path) => std::fs::write(path, &bytes)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| Failure::usage(format!("stdout: {e}"))),
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Leaf values keyed by dotted paths; arrays of scalars stay whole.
fn flatten(v: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    walk(&key(k), x, out);
                }
            }
            Value::Array(a) if a.iter().any(|x| x.is_object()) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&key(&i.to_string()), x, out);
                }
            }
            other => out.push((prefix.to_string(), scalar(other))),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}
