use std::io::Write;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{:.16e}", x + 0.0),
            Cell::Num(x) => x.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Missing => Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rows in order, possibly cut short by an error.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub error: Option<String>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            error: None,
        }
    }
}

pub struct Meta {
    pub command: &'static str,
    pub config: Value,
    pub reproducible: bool,
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn write_table(out: &mut dyn Write, table: &Table, meta: &Meta, format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            if !meta.reproducible {
                writeln!(out, "# ising-kw {} {} generated {}", env!("CARGO_PKG_VERSION"), meta.command, timestamp())?;
            }
            {
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record(&table.columns)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
                w.flush()?;
            }
            if let Some(e) = &table.error {
                writeln!(out, "# error: {e}")?;
            }
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> = table
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(m)
                })
                .collect();
            let mut m = json!({
                "program": "ising-kw",
                "version": env!("CARGO_PKG_VERSION"),
                "command": meta.command,
                "config": meta.config,
            });
            if !meta.reproducible {
                m["generated"] = json!(timestamp());
            }
            let mut doc = json!({ "meta": m, "rows": rows });
            if let Some(e) = &table.error {
                doc["error"] = json!(e);
            }
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()
}
