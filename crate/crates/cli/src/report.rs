use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::args::Format;

/// Fixed 17-significant-digit form used in every CSV cell.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// Outcome of one command: summary fields, optional tables, and a verdict.
pub struct Report {
    pub command: &'static str,
    pub fields: Vec<(String, Value)>,
    pub tables: Vec<Table>,
    pub pass: bool,
}

/// JSON numbers cannot hold NaN or infinities; those become strings.
pub fn jnum(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            fields: Vec::new(),
            tables: Vec::new(),
            pass: true,
        }
    }

    pub fn field(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn number(&mut self, key: &str, x: f64) -> &mut Self {
        self.field(key, jnum(x))
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<Value>>) -> &mut Self {
        self.tables.push(Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        });
        self
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn emit(&self, format: Format, out: &mut impl Write) -> Result<()> {
        match format {
            Format::Text => self.emit_text(out),
            Format::Jsonl => self.emit_jsonl(out),
        }
    }

    fn emit_text(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "command: {}", self.command)?;
        for (k, v) in &self.fields {
            writeln!(out, "{k}: {}", text_value(v))?;
        }
        for t in &self.tables {
            writeln!(out, "{}:", t.name)?;
            writeln!(out, "  {}", t.columns.join("\t"))?;
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(text_value).collect();
                writeln!(out, "  {}", cells.join("\t"))?;
            }
        }
        writeln!(out, "verdict: {}", self.verdict())?;
        Ok(())
    }

    fn emit_jsonl(&self, out: &mut impl Write) -> Result<()> {
        for t in &self.tables {
            for row in &t.rows {
                let mut obj = Map::new();
                obj.insert("table".into(), Value::String(t.name.clone()));
                for (c, v) in t.columns.iter().zip(row) {
                    obj.insert(c.clone(), v.clone());
                }
                writeln!(out, "{}", Value::Object(obj))?;
            }
        }
        let mut obj = Map::new();
        obj.insert("command".into(), Value::String(self.command.into()));
        for (k, v) in &self.fields {
            obj.insert(k.clone(), v.clone());
        }
        obj.insert("verdict".into(), Value::String(self.verdict().into()));
        writeln!(out, "{}", Value::Object(obj))?;
        Ok(())
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}
