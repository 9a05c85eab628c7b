use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::{Format, Manifest};
use crate::error::{CliError, CliResult};

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, title: &str, manifest: &Manifest) -> String {
        let mut s = format!(
            "# {title}\n# schema={} command={} config_sha256={}\n# opuc-core={} opuc-cli={}\n",
            manifest.schema, manifest.command, manifest.config_sha256, manifest.opuc_core, manifest.opuc_cli
        );
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = self.columns.iter().zip(row).map(|(c, v)| cell(c, *v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, title: &str, manifest: &Manifest) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|v| number(*v)).collect()))
            .collect();
        json!({ "manifest": manifest, "table": title, "columns": self.columns, "rows": rows })
    }

    pub fn parse_csv(text: &str) -> CliResult<Table> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| CliError::MissingInput("empty table".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|e| CliError::MissingInput(format!("bad cell {c:?}: {e}"))))
                .collect::<CliResult<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(CliError::MissingInput(format!("row has {} cells, header has {}", row.len(), columns.len())));
            }
            rows.push(row);
        }
        Ok(Table { columns, rows })
    }

    pub fn parse_json(text: &str) -> CliResult<Table> {
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::MissingInput(e.to_string()))?;
        let columns: Vec<String> = serde_json::from_value(v["columns"].clone()).map_err(|e| CliError::MissingInput(e.to_string()))?;
        let rows = v["rows"]
            .as_array()
            .ok_or_else(|| CliError::MissingInput("rows".into()))?
            .iter()
            .map(|r| {
                r.as_array()
                    .map(|cells| cells.iter().map(|c| c.as_f64().unwrap_or(f64::NAN)).collect())
                    .ok_or_else(|| CliError::MissingInput("row".into()))
            })
            .collect::<CliResult<Vec<Vec<f64>>>>()?;
        Ok(Table { columns, rows })
    }
}

/// Integer-valued index columns are written without an exponent.
fn cell(column: &str, v: f64) -> String {
    let v = v + 0.0;
    if matches!(column, "n" | "k" | "component_id") {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

pub fn number(v: f64) -> Value {
    let v = v + 0.0;
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

pub fn file_name(stem: &str, format: Format) -> String {
    match format {
        Format::Csv => format!("{stem}.csv"),
        Format::Json => format!("{stem}.json"),
    }
}

pub fn write_table(dir: &Path, stem: &str, format: Format, table: &Table, manifest: &Manifest) -> CliResult<()> {
    let body = match format {
        Format::Csv => table.to_csv(stem, manifest),
        Format::Json => pretty(&table.to_json(stem, manifest)),
    };
    write(&dir.join(file_name(stem, format)), &body)
}

pub fn read_table(dir: &Path, stem: &str, format: Format) -> CliResult<Table> {
    let path = dir.join(file_name(stem, format));
    let text = fs::read_to_string(&path).map_err(|_| CliError::MissingInput(path.display().to_string()))?;
    match format {
        Format::Csv => Table::parse_csv(&text),
        Format::Json => Table::parse_json(&text),
    }
    .map_err(|e| CliError::MissingInput(format!("{}: {e}", path.display())))
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

pub fn write(path: &Path, body: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io { path: parent.display().to_string(), source })?;
    }
    fs::write(path, body).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}
