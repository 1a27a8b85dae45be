//! Report envelope, JSON and CSV rendering.

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    /// Every parsed flag, globals included.
    pub flags: Value,
    pub seed: u64,
    pub tool_version: &'static str,
    pub schema_version: u32,
    pub wall_time_ms: u64,
}

/// A table cell; numbers are rendered exactly as in JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Num(f64),
    Int(u64),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<Option<bool>> for Cell {
    fn from(x: Option<bool>) -> Self {
        x.map_or(Cell::Empty, Cell::Bool)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Str(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Str(x)
    }
}

/// Shortest round-trip decimal, the same digits serde_json writes.
/// Non-finite values become `inf`, `-inf` and `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        serde_json::to_string(&x).expect("finite floats serialize")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Num(x) => format_number(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

/// Checks the envelope before it is written.
pub fn validate_report(report: &Value) -> Result<(), String> {
    let obj = report.as_object().ok_or("report is not an object")?;
    if obj.get("schema") != Some(&json!(SCHEMA_VERSION)) {
        return Err("missing schema version".into());
    }
    let manifest = obj
        .get("manifest")
        .and_then(Value::as_object)
        .ok_or("missing manifest")?;
    for key in ["command", "inputs", "flags", "seed", "tool_version", "schema_version", "wall_time_ms"] {
        if !manifest.contains_key(key) {
            return Err(format!("manifest lacks `{key}`"));
        }
    }
    match obj.get("result") {
        Some(Value::Object(_)) | Some(Value::Array(_)) => Ok(()),
        _ => Err("missing result payload".into()),
    }
}

pub fn envelope(manifest: &RunManifest, result: &Value) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "manifest": manifest,
        "result": result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 2.0, 1e-20, 1.0 / 3.0, 6.02214076e23, -0.0] {
            assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(2.0), "2.0");
    }

    #[test]
    fn csv_quotes_commas() {
        let mut t = Table::new(vec!["id", "value"]);
        t.push(vec!["a,b".into(), 0.5.into()]);
        assert_eq!(t.to_csv(), "id,value\n\"a,b\",0.5\n");
    }

    #[test]
    fn envelope_validates() {
        let m = RunManifest {
            command: "validate".into(),
            inputs: vec![],
            flags: json!({}),
            seed: 0,
            tool_version: "0",
            schema_version: SCHEMA_VERSION,
            wall_time_ms: 0,
        };
        assert!(validate_report(&envelope(&m, &json!({"ok": true}))).is_ok());
        assert!(validate_report(&json!({"schema": 1})).is_err());
    }
}
