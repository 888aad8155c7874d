//! Tables, identity-check summaries and their CSV/JSON renderings.

use std::fmt::Write as _;

use psqm::verify::IdentityCheck;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits
            Cell::Num(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Num(v) if v.is_nan() => "NaN".into(),
            Cell::Num(v) => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Num(_) => s.serialize_none(),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A named table; serializes to JSON as an array of records.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }
}

struct Record<'a>(&'a [String], &'a [Cell]);

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&Record(&self.columns, row))?;
        }
        seq.end()
    }
}

/// Outcome of one run. Wall time is reported on stderr only, so the
/// serialized report is reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: serde_json::Value,
    /// command-specific scalar results
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub result: serde_json::Value,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<TableRef>,
    #[serde(skip)]
    pub data: Vec<Table>,
}

/// Index entry for a table written alongside the report.
#[derive(Debug, Clone, Serialize)]
pub struct TableRef {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

impl RunReport {
    pub fn new(
        command: String,
        parameters: serde_json::Value,
        result: serde_json::Value,
        checks: Vec<IdentityCheck>,
        data: Vec<Table>,
    ) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        let tables = data.iter().map(|t| TableRef { name: t.name.clone(), columns: t.columns.clone(), rows: t.rows.len() }).collect();
        Self { command, parameters, result, checks, pass, tables, data }
    }

    /// Report with every table inlined, for stdout.
    pub fn to_json_full(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        let tables: serde_json::Map<String, serde_json::Value> =
            self.data.iter().map(|t| (t.name.clone(), serde_json::to_value(t).expect("table serializes"))).collect();
        v["tables"] = serde_json::Value::Object(tables);
        serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
    }

    pub fn to_json_index(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Human-readable check summary, one line per identity.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{} {} value={:e} tol={:e}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value, c.tolerance);
        }
        let _ = writeln!(s, "{}: {}", self.command, if self.pass { "all checks passed" } else { "checks failed" });
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_full_precision() {
        let mut t = Table::new("t", &["a", "b", "c"]);
        t.push(vec![0.1.into(), 3i64.into(), "x,y".into()]);
        t.push(vec![f64::NAN.into(), (-2i64).into(), "plain".into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1.0000000000000001e-1,3,\"x,y\"\nNaN,-2,plain\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn json_records_keep_column_order() {
        let mut t = Table::new("t", &["z", "a"]);
        t.push(vec![1.5.into(), f64::INFINITY.into()]);
        assert_eq!(serde_json::to_string(&t).unwrap(), r#"[{"z":1.5,"a":null}]"#);
    }
}
