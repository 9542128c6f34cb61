//! Column tables written as CSV (with `#` metadata lines) or JSON.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::Format;

pub const FORMAT_VERSION: &str = "1";
pub const UNITS: &str = "natural units: hbar = v_F = c = e = 1, l_B = 1/sqrt(B), omega_B = 2B";

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Num(Vec<f64>),
    Text(Vec<String>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Num(v) => v.len(),
            Column::Text(v) => v.len(),
        }
    }

    fn cell(&self, i: usize) -> String {
        match self {
            // Debug gives the shortest round-trip form, switching to exponents at the extremes
            Column::Num(v) => format!("{:?}", v[i]),
            Column::Text(v) => v[i].clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Column::Num(v) => v
                .iter()
                .map(|x| serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number))
                .collect(),
            Column::Text(v) => v.iter().cloned().map(Value::String).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<(String, Column)>,
}

impl Table {
    /// Numeric table from row tuples.
    pub fn from_rows(names: &[&str], rows: &[Vec<f64>]) -> Self {
        let columns = names
            .iter()
            .enumerate()
            .map(|(j, n)| {
                (
                    n.to_string(),
                    Column::Num(rows.iter().map(|r| r[j]).collect()),
                )
            })
            .collect();
        Self {
            meta: Vec::new(),
            columns,
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, c)| c.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn write<W: Write>(&self, w: &mut W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        let header: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.rows() {
            let row: Vec<String> = self.columns.iter().map(|(_, c)| c.cell(i)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    fn write_json<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), Value::String(v.clone()));
        }
        let columns: Vec<Value> = self
            .columns
            .iter()
            .map(|(n, c)| json!({ "name": n, "values": c.to_json() }))
            .collect();
        serde_json::to_writer(&mut *w, &json!({ "meta": meta, "columns": columns }))?;
        writeln!(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::from_rows(&["x", "y"], &[vec![0.1, 1.0], vec![1e-20, f64::NAN]]);
        t.meta("format_version", FORMAT_VERSION);
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write(&mut buf, Format::Csv).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "# format_version: 1\nx,y\n0.1,1.0\n1e-20,NaN\n");
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        sample().write(&mut buf, Format::Json).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["meta"]["format_version"], "1");
        assert_eq!(v["columns"][0]["name"], "x");
        assert_eq!(v["columns"][0]["values"][0], 0.1);
        assert!(v["columns"][1]["values"][1].is_null());
    }
}
