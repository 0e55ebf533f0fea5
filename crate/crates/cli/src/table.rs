//! Tabular output as CSV (12 significant digits) or JSON `{meta, rows}`
//! (17 significant digits).

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::value::RawValue;

pub const CSV_DIGITS: usize = 12;
pub const JSON_DIGITS: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

/// Scientific notation with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits - 1, x)
}

/// A value of the JSON metadata block.
#[derive(Debug, Clone, PartialEq)]
pub enum Meta {
    Cell(Cell),
    List(Vec<Meta>),
    Map(Vec<(String, Meta)>),
}

impl<T: Into<Cell>> From<T> for Meta {
    fn from(v: T) -> Self {
        Meta::Cell(v.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, Meta)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Meta>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Null => String::new(),
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(x) => format_sig(*x, CSV_DIGITS),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&JsonTable(self)).expect("tables always serialize");
        out.push('\n');
        out
    }
}

struct JsonTable<'a>(&'a Table);
struct JsonRow<'a>(&'a [&'static str], &'a [Cell]);
struct JsonRows<'a>(&'a Table);
struct JsonMap<'a>(&'a [(String, Meta)]);

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Null => s.serialize_none(),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Float(x) if x.is_finite() => RawValue::from_string(format_sig(*x, JSON_DIGITS))
                .expect("scientific notation is valid JSON")
                .serialize(s),
            Cell::Float(_) => s.serialize_none(),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl Serialize for Meta {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Meta::Cell(c) => c.serialize(s),
            Meta::List(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            Meta::Map(entries) => JsonMap(entries).serialize(s),
        }
    }
}

impl Serialize for JsonMap<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for JsonRows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows.len()))?;
        for row in &self.0.rows {
            seq.serialize_element(&JsonRow(&self.0.columns, row))?;
        }
        seq.end()
    }
}

impl Serialize for JsonTable<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("meta", &JsonMap(&self.0.meta))?;
        map.serialize_entry("rows", &JsonRows(self.0))?;
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["n", "e", "status"]);
        t.meta("z", 1.0);
        t.push(vec![1u32.into(), 0.999_973_372_55.into(), "ok".into()]);
        t.push(vec![2u32.into(), Cell::Null, "failed".into()]);
        t
    }

    #[test]
    fn csv_has_header_and_twelve_digits() {
        assert_eq!(sample().to_csv(), "n,e,status\n1,9.99973372550e-1,ok\n2,,failed\n");
    }

    #[test]
    fn json_round_trips_with_seventeen_digits() {
        let text = sample().to_json();
        assert!(text.contains("9.9997337254999996e-1"), "{text}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["rows"][0]["e"].as_f64().unwrap(), 0.999_973_372_55);
        assert!(v["rows"][1]["e"].is_null());
        assert_eq!(v["meta"]["z"].as_f64().unwrap(), 1.0);
    }
}
