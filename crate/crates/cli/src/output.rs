//! Table emission: CSV with a header row, LF line endings and 17-significant-
//! digit scientific notation (exact f64 round trip), or JSON arrays of row
//! objects carrying the same keys.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => anyhow::bail!("unknown format {other:?} (use csv or json)"),
        }
    }
}

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
    Int(u64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// 17 significant digits in scientific notation; round-trips any f64.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// A fully-materialized output table.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => fmt_float(*x),
                    Cell::Text(s) => s.clone(),
                    Cell::Int(k) => k.to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        // NaN has no JSON representation; serialize as null
                        Cell::Num(x) => json!(x),
                        Cell::Text(s) => json!(s),
                        Cell::Int(k) => json!(k),
                    };
                    obj.insert((*name).to_string(), v);
                }
                Value::Object(obj)
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&rows).expect("serializable");
        text.push('\n');
        text
    }
}

/// Parse one CSV file produced by [`Table::render`]; used by round-trip tests.
pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .map(|h| h.split(',').map(str::to_string).collect())
        .unwrap_or_default();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [
            0.0,
            -0.0,
            1.0,
            std::f64::consts::PI,
            -2.2250738585072014e-308,
            1.7976931348623157e308,
            5.382,
            -1.0 / 3.0,
        ] {
            let s = fmt_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_float(f64::NAN), "NaN");
        assert!(fmt_float(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn csv_shape() {
        let mut t = Table::new(vec!["a", "b", "c"]);
        t.push(vec![Cell::Num(1.5), Cell::Text("x".into()), Cell::Int(7)]);
        let csv = t.render(Format::Csv);
        assert!(csv.starts_with("a,b,c\n"));
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
        let (header, rows) = parse_csv(&csv);
        assert_eq!(header, vec!["a", "b", "c"]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0][2], "7");
    }

    #[test]
    fn json_replaces_nan_with_null() {
        let mut t = Table::new(vec!["x"]);
        t.push(vec![Cell::Num(f64::NAN)]);
        let js = t.render(Format::Json);
        assert!(js.contains("null"));
    }
}
