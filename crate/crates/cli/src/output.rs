//! CSV and JSON-lines writers.
//!
//! Numbers are written in Rust's shortest round-trip scientific form
//! (`{:e}`), so a value parsed back from the file is bit-identical to the
//! one computed.

use std::io::Write;

use crate::experiments::{Cell, Table};

pub fn format_number(x: f64) -> String {
    format!("{x:e}")
}

fn text(cell: &Cell) -> String {
    match cell {
        Cell::Num(x) => format_number(*x),
        Cell::Text(s) => (*s).to_string(),
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(text))?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per row, keys in column order. Non-finite numbers
/// become `null`.
pub fn write_jsonl<W: Write>(table: &Table, mut out: W) -> std::io::Result<()> {
    for row in &table.rows {
        let mut line = String::from("{");
        for (i, (col, cell)) in table.columns.iter().zip(row).enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&serde_json::Value::from(*col).to_string());
            line.push(':');
            let value = match cell {
                Cell::Num(x) => serde_json::Value::from(*x),
                Cell::Text(s) => serde_json::Value::from(*s),
            };
            line.push_str(&value.to_string());
        }
        line.push('}');
        writeln!(out, "{line}")?;
    }
    Ok(())
}
