use std::fs;
use std::io::Write;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::args::{Format, OutputArgs};

/// Writes `report` as pretty JSON or CSV, newline-terminated.
///
/// For CSV, `rows_key` names an array field whose entries become rows; the
/// remaining fields are written first as `# name: value` comment lines.
/// Without it the report itself (or each entry of a top-level array) is a row.
pub fn emit<T: Serialize>(output: &OutputArgs, report: &T, rows_key: Option<&str>) -> Result<()> {
    let text = match output.format {
        Format::Json => qmean::report::to_json_line(report),
        Format::Csv => to_csv(&serde_json::to_value(report)?, rows_key)?,
    };
    match &output.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn to_csv(value: &Value, rows_key: Option<&str>) -> Result<String> {
    let mut comments = String::new();
    let rows: Vec<&Value> = match (value, rows_key) {
        (Value::Object(map), Some(key)) => {
            for (name, v) in map.iter().filter(|(name, _)| name.as_str() != key) {
                comments.push_str(&format!("# {name}: {v}\n"));
            }
            map.get(key).and_then(Value::as_array).map(|a| a.iter().collect()).unwrap_or_default()
        }
        (Value::Array(items), _) => items.iter().collect(),
        (other, _) => vec![other],
    };
    let header: Vec<String> = match rows.first() {
        Some(Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    };
    let mut writer = csv::Writer::from_writer(Vec::new());
    if !header.is_empty() {
        writer.write_record(&header)?;
        for row in &rows {
            writer.write_record(header.iter().map(|h| cell(row.get(h))))?;
        }
    }
    let body = String::from_utf8(writer.into_inner()?)?;
    Ok(comments + &body)
}

fn cell(value: Option<&Value>) -> String {
    match value {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flat_report_is_one_row() {
        let csv = to_csv(&json!({"b": 2.5, "a": "x", "c": [1, 2]}), None).unwrap();
        assert_eq!(csv, "a,b,c\nx,2.5,\"[1,2]\"\n");
    }

    #[test]
    fn table_keeps_other_fields_as_comments() {
        let v = json!({"fit": {"slope": 3.0}, "rows": [{"t": 1}, {"t": 2}]});
        assert_eq!(to_csv(&v, Some("rows")).unwrap(), "# fit: {\"slope\":3.0}\nt\n1\n2\n");
    }
}
