use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::tabular::dictionary::{DataDictionary, TableMetadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    Jsonl,
}

impl TableFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(TableFormat::Csv),
            Some("jsonl" | "ndjson") => Ok(TableFormat::Jsonl),
            _ => Err(Error::InvalidInput(format!(
                "{}: expected a .csv or .jsonl file",
                path.display()
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    pub rows_read: usize,
    pub duplicates_removed: usize,
    pub missing_values: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Drop exact duplicate rows after whitespace normalization.
    pub dedup: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { dedup: true }
    }
}

/// A loaded table. Missing cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableData {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
    pub dictionary: DataDictionary,
    pub metadata: TableMetadata,
    pub stats: LoadStats,
    pub format: TableFormat,
}

impl TableData {
    /// Builds a table from raw string cells, applying the same preprocessing
    /// as the loaders.
    pub fn from_raw(
        columns: Vec<String>,
        raw: Vec<Vec<String>>,
        dictionary: Option<&DataDictionary>,
        options: &LoadOptions,
        format: TableFormat,
    ) -> Result<Self> {
        check_columns(&columns)?;
        let dictionary = dictionary.cloned().unwrap_or_default();
        dictionary.check_header(&columns)?;
        let rows_read = raw.len();
        let mut seen = HashSet::new();
        let mut rows = Vec::with_capacity(raw.len());
        let mut missing_values = 0;
        for row in raw {
            let row: Vec<String> = row.iter().map(|c| normalize_whitespace(c)).collect();
            if options.dedup && !seen.insert(row.clone()) {
                continue;
            }
            let row: Vec<Option<String>> = row
                .into_iter()
                .map(|c| if c.is_empty() { None } else { Some(c) })
                .collect();
            missing_values += row.iter().filter(|c| c.is_none()).count();
            rows.push(row);
        }
        let stats = LoadStats {
            rows_read,
            duplicates_removed: rows_read - rows.len(),
            missing_values,
        };
        Ok(TableData {
            metadata: dictionary.table.clone(),
            columns,
            rows,
            dictionary,
            stats,
            format,
        })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidInput(format!("no column named '{name}'")))
    }

    /// Cells of one column, by row.
    pub fn column_values(&self, index: usize) -> Vec<Option<String>> {
        self.rows.iter().map(|r| r[index].clone()).collect()
    }

    /// Row as an ordered JSON object; missing cells are null.
    pub fn row_json(&self, index: usize) -> Value {
        let mut obj = Map::new();
        for (name, cell) in self.columns.iter().zip(&self.rows[index]) {
            obj.insert(
                name.clone(),
                cell.as_ref().map_or(Value::Null, |v| Value::String(v.clone())),
            );
        }
        Value::Object(obj)
    }
}

fn check_columns(columns: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in columns {
        if c.trim().is_empty() {
            return Err(Error::InvalidInput("table has an empty column name".into()));
        }
        if !seen.insert(c) {
            return Err(Error::InvalidInput(format!("column '{c}' appears twice")));
        }
    }
    if columns.is_empty() {
        return Err(Error::InvalidInput("table has no columns".into()));
    }
    Ok(())
}

fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Reads a CSV table with a header row. Rows with the wrong number of
/// fields are rejected with their line number.
pub fn read_csv<R: Read>(
    reader: R,
    source_name: &str,
    dictionary: Option<&DataDictionary>,
    options: &LoadOptions,
) -> Result<TableData> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let parse_err = |line: u64, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line: line as usize,
        message,
    };
    let columns: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut raw = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != columns.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", columns.len(), record.len()),
            ));
        }
        raw.push(record.iter().map(str::to_string).collect());
    }
    TableData::from_raw(columns, raw, dictionary, options, TableFormat::Csv)
        .map_err(|e| e.at(source_name.to_string()))
}

/// Reads one JSON object per line. Columns are taken in first-seen key
/// order; keys absent from a row are missing values.
pub fn read_jsonl<R: Read>(
    reader: R,
    source_name: &str,
    dictionary: Option<&DataDictionary>,
    options: &LoadOptions,
) -> Result<TableData> {
    let mut columns: Vec<String> = Vec::new();
    let mut objects = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            source_name: source_name.to_string(),
            line: i + 1,
            message,
        };
        let value: Value = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(parse_err("expected a JSON object".into()));
        };
        for (key, v) in &obj {
            if matches!(v, Value::Array(_) | Value::Object(_)) {
                return Err(parse_err(format!("field '{key}' is not a scalar")));
            }
            if !columns.contains(key) {
                columns.push(key.clone());
            }
        }
        objects.push(obj);
    }
    let raw = objects
        .into_iter()
        .map(|obj| {
            columns
                .iter()
                .map(|c| match obj.get(c) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(other) => other.to_string(),
                })
                .collect()
        })
        .collect();
    TableData::from_raw(columns, raw, dictionary, options, TableFormat::Jsonl)
        .map_err(|e| e.at(source_name.to_string()))
}

/// Loads a CSV or JSONL table, chosen by extension.
pub fn load_table(path: &Path, dictionary: Option<&DataDictionary>, options: &LoadOptions) -> Result<TableData> {
    let format = TableFormat::from_path(path)?;
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    match format {
        TableFormat::Csv => read_csv(file, &name, dictionary, options),
        TableFormat::Jsonl => read_jsonl(file, &name, dictionary, options),
    }
}

pub fn write_csv<W: Write>(table: &TableData, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Internal(format!("writing csv: {e}"));
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.as_deref().unwrap_or(""))).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Internal(format!("writing csv: {e}")))
}

pub fn write_jsonl<W: Write>(table: &TableData, mut writer: W) -> Result<()> {
    for i in 0..table.rows.len() {
        serde_json::to_writer(&mut writer, &table.row_json(i))?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::Internal(format!("writing jsonl: {e}")))?;
    }
    Ok(())
}

/// Writes in the format implied by the path's extension.
pub fn write_table(table: &TableData, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let writer = std::io::BufWriter::new(file);
    match TableFormat::from_path(path)? {
        TableFormat::Csv => write_csv(table, writer),
        TableFormat::Jsonl => write_jsonl(table, writer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<TableData> {
        read_csv(text.as_bytes(), "t.csv", None, &LoadOptions::default())
    }

    #[test]
    fn preprocessing() {
        let t = csv("name,phone\n  Homer   Simpson ,555\nHomer Simpson,555\nBeth,\n").unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0][0].as_deref(), Some("Homer Simpson"));
        assert_eq!(t.rows[1][1], None);
        assert_eq!(
            t.stats,
            LoadStats {
                rows_read: 3,
                duplicates_removed: 1,
                missing_values: 1
            }
        );
        let kept = read_csv(
            "a\n1\n1\n".as_bytes(),
            "t.csv",
            None,
            &LoadOptions { dedup: false },
        )
        .unwrap();
        assert_eq!(kept.rows.len(), 2);
    }

    #[test]
    fn ragged_rows_report_the_line() {
        let err = csv("a,b\n1,2\n3\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn bad_headers() {
        assert!(csv("a,a\n1,2\n").is_err());
        assert!(csv("a,\n1,2\n").is_err());
    }

    #[test]
    fn jsonl_columns_and_scalars() {
        let text = "{\"a\": \"x\", \"b\": 1.5}\n\n{\"c\": true, \"a\": null}\n";
        let t = read_jsonl(text.as_bytes(), "t.jsonl", None, &LoadOptions::default()).unwrap();
        assert_eq!(t.columns, ["a", "b", "c"]);
        assert_eq!(t.rows[0], [Some("x".into()), Some("1.5".into()), None]);
        assert_eq!(t.rows[1], [None, None, Some("true".into())]);
        let err = read_jsonl("{\"a\": 1}\n[1]\n".as_bytes(), "t.jsonl", None, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn round_trip_through_writers() {
        let t = csv("name,notes\n\"Simpson, Homer\",\"said \"\"hi\"\"\"\nBeth,\n").unwrap();
        let mut out = Vec::new();
        write_csv(&t, &mut out).unwrap();
        let back = csv(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(back.rows, t.rows);
        let mut out = Vec::new();
        write_jsonl(&t, &mut out).unwrap();
        let back = read_jsonl(out.as_slice(), "t.jsonl", None, &LoadOptions::default()).unwrap();
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.columns, t.columns);
    }

    #[test]
    fn extension_selects_format() {
        assert_eq!(TableFormat::from_path(Path::new("x.CSV")).unwrap(), TableFormat::Csv);
        assert_eq!(TableFormat::from_path(Path::new("x.ndjson")).unwrap(), TableFormat::Jsonl);
        assert!(TableFormat::from_path(Path::new("x.txt")).is_err());
    }
}
