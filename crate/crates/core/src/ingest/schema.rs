//! Schema extraction for CSV, JSON and XML sources.
//!
//! CSV columns get a type by parsing every non-empty cell. JSON and XML
//! documents are flattened into root-to-leaf paths: object keys and element
//! names are joined with `.`, array elements add `[]`, XML attributes appear
//! as `@name`.

use std::collections::BTreeMap;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde_json::Value;

use super::DetectedFormat;
use crate::error::{Error, ParseError, Result};
use crate::model::{SchemaField, Summary, ValueType};

#[derive(Default)]
struct PathStats {
    paths: BTreeMap<String, (ValueType, u64)>,
}

impl PathStats {
    fn record(&mut self, path: &str, ty: ValueType) {
        let key = if path.is_empty() { "$" } else { path };
        self.paths
            .entry(key.to_owned())
            .and_modify(|(t, n)| {
                *t = t.merge(ty);
                *n += 1;
            })
            .or_insert((ty, 1));
    }

    fn into_summary(self, records: Option<u64>) -> Summary {
        Summary::Schema {
            fields: self
                .paths
                .into_iter()
                .map(|(path, (value_type, count))| SchemaField {
                    path,
                    value_type,
                    count,
                })
                .collect(),
            records,
        }
    }
}

/// Type of a scalar written as text (CSV cells, XML text and attributes).
pub fn infer_scalar(raw: &str) -> ValueType {
    let s = raw.trim();
    if s.is_empty() {
        ValueType::Null
    } else if s.parse::<i64>().is_ok() {
        ValueType::Integer
    } else if s.parse::<f64>().is_ok_and(f64::is_finite) {
        ValueType::Real
    } else if s.eq_ignore_ascii_case("true") || s.eq_ignore_ascii_case("false") {
        ValueType::Boolean
    } else {
        ValueType::Text
    }
}

/// Extracts a schema summary from raw bytes in the declared format.
pub fn schema_from_bytes(bytes: &[u8], format: DetectedFormat, source: &str) -> Result<Summary> {
    match format {
        DetectedFormat::Csv => csv_schema(bytes, source),
        DetectedFormat::Json => json_schema(bytes, source),
        DetectedFormat::Xml => xml_schema(bytes, source),
        other => Err(Error::InvalidArgument(format!(
            "schema extraction does not apply to {other} data"
        ))),
    }
}

fn csv_schema(bytes: &[u8], source: &str) -> Result<Summary> {
    let csv_err = |e: csv::Error| {
        let mut err = ParseError::new(source, e.to_string());
        if let Some(pos) = e.position() {
            err = err.at_line(pos.line(), 1).at_offset(pos.byte());
        }
        Error::Parse(err)
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let headers = reader.headers().map_err(csv_err)?.clone();

    let mut names: Vec<String> = Vec::with_capacity(headers.len());
    for (i, h) in headers.iter().enumerate() {
        let base = if h.trim().is_empty() {
            format!("column_{}", i + 1)
        } else {
            h.trim().to_owned()
        };
        let mut name = base.clone();
        let mut n = 2;
        while names.contains(&name) {
            name = format!("{base}#{n}");
            n += 1;
        }
        names.push(name);
    }

    // per column: merged type of non-empty cells, and their count
    let mut columns: Vec<(Option<ValueType>, u64)> = vec![(None, 0); names.len()];
    let mut rows = 0u64;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        rows += 1;
        for (cell, col) in record.iter().zip(columns.iter_mut()) {
            let ty = infer_scalar(cell);
            if ty == ValueType::Null {
                continue;
            }
            col.1 += 1;
            col.0 = Some(match col.0 {
                None => ty,
                Some(prev) => csv_merge(prev, ty),
            });
        }
    }

    Ok(Summary::Schema {
        fields: names
            .into_iter()
            .zip(columns)
            .map(|(path, (ty, count))| SchemaField {
                path,
                value_type: ty.unwrap_or(ValueType::Text),
                count,
            })
            .collect(),
        records: Some(rows),
    })
}

/// A column keeps a numeric or boolean type only while every cell agrees.
fn csv_merge(a: ValueType, b: ValueType) -> ValueType {
    match (a, b) {
        (x, y) if x == y => x,
        (ValueType::Integer, ValueType::Real) | (ValueType::Real, ValueType::Integer) => {
            ValueType::Real
        }
        _ => ValueType::Text,
    }
}

fn line_col_to_offset(text: &[u8], line: usize, column: usize) -> u64 {
    let mut offset = 0usize;
    for (i, l) in text.split(|b| *b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(text.len()) as u64;
        }
        offset += l.len() + 1;
    }
    text.len() as u64
}

fn offset_to_line_col(text: &[u8], offset: usize) -> (u64, u64) {
    let prefix = &text[..offset.min(text.len())];
    let line = prefix.iter().filter(|b| **b == b'\n').count() + 1;
    let col = prefix.iter().rev().take_while(|b| **b != b'\n').count() + 1;
    (line as u64, col as u64)
}

fn json_schema(bytes: &[u8], source: &str) -> Result<Summary> {
    let mut stats = PathStats::default();
    let mut records = 0u64;
    for value in serde_json::Deserializer::from_slice(bytes).into_iter::<Value>() {
        let value = value.map_err(|e| {
            ParseError::new(source, e.to_string())
                .at_line(e.line() as u64, e.column() as u64)
                .at_offset(line_col_to_offset(bytes, e.line(), e.column()))
        })?;
        records += 1;
        walk_json(&mut stats, String::new(), &value);
    }
    if records == 0 {
        return Err(ParseError::new(source, "empty JSON document").at_offset(0).into());
    }
    Ok(stats.into_summary(Some(records)))
}

fn walk_json(stats: &mut PathStats, path: String, value: &Value) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                let child = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                walk_json(stats, child, v);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            let child = format!("{path}[]");
            for v in items {
                walk_json(stats, child.clone(), v);
            }
        }
        leaf => stats.record(&path, json_type(leaf)),
    }
}

pub(crate) fn json_type(value: &Value) -> ValueType {
    match value {
        Value::Null => ValueType::Null,
        Value::Bool(_) => ValueType::Boolean,
        Value::Number(n) if n.is_i64() || n.is_u64() => ValueType::Integer,
        Value::Number(_) => ValueType::Real,
        Value::String(_) => ValueType::Text,
        Value::Array(_) => ValueType::Array,
        Value::Object(_) => ValueType::Object,
    }
}

struct Frame {
    path: String,
    has_child: bool,
    text: String,
}

fn xml_schema(bytes: &[u8], source: &str) -> Result<Summary> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().check_end_names = true;
    let err_at = |offset: u64, msg: String| {
        let (line, col) = offset_to_line_col(bytes, offset as usize);
        Error::Parse(ParseError::new(source, msg).at_line(line, col).at_offset(offset))
    };

    let mut stats = PathStats::default();
    let mut stack: Vec<Frame> = Vec::new();
    let mut saw_root = false;
    let mut buf = Vec::new();
    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| err_at(reader.error_position(), e.to_string()))?;
        let position = reader.buffer_position();
        match event {
            Event::Start(ref start) | Event::Empty(ref start) => {
                if stack.is_empty() {
                    if saw_root {
                        return Err(err_at(position, "multiple root elements".into()));
                    }
                    saw_root = true;
                }
                let path = element_path(&stack, start);
                if let Some(parent) = stack.last_mut() {
                    parent.has_child = true;
                }
                for attr in start.attributes() {
                    let attr = attr.map_err(|e| err_at(position, e.to_string()))?;
                    let value = attr
                        .unescape_value()
                        .map_err(|e| err_at(position, e.to_string()))?;
                    let name = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
                    stats.record(&format!("{path}.@{name}"), infer_scalar(&value));
                }
                if matches!(event, Event::Empty(_)) {
                    stats.record(&path, ValueType::Null);
                } else {
                    stack.push(Frame {
                        path,
                        has_child: false,
                        text: String::new(),
                    });
                }
            }
            Event::End(_) => {
                let frame = stack
                    .pop()
                    .ok_or_else(|| err_at(position, "unexpected closing tag".into()))?;
                if !frame.has_child {
                    stats.record(&frame.path, infer_scalar(&frame.text));
                }
            }
            Event::Text(ref text) => {
                let t = text.unescape().map_err(|e| err_at(position, e.to_string()))?;
                match stack.last_mut() {
                    Some(frame) => frame.text.push_str(&t),
                    None if !t.trim().is_empty() => {
                        return Err(err_at(position, "text outside the root element".into()))
                    }
                    None => {}
                }
            }
            Event::CData(ref data) => {
                if let Some(frame) = stack.last_mut() {
                    frame.text.push_str(&String::from_utf8_lossy(data));
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(err_at(bytes.len() as u64, "unclosed element at end of document".into()));
    }
    if !saw_root {
        return Err(err_at(0, "no root element".into()));
    }
    Ok(stats.into_summary(None))
}

fn element_path(stack: &[Frame], start: &BytesStart<'_>) -> String {
    let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
    match stack.last() {
        Some(parent) => format!("{}.{}", parent.path, name),
        None => name,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fields(summary: &Summary) -> Vec<(String, ValueType, u64)> {
        match summary {
            Summary::Schema { fields, .. } => fields
                .iter()
                .map(|f| (f.path.clone(), f.value_type, f.count))
                .collect(),
            _ => panic!("not a schema"),
        }
    }

    fn records(summary: &Summary) -> Option<u64> {
        match summary {
            Summary::Schema { records, .. } => *records,
            _ => None,
        }
    }

    #[test]
    fn xml_products() {
        let doc = b"<products><p><name>A</name><price>3</price></p></products>";
        let s = schema_from_bytes(doc, DetectedFormat::Xml, "products.xml").unwrap();
        assert_eq!(
            fields(&s),
            vec![
                ("products.p.name".into(), ValueType::Text, 1),
                ("products.p.price".into(), ValueType::Integer, 1),
            ]
        );
    }

    #[test]
    fn xml_attributes_and_repeats() {
        let doc = br#"<?xml version="1.0"?>
            <catalog version="2">
              <item id="1"><price>3.5</price><tag/></item>
              <item id="2"><price>4</price><![CDATA[ignored]]></item>
            </catalog>"#;
        let s = schema_from_bytes(doc, DetectedFormat::Xml, "c.xml").unwrap();
        assert_eq!(
            fields(&s),
            vec![
                ("catalog.@version".into(), ValueType::Integer, 1),
                ("catalog.item.@id".into(), ValueType::Integer, 2),
                ("catalog.item.price".into(), ValueType::Real, 2),
                ("catalog.item.tag".into(), ValueType::Null, 1),
            ]
        );
    }

    #[test]
    fn xml_errors_report_position() {
        for doc in [&b"<a><b></a>"[..], b"<a>", b"", b"<a/><b/>"] {
            let err = schema_from_bytes(doc, DetectedFormat::Xml, "bad.xml").unwrap_err();
            let Error::Parse(p) = err else { panic!("{err}") };
            assert!(p.offset.is_some(), "{p}");
        }
    }

    #[test]
    fn csv_types_and_rows() {
        let s = schema_from_bytes(b"a,b\n1,x", DetectedFormat::Csv, "t.csv").unwrap();
        assert_eq!(
            fields(&s),
            vec![("a".into(), ValueType::Integer, 1), ("b".into(), ValueType::Text, 1)]
        );
        assert_eq!(records(&s), Some(1));

        let s = schema_from_bytes(
            b"i,r,b,t,e\n1,1.5,true,x,\n2,2,FALSE,3,\n,,,,\n",
            DetectedFormat::Csv,
            "t.csv",
        )
        .unwrap();
        assert_eq!(
            fields(&s),
            vec![
                ("i".into(), ValueType::Integer, 2),
                ("r".into(), ValueType::Real, 2),
                ("b".into(), ValueType::Boolean, 2),
                ("t".into(), ValueType::Text, 2),
                ("e".into(), ValueType::Text, 0),
            ]
        );
        assert_eq!(records(&s), Some(3));
    }

    #[test]
    fn csv_quoting_and_duplicate_headers() {
        let s = schema_from_bytes(
            b"name,name\n\"Smith, J\",\"4\"\n",
            DetectedFormat::Csv,
            "t.csv",
        )
        .unwrap();
        assert_eq!(
            fields(&s),
            vec![("name".into(), ValueType::Text, 1), ("name#2".into(), ValueType::Integer, 1)]
        );
        let err = schema_from_bytes(b"a,b\n1,2,3\n", DetectedFormat::Csv, "t.csv").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn json_paths() {
        let doc = br#"{"a": [{"b": 1}, {"b": 2.5, "c": null}], "d": {"e": "x"}, "f": [], "g": true}"#;
        let s = schema_from_bytes(doc, DetectedFormat::Json, "t.json").unwrap();
        assert_eq!(
            fields(&s),
            vec![
                ("a[].b".into(), ValueType::Real, 2),
                ("a[].c".into(), ValueType::Null, 1),
                ("d.e".into(), ValueType::Text, 1),
                ("f".into(), ValueType::Array, 1),
                ("g".into(), ValueType::Boolean, 1),
            ]
        );
    }

    #[test]
    fn json_lines_count_records() {
        let doc = b"{\"user\": \"a\", \"text\": \"hi\"}\n{\"user\": \"b\", \"text\": \"yo\"}\n";
        let s = schema_from_bytes(doc, DetectedFormat::Json, "tweets.json").unwrap();
        assert_eq!(records(&s), Some(2));
        assert_eq!(fields(&s)[0], ("text".into(), ValueType::Text, 2));
    }

    #[test]
    fn malformed_json_reports_offset() {
        let err = schema_from_bytes(br#"{"a":"#, DetectedFormat::Json, "bad.json").unwrap_err();
        let Error::Parse(p) = err else { panic!() };
        // position of the last byte consumed before input ran out
        assert_eq!(p.offset, Some(4));
        assert_eq!((p.line, p.column), (Some(1), Some(5)));
    }

    #[test]
    fn offsets_and_lines_agree() {
        let text = b"ab\ncde\nf";
        assert_eq!(line_col_to_offset(text, 2, 2), 4);
        assert_eq!(offset_to_line_col(text, 4), (2, 2));
    }
}
