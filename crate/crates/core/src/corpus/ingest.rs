use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::Interaction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

/// Source column names for each interaction field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldMap {
    pub user: String,
    pub item: String,
    pub rating: String,
    pub timestamp: String,
    #[serde(default)]
    pub text: Option<String>,
}

impl Default for FieldMap {
    fn default() -> Self {
        FieldMap {
            user: "user_id".into(),
            item: "item_id".into(),
            rating: "rating".into(),
            timestamp: "timestamp".into(),
            text: Some("review_text".into()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub interactions: Vec<Interaction>,
    pub skipped: usize,
}

pub fn ingest(
    path: &Path,
    format: InputFormat,
    field_map: &FieldMap,
    delimiter: u8,
) -> Result<IngestReport> {
    let report = match format {
        InputFormat::Csv => ingest_csv(path, field_map, delimiter)?,
        InputFormat::Jsonl => ingest_jsonl(path, field_map)?,
    };
    if report.interactions.is_empty() {
        return Err(Error::NoRows(path.to_path_buf()));
    }
    Ok(report)
}

fn ingest_csv(path: &Path, fm: &FieldMap, delimiter: u8) -> Result<IngestReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(file);
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (cu, ci, cr, ct) = (col(&fm.user)?, col(&fm.item)?, col(&fm.rating)?, col(&fm.timestamp)?);
    let cx = match &fm.text {
        Some(name) => Some(col(name)?),
        None => None,
    };

    let mut report = IngestReport::default();
    for record in reader.records() {
        let Ok(record) = record else {
            report.skipped += 1;
            continue;
        };
        let parsed = (|| {
            let it = Interaction {
                user_id: record.get(cu)?.trim().to_string(),
                item_id: record.get(ci)?.trim().to_string(),
                rating: record.get(cr)?.trim().parse().ok()?,
                timestamp: parse_timestamp(record.get(ct)?.trim())?,
                review_text: cx
                    .and_then(|c| record.get(c))
                    .filter(|s| !s.is_empty())
                    .map(str::to_string),
            };
            it.is_valid().then_some(it)
        })();
        match parsed {
            Some(it) => report.interactions.push(it),
            None => report.skipped += 1,
        }
    }
    Ok(report)
}

fn ingest_jsonl(path: &Path, fm: &FieldMap) -> Result<IngestReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut report = IngestReport::default();
    let mut seen_keys: HashSet<String> = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let Ok(Value::Object(obj)) = serde_json::from_str::<Value>(&line) else {
            report.skipped += 1;
            continue;
        };
        seen_keys.extend(obj.keys().cloned());
        let parsed = (|| {
            let it = Interaction {
                user_id: value_as_id(obj.get(&fm.user)?)?,
                item_id: value_as_id(obj.get(&fm.item)?)?,
                rating: value_as_f64(obj.get(&fm.rating)?)?,
                timestamp: value_as_timestamp(obj.get(&fm.timestamp)?)?,
                review_text: fm
                    .text
                    .as_ref()
                    .and_then(|k| obj.get(k))
                    .and_then(Value::as_str)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string),
            };
            it.is_valid().then_some(it)
        })();
        match parsed {
            Some(it) => report.interactions.push(it),
            None => report.skipped += 1,
        }
    }
    if report.interactions.is_empty() {
        for key in [&fm.user, &fm.item, &fm.rating, &fm.timestamp] {
            if !seen_keys.is_empty() && !seen_keys.contains(key) {
                return Err(Error::MissingColumn(key.clone()));
            }
        }
    }
    Ok(report)
}

fn parse_timestamp(s: &str) -> Option<i64> {
    s.parse::<i64>()
        .ok()
        .or_else(|| s.parse::<f64>().ok().filter(|t| t.is_finite()).map(|t| t as i64))
}

fn value_as_id(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn value_as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn value_as_timestamp(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|t| t as i64)),
        Value::String(s) => parse_timestamp(s.trim()),
        _ => None,
    }
}

/// Writes the canonical corpus file: one JSON object per interaction.
pub fn write_jsonl(path: &Path, interactions: &[Interaction]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for it in interactions {
        serde_json::to_writer(&mut w, it)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
