//! Trace export: CSV for plotting, JSON for structured consumers. Both use
//! the same column names.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::scenarios::TraceRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Csv,
    Json,
}

impl TraceFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Json => "json",
        }
    }
}

fn shape(records: &[TraceRecord]) -> Result<(usize, bool)> {
    let Some(first) = records.first() else {
        return Ok((0, false));
    };
    let q = first.theta_hat.len();
    let yu = first.y.is_some();
    for r in records {
        if r.theta_hat.len() != q || r.theta_err.len() != q || r.y.is_some() != yu || r.u.is_some() != yu {
            return Err(Error::Config("trace records are not homogeneous".into()));
        }
    }
    Ok((q, yu))
}

pub fn trace_header(q: usize, with_yu: bool) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=q).map(|i| format!("theta_hat_{i}")));
    h.extend((1..=q).map(|i| format!("theta_err_{i}")));
    h.extend(["err_norm", "delta", "z", "F_norm", "V"].map(String::from));
    if with_yu {
        h.push("y".into());
        h.push("u".into());
    }
    h
}

fn row(r: &TraceRecord) -> Vec<f64> {
    let mut v = vec![r.t];
    v.extend(&r.theta_hat);
    v.extend(&r.theta_err);
    v.extend([r.err_norm, r.delta, r.z, r.f_norm, r.v]);
    if let (Some(y), Some(u)) = (r.y, r.u) {
        v.push(y);
        v.push(u);
    }
    v
}

fn from_row(values: &[f64], q: usize, with_yu: bool) -> TraceRecord {
    let tail = &values[1 + 2 * q..];
    TraceRecord {
        t: values[0],
        theta_hat: values[1..1 + q].to_vec(),
        theta_err: values[1 + q..1 + 2 * q].to_vec(),
        err_norm: tail[0],
        delta: tail[1],
        z: tail[2],
        f_norm: tail[3],
        v: tail[4],
        y: with_yu.then(|| tail[5]),
        u: with_yu.then(|| tail[6]),
    }
}

/// CSV text with 17 significant digits per value.
pub fn trace_to_csv(records: &[TraceRecord]) -> Result<String> {
    let (q, yu) = shape(records)?;
    let mut out = trace_header(q, yu).join(",");
    out.push('\n');
    for r in records {
        let line: Vec<String> = row(r).iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_csv_trace(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Config("empty trace file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let with_yu = cols.last() == Some(&"u");
    let fixed = 6 + if with_yu { 2 } else { 0 };
    if cols.len() < fixed || !(cols.len() - fixed).is_multiple_of(2) {
        return Err(Error::Config(format!("unrecognised trace header `{header}`")));
    }
    let q = (cols.len() - fixed) / 2;
    if cols != trace_header(q, with_yu) {
        return Err(Error::Config(format!("unrecognised trace header `{header}`")));
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(',')
            .enumerate()
            .map(|(j, s)| {
                s.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, column: j + 1, message: e.to_string() })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != cols.len() {
            return Err(Error::Parse {
                line: i + 1,
                column: values.len(),
                message: format!("expected {} fields", cols.len()),
            });
        }
        records.push(from_row(&values, q, with_yu));
    }
    Ok(records)
}

fn number(x: f64) -> Result<Value> {
    Number::from_f64(x).map(Value::Number).ok_or(Error::NonFinite("trace record"))
}

/// JSON array of flat objects keyed like the CSV header.
pub fn trace_to_json(records: &[TraceRecord]) -> Result<Value> {
    let (q, yu) = shape(records)?;
    let header = trace_header(q, yu);
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let mut obj = Map::new();
        for (k, x) in header.iter().zip(row(r)) {
            obj.insert(k.clone(), number(x)?);
        }
        out.push(Value::Object(obj));
    }
    Ok(Value::Array(out))
}

pub fn parse_json_trace(text: &str) -> Result<Vec<TraceRecord>> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Array(items) = value else {
        return Err(Error::Config("trace JSON must be an array".into()));
    };
    let mut records = Vec::with_capacity(items.len());
    for item in items {
        let Value::Object(obj) = item else {
            return Err(Error::Config("trace entries must be objects".into()));
        };
        let q = obj.keys().filter(|k| k.starts_with("theta_hat_")).count();
        let with_yu = obj.contains_key("y");
        let values = trace_header(q, with_yu)
            .iter()
            .map(|k| {
                obj.get(k).and_then(Value::as_f64).ok_or_else(|| Error::Config(format!("trace entry is missing `{k}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        records.push(from_row(&values, q, with_yu));
    }
    Ok(records)
}

pub fn write_trace(records: &[TraceRecord], format: TraceFormat, path: &Path) -> Result<()> {
    let text = match format {
        TraceFormat::Csv => trace_to_csv(records)?,
        TraceFormat::Json => {
            let mut s = serde_json::to_string_pretty(&trace_to_json(records)?)?;
            s.push('\n');
            s
        }
    };
    fs::write(path, text)?;
    Ok(())
}
