//! Result tables: `experiment,method,T,metric,mean,stderr,reps`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const HEADER: [&str; 7] = [
    "experiment",
    "method",
    "T",
    "metric",
    "mean",
    "stderr",
    "reps",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub method: String,
    #[serde(rename = "T")]
    pub t: usize,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// Plain decimal rendering with 12 significant digits.
pub fn format_sig12(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1; // digits before the decimal point
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat('0').take(point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    out
}

/// Sorts rows into the canonical `(experiment, method, T)` order.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (a.experiment.as_str(), a.method.as_str(), a.t).cmp(&(
            b.experiment.as_str(),
            b.method.as_str(),
            b.t,
        ))
    });
}

pub fn write_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in &sorted {
        w.write_record([
            r.experiment.clone(),
            r.method.clone(),
            r.t.to_string(),
            r.metric.clone(),
            format_sig12(r.mean),
            format_sig12(r.stderr),
            r.reps.to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Csv(e.into()))?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|e| match e {
        HarnessError::Csv(c) if c.is_io_error() => match c.into_kind() {
            csv::ErrorKind::Io(io) => HarnessError::io(path, io),
            other => HarnessError::Config(format!("{other:?}")),
        },
        e => e,
    })
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Parses a result table, requiring the exact header.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(HarnessError::Config(format!(
            "unexpected CSV header '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()?;
    if let Some(r) = rows.iter().find(|r| !(r.stderr >= 0.0)) {
        return Err(HarnessError::Config(format!(
            "negative or NaN stderr in row for {}",
            r.method
        )));
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_csv(&text)
}
