//! Dataset and trace CSV formats.

use std::io::{Read, Write};
use std::path::Path;

use crate::boost::RoundTrace;
use crate::dist::{check_dims, Point};
use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 7] = [
    "round",
    "log2_W",
    "n_doubled",
    "tv_gen_vs_pt",
    "minority_ratio",
    "epsilon_prime",
    "lambda_min",
];

/// Points read from a dataset CSV, with the optional trailing `mode_id` column.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetFile {
    pub points: Vec<Point>,
    pub mode_ids: Option<Vec<usize>>,
}

/// Writes one point per row under a header `x0,x1,…[,mode_id]`.
pub fn write_dataset<W: Write>(out: W, points: &[Point], mode_ids: Option<&[usize]>) -> Result<()> {
    let d = check_dims(points)?;
    if let Some(ids) = mode_ids {
        if ids.len() != points.len() {
            return Err(Error::contract("mode id count differs from point count"));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
    if mode_ids.is_some() {
        header.push("mode_id".into());
    }
    w.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        if let Some(ids) = mode_ids {
            row.push(ids[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset<R: Read>(input: R) -> Result<DatasetFile> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.is_empty() {
        return Err(Error::config("dataset CSV has no header"));
    }
    let has_mode = header.iter().last().map(str::trim) == Some("mode_id");
    let d = header.len() - has_mode as usize;
    if d == 0 {
        return Err(Error::config("dataset CSV has no coordinate columns"));
    }
    let mut points = Vec::new();
    let mut ids = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        if rec.len() != header.len() {
            return Err(Error::config(format!("row {row} has {} fields, expected {}", rec.len(), header.len())));
        }
        let coords = (0..d)
            .map(|k| {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::config(format!("row {row}, column {k}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(Point::new(coords).map_err(|e| Error::config(format!("row {row}: {e}")))?);
        if has_mode {
            ids.push(
                rec[d]
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::config(format!("row {row}, mode_id: {e}")))?,
            );
        }
    }
    if points.is_empty() {
        return Err(Error::config("dataset CSV has no rows"));
    }
    Ok(DatasetFile {
        points,
        mode_ids: has_mode.then_some(ids),
    })
}

pub fn read_dataset_path(path: &Path) -> Result<DatasetFile> {
    let f = std::fs::File::open(path)
        .map_err(|e| Error::config(format!("cannot open dataset {}: {e}", path.display())))?;
    read_dataset(f)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the per-round trace; unavailable values are empty fields.
pub fn write_trace<W: Write>(out: W, trace: &RoundTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        w.write_record([
            r.round.to_string(),
            r.log2_w.to_string(),
            r.n_doubled.to_string(),
            opt(r.tv_gen_vs_pt),
            opt(r.minority_ratio),
            opt(r.epsilon_prime),
            opt(r.lambda_min),
        ])?;
    }
    w.flush()?;
    Ok(())
}
