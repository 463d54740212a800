//! Dataset CSV ingestion and export, and run artifacts.

mod artifact;

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, Response};

pub use artifact::{DgpSummary, RunArtifact, StageOutputs, SCHEMA_VERSION};

/// Which CSV columns hold the response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ResponseSpec {
    Gaussian { column: String },
    Binomial { column: String },
    Survival { time: String, status: String },
}

impl ResponseSpec {
    fn columns(&self) -> Vec<&str> {
        match self {
            ResponseSpec::Gaussian { column } | ResponseSpec::Binomial { column } => vec![column],
            ResponseSpec::Survival { time, status } => vec![time, status],
        }
    }

    /// The response columns [`write_csv_dataset`] writes for a response of this kind.
    pub fn default_for(response: &Response) -> Self {
        match response {
            Response::Continuous { .. } => ResponseSpec::Gaussian { column: "y".into() },
            Response::Binary { .. } => ResponseSpec::Binomial { column: "y".into() },
            Response::Survival { .. } => ResponseSpec::Survival { time: "time".into(), status: "status".into() },
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("non-numeric value `{value}` at row {row}, column `{column}`")]
    NonNumeric { row: usize, column: String, value: String },
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("row {row} has {got} fields, header has {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("no rows")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Read a rectangular numeric CSV with a header row. Every non-response
/// column becomes a candidate variable, in header order. Rows are numbered
/// from 1 in error messages, excluding the header.
pub fn read_csv_dataset<R: Read>(input: R, spec: &ResponseSpec) -> Result<Dataset, IoError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let position = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| IoError::MissingColumn(name.into()));
    let response_cols: Vec<usize> = spec.columns().into_iter().map(position).collect::<Result<_, _>>()?;
    let design_cols: Vec<usize> = (0..header.len()).filter(|j| !response_cols.contains(j)).collect();

    let mut values: Vec<f64> = Vec::new();
    let mut response: Vec<Vec<f64>> = vec![Vec::new(); response_cols.len()];
    let mut n = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != header.len() {
            return Err(IoError::Ragged { row, got: rec.len(), expected: header.len() });
        }
        let cell = |j: usize| -> Result<f64, IoError> {
            let raw = &rec[j];
            if raw.is_empty() || raw.eq_ignore_ascii_case("na") {
                return Err(IoError::MissingValue { row, column: header[j].clone() });
            }
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(IoError::NonNumeric { row, column: header[j].clone(), value: raw.into() }),
            }
        };
        for &j in &design_cols {
            values.push(cell(j)?);
        }
        for (k, &j) in response_cols.iter().enumerate() {
            let v = cell(j)?;
            let binary = matches!(spec, ResponseSpec::Binomial { .. }) || (k == 1);
            if binary && v != 0.0 && v != 1.0 {
                return Err(IoError::NonNumeric { row, column: header[j].clone(), value: rec[j].into() });
            }
            response[k].push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(IoError::Empty);
    }
    let x = DMatrix::from_row_slice(n, design_cols.len(), &values);
    let names = design_cols.iter().map(|&j| header[j].clone()).collect();
    let mut response = response.into_iter();
    let response = match spec {
        ResponseSpec::Gaussian { .. } => Response::Continuous { y: response.next().unwrap() },
        ResponseSpec::Binomial { .. } => Response::Binary { y: response.next().unwrap() },
        ResponseSpec::Survival { .. } => Response::Survival {
            time: response.next().unwrap(),
            status: response.next().unwrap().into_iter().map(|s| s == 1.0).collect(),
        },
    };
    Ok(Dataset::new(names, x, response))
}

pub fn load_csv_dataset(path: impl AsRef<Path>, spec: &ResponseSpec) -> Result<Dataset, IoError> {
    read_csv_dataset(File::open(path)?, spec)
}

/// Write the design columns followed by the response column(s) named as in
/// [`ResponseSpec::default_for`]. Values use the shortest decimal form that
/// reads back to the same `f64`.
pub fn write_csv_dataset<W: Write>(dataset: &Dataset, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let spec = ResponseSpec::default_for(&dataset.response);
    let header = dataset.names.iter().map(String::as_str).chain(spec.columns());
    w.write_record(header)?;
    for i in 0..dataset.n() {
        let mut row: Vec<String> = dataset.x.row(i).iter().map(|v| v.to_string()).collect();
        match &dataset.response {
            Response::Continuous { y } | Response::Binary { y } => row.push(y[i].to_string()),
            Response::Survival { time, status } => {
                row.push(time[i].to_string());
                row.push(if status[i] { "1".into() } else { "0".into() });
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), IoError> {
    write_csv_dataset(dataset, File::create(path)?)
}
