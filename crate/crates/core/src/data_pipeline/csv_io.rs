//! CSV ingestion and emission for the canonical sample schema.
//!
//! Header must match [`FEATURE_NAMES`] exactly. Decimal point, scientific
//! notation accepted on load; values are written with `Display`, whose
//! shortest-round-trip form reparses to the identical bits.

use crate::data_pipeline::{Dataset, DesignParams, Sample, FEATURE_NAMES};
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Load a dataset, validating schema and physical invariants. Error messages
/// carry 1-based data-row numbers and column names.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if file
        .metadata()
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?
        .len()
        == 0
    {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::HeaderMismatch {
            path: path.to_path_buf(),
            expected: FEATURE_NAMES.join(","),
            found: format!("<unreadable: {e}>"),
        })?
        .clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != FEATURE_NAMES {
        return Err(Error::HeaderMismatch {
            path: path.to_path_buf(),
            expected: FEATURE_NAMES.join(","),
            found: found.join(","),
        });
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::NonNumericCell {
            row,
            column: "<record>".to_string(),
            value: e.to_string(),
        })?;
        if record.len() != FEATURE_NAMES.len() {
            return Err(Error::HeaderMismatch {
                path: path.to_path_buf(),
                expected: format!("{} fields", FEATURE_NAMES.len()),
                found: format!("{} fields at row {row}", record.len()),
            });
        }
        let mut values = [0.0f64; 9];
        for (j, cell) in record.iter().enumerate() {
            values[j] = cell.parse::<f64>().map_err(|_| Error::NonNumericCell {
                row,
                column: FEATURE_NAMES[j].to_string(),
                value: cell.to_string(),
            })?;
            if !values[j].is_finite() {
                return Err(Error::InvalidValue {
                    row,
                    column: FEATURE_NAMES[j].to_string(),
                    value: values[j],
                    constraint: "finite".to_string(),
                });
            }
        }
        samples.push(parse_row(row, values)?);
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    Dataset::new(name, samples)
}

fn parse_row(row: usize, v: [f64; 9]) -> Result<Sample> {
    let params = DesignParams::from_array([v[0], v[1], v[2], v[3], v[4], v[5], v[6]]);
    params.validate().map_err(|e| match e {
        Error::InvalidValue {
            column,
            value,
            constraint,
            ..
        } => Error::InvalidValue {
            row,
            column,
            value,
            constraint,
        },
        other => other,
    })?;
    let frequency_ghz = v[7];
    if frequency_ghz < 0.0 {
        return Err(Error::InvalidValue {
            row,
            column: "frequency_ghz".to_string(),
            value: frequency_ghz,
            constraint: ">= 0".to_string(),
        });
    }
    let insertion_loss_db = v[8];
    if insertion_loss_db < 0.0 {
        return Err(Error::NegativeLabel {
            row,
            value: insertion_loss_db,
        });
    }
    Ok(Sample {
        params,
        frequency_ghz,
        insertion_loss_db,
    })
}

/// Write a dataset in the canonical schema. `Display` formatting preserves
/// full double precision on reload.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    writeln!(w, "{}", FEATURE_NAMES.join(",")).map_err(io_err)?;
    for s in &dataset.samples {
        let p = s.params.as_array();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            p[0], p[1], p[2], p[3], p[4], p[5], p[6], s.frequency_ghz, s.insertion_loss_db
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
