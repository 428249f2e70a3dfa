use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{PceError, Result};
use crate::harness::record::ResultRecord;
use crate::harness::run::CoefficientRow;
use crate::harness::summary::SummaryRow;

/// Record columns in file order. The first twelve are the canonical set.
pub const RECORD_COLUMNS: [&str; 17] = [
    "problem",
    "d",
    "P",
    "N",
    "M",
    "ratio",
    "method",
    "replicate",
    "seed",
    "rel_l2_error",
    "iterations",
    "status",
    "config_hash",
    "rotations",
    "error_level",
    "history",
    "wall_ms",
];

pub const SUMMARY_COLUMNS: [&str; 8] = [
    "problem",
    "method",
    "M",
    "ratio",
    "mean_error",
    "std_error",
    "replicates",
    "failures",
];

pub const COEFFICIENT_COLUMNS: [&str; 7] = [
    "method",
    "replicate",
    "M",
    "index",
    "multi_index",
    "exact",
    "recovered",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` files are JSON, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = PceError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(PceError::InvalidArgument(format!("unknown format `{s}`"))),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PceError + '_ {
    move |source| PceError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, e: impl std::fmt::Display) -> PceError {
    PceError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_rows<T: Serialize>(
    path: &Path,
    rows: &[T],
    columns: &[&str],
    format: Format,
) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| format_err(path, e))?;
            out.write_all(b"\n").map_err(io_err(path))?;
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(&mut out);
            w.write_record(columns).map_err(|e| format_err(path, e))?;
            for row in rows {
                w.serialize(row).map_err(|e| format_err(path, e))?;
            }
            w.flush().map_err(io_err(path))?;
        }
    }
    out.flush().map_err(io_err(path))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(io_err(path))?;
    match Format::from_path(path) {
        Format::Json => {
            serde_json::from_reader(BufReader::new(file)).map_err(|e| format_err(path, e))
        }
        Format::Csv => csv::Reader::from_reader(BufReader::new(file))
            .deserialize()
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|e| format_err(path, e)),
    }
}

pub fn write_records(path: &Path, records: &[ResultRecord], format: Format) -> Result<()> {
    write_rows(path, records, &RECORD_COLUMNS, format)
}

/// Reads records written by [`write_records`]; the format follows the
/// extension.
pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    read_rows(path)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow], format: Format) -> Result<()> {
    write_rows(path, rows, &SUMMARY_COLUMNS, format)
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

pub fn write_coefficients(path: &Path, rows: &[CoefficientRow], format: Format) -> Result<()> {
    write_rows(path, rows, &COEFFICIENT_COLUMNS, format)
}
