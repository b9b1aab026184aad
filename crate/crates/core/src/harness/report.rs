use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::sweep::SweepReport;
use crate::counting::CalibrationRecord;
use crate::error::Result;
use crate::phase::BiasMaeEntry;

pub const CSV_HEADER: &str = "ground_truth,bias,stderr_bias,mae,stderr_mae,n_samples";

#[derive(Serialize)]
struct Row {
    ground_truth: f64,
    bias: f64,
    stderr_bias: Option<f64>,
    mae: f64,
    stderr_mae: Option<f64>,
    n_samples: Option<u64>,
}

impl From<&BiasMaeEntry> for Row {
    fn from(e: &BiasMaeEntry) -> Self {
        Row {
            ground_truth: e.ground_truth,
            bias: e.bias,
            stderr_bias: e.stderr_bias,
            mae: e.mae,
            stderr_mae: e.stderr_mae,
            n_samples: e.n_samples,
        }
    }
}

/// One row per entry, LF line endings; missing standard errors are empty fields.
pub fn write_csv<W: Write>(entries: &[BiasMaeEntry], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for e in entries {
        w.serialize(Row::from(e))?;
    }
    if entries.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(entries: &[BiasMaeEntry]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(entries, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// Where the JSON metadata of a CSV at `csv_path` goes: same stem, `.json`.
pub fn metadata_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV series to `csv_path` and the full report as JSON beside it.
pub fn write_report(report: &SweepReport, csv_path: &Path) -> Result<PathBuf> {
    let meta = metadata_path(csv_path);
    if meta == csv_path {
        return Err(crate::Error::InvalidParams(format!(
            "output path {} would collide with its metadata file; use a .csv name",
            csv_path.display()
        )));
    }
    write_csv(&report.entries, BufWriter::new(File::create(csv_path)?))?;
    write_json(report, &meta)?;
    Ok(meta)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// One record is written as an object, several as an array.
pub fn write_calibrations(records: &[CalibrationRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", calibrations_json(records)?)?;
    w.flush()?;
    Ok(())
}

pub fn calibrations_json(records: &[CalibrationRecord]) -> Result<String> {
    Ok(match records {
        [one] => serde_json::to_string_pretty(one)?,
        many => serde_json::to_string_pretty(many)?,
    })
}
