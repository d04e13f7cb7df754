//! CSV and JSON artifacts.

use crate::interp::MonotoneMap;
use crate::rational::{self, Rational};
use crate::walk::TrajectoryRow;
use std::io::Write;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Parse(#[from] rational::ParseRationalError),
}

/// A JSON value for an exact rational: an integer when possible, else the "p/q" string.
pub fn rational_json(x: &Rational) -> serde_json::Value {
    if x.is_integer() {
        if let Ok(n) = x.numer().to_string().parse::<i64>() {
            return n.into();
        }
    }
    rational::fmt(x).into()
}

pub fn write_rows<T: serde::Serialize>(out: impl Write, rows: &[T]) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of strings, quoted where needed.
pub fn write_table(out: impl Write, rows: &[Vec<String>]) -> Result<(), ExportError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectories(out: impl Write, rows: &[TrajectoryRow]) -> Result<(), ExportError> {
    write_rows(out, rows)
}

pub fn write_map_table(out: impl Write, f: &MonotoneMap) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_num", "x_den", "f_num", "f_den"])?;
    for r in f.rows() {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back a table written by [`write_map_table`].
pub fn read_map_table(input: impl std::io::Read) -> Result<MonotoneMap, ExportError> {
    let mut r = csv::Reader::from_reader(input);
    let (mut xs, mut fs) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<Rational, ExportError> {
            let n = &rec[i];
            let d = &rec[i + 1];
            Ok(rational::parse(&format!("{n}/{d}"))?)
        };
        xs.push(field(0)?);
        fs.push(field(2)?);
    }
    Ok(MonotoneMap { xs, fs })
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), ExportError> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}
