//! CSV input and output.
//!
//! Floats are written with [`fmt_f64`] (17 significant digits), which is
//! enough for an exact binary round trip, so writing a table and reading it
//! back reproduces the values bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::PathPoint;
use crate::equilibrium::{Zone, ZoneReport};
use crate::redemption::Design;
use crate::stats::{Series, StatsError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("{path}: expected columns {expected:?}, got {got:?}")]
    Header { path: String, expected: Vec<String>, got: Vec<String> },
    #[error("{path} row {row}: {message}")]
    Row { path: String, row: usize, message: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Decimal form that survives a parse round trip for every finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// dated series
// ---------------------------------------------------------------------------

fn read_dated_csv(
    path: &Path,
    value_col: &str,
    check: impl Fn(f64) -> Option<String>,
) -> Result<Series, IoError> {
    let name = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| IoError::File { path: name.clone(), message: e.to_string() })?;
    let headers: Vec<String> =
        rdr.headers()
            .map_err(|e| IoError::File { path: name.clone(), message: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
    let expected = vec!["date".to_string(), value_col.to_string()];
    if headers != expected {
        return Err(IoError::Header { path: name, expected, got: headers });
    }
    let mut pairs = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 2; // header is row 1
        let record =
            record.map_err(|e| IoError::Row { path: name.clone(), row, message: e.to_string() })?;
        if record.len() != 2 {
            return Err(IoError::Row {
                path: name,
                row,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| IoError::Row {
            path: name.clone(),
            row,
            message: format!("bad date `{}`: {e}", &record[0]),
        })?;
        let value: f64 = record[1].parse().map_err(|_| IoError::Row {
            path: name.clone(),
            row,
            message: format!("bad number `{}`", &record[1]),
        })?;
        if let Some(message) = check(value) {
            return Err(IoError::Row { path: name, row, message });
        }
        pairs.push((date, value));
    }
    Ok(Series::from_pairs(pairs)?)
}

/// Loads a `date,price` table. Duplicate dates keep the last row; rows are
/// sorted by date. Prices must be finite and positive.
pub fn load_price_series(path: &Path) -> Result<Series, IoError> {
    read_dated_csv(path, "price", |v| {
        (v.is_nan() || v <= 0.0).then(|| format!("price must be positive, got {v}"))
    })
}

/// Loads a `date,v` table of redemption values; values must be finite and
/// nonnegative.
pub fn load_v_series(path: &Path) -> Result<Series, IoError> {
    read_dated_csv(path, "v", |v| {
        (v.is_nan() || v < 0.0).then(|| format!("v must be nonnegative, got {v}"))
    })
}

// ---------------------------------------------------------------------------
// zone tables
// ---------------------------------------------------------------------------

/// One classified grid point, as stored in `zones.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneRow {
    pub design: Design,
    pub theta: f64,
    pub zone: Zone,
}

/// Flattens sweep reports into the rows of `zones.csv`.
pub fn zone_rows(reports: &[ZoneReport]) -> Vec<ZoneRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.points.iter().map(|p| ZoneRow { design: r.design, theta: p.theta, zone: p.zone })
        })
        .collect()
}

pub fn write_zone_csv<W: Write>(w: W, rows: &[ZoneRow]) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    let fail = |e: csv::Error| IoError::File { path: "<zone csv>".to_string(), message: e.to_string() };
    out.write_record(["design", "theta", "zone"]).map_err(fail)?;
    for row in rows {
        out.write_record([row.design.label(), &fmt_f64(row.theta), row.zone.label()])
            .map_err(fail)?;
    }
    out.flush().map_err(|e| IoError::File {
        path: "<zone csv>".to_string(),
        message: e.to_string(),
    })
}

pub fn read_zone_csv<R: Read>(r: R) -> Result<Vec<ZoneRow>, IoError> {
    let name = "<zone csv>".to_string();
    let mut rdr = csv::Reader::from_reader(r);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| IoError::File { path: name.clone(), message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let expected = vec!["design".to_string(), "theta".to_string(), "zone".to_string()];
    if headers != expected {
        return Err(IoError::Header { path: name, expected, got: headers });
    }
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 2;
        let record =
            record.map_err(|e| IoError::Row { path: name.clone(), row, message: e.to_string() })?;
        let design = Design::ALL
            .into_iter()
            .find(|d| d.label() == &record[0])
            .ok_or_else(|| IoError::Row {
                path: name.clone(),
                row,
                message: format!("unknown design `{}`", &record[0]),
            })?;
        let theta: f64 = record[1].parse().map_err(|_| IoError::Row {
            path: name.clone(),
            row,
            message: format!("bad number `{}`", &record[1]),
        })?;
        let zone = Zone::from_label(&record[2]).ok_or_else(|| IoError::Row {
            path: name.clone(),
            row,
            message: format!("unknown zone `{}`", &record[2]),
        })?;
        rows.push(ZoneRow { design, theta, zone });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// simulated paths
// ---------------------------------------------------------------------------

pub fn write_path_csv<W: Write>(w: W, path: &[PathPoint]) -> Result<(), IoError> {
    let mut out = csv::Writer::from_writer(w);
    let fail = |e: csv::Error| IoError::File { path: "<path csv>".to_string(), message: e.to_string() };
    out.write_record(["step", "theta", "m", "q_cumulative", "price", "r_c", "v"]).map_err(fail)?;
    for p in path {
        out.write_record([
            p.step.to_string(),
            fmt_f64(p.theta),
            fmt_f64(p.m),
            fmt_f64(p.q_cumulative),
            fmt_f64(p.price),
            fmt_f64(p.r_c),
            fmt_f64(p.v),
        ])
        .map_err(fail)?;
    }
    out.flush().map_err(|e| IoError::File {
        path: "<path csv>".to_string(),
        message: e.to_string(),
    })
}

pub fn read_path_csv<R: Read>(r: R) -> Result<Vec<PathPoint>, IoError> {
    let name = "<path csv>".to_string();
    let mut rdr = csv::Reader::from_reader(r);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| IoError::File { path: name.clone(), message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    let expected: Vec<String> = ["step", "theta", "m", "q_cumulative", "price", "r_c", "v"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if headers != expected {
        return Err(IoError::Header { path: name, expected, got: headers });
    }
    let mut points = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 2;
        let record =
            record.map_err(|e| IoError::Row { path: name.clone(), row, message: e.to_string() })?;
        let field = |i: usize| -> Result<f64, IoError> {
            record[i].parse().map_err(|_| IoError::Row {
                path: name.clone(),
                row,
                message: format!("bad number `{}`", &record[i]),
            })
        };
        let step: usize = record[0].parse().map_err(|_| IoError::Row {
            path: name.clone(),
            row,
            message: format!("bad step `{}`", &record[0]),
        })?;
        points.push(PathPoint {
            step,
            theta: field(1)?,
            m: field(2)?,
            q_cumulative: field(3)?,
            price: field(4)?,
            r_c: field(5)?,
            v: field(6)?,
        });
    }
    Ok(points)
}
