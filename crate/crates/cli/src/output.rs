//! CSV and JSON writers. Every file starts with a comment line carrying the
//! unit system and the scenario hash.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use pr_filtration::field::{FiltrationField, GridRecord, GridSamples, MissingReason};
use pr_filtration::phase::CoexistencePoint;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const COEXISTENCE_CSV: &str = "coexistence.csv";
pub const FIELD_CSV: &str = "field.csv";
pub const REPORT_TXT: &str = "report.txt";

pub fn header_line(hash: &str) -> String {
    format!("# units=reduced scenario_sha256={hash}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoexistenceRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub v1: f64,
    pub v2: f64,
    pub p_star: f64,
}

impl From<&CoexistencePoint> for CoexistenceRow {
    fn from(p: &CoexistencePoint) -> Self {
        CoexistenceRow {
            t: p.temperature,
            v1: p.v1,
            v2: p.v2,
            p_star: p.p_star,
        }
    }
}

/// One `field.csv` record. Missing samples keep their position, the
/// superposed `Q` when it is defined, and a non-`ok` status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldRow {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub v: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub p: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    pub phase: Option<String>,
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    pub u3: Option<f64>,
    pub status: String,
}

pub fn field_rows(field: &FiltrationField, samples: &GridSamples) -> Vec<FieldRow> {
    samples
        .records
        .iter()
        .map(|r| match r {
            GridRecord::Sample(s) => FieldRow {
                x1: s.position[0],
                x2: s.position[1],
                x3: s.position[2],
                v: Some(s.volume),
                t: Some(s.temperature),
                p: Some(s.pressure),
                q: Some(s.potential),
                phase: Some(s.phase.as_str().to_string()),
                u1: Some(s.velocity[0]),
                u2: Some(s.velocity[1]),
                u3: Some(s.velocity[2]),
                status: "ok".into(),
            },
            GridRecord::Missing { position, reason } => FieldRow {
                x1: position[0],
                x2: position[1],
                x3: position[2],
                v: None,
                t: None,
                p: None,
                q: match reason {
                    MissingReason::SourceExclusion => None,
                    _ => field.potential_at(*position).ok(),
                },
                phase: None,
                u1: None,
                u2: None,
                u3: None,
                status: reason.as_str().into(),
            },
        })
        .collect()
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, hash: &str, rows: &[T]) -> CliResult<()> {
    let mut out = create(path)?;
    writeln!(out, "{}", header_line(hash)).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| CliError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct JsonMirror<'a, T> {
    units: &'static str,
    scenario_sha256: &'a str,
    records: &'a [T],
}

/// Writes the same records as JSON next to the CSV (`name.csv` -> `name.json`).
pub fn write_json<T: Serialize>(csv_path: &Path, hash: &str, rows: &[T]) -> CliResult<()> {
    let path = csv_path.with_extension("json");
    let mut out = create(&path)?;
    let doc = JsonMirror {
        units: "reduced",
        scenario_sha256: hash,
        records: rows,
    };
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::io(&path, e.into()))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(&path, e))
}

pub fn write_text(path: &Path, hash: &str, body: &str) -> CliResult<()> {
    let mut out = create(path)?;
    write!(out, "{}\n{body}", header_line(hash))
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}
