//! CSV ingestion and output writers.
//!
//! Every number is written with 12 significant digits (shortest decimal
//! form of the rounded value); essential deaths are written as `inf`.
//!
//! | file | header |
//! |---|---|
//! | price input | `date,close` |
//! | `norms.csv` | `date,l1_norm,l1_diff` |
//! | `clusters.csv` | `date,f1,…,fm,cluster` |
//! | `diagram_<label>.csv` | `dimension,birth,death` |
//! | simulated series | `index,x` |
//! | bifurcation table | `M2,x` |
//! | `metadata.txt` | `key = value` lines |

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::warn;
use thiserror::Error;

use crate::persistence::PersistenceDiagram;
use crate::pipeline::{PipelineResult, RunMetadata};
use crate::simulate::BifurcationColumn;
use crate::timeseries::{TimeSeries, Timestamp};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: duplicate date {date}")]
    DuplicateDate { line: u64, date: Timestamp },
    #[error("line {line}: non-positive price {value}")]
    NonPositivePrice { line: u64, value: f64 },
    #[error("no data rows")]
    Empty,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `x` rounded to 12 significant digits, printed in shortest form.
pub fn format_sig(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".into()
    } else {
        rounded.to_string()
    }
}

fn parse_timestamp(field: &str) -> Option<Timestamp> {
    if let Ok(d) = NaiveDate::parse_from_str(field, "%Y-%m-%d") {
        return Some(Timestamp::Date(d));
    }
    field.parse::<i64>().ok().map(Timestamp::Tick)
}

struct Row {
    line: u64,
    ts: Timestamp,
    value: f64,
}

fn read_rows(reader: impl Read, header: Option<(&str, &str)>) -> Result<Vec<Row>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(reader);
    let found = rdr.headers()?.clone();
    let names: Vec<&str> = found.iter().collect();
    match header {
        Some((a, b)) if names != [a, b] => {
            return Err(IngestError::Header {
                expected: format!("{a},{b}"),
                found: names.join(","),
            })
        }
        None if names.len() != 2 => {
            return Err(IngestError::Header {
                expected: "two columns".into(),
                found: names.join(","),
            })
        }
        _ => {}
    }
    let (c0, c1) = (names[0].to_string(), names[1].to_string());
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, column: &str| {
            record.get(i).ok_or_else(|| IngestError::Parse {
                line,
                column: column.to_string(),
                message: "missing field".into(),
            })
        };
        let ts_field = field(0, &c0)?;
        let ts = parse_timestamp(ts_field).ok_or_else(|| IngestError::Parse {
            line,
            column: c0.clone(),
            message: format!("cannot parse `{ts_field}` as a YYYY-MM-DD date or integer index"),
        })?;
        let v_field = field(1, &c1)?;
        let value: f64 = v_field
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| IngestError::Parse {
                line,
                column: c1.clone(),
                message: format!("cannot parse `{v_field}` as a finite number"),
            })?;
        rows.push(Row { line, ts, value });
    }
    if rows.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(rows)
}

fn rows_to_series(mut rows: Vec<Row>) -> Result<TimeSeries, IngestError> {
    if rows.windows(2).any(|w| w[0].ts > w[1].ts) {
        warn!("input rows are not in date order; sorting");
        rows.sort_by_key(|r| r.ts);
    }
    if let Some(w) = rows.windows(2).find(|w| w[0].ts == w[1].ts) {
        return Err(IngestError::DuplicateDate {
            line: w[0].line.max(w[1].line),
            date: w[1].ts,
        });
    }
    let (timestamps, values) = rows.into_iter().map(|r| (r.ts, r.value)).unzip();
    Ok(TimeSeries::new(timestamps, values).expect("rows are sorted, unique and finite"))
}

/// Parses `date,close` rows. Rows are sorted by date (with a warning if they
/// were not); duplicate dates and non-positive prices are rejected.
pub fn parse_price_csv(reader: impl Read) -> Result<TimeSeries, IngestError> {
    let rows = read_rows(reader, Some(("date", "close")))?;
    if let Some(r) = rows.iter().find(|r| r.value <= 0.0) {
        return Err(IngestError::NonPositivePrice {
            line: r.line,
            value: r.value,
        });
    }
    rows_to_series(rows)
}

pub fn read_price_csv(path: impl AsRef<Path>) -> Result<TimeSeries, IngestError> {
    let path = path.as_ref();
    parse_price_csv(File::open(path).map_err(io_err(path))?)
}

/// Parses any two-column CSV whose first column is a date or integer index.
pub fn parse_series_csv(reader: impl Read) -> Result<TimeSeries, IngestError> {
    rows_to_series(read_rows(reader, None)?)
}

pub fn read_series_csv(path: impl AsRef<Path>) -> Result<TimeSeries, IngestError> {
    let path = path.as_ref();
    parse_series_csv(File::open(path).map_err(io_err(path))?)
}

pub fn write_series(series: &TimeSeries, header: (&str, &str), mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{},{}", header.0, header.1)?;
    for (ts, v) in series.iter() {
        writeln!(out, "{ts},{}", format_sig(v))?;
    }
    Ok(())
}

pub fn write_diagram(diagram: &PersistenceDiagram, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "dimension,birth,death")?;
    for p in diagram.pairs() {
        for _ in 0..p.multiplicity {
            writeln!(out, "{},{},{}", p.dimension, format_sig(p.birth), format_sig(p.death))?;
        }
    }
    Ok(())
}

/// One `M2,x` row per recorded attractor point; diverged columns are skipped.
pub fn write_bifurcation(columns: &[BifurcationColumn], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "M2,x")?;
    for col in columns {
        if let Ok(xs) = &col.xs {
            let m2 = format_sig(col.m2);
            for &x in xs {
                writeln!(out, "{m2},{}", format_sig(x))?;
            }
        }
    }
    Ok(())
}

pub fn write_metadata(metadata: &RunMetadata, mut out: impl Write) -> io::Result<()> {
    write!(out, "{metadata}")
}

/// `date,l1_norm,l1_diff`; the difference is empty where `diffs` has no value.
pub fn write_norm_table(norms: &TimeSeries, diffs: &TimeSeries, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "date,l1_norm,l1_diff")?;
    for (ts, norm) in norms.iter() {
        let diff = diffs.get(ts).map(format_sig).unwrap_or_default();
        writeln!(out, "{ts},{},{diff}", format_sig(norm))?;
    }
    Ok(())
}

pub fn write_norms(result: &PipelineResult, out: impl Write) -> io::Result<()> {
    write_norm_table(&result.norm_series, &result.norm_diffs, out)
}

pub fn write_clusters(result: &PipelineResult, mut out: impl Write) -> io::Result<()> {
    let m = result.table.features.len();
    let cols: Vec<String> = (1..=m).map(|i| format!("f{i}")).collect();
    writeln!(out, "date,{},cluster", cols.join(","))?;
    for (ts, row, cluster) in result.cluster_rows() {
        let vals: Vec<String> = row.iter().map(|&v| format_sig(v)).collect();
        writeln!(out, "{ts},{},{cluster}", vals.join(","))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, IngestError> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), IngestError> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Writes `norms.csv`, `clusters.csv`, one `diagram_<label>.csv` per kept
/// diagram, and `metadata.txt` into `dir` (created if missing).
pub fn write_outputs(result: &PipelineResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, IngestError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let path = dir.join("norms.csv");
    write_file(&path, |w| write_norms(result, w))?;
    written.push(path);

    let path = dir.join("clusters.csv");
    write_file(&path, |w| write_clusters(result, w))?;
    written.push(path);

    for (label, diagram) in &result.diagrams {
        let path = dir.join(format!("diagram_{label}.csv"));
        write_file(&path, |w| write_diagram(diagram, w))?;
        written.push(path);
    }

    let mut metadata = result.metadata.clone();
    for (i, f) in result.table.features.iter().enumerate() {
        metadata.push(format!("f{}", i + 1), f.name());
    }
    let path = dir.join("metadata.txt");
    write_file(&path, |w| write_metadata(&metadata, w))?;
    written.push(path);
    Ok(written)
}
