//! CSV schemas for curves, histograms and revision logs.
//!
//! Files are UTF-8, comma separated, with a header line. Writers emit rows
//! sorted ascending by the first column, then the following ones, and floats
//! with 9 significant digits, so every written file parses back to the same
//! values and rewrites to the same bytes.

use std::cmp::Ordering;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{EstimateMarker, FeedbackEstimate, FeedbackTimeSeries};
use crate::fitting::{format_g, Dataset, Row};
use crate::urn::{Histogram, RevisionLog};

pub const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("no data rows")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IoError {
    fn at(line: u64, message: impl Into<String>) -> Self {
        IoError::Malformed {
            line,
            message: message.into(),
        }
    }
}

/// A float with 9 significant digits.
pub fn fmt_float(x: f64) -> String {
    format_g(x, SIGNIFICANT_DIGITS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub y: f64,
    pub yerr: Option<f64>,
    pub marker: Option<String>,
}

impl CurveRow {
    pub fn new(x: f64, y: f64) -> Self {
        CurveRow {
            x,
            y,
            yerr: None,
            marker: None,
        }
    }
}

/// `x,y[,yerr][,marker]`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveFile {
    pub rows: Vec<CurveRow>,
}

impl CurveFile {
    pub fn from_xy(xy: impl IntoIterator<Item = (f64, f64)>) -> Self {
        CurveFile {
            rows: xy.into_iter().map(|(x, y)| CurveRow::new(x, y)).collect(),
        }
    }

    fn has_yerr(&self) -> bool {
        self.rows.iter().any(|r| r.yerr.is_some())
    }

    fn has_marker(&self) -> bool {
        self.rows.iter().any(|r| r.marker.is_some())
    }

    /// Unit-weight dataset of the `(x, y)` pairs.
    pub fn to_dataset(&self, name: &str) -> Dataset {
        Dataset::from_xy(name, self.rows.iter().map(|r| (r.x, r.y)))
    }

    /// Dataset weighted by `1 / yerr^2`; rows without a positive error get weight 0.
    pub fn to_dataset_yerr(&self, name: &str) -> Dataset {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let w = match r.yerr {
                    Some(e) if e > 0.0 => 1.0 / (e * e),
                    _ => 0.0,
                };
                Row { x: r.x, y: r.y, w }
            })
            .collect();
        Dataset::new(name, rows)
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), IoError> {
        let mut header = vec!["x", "y"];
        let (yerr, marker) = (self.has_yerr(), self.has_marker());
        if yerr {
            header.push("yerr");
        }
        if marker {
            header.push("marker");
        }
        let mut rows: Vec<&CurveRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            a.x.total_cmp(&b.x)
                .then(a.y.total_cmp(&b.y))
                .then(cmp_opt(a.yerr, b.yerr))
                .then(a.marker.cmp(&b.marker))
        });
        let records = rows.into_iter().map(|r| {
            let mut rec = vec![fmt_float(r.x), fmt_float(r.y)];
            if yerr {
                rec.push(r.yerr.map(fmt_float).unwrap_or_default());
            }
            if marker {
                rec.push(r.marker.clone().unwrap_or_default());
            }
            rec
        });
        write_records(out, &header, records)
    }

    pub fn read<R: Read>(input: R) -> Result<Self, IoError> {
        let table = Table::read(input)?;
        let x = table.column("x")?;
        let y = table.column("y")?;
        let yerr = table.optional("yerr");
        let marker = table.optional("marker");
        let mut rows = Vec::with_capacity(table.records.len());
        for (line, rec) in &table.records {
            rows.push(CurveRow {
                x: parse_f64(rec, x, *line, "x")?,
                y: parse_f64(rec, y, *line, "y")?,
                yerr: match yerr {
                    Some(i) => parse_opt_f64(rec, i, *line, "yerr")?,
                    None => None,
                },
                marker: marker.map(|i| rec[i].to_string()).filter(|m| !m.is_empty()),
            });
        }
        Ok(CurveFile { rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistRow {
    pub phi: f64,
    pub b: usize,
    pub frequency: f64,
}

/// `phi,B,frequency`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HistFile {
    pub rows: Vec<HistRow>,
}

impl From<&Histogram> for HistFile {
    fn from(h: &Histogram) -> Self {
        let rows = h
            .phis
            .iter()
            .zip(&h.freq)
            .flat_map(|(&phi, col)| {
                col.iter()
                    .enumerate()
                    .map(move |(b, &frequency)| HistRow { phi, b, frequency })
            })
            .collect();
        HistFile { rows }
    }
}

impl HistFile {
    pub fn write<W: Write>(&self, out: W) -> Result<(), IoError> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| {
            a.phi
                .total_cmp(&b.phi)
                .then(a.b.cmp(&b.b))
                .then(a.frequency.total_cmp(&b.frequency))
        });
        let records = rows
            .iter()
            .map(|r| vec![fmt_float(r.phi), r.b.to_string(), fmt_float(r.frequency)]);
        write_records(out, &["phi", "B", "frequency"], records)
    }

    pub fn read<R: Read>(input: R) -> Result<Self, IoError> {
        let table = Table::read(input)?;
        let (phi, b, freq) = (
            table.column("phi")?,
            table.column("B")?,
            table.column("frequency")?,
        );
        let mut rows = Vec::with_capacity(table.records.len());
        for (line, rec) in &table.records {
            rows.push(HistRow {
                phi: parse_f64(rec, phi, *line, "phi")?,
                b: parse_int(rec, b, *line, "B")? as usize,
                frequency: parse_f64(rec, freq, *line, "frequency")?,
            });
        }
        Ok(HistFile { rows })
    }

    /// Column of frequencies for `phi`, indexed by `B`.
    pub fn column(&self, phi: f64) -> Vec<f64> {
        let sel: Vec<&HistRow> = self.rows.iter().filter(|r| r.phi == phi).collect();
        let n = sel.iter().map(|r| r.b).max().unwrap_or(0);
        let mut col = vec![0.0; n + 1];
        sel.iter().for_each(|r| col[r.b] += r.frequency);
        col
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub s: f64,
    pub r_b: u64,
    pub r_r: u64,
    pub visits: u64,
    pub window: Option<f64>,
}

/// `s,r_b,r_r,visits[,window]`
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LogFile {
    pub rows: Vec<LogRow>,
}

impl LogFile {
    /// One row per state; `window` tags every row when given.
    pub fn from_log(log: &RevisionLog, window: Option<f64>) -> Self {
        let rows = (0..=log.n)
            .map(|b| LogRow {
                s: b as f64 / log.n as f64,
                r_b: log.r_b[b],
                r_r: log.r_r[b],
                visits: log.visits[b],
                window,
            })
            .collect();
        LogFile { rows }
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), IoError> {
        let window = self.rows.iter().any(|r| r.window.is_some());
        let mut header = vec!["s", "r_b", "r_r", "visits"];
        if window {
            header.push("window");
        }
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| {
            a.s.total_cmp(&b.s)
                .then(a.r_b.cmp(&b.r_b))
                .then(a.r_r.cmp(&b.r_r))
                .then(a.visits.cmp(&b.visits))
                .then(cmp_opt(a.window, b.window))
        });
        let records = rows.iter().map(|r| {
            let mut rec = vec![
                fmt_float(r.s),
                r.r_b.to_string(),
                r.r_r.to_string(),
                r.visits.to_string(),
            ];
            if window {
                rec.push(r.window.map(fmt_float).unwrap_or_default());
            }
            rec
        });
        write_records(out, &header, records)
    }

    pub fn read<R: Read>(input: R) -> Result<Self, IoError> {
        let table = Table::read(input)?;
        let s = table.column("s")?;
        let (rb, rr, visits) = (
            table.column("r_b")?,
            table.column("r_r")?,
            table.column("visits")?,
        );
        let window = table.optional("window");
        let mut rows = Vec::with_capacity(table.records.len());
        for (line, rec) in &table.records {
            let row = LogRow {
                s: parse_f64(rec, s, *line, "s")?,
                r_b: parse_int(rec, rb, *line, "r_b")?,
                r_r: parse_int(rec, rr, *line, "r_r")?,
                visits: parse_int(rec, visits, *line, "visits")?,
                window: match window {
                    Some(i) => parse_opt_f64(rec, i, *line, "window")?,
                    None => None,
                },
            };
            if !(0.0..=1.0).contains(&row.s) {
                return Err(IoError::at(*line, format!("s = {} outside [0, 1]", row.s)));
            }
            rows.push(row);
        }
        Ok(LogFile { rows })
    }

    /// Smallest urn size that puts every `s` on the grid `b / n`.
    pub fn infer_n(&self) -> Option<usize> {
        const MAX_N: usize = 1 << 20;
        (1..=MAX_N).find(|&n| {
            self.rows.iter().all(|r| {
                let b = r.s * n as f64;
                (b - b.round()).abs() <= 1e-6 * n as f64
            })
        })
    }

    /// Sums all rows (every window) into a log over `n + 1` states.
    pub fn to_revision_log(&self, n: usize) -> Result<RevisionLog, String> {
        let mut log = RevisionLog::new(n);
        for r in &self.rows {
            let b = (r.s * n as f64).round() as usize;
            if (r.s * n as f64 - b as f64).abs() > 1e-6 * n as f64 {
                return Err(format!("s = {} is not a multiple of 1/{n}", r.s));
            }
            log.r_b[b] += r.r_b;
            log.r_r[b] += r.r_r;
            log.visits[b] += r.visits;
        }
        Ok(log)
    }
}

/// `x = s`, `y = P(s)` where defined, `yerr` empty, `marker` naming
/// undefined and high-variance states.
pub fn estimate_curve(estimate: &FeedbackEstimate) -> CurveFile {
    let rows = estimate
        .points
        .iter()
        .map(|p| {
            let marker = match (p.marker, p.high_variance) {
                (Some(m), _) => Some(m.label().to_string()),
                (None, true) => Some("high-variance".to_string()),
                (None, false) => None,
            };
            let y = match (p.value, p.marker) {
                (Some(v), _) => v,
                (None, Some(EstimateMarker::OutOfDomain)) => p.raw.unwrap_or(f64::NAN),
                _ => f64::NAN,
            };
            CurveRow {
                x: p.s,
                y,
                yerr: None,
                marker,
            }
        })
        .collect();
    CurveFile { rows }
}

/// `t,phi,phi_stderr,c2,rms,dof`
pub fn write_series<W: Write>(series: &FeedbackTimeSeries, out: W) -> Result<(), IoError> {
    let mut points = series.points.clone();
    points.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.phi.total_cmp(&b.phi)));
    let records = points.iter().map(|p| {
        vec![
            fmt_float(p.t),
            fmt_float(p.phi),
            fmt_float(p.phi_stderr),
            fmt_float(p.c2),
            fmt_float(p.rms),
            p.dof.to_string(),
        ]
    });
    write_records(
        out,
        &["t", "phi", "phi_stderr", "c2", "rms", "dof"],
        records,
    )
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(a), Some(b)) => a.total_cmp(&b),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

fn write_records<W: Write>(
    out: W,
    header: &[&str],
    records: impl Iterator<Item = Vec<String>>,
) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(csv_io)?;
    for rec in records {
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> IoError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => IoError::Io(e),
        other => IoError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

struct Table {
    header: Vec<String>,
    records: Vec<(u64, csv::StringRecord)>,
}

impl Table {
    fn read<R: Read>(input: R) -> Result<Self, IoError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let header: Vec<String> = reader
            .headers()
            .map_err(from_csv)?
            .iter()
            .map(str::to_string)
            .collect();
        if header.iter().all(|h| h.is_empty()) {
            return Err(IoError::Empty);
        }
        let mut records = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(from_csv)?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            records.push((line, rec));
        }
        if records.is_empty() {
            return Err(IoError::Empty);
        }
        Ok(Table { header, records })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn column(&self, name: &str) -> Result<usize, IoError> {
        self.optional(name).ok_or_else(|| {
            IoError::at(
                1,
                format!(
                    "missing column '{name}' (header: {})",
                    self.header.join(",")
                ),
            )
        })
    }
}

fn from_csv(e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(e) => IoError::Io(e),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => IoError::at(line, format!("expected {expected_len} fields, found {len}")),
        csv::ErrorKind::Utf8 { err, .. } => IoError::at(line, format!("invalid UTF-8: {err}")),
        other => IoError::at(line, format!("{other:?}")),
    }
}

fn parse_f64(rec: &csv::StringRecord, i: usize, line: u64, name: &str) -> Result<f64, IoError> {
    let field = &rec[i];
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite() || field.eq_ignore_ascii_case("nan"))
        .ok_or_else(|| IoError::at(line, format!("column '{name}': '{field}' is not a number")))
}

fn parse_opt_f64(
    rec: &csv::StringRecord,
    i: usize,
    line: u64,
    name: &str,
) -> Result<Option<f64>, IoError> {
    if rec[i].is_empty() {
        Ok(None)
    } else {
        parse_f64(rec, i, line, name).map(Some)
    }
}

fn parse_int(rec: &csv::StringRecord, i: usize, line: u64, name: &str) -> Result<u64, IoError> {
    let field = &rec[i];
    field.parse::<u64>().map_err(|_| {
        IoError::at(
            line,
            format!("column '{name}': '{field}' is not a non-negative integer"),
        )
    })
}
