//! Plain-text persistence for traces, workload reports and heat maps.
//!
//! Traces and reports are line-delimited JSON, UTF-8, LF line endings. The
//! first line is a header object carrying `format_version`; each following
//! line is one record. Floats are written in shortest round-trip form.

use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gateway::{CellUpdate, ReconfigEvent, TraceMeta, TrafficTrace};
use crate::geometry::Angles;
use crate::metrics::{DestinationMatrix, WorkloadReport};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFileHeader {
    pub format_version: u32,
    pub created: String,
    pub meta: TraceMeta,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventRecord {
    t: f64,
    theta_r: f64,
    phi_r: f64,
    updates: Vec<(u64, u64, u64)>,
}

/// Tracks how many bytes went through so I/O errors can report an offset.
struct Counting<W> {
    inner: W,
    written: u64,
}

impl<W: Write> Counting<W> {
    fn line<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let mut buf = serde_json::to_vec(value).expect("trace records always serialize");
        buf.push(b'\n');
        self.raw(&buf)
    }

    fn raw(&mut self, buf: &[u8]) -> Result<()> {
        self.inner.write_all(buf).map_err(|source| Error::Io {
            offset: self.written,
            source,
        })?;
        self.written += buf.len() as u64;
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        self.inner.flush().map_err(|source| Error::Io {
            offset: self.written,
            source,
        })
    }
}

pub fn write_trace<W: Write>(trace: &TrafficTrace, sink: W) -> Result<()> {
    let mut out = Counting {
        inner: sink,
        written: 0,
    };
    out.line(&TraceFileHeader {
        format_version: FORMAT_VERSION,
        created: trace.created.clone(),
        meta: trace.meta.clone(),
    })?;
    for ev in &trace.events {
        out.line(&EventRecord {
            t: ev.t,
            theta_r: ev.reflected.theta,
            phi_r: ev.reflected.phi,
            updates: ev
                .updates
                .iter()
                .map(|u| (u.col as u64, u.row as u64, u64::from(u.new_state)))
                .collect(),
        })?;
    }
    out.flush()
}

/// Yields `(line_number, line)` with 1-based numbers and I/O errors
/// carrying the byte offset reached.
fn numbered_lines<R: BufRead>(mut source: R) -> impl Iterator<Item = Result<(usize, String)>> {
    let mut offset = 0u64;
    let mut number = 0usize;
    std::iter::from_fn(move || {
        let mut line = String::new();
        match source.read_line(&mut line) {
            Ok(0) => None,
            Ok(n) => {
                offset += n as u64;
                number += 1;
                if line.ends_with('\n') {
                    line.pop();
                }
                Some(Ok((number, line)))
            }
            Err(source) => Some(Err(Error::Io { offset, source })),
        }
    })
}

fn parse_line<T: for<'de> Deserialize<'de>>(line_no: usize, line: &str) -> Result<T> {
    serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })
}

fn parse_header(line_no: usize, line: &str) -> Result<TraceFileHeader> {
    // Check the version before the full schema so a future format gets a
    // precise error rather than a field mismatch.
    let raw: serde_json::Value = parse_line(line_no, line)?;
    match raw.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::validation(
                "format_version",
                format!("unsupported version {v}, expected {FORMAT_VERSION}"),
            ))
        }
        None => {
            return Err(Error::Parse {
                line: line_no,
                message: "header lacks an integer `format_version`".into(),
            })
        }
    }
    serde_json::from_value(raw).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })
}

/// Parses a single trace header line.
pub fn parse_trace_header(line: &str) -> Result<TraceFileHeader> {
    parse_header(1, line)
}

fn to_event(line_no: usize, rec: EventRecord) -> Result<ReconfigEvent> {
    let index = |v: u64| {
        usize::try_from(v).map_err(|_| Error::Parse {
            line: line_no,
            message: format!("cell index {v} does not fit"),
        })
    };
    let updates = rec
        .updates
        .into_iter()
        .map(|(i, j, s)| {
            Ok(CellUpdate {
                col: index(i)?,
                row: index(j)?,
                new_state: u16::try_from(s).map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("state {s} does not fit in 16 bits"),
                })?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ReconfigEvent {
        t: rec.t,
        reflected: Angles {
            theta: rec.theta_r,
            phi: rec.phi_r,
        },
        updates,
    })
}

/// Inverse of [`write_trace`]. The loaded trace is validated before it is
/// returned.
pub fn read_trace<R: BufRead>(source: R) -> Result<TrafficTrace> {
    let mut lines = numbered_lines(source);
    let header = match lines.next() {
        Some(first) => {
            let (n, line) = first?;
            parse_header(n, &line)?
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty trace file".into(),
            })
        }
    };
    let mut events = Vec::new();
    for item in lines {
        let (n, line) = item?;
        events.push(to_event(n, parse_line(n, &line)?)?);
    }
    let trace = TrafficTrace {
        meta: header.meta,
        created: header.created,
        events,
    };
    trace.validate()?;
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub format_version: u32,
    pub kind: String,
    pub events: usize,
    pub total_packets: usize,
    pub spatial_cv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEventLine {
    pub index: usize,
    pub t: f64,
    pub packets: usize,
    pub changed_fraction: f64,
    /// Gap since the previous event; absent for the first.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub since_previous: Option<f64>,
}

/// Writes a report in the trace's line format: a summary header, then one
/// line per event.
pub fn write_report<W: Write>(trace: &TrafficTrace, report: &WorkloadReport, sink: W) -> Result<()> {
    let mut out = Counting {
        inner: sink,
        written: 0,
    };
    out.line(&ReportHeader {
        format_version: FORMAT_VERSION,
        kind: "workload_report".into(),
        events: report.burst_sizes.len(),
        total_packets: report.total_packets,
        spatial_cv: report.spatial_cv,
    })?;
    for (k, ev) in trace.events.iter().enumerate() {
        out.line(&ReportEventLine {
            index: k,
            t: ev.t,
            packets: report.burst_sizes[k],
            changed_fraction: report.per_event_changed_fraction[k],
            since_previous: k.checked_sub(1).map(|p| report.inter_event_times[p]),
        })?;
    }
    out.flush()
}

pub fn read_report<R: BufRead>(source: R) -> Result<(ReportHeader, Vec<ReportEventLine>)> {
    let mut lines = numbered_lines(source);
    let header: ReportHeader = match lines.next() {
        Some(first) => {
            let (n, line) = first?;
            parse_line(n, &line)?
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty report file".into(),
            })
        }
    };
    let events = lines
        .map(|item| {
            let (n, line) = item?;
            parse_line(n, &line)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, events))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeatmapFormat {
    Csv,
    Pgm,
}

impl FromStr for HeatmapFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(HeatmapFormat::Csv),
            "pgm" => Ok(HeatmapFormat::Pgm),
            other => Err(Error::validation(
                "format",
                format!("unknown heat-map format {other:?}, expected csv or pgm"),
            )),
        }
    }
}

/// CSV: one line per row, columns comma-separated. PGM: plain (P2) with
/// maxval 255, scaled so the busiest cell is white.
pub fn export_heatmap<W: Write>(m: &DestinationMatrix, format: HeatmapFormat, sink: W) -> Result<()> {
    let mut out = Counting {
        inner: sink,
        written: 0,
    };
    let grid = &m.ratios;
    match format {
        HeatmapFormat::Csv => {
            for j in 0..grid.n_rows() {
                let line: Vec<String> = grid.row(j).iter().map(f64::to_string).collect();
                out.raw(format!("{}\n", line.join(",")).as_bytes())?;
            }
        }
        HeatmapFormat::Pgm => {
            let max = grid.as_slice().iter().copied().fold(0.0, f64::max);
            out.raw(format!("P2\n{} {}\n255\n", grid.n_cols(), grid.n_rows()).as_bytes())?;
            for j in 0..grid.n_rows() {
                let line: Vec<String> = grid
                    .row(j)
                    .iter()
                    .map(|&v| {
                        let px = if max > 0.0 { (255.0 * v / max).round() } else { 0.0 };
                        (px as u8).to_string()
                    })
                    .collect();
                out.raw(format!("{}\n", line.join(" ")).as_bytes())?;
            }
        }
    }
    out.flush()
}

/// Adapter for sinks that should report failures as `io::Error` directly.
pub fn to_io_error(e: Error) -> io::Error {
    match e {
        Error::Io { source, .. } => source,
        other => io::Error::other(other),
    }
}
