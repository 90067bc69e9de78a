//! CSV trace files.
//!
//! A trace file starts with one `#` comment line (tool version, seed, RNG,
//! config digest), followed by the header row [`CSV_HEADER`] and one row per
//! logged instant. Angles are written in degrees, `eta` in deg/s, torques in
//! Nm and time in seconds. Numbers use Rust's shortest round-trip
//! formatting, so reading a file back yields bit-identical values.

use std::io::{Read, Write};

use crate::error::TraceIoError;
use crate::metrics::TraceColumns;
use crate::sim::Trace;

pub const CSV_HEADER: [&str; 19] = [
    "t", "q1", "q2", "qd1", "qd2", "dq1", "dq2", "eta1", "eta2", "tau1", "tau2", "tv1", "tv2", "tl1", "tl2",
    "phi1", "phi2", "phi3", "V",
];

pub fn write_csv<W: Write>(trace: &Trace, mut out: W) -> Result<(), TraceIoError> {
    writeln!(out, "{}", trace.header.comment_line())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let mut row: Vec<String> = Vec::with_capacity(CSV_HEADER.len());
    for r in &trace.records {
        row.clear();
        row.push(r.t.to_string());
        for v in [r.q, r.qd, r.dq, r.eta] {
            row.extend(v.iter().map(|x| x.to_degrees().to_string()));
        }
        for v in [r.tau, r.tau_v, r.tau_l] {
            row.extend(v.iter().map(|x| x.to_string()));
        }
        row.extend(r.phi_hat.iter().map(|x| x.to_string()));
        row.push(r.lyapunov_v.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed trace: its comment line (if any) and the metric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrace {
    pub comment: Option<String>,
    pub columns: TraceColumns,
    /// All 19 columns, row-major, in file units.
    pub rows: Vec<[f64; 19]>,
}

pub fn read_csv<R: Read>(mut input: R) -> Result<ParsedTrace, TraceIoError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let comment = text
        .lines()
        .next()
        .filter(|l| l.starts_with('#'))
        .map(str::to_string);

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| TraceIoError::Malformed(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(TraceIoError::Malformed(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| TraceIoError::Malformed(e.to_string()))?;
        let mut row = [0.0; 19];
        for (j, field) in rec.iter().enumerate() {
            row[j] = field.trim().parse().map_err(|_| {
                TraceIoError::Malformed(format!("row {}: column `{}` is not a number: `{field}`", i + 1, CSV_HEADER[j]))
            })?;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TraceIoError::Malformed("no data rows".into()));
    }

    let mut columns = TraceColumns::default();
    for r in &rows {
        columns.t.push(r[0]);
        columns.dq[0].push(r[5]);
        columns.dq[1].push(r[6]);
        columns.tau[0].push(r[9]);
        columns.tau[1].push(r[10]);
    }
    Ok(ParsedTrace { comment, columns, rows })
}
