//! CSV schemas for chain and aggregate outputs.
//!
//! Chain files: `step,f,cummin,reflected,fallback`.
//! Aggregate files: `step,q25,q50,q75`.
//! Floats are written with 17 significant digits so they round-trip exactly.

use std::io::Write;

use crate::dynamics::RunRecord;
use crate::error::{Error, Result};
use crate::harness::AggregateCurve;

pub const CHAIN_HEADER: [&str; 5] = ["step", "f", "cummin", "reflected", "fallback"];
pub const AGGREGATE_HEADER: [&str; 4] = ["step", "q25", "q50", "q75"];

/// Scientific notation with 17 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_chain<W: Write>(rec: &RunRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CHAIN_HEADER).map_err(io_err)?;
    for k in 0..rec.f_value.len() {
        w.write_record([
            k.to_string(),
            fmt_float(rec.f_value[k]),
            fmt_float(rec.cumulative_min[k]),
            (rec.boundary[k] as u8).to_string(),
            (rec.fallback[k] as u8).to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(curve: &AggregateCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER).map_err(io_err)?;
    for k in 0..curve.q50.len() {
        w.write_record([
            k.to_string(),
            fmt_float(curve.q25[k]),
            fmt_float(curve.q50[k]),
            fmt_float(curve.q75[k]),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of a chain file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRow {
    pub step: u64,
    pub f: f64,
    pub cummin: f64,
    pub reflected: bool,
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateRow {
    pub step: u64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

fn records(text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = rdr.records();
    let first = rows
        .next()
        .ok_or_else(|| Error::Parse("missing header".into()))?
        .map_err(|e| Error::Parse(e.to_string()))?;
    if first.iter().ne(header.iter().copied()) {
        return Err(Error::Parse(format!(
            "unexpected header `{}`",
            first.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, r) in rows.enumerate() {
        let r = r.map_err(|e| Error::Parse(e.to_string()))?;
        if r.len() != header.len() {
            return Err(Error::Parse(format!(
                "row {}: expected {} fields, got {}",
                i + 1,
                header.len(),
                r.len()
            )));
        }
        out.push(r);
    }
    Ok(out)
}

fn parse_step(s: &str, expected: usize) -> Result<u64> {
    let v: u64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad step `{s}`")))?;
    if v != expected as u64 {
        return Err(Error::Parse(format!(
            "step {v} out of sequence, expected {expected}"
        )));
    }
    Ok(v)
}

fn parse_float(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad float `{s}`")))
}

fn parse_flag(s: &str) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::Parse(format!("bad flag `{other}`"))),
    }
}

/// Parses a chain file. Steps must be `0, 1, 2, ...` in order.
pub fn parse_chain(text: &str) -> Result<Vec<ChainRow>> {
    records(text, &CHAIN_HEADER)?
        .iter()
        .enumerate()
        .map(|(k, r)| {
            Ok(ChainRow {
                step: parse_step(&r[0], k)?,
                f: parse_float(&r[1])?,
                cummin: parse_float(&r[2])?,
                reflected: parse_flag(&r[3])?,
                fallback: parse_flag(&r[4])?,
            })
        })
        .collect()
}

pub fn parse_aggregate(text: &str) -> Result<Vec<AggregateRow>> {
    records(text, &AGGREGATE_HEADER)?
        .iter()
        .enumerate()
        .map(|(k, r)| {
            Ok(AggregateRow {
                step: parse_step(&r[0], k)?,
                q25: parse_float(&r[1])?,
                q50: parse_float(&r[2])?,
                q75: parse_float(&r[3])?,
            })
        })
        .collect()
}

/// Checks the chain invariants on parsed rows: values are finite, the
/// cumulative minimum is the running minimum of `f`, and a fallback step is
/// always flagged as a boundary step.
pub fn validate_chain_rows(rows: &[ChainRow]) -> Result<()> {
    let mut prev = f64::INFINITY;
    for r in rows {
        if !r.f.is_finite() {
            return Err(Error::Parse(format!("non-finite value at step {}", r.step)));
        }
        if r.cummin.to_bits() != prev.min(r.f).to_bits() {
            return Err(Error::Parse(format!(
                "cumulative minimum invariant broken at step {}",
                r.step
            )));
        }
        if r.fallback && !r.reflected {
            return Err(Error::Parse(format!(
                "fallback without boundary flag at step {}",
                r.step
            )));
        }
        prev = r.cummin;
    }
    Ok(())
}

pub fn validate_aggregate_rows(rows: &[AggregateRow]) -> Result<()> {
    for r in rows {
        if !(r.q25 <= r.q50 && r.q50 <= r.q75) {
            return Err(Error::Parse(format!(
                "quartiles out of order at step {}",
                r.step
            )));
        }
    }
    Ok(())
}
