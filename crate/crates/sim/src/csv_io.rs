//! CSV schemas for per-slot traces and aggregated curves.
//!
//! Per-slot: `epoch,t,phase,inst_regret,cum_regret,avg_regret,transmissions,delivered`
//! Aggregated: `t,mean_cum_regret,se_cum_regret,mean_avg_regret,se_avg_regret`
//!
//! Reals are written with nine significant digits. `delivered` is `0`/`1`
//! on exploitation slots and empty on exploration slots.

use std::io::{Read, Write};

use anypath_core::experiment::{AggregateRow, AggregateTrace, RegretTrace};
use anypath_core::Phase;

use crate::format::sig9;

pub const TRACE_HEADER: [&str; 8] = [
    "epoch",
    "t",
    "phase",
    "inst_regret",
    "cum_regret",
    "avg_regret",
    "transmissions",
    "delivered",
];

pub const AGGREGATE_HEADER: [&str; 5] = [
    "t",
    "mean_cum_regret",
    "se_cum_regret",
    "mean_avg_regret",
    "se_avg_regret",
];

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("header does not match the {expected} schema: {found}")]
    Header {
        expected: &'static str,
        found: String,
    },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("no data rows")]
    Empty,
}

impl CsvError {
    /// True when the input was readable but does not follow the schema.
    pub fn is_schema_error(&self) -> bool {
        matches!(
            self,
            CsvError::Header { .. } | CsvError::Row { .. } | CsvError::Empty
        )
    }
}

/// One parsed row of the per-slot schema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub epoch: u64,
    pub t: u64,
    pub phase: Phase,
    pub inst_regret: f64,
    pub cum_regret: f64,
    pub avg_regret: f64,
    pub transmissions: u64,
    pub delivered: Option<bool>,
}

fn phase_str(phase: Phase) -> &'static str {
    match phase {
        Phase::Explore => "explore",
        Phase::Exploit => "exploit",
    }
}

/// Writes every slot of every trace, in the order given.
pub fn write_trace<W: Write>(traces: &[RegretTrace], sink: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRACE_HEADER)?;
    for trace in traces {
        for s in &trace.slots {
            let delivered = match s.delivered {
                Some(true) => "1",
                Some(false) => "0",
                None => "",
            };
            w.write_record([
                trace.epoch.to_string().as_str(),
                s.t.to_string().as_str(),
                phase_str(s.phase),
                sig9(s.inst_regret).as_str(),
                sig9(s.cum_regret).as_str(),
                sig9(s.avg_regret).as_str(),
                s.transmissions.to_string().as_str(),
                delivered,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate<W: Write>(aggregate: &AggregateTrace, sink: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(AGGREGATE_HEADER)?;
    for r in &aggregate.rows {
        w.write_record([
            r.t.to_string(),
            sig9(r.mean_cum_regret),
            sig9(r.se_cum_regret),
            sig9(r.mean_avg_regret),
            sig9(r.se_avg_regret),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Which schema a CSV header matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Trace,
    Aggregate,
}

pub fn detect_schema(header: &csv::StringRecord) -> Option<Schema> {
    let fields: Vec<&str> = header.iter().collect();
    if fields == TRACE_HEADER {
        Some(Schema::Trace)
    } else if fields == AGGREGATE_HEADER {
        Some(Schema::Aggregate)
    } else {
        None
    }
}

fn field(rec: &csv::StringRecord, i: usize, row: usize) -> Result<&str, CsvError> {
    rec.get(i).ok_or_else(|| CsvError::Row {
        row,
        message: format!("missing column {}", i + 1),
    })
}

fn parse<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    row: usize,
    name: &str,
) -> Result<T, CsvError> {
    let raw = field(rec, i, row)?;
    raw.parse().map_err(|_| CsvError::Row {
        row,
        message: format!("bad {name} value {raw:?}"),
    })
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, want: Schema) -> Result<(), CsvError> {
    let header = reader.headers()?.clone();
    if detect_schema(&header) != Some(want) {
        return Err(CsvError::Header {
            expected: match want {
                Schema::Trace => "per-slot trace",
                Schema::Aggregate => "aggregated",
            },
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

pub fn read_trace<R: Read>(source: R) -> Result<Vec<TraceRow>, CsvError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    check_header(&mut reader, Schema::Trace)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != TRACE_HEADER.len() {
            return Err(CsvError::Row {
                row,
                message: format!(
                    "expected {} columns, found {}",
                    TRACE_HEADER.len(),
                    rec.len()
                ),
            });
        }
        let phase = match field(&rec, 2, row)? {
            "explore" => Phase::Explore,
            "exploit" => Phase::Exploit,
            other => {
                return Err(CsvError::Row {
                    row,
                    message: format!("bad phase {other:?}"),
                })
            }
        };
        let delivered = match (phase, field(&rec, 7, row)?) {
            (Phase::Explore, "") => None,
            (Phase::Exploit, "1") => Some(true),
            (Phase::Exploit, "0") => Some(false),
            (_, other) => {
                return Err(CsvError::Row {
                    row,
                    message: format!(
                        "bad delivered value {other:?} for {} slot",
                        phase_str(phase)
                    ),
                })
            }
        };
        rows.push(TraceRow {
            epoch: parse(&rec, 0, row, "epoch")?,
            t: parse(&rec, 1, row, "t")?,
            phase,
            inst_regret: parse(&rec, 3, row, "inst_regret")?,
            cum_regret: parse(&rec, 4, row, "cum_regret")?,
            avg_regret: parse(&rec, 5, row, "avg_regret")?,
            transmissions: parse(&rec, 6, row, "transmissions")?,
            delivered,
        });
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(rows)
}

pub fn read_aggregate<R: Read>(source: R) -> Result<Vec<AggregateRow>, CsvError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    check_header(&mut reader, Schema::Aggregate)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != AGGREGATE_HEADER.len() {
            return Err(CsvError::Row {
                row,
                message: format!(
                    "expected {} columns, found {}",
                    AGGREGATE_HEADER.len(),
                    rec.len()
                ),
            });
        }
        rows.push(AggregateRow {
            t: parse(&rec, 0, row, "t")?,
            mean_cum_regret: parse(&rec, 1, row, "mean_cum_regret")?,
            se_cum_regret: parse(&rec, 2, row, "se_cum_regret")?,
            mean_avg_regret: parse(&rec, 3, row, "mean_avg_regret")?,
            se_avg_regret: parse(&rec, 4, row, "se_avg_regret")?,
        });
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(rows)
}
