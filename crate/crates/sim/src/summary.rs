//! Comparison of finished runs read back from CSV.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anypath_core::Phase;

use crate::csv_io::{detect_schema, read_aggregate, read_trace, CsvError, Schema};
use crate::format::sig9;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub label: String,
    pub epochs: usize,
    pub horizon: u64,
    /// Mean final cumulative regret.
    pub final_regret: f64,
    /// Mean final time-averaged regret.
    pub final_avg_regret: f64,
    /// Only available from per-slot traces.
    pub explore_fraction: Option<f64>,
    pub delivery_rate: Option<f64>,
    /// `(t, mean time-averaged regret)` for plot data.
    pub curve: Vec<(u64, f64)>,
}

/// Label for a CSV path: the run directory for the standard file names,
/// otherwise the file stem.
pub fn label_for(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    if matches!(stem, "aggregate" | "trace") {
        if let Some(dir) = path
            .parent()
            .and_then(|p| p.file_name())
            .and_then(|s| s.to_str())
        {
            return dir.to_string();
        }
    }
    stem.to_string()
}

pub fn summarize_file(path: &Path) -> Result<SummaryRow, CsvError> {
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let schema = detect_schema(reader.headers()?);
    drop(reader);
    let file = BufReader::new(File::open(path)?);
    let label = label_for(path);
    match schema {
        Some(Schema::Aggregate) => {
            let rows = read_aggregate(file)?;
            let last = rows.last().ok_or(CsvError::Empty)?;
            Ok(SummaryRow {
                label,
                epochs: 0,
                horizon: last.t,
                final_regret: last.mean_cum_regret,
                final_avg_regret: last.mean_avg_regret,
                explore_fraction: None,
                delivery_rate: None,
                curve: rows.iter().map(|r| (r.t, r.mean_avg_regret)).collect(),
            })
        }
        Some(Schema::Trace) => summarize_trace(label, read_trace(file)?),
        None => {
            let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
            Err(CsvError::Header {
                expected: "per-slot trace or aggregated",
                found: reader.headers()?.iter().collect::<Vec<_>>().join(","),
            })
        }
    }
}

fn summarize_trace(
    label: String,
    rows: Vec<crate::csv_io::TraceRow>,
) -> Result<SummaryRow, CsvError> {
    let mut by_epoch: BTreeMap<u64, Vec<_>> = BTreeMap::new();
    for r in &rows {
        by_epoch.entry(r.epoch).or_default().push(*r);
    }
    let horizon = by_epoch.values().next().map_or(0, Vec::len);
    if let Some((epoch, _)) = by_epoch.iter().find(|(_, v)| v.len() != horizon) {
        return Err(CsvError::Row {
            row: 0,
            message: format!("epoch {epoch} has a different number of slots"),
        });
    }
    let n = by_epoch.len() as f64;
    let mut curve = vec![0.0; horizon];
    for slots in by_epoch.values() {
        for (acc, s) in curve.iter_mut().zip(slots) {
            *acc += s.avg_regret;
        }
    }
    let lasts = by_epoch.values().filter_map(|v| v.last());
    let final_regret = lasts.clone().map(|s| s.cum_regret).sum::<f64>() / n;
    let final_avg_regret = lasts.map(|s| s.avg_regret).sum::<f64>() / n;
    let explore = rows.iter().filter(|r| r.phase == Phase::Explore).count();
    let exploit: Vec<bool> = rows.iter().filter_map(|r| r.delivered).collect();
    let first_epoch = by_epoch.values().next().expect("nonempty");
    Ok(SummaryRow {
        label,
        epochs: by_epoch.len(),
        horizon: first_epoch.last().map_or(0, |s| s.t),
        final_regret,
        final_avg_regret,
        explore_fraction: Some(explore as f64 / rows.len() as f64),
        delivery_rate: (!exploit.is_empty())
            .then(|| exploit.iter().filter(|&&d| d).count() as f64 / exploit.len() as f64),
        curve: first_epoch
            .iter()
            .zip(&curve)
            .map(|(s, c)| (s.t, c / n))
            .collect(),
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), sig9)
}

/// Renders the comparison table.
pub fn render_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let header = [
        "label",
        "epochs",
        "T",
        "R(T)",
        "R(T)/T",
        "explore_frac",
        "delivery_rate",
    ];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.label.clone(),
                if r.epochs == 0 {
                    "-".to_string()
                } else {
                    r.epochs.to_string()
                },
                r.horizon.to_string(),
                sig9(r.final_regret),
                sig9(r.final_avg_regret),
                opt(r.explore_fraction),
                opt(r.delivery_rate),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            cells
                .iter()
                .map(|c| c[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |fields: Vec<&str>| {
        let padded: Vec<String> = fields
            .iter()
            .zip(&widths)
            .map(|(f, w)| format!("{f:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    out.push_str(&line(header.to_vec()));
    for c in &cells {
        out.push_str(&line(c.iter().map(String::as_str).collect()));
    }
    out
}

/// Merged `t,<label>...` CSV of mean time-averaged regret, one column per run.
pub fn write_plot_data<W: Write>(rows: &[SummaryRow], sink: W) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["t".to_string()];
    header.extend(rows.iter().map(|r| r.label.clone()));
    w.write_record(&header)?;
    let longest = rows.iter().map(|r| r.curve.len()).max().unwrap_or(0);
    for i in 0..longest {
        let t = rows.iter().find_map(|r| r.curve.get(i)).map_or(0, |p| p.0);
        let mut record = vec![t.to_string()];
        record.extend(
            rows.iter()
                .map(|r| r.curve.get(i).map_or_else(String::new, |p| sig9(p.1))),
        );
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
