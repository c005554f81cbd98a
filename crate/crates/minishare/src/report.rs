//! Result tables (CSV or JSON) and the textual run summary.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::config::OutputFormat;
use crate::experiment::{MetricsRow, Resolved};
use crate::HarnessError;

pub const CSV_HEADER: &str =
    "variant,iteration,latency_ms,mean_radio_on_ms,max_radio_on_ms,reliability,correct";

pub fn write_csv<W: Write>(rows: &[MetricsRow], out: W) -> Result<(), HarnessError> {
    // Serialising an empty slice through serde would drop the header.
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<MetricsRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::Config(format!(
            "unexpected CSV header `{}`",
            header.join(",")
        )));
    }
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_json<W: Write>(rows: &[MetricsRow], mut out: W) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    out.write_all(b"\n").map_err(serde_json::Error::io)?;
    Ok(())
}

pub fn write_table<W: Write>(
    rows: &[MetricsRow],
    format: OutputFormat,
    out: W,
) -> Result<(), HarnessError> {
    match format {
        OutputFormat::Csv => write_csv(rows, out),
        OutputFormat::Json => write_json(rows, out),
    }
}

/// Writes the table to `path`, replacing any existing file.
pub fn write_results(
    rows: &[MetricsRow],
    path: &Path,
    format: OutputFormat,
) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    write_table(rows, format, &mut out)?;
    out.flush().map_err(io)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub variant: String,
    pub rounds: usize,
    pub mean_latency_ms: f64,
    pub mean_radio_on_ms: f64,
    pub mean_max_radio_on_ms: f64,
    pub mean_reliability: f64,
    pub correct_fraction: f64,
}

/// Per-variant means, in order of first appearance.
pub fn summarize(rows: &[MetricsRow]) -> Vec<VariantSummary> {
    let mut names: Vec<&str> = Vec::new();
    for row in rows {
        if !names.contains(&row.variant.as_str()) {
            names.push(&row.variant);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let group: Vec<&MetricsRow> = rows.iter().filter(|r| r.variant == name).collect();
            let mean = |f: fn(&MetricsRow) -> f64| {
                group.iter().map(|r| f(r)).sum::<f64>() / group.len() as f64
            };
            VariantSummary {
                variant: name.to_string(),
                rounds: group.len(),
                mean_latency_ms: mean(|r| r.latency_ms),
                mean_radio_on_ms: mean(|r| r.mean_radio_on_ms),
                mean_max_radio_on_ms: mean(|r| r.max_radio_on_ms),
                mean_reliability: mean(|r| r.reliability),
                correct_fraction: mean(|r| r.correct as u8 as f64),
            }
        })
        .collect()
}

/// S3 over S4 ratios of mean latency and mean radio-on time.
pub fn ratios(summary: &[VariantSummary]) -> Option<(f64, f64)> {
    let s3 = summary.iter().find(|s| s.variant == "s3")?;
    let s4 = summary.iter().find(|s| s.variant == "s4")?;
    Some((
        s3.mean_latency_ms / s4.mean_latency_ms,
        s3.mean_radio_on_ms / s4.mean_radio_on_ms,
    ))
}

pub fn format_summary(resolved: &Resolved, rows: &[MetricsRow]) -> String {
    let mut out = String::new();
    write!(
        out,
        "n={} k={} ntx_share={} ntx_recon={}",
        resolved.n, resolved.k, resolved.ntx_share, resolved.ntx_recon
    )
    .unwrap();
    if let Some(ntx) = resolved.ntx_s3 {
        write!(out, " ntx_s3={ntx}").unwrap();
    }
    out.push('\n');
    if let Some(aggs) = &resolved.aggregators {
        let ids: Vec<String> = aggs.iter().map(|a| a.to_string()).collect();
        writeln!(out, "aggregators: {}", ids.join(" ")).unwrap();
    }
    let summary = summarize(rows);
    for s in &summary {
        writeln!(
            out,
            "{}: rounds={} latency_ms={:.3} radio_on_ms={:.3} max_radio_on_ms={:.3} reliability={:.4} correct={:.4}",
            s.variant,
            s.rounds,
            s.mean_latency_ms,
            s.mean_radio_on_ms,
            s.mean_max_radio_on_ms,
            s.mean_reliability,
            s.correct_fraction
        )
        .unwrap();
    }
    if let Some((latency, radio)) = ratios(&summary) {
        writeln!(
            out,
            "s3/s4: latency_ratio={latency:.3} radio_on_ratio={radio:.3}"
        )
        .unwrap();
    }
    out
}
