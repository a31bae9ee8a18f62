//! Result files. Floats are written with 17 significant digits so identical
//! runs give byte-identical files and values round-trip exactly.

use crate::error::{CliError, Result};
use cwvsmix::engine::ChainSamples;
use cwvsmix::inference::{TraceSummary, WeightSelection, WindowDecision};
use cwvsmix::sim::conditional_weight_means;
use serde::Serialize;
use std::fs;
use std::path::Path;

pub const MISSING: &str = "NA";

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), fmt_f64)
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))
}

pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| CliError::csv(path, e))?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())
            .map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::json(path, e))
}

/// One row per period: PIP, conditional odds-ratio summary and verdict.
pub fn write_windows(path: &Path, decisions: &[WindowDecision]) -> Result<()> {
    write_table(
        path,
        &["period", "pip", "conditional_draws", "or_mean", "or_lower", "or_upper", "verdict"],
        decisions.iter().map(|d| {
            [
                d.period.to_string(),
                fmt_f64(d.pip),
                d.conditional_draws.to_string(),
                fmt_opt(d.or_mean),
                fmt_opt(d.or_lower),
                fmt_opt(d.or_upper),
                d.verdict.as_str().to_string(),
            ]
        }),
    )
}

/// Long format, one row per period and weight component.
pub fn write_weights(
    path: &Path,
    components: &[String],
    selection: &WeightSelection,
    samples: &ChainSamples,
) -> Result<()> {
    let mut rows = Vec::with_capacity(selection.m * components.len());
    for t in 0..selection.m {
        let (means, conditional) = conditional_weight_means(samples, t)?;
        for (k, name) in components.iter().enumerate() {
            rows.push([
                (t + 1).to_string(),
                name.clone(),
                fmt_f64(selection.inclusion_at(t)[k]),
                selection.selected_at(t)[k].to_string(),
                fmt_f64(means[k]),
                conditional.to_string(),
            ]);
        }
    }
    write_table(
        path,
        &["period", "component", "inclusion", "selected", "conditional_mean", "conditional"],
        rows,
    )
}

pub fn write_trace_summaries(path: &Path, summaries: &[TraceSummary]) -> Result<()> {
    write_table(
        path,
        &["parameter", "mean", "sd", "q05", "q50", "q95", "ess", "geweke_z"],
        summaries.iter().map(|s| {
            [
                s.name.clone(),
                fmt_f64(s.mean),
                fmt_f64(s.sd),
                fmt_f64(s.q05),
                fmt_f64(s.q50),
                fmt_f64(s.q95),
                fmt_opt(s.ess),
                fmt_opt(s.geweke_z),
            ]
        }),
    )
}

/// Wide format: one row per kept draw with every scalar trace and each γ(t).
pub fn write_samples(path: &Path, samples: &ChainSamples) -> Result<()> {
    let traces = samples.named_traces();
    let m = samples.m();
    let mut header: Vec<String> = vec!["draw".into()];
    header.extend(traces.iter().map(|(n, _)| n.clone()));
    header.extend((1..=m).map(|t| format!("gamma_{t}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        path,
        &header_refs,
        (0..samples.len()).map(|s| {
            let mut row = Vec::with_capacity(header.len());
            row.push((s + 1).to_string());
            row.extend(traces.iter().map(|(_, tr)| fmt_f64(tr[s])));
            row.extend(samples.gamma(s).iter().map(|&g| (g as u8).to_string()));
            row
        }),
    )
}

/// Reads named traces from a samples file, skipping the `draw` column.
pub fn read_samples(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header = rdr.headers().map_err(|e| CliError::csv(path, e))?.clone();
    let keep: Vec<usize> = (0..header.len()).filter(|&c| &header[c] != "draw").collect();
    let mut traces: Vec<(String, Vec<f64>)> = keep.iter().map(|&c| (header[c].to_string(), Vec::new())).collect();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(path, e))?;
        for (slot, &c) in keep.iter().enumerate() {
            let cell = &record[c];
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::Input(format!("non-numeric value '{cell}' at row {}, column '{}'", row + 1, &header[c]))
            })?;
            traces[slot].1.push(v);
        }
    }
    if traces.first().is_none_or(|t| t.1.is_empty()) {
        return Err(CliError::Input(format!("{}: no draws", path.display())));
    }
    Ok(traces)
}
