//! CSV emission: `scenario_id,run,seed,param_json,metric,value` with LF line
//! endings, UTF-8, values at 9 significant digits, and a deterministic row
//! order, so identical inputs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{MetricRecord, SummaryRow};
use crate::{Error, Result};

/// Render a value with 9 significant digits. Plain decimal notation inside
/// a comfortable magnitude range, scientific outside it.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..=14).contains(&magnitude) {
        let decimals = (8 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write the data CSV: one row per record, ordered by
/// (scenario, run, metric name). The sort is stable, so records that tie on
/// the key keep their (deterministic) generation order.
pub fn write_csv(records: &[MetricRecord], destination: &Path) -> Result<()> {
    let mut ordered: Vec<&MetricRecord> = records.iter().collect();
    ordered.sort_by(|a, b| {
        (a.scenario_id.as_str(), a.run, a.metric.as_str()).cmp(&(
            b.scenario_id.as_str(),
            b.run,
            b.metric.as_str(),
        ))
    });

    let file = File::create(destination).map_err(io_err(destination))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>, line: &str| -> Result<()> {
        out.write_all(line.as_bytes()).map_err(io_err(destination))?;
        out.write_all(b"\n").map_err(io_err(destination))
    };
    write(&mut out, "scenario_id,run,seed,param_json,metric,value")?;
    for record in ordered {
        let line = format!(
            "{},{},{},{},{},{}",
            csv_field(&record.scenario_id),
            record.run,
            record.seed,
            csv_field(&record.param_json),
            record.metric.as_str(),
            format_value(record.value),
        );
        write(&mut out, &line)?;
    }
    out.flush().map_err(io_err(destination))
}

/// Write the companion summary CSV. Groups of size one have no confidence
/// halfwidth; the field is left empty.
pub fn write_summary_csv(rows: &[SummaryRow], destination: &Path) -> Result<()> {
    let file = File::create(destination).map_err(io_err(destination))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>, line: &str| -> Result<()> {
        out.write_all(line.as_bytes()).map_err(io_err(destination))?;
        out.write_all(b"\n").map_err(io_err(destination))
    };
    write(&mut out, "scenario_id,param_json,metric,n,mean,ci_halfwidth")?;
    for row in rows {
        let halfwidth = row
            .ci_halfwidth
            .map(format_value)
            .unwrap_or_default();
        let line = format!(
            "{},{},{},{},{},{}",
            csv_field(&row.scenario_id),
            csv_field(&row.param_json),
            row.metric.as_str(),
            row.n,
            format_value(row.mean),
            halfwidth,
        );
        write(&mut out, &line)?;
    }
    out.flush().map_err(io_err(destination))
}
