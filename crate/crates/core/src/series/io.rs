//! CSV persistence: `timestamp,temperature_k,missing` for series and a
//! date-by-bin matrix for slope grids.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat};

use super::{Instant, RawSample, RawSeries, SlopeGrid, TemperatureSeries};
use crate::error::{Error, Result};
use crate::ingest::RoiLabel;

const HEADER: &str = "timestamp,temperature_k,missing";

pub(crate) fn format_instant(t: &Instant) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, false)
}

pub fn write_series<W: Write>(mut w: W, series: &TemperatureSeries) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for i in 0..series.len() {
        let t = format_instant(&series.time_at(i));
        match series.get(i) {
            Some(v) => writeln!(w, "{t},{v},false")?,
            None => writeln!(w, "{t},,true")?,
        }
    }
    Ok(())
}

pub fn write_raw_series<W: Write>(mut w: W, series: &RawSeries) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for s in &series.samples {
        let t = format_instant(&s.timestamp);
        match s.value {
            Some(v) => writeln!(w, "{t},{v},false")?,
            None => writeln!(w, "{t},,true")?,
        }
    }
    Ok(())
}

fn parse_rows(path: &Path) -> Result<Vec<RawSample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == HEADER => {}
        other => {
            return Err(Error::format(
                path,
                format!(
                    "expected header `{HEADER}`, found `{}`",
                    other.unwrap_or("")
                ),
            ))
        }
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = n + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::format(
                path,
                format!("row {row}: expected 3 fields, found {}", fields.len()),
            ));
        }
        let timestamp = DateTime::parse_from_rfc3339(fields[0]).map_err(|e| {
            Error::format(
                path,
                format!("row {row}: bad timestamp `{}`: {e}", fields[0]),
            )
        })?;
        let missing = match fields[2] {
            "true" | "1" => true,
            "false" | "0" => false,
            other => {
                return Err(Error::format(
                    path,
                    format!("row {row}: bad missing flag `{other}`"),
                ))
            }
        };
        let value = if missing {
            None
        } else {
            let v: f64 = fields[1].parse().map_err(|_| {
                Error::format(path, format!("row {row}: bad temperature `{}`", fields[1]))
            })?;
            Some(v)
        };
        rows.push(RawSample { timestamp, value });
    }
    Ok(rows)
}

pub fn read_raw_series(path: &Path, roi_name: &str, label: RoiLabel) -> Result<RawSeries> {
    Ok(RawSeries {
        roi_name: roi_name.to_string(),
        label,
        samples: parse_rows(path)?,
    })
}

/// Read a series written by [`write_series`]; rows must be evenly spaced.
pub fn read_series(path: &Path, roi_name: &str, label: RoiLabel) -> Result<TemperatureSeries> {
    let rows = parse_rows(path)?;
    if rows.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "{} holds fewer than two rows",
            path.display()
        )));
    }
    let step = (rows[1].timestamp - rows[0].timestamp).num_seconds();
    if step <= 0 {
        return Err(Error::format(path, "timestamps must increase"));
    }
    for (i, w) in rows.windows(2).enumerate() {
        if (w[1].timestamp - w[0].timestamp).num_seconds() != step {
            return Err(Error::format(
                path,
                format!("row {}: series is not uniformly spaced", i + 3),
            ));
        }
    }
    let missing: Vec<bool> = rows.iter().map(|r| r.value.is_none()).collect();
    let values = rows.iter().map(|r| r.value.unwrap_or(f64::NAN)).collect();
    TemperatureSeries::new(
        roi_name,
        label,
        rows[0].timestamp,
        step as u32,
        values,
        missing,
    )
}

/// Date rows by bin-start columns; missing cells are empty.
pub fn write_slope_grid<W: Write>(mut w: W, grid: &SlopeGrid) -> std::io::Result<()> {
    write!(w, "date")?;
    for b in &grid.bins {
        write!(w, ",{}", b.format("%H:%M"))?;
    }
    writeln!(w)?;
    for (d, row) in grid.dates.iter().zip(&grid.slopes) {
        write!(w, "{}", d.format("%Y-%m-%d"))?;
        for cell in row {
            match cell {
                Some(v) => write!(w, ",{v}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
