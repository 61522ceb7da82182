pub mod acreport;
pub mod extract;
pub mod schedule;
pub mod synth;

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::FixedOffset;

use irhvac::ingest::RoiLabel;
use irhvac::series::{read_series, TemperatureSeries};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    /// Leave run-dependent comments out of figures.
    pub deterministic: bool,
}

impl Context {
    pub fn stamp(&self) -> Option<String> {
        (!self.deterministic)
            .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
    }
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Run a CSV writer into memory, then write the file in one go.
pub(crate) fn write_csv(
    path: &Path,
    f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::io(path, e))?;
    write_file(path, &buf)
}

pub(crate) fn parse_label(s: &str) -> Option<RoiLabel> {
    [
        RoiLabel::Wall,
        RoiLabel::Window,
        RoiLabel::AcUnit,
        RoiLabel::None,
    ]
    .into_iter()
    .find(|l| l.as_str() == s)
}

/// One row of a series directory's `index.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub roi_name: String,
    pub label: RoiLabel,
    pub file: PathBuf,
}

pub const INDEX_FILE: &str = "index.csv";
const INDEX_HEADER: &str = "roi_name,label,file";

pub(crate) fn write_index(dir: &Path, entries: &[IndexEntry]) -> Result<()> {
    write_csv(&dir.join(INDEX_FILE), |w| {
        writeln!(w, "{INDEX_HEADER}")?;
        for e in entries {
            writeln!(
                w,
                "{},{},{}",
                e.roi_name,
                e.label.as_str(),
                e.file.display()
            )?;
        }
        Ok(())
    })
}

/// Entries of `<dir>/index.csv`, with file names resolved against `dir`.
pub fn read_index(dir: &Path) -> Result<Vec<IndexEntry>> {
    let path = dir.join(INDEX_FILE);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(CliError::Missing(format!(
                "{} not found; run `irhvac extract` first",
                path.display()
            )))
        }
        Err(e) => return Err(CliError::io(&path, e)),
    };
    let format = |message: String| {
        CliError::Core(irhvac::Error::Format {
            path: path.clone(),
            message,
        })
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(INDEX_HEADER) {
        return Err(format(format!("expected header `{INDEX_HEADER}`")));
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let f: Vec<&str> = line.splitn(3, ',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(format(format!("row {}: expected 3 fields", n + 2)));
        }
        let label = parse_label(f[1])
            .ok_or_else(|| format(format!("row {}: unknown label `{}`", n + 2, f[1])))?;
        out.push(IndexEntry {
            roi_name: f[0].to_string(),
            label,
            file: dir.join(f[2]),
        });
    }
    Ok(out)
}

/// Express the series in `offset` local time; identity when `None`.
pub(crate) fn localize(mut s: TemperatureSeries, offset: Option<FixedOffset>) -> TemperatureSeries {
    if let Some(o) = offset {
        s.start = s.start.with_timezone(&o);
    }
    s
}

pub(crate) fn load_entry(e: &IndexEntry, offset: Option<FixedOffset>) -> Result<TemperatureSeries> {
    Ok(localize(
        read_series(&e.file, &e.roi_name, e.label)?,
        offset,
    ))
}
