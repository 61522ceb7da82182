use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::DateTime;

use crate::error::{Error, Result};
use crate::series::Instant;

/// A timestamped grid of raw detector counts, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalFrame {
    pub timestamp: Instant,
    pub scene_id: String,
    pub width: usize,
    pub height: usize,
    pub counts: Vec<f64>,
}

impl ThermalFrame {
    pub fn new(
        timestamp: Instant,
        scene_id: impl Into<String>,
        width: usize,
        height: usize,
        counts: Vec<f64>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch(format!(
                "frame size {width}x{height} must be positive"
            )));
        }
        if width * height != counts.len() {
            return Err(Error::DimensionMismatch(format!(
                "frame {width}x{height} needs {} counts, got {}",
                width * height,
                counts.len()
            )));
        }
        Ok(ThermalFrame {
            timestamp,
            scene_id: scene_id.into(),
            width,
            height,
            counts,
        })
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.counts[y * self.width + x]
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().sum::<f64>() / self.counts.len() as f64
    }
}

/// Parse a frame file body: `# width,height` then `height` rows of `width` counts.
pub fn parse_frame(
    text: &str,
    path: &Path,
    timestamp: Instant,
    scene_id: &str,
) -> Result<ThermalFrame> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::format(path, "empty frame file"))?;
    let dims = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::format(path, "line 1: expected `# width,height` header"))?;
    let mut dims = dims.split(',').map(|s| s.trim().parse::<usize>());
    let (width, height) = match (dims.next(), dims.next(), dims.next()) {
        (Some(Ok(w)), Some(Ok(h)), None) if w > 0 && h > 0 => (w, h),
        _ => {
            return Err(Error::format(
                path,
                format!("line 1: bad dimensions header `{header}`"),
            ))
        }
    };
    let mut counts = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (n, line) in lines {
        let lineno = n + 1;
        rows += 1;
        if rows > height {
            return Err(Error::format(
                path,
                format!("line {lineno}: more than {height} rows"),
            ));
        }
        let before = counts.len();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::format(path, format!("line {lineno}: bad count `{}`", field.trim()))
            })?;
            if !v.is_finite() {
                return Err(Error::format(
                    path,
                    format!("line {lineno}: non-finite count"),
                ));
            }
            counts.push(v);
        }
        let got = counts.len() - before;
        if got != width {
            return Err(Error::format(
                path,
                format!("line {lineno}: row {rows} has {got} values, expected {width}"),
            ));
        }
    }
    if rows != height {
        return Err(Error::format(
            path,
            format!("found {rows} rows, expected {height}"),
        ));
    }
    ThermalFrame::new(timestamp, scene_id, width, height, counts)
}

/// Serialise a frame in the format read by [`parse_frame`].
pub fn format_frame(frame: &ThermalFrame) -> String {
    let mut out = String::with_capacity(frame.counts.len() * 10);
    let _ = writeln!(out, "# {},{}", frame.width, frame.height);
    for row in frame.counts.chunks(frame.width) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn frame_file_name(timestamp: &Instant) -> String {
    format!("{}.csv", crate::series::io_format_instant(timestamp))
}

/// Frames read from disk plus the per-file problems met on the way.
#[derive(Debug, Default)]
pub struct LoadedFrames {
    pub frames: Vec<ThermalFrame>,
    /// One entry per malformed file; these files were skipped.
    pub errors: Vec<Error>,
    /// Files dropped because an earlier file had the same timestamp.
    pub duplicates: Vec<PathBuf>,
}

/// Load the frames of one scene.
///
/// `path` may be a single frame file, the scene directory itself, or a parent
/// directory holding a `<scene_id>/` subdirectory. Frames come back sorted by
/// timestamp; of several files with the same timestamp the first in name
/// order is kept.
pub fn load_frames(path: &Path, scene_id: &str) -> Result<LoadedFrames> {
    let files: Vec<PathBuf> = if path.is_file() {
        vec![path.to_path_buf()]
    } else {
        let nested = path.join(scene_id);
        let dir = if nested.is_dir() {
            nested
        } else {
            path.to_path_buf()
        };
        let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut files = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let p = entry.path();
            if p.is_file() && p.extension().is_some_and(|e| e == "csv") {
                files.push(p);
            }
        }
        files.sort();
        files
    };

    let mut loaded = LoadedFrames::default();
    let mut by_time: BTreeMap<Instant, ThermalFrame> = BTreeMap::new();
    for file in files {
        match read_frame_file(&file, scene_id) {
            Ok(frame) => match by_time.entry(frame.timestamp) {
                std::collections::btree_map::Entry::Occupied(_) => loaded.duplicates.push(file),
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(frame);
                }
            },
            Err(e) => loaded.errors.push(e),
        }
    }
    if by_time.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no valid frames for scene `{scene_id}` under {} ({} malformed)",
            path.display(),
            loaded.errors.len()
        )));
    }
    loaded.frames = by_time.into_values().collect();
    Ok(loaded)
}

pub fn read_frame_file(file: &Path, scene_id: &str) -> Result<ThermalFrame> {
    let stem = file
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::format(file, "file name is not valid UTF-8"))?;
    let timestamp = DateTime::parse_from_rfc3339(stem).map_err(|e| {
        Error::format(
            file,
            format!("file name `{stem}` is not an ISO-8601 timestamp: {e}"),
        )
    })?;
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    parse_frame(&text, file, timestamp, scene_id)
}
