use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use irhvac::ingest::{extract_series, load_frames, load_rois, screen_frames, RoiMask};
use irhvac::series::{resample_uniform, write_series};

use super::{create_dir, localize, write_csv, write_index, Context, IndexEntry};
use crate::error::{CliError, Result};

/// What an extraction run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractSummary {
    pub frames: usize,
    pub rejected: usize,
    pub skipped_files: usize,
    pub series: Vec<PathBuf>,
}

/// File name for a series, keeping names readable and distinct.
pub(crate) fn series_file_name(name: &str, taken: &mut BTreeSet<String>) -> String {
    let base: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    let base = if base.is_empty() {
        "roi".to_string()
    } else {
        base
    };
    let mut candidate = format!("{base}.csv");
    let mut k = 2;
    while candidate == super::INDEX_FILE || !taken.insert(candidate.clone()) {
        candidate = format!("{base}_{k}.csv");
        k += 1;
    }
    candidate
}

/// Frames and ROIs in, one uniform series per ROI plus a quality log out.
///
/// Writes `<out>/series/<roi>.csv`, `<out>/series/index.csv`,
/// `<out>/quality.csv` (one row per frame) and `<out>/skipped.csv` (unreadable
/// or duplicate frame files).
pub fn run(ctx: &Context) -> Result<ExtractSummary> {
    let cfg = &ctx.config;
    let frames_path = cfg.paths.frames.as_deref().ok_or_else(|| {
        CliError::Config("no frame directory; pass --frames or set paths.frames".into())
    })?;
    let rois_path = cfg
        .paths
        .rois
        .as_deref()
        .ok_or_else(|| CliError::Config("no ROI file; pass --rois or set paths.rois".into()))?;
    if !frames_path.exists() {
        return Err(CliError::Missing(format!(
            "frame path {} does not exist",
            frames_path.display()
        )));
    }
    let out = cfg.output()?;
    let model = cfg.model()?;
    let rois = load_rois(rois_path)?;
    if rois.is_empty() {
        return Err(
            irhvac::Error::EmptyInput(format!("{} defines no ROI", rois_path.display())).into(),
        );
    }
    let mut scenes: BTreeMap<&str, Vec<&RoiMask>> = BTreeMap::new();
    for r in &rois {
        scenes.entry(r.scene_id.as_str()).or_default().push(r);
    }

    let series_dir = cfg.series_dir()?;
    create_dir(&series_dir)?;
    let mut quality = Vec::new();
    let mut skipped = Vec::new();
    let mut entries = Vec::new();
    let mut taken = BTreeSet::new();
    let mut summary = ExtractSummary {
        frames: 0,
        rejected: 0,
        skipped_files: 0,
        series: Vec::new(),
    };
    for (scene_id, masks) in scenes {
        let loaded = load_frames(frames_path, scene_id)?;
        for e in &loaded.errors {
            eprintln!("warning: skipped frame: {e}");
            skipped.push((scene_id.to_string(), e.to_string()));
        }
        for p in &loaded.duplicates {
            eprintln!("warning: duplicate timestamp, skipped {}", p.display());
            skipped.push((
                scene_id.to_string(),
                format!("{}: duplicate timestamp", p.display()),
            ));
        }
        let verdicts = screen_frames(&loaded.frames, &cfg.quality);
        for (f, v) in loaded.frames.iter().zip(&verdicts) {
            quality.push((
                scene_id.to_string(),
                f.timestamp,
                v.accepted,
                v.reason.as_str(),
            ));
        }
        summary.frames += loaded.frames.len();
        summary.rejected += verdicts.iter().filter(|v| !v.accepted).count();
        for mask in masks {
            let raw = extract_series(&loaded.frames, &verdicts, mask, &model, &cfg.scene)?;
            let series = localize(
                resample_uniform(&raw, cfg.step, cfg.max_gap_fill)?,
                cfg.utc_offset,
            );
            let file = series_file_name(&mask.name, &mut taken);
            let path = series_dir.join(&file);
            write_csv(&path, |w| write_series(w, &series))?;
            entries.push(IndexEntry {
                roi_name: mask.name.clone(),
                label: mask.label,
                file: file.into(),
            });
            summary.series.push(path);
        }
    }
    write_index(&series_dir, &entries)?;
    summary.skipped_files = skipped.len();
    write_quality_log(&out.join("quality.csv"), &quality)?;
    write_csv(&out.join("skipped.csv"), |w| {
        writeln!(w, "scene_id,problem")?;
        for (scene, problem) in &skipped {
            writeln!(w, "{scene},\"{}\"", problem.replace('"', "\"\""))?;
        }
        Ok(())
    })?;
    Ok(summary)
}

fn write_quality_log(
    path: &Path,
    rows: &[(String, irhvac::series::Instant, bool, &'static str)],
) -> Result<()> {
    write_csv(path, |w| {
        writeln!(w, "scene_id,timestamp,accepted,reason")?;
        for (scene, t, accepted, reason) in rows {
            writeln!(
                w,
                "{scene},{},{accepted},{reason}",
                t.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, false)
            )?;
        }
        Ok(())
    })
}
