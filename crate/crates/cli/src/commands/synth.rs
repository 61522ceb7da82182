use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use chrono::SecondsFormat;

use irhvac::detect::{write_usage_csv, EventKind, UsageInterval};
use irhvac::synth::{emit_frames, generate, FrameLayout, Scenario, ScenarioSpec};

use super::extract::series_file_name;
use super::{create_dir, write_csv, write_file, write_index, Context, IndexEntry};
use crate::error::{CliError, Result};

pub const SCENE_ID: &str = "facade";

/// Options of the `synth` subcommand.
#[derive(Debug, Clone, Default)]
pub struct SynthOptions {
    /// Frame layout file; the automatic layout when absent.
    pub layout: Option<std::path::PathBuf>,
    pub frames: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        irhvac::Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
        .into()
    })
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

/// Generate a scenario and write its series, labels and (optionally) frames.
///
/// Layout under `<out>`: `spec.json`, `series/` with `index.csv`,
/// `labels/events.csv`, `labels/usage.csv`, `labels/states.csv`, and with
/// frames `frames/<scene>/`, `frames/rois.json`, `frames/layout.json`.
pub fn run(ctx: &Context, spec_path: &Path, opts: &SynthOptions) -> Result<Scenario> {
    let spec: ScenarioSpec = read_json(spec_path)?;
    let scenario = generate(&spec)?;
    let layout = match &opts.layout {
        Some(p) => {
            let l: FrameLayout = read_json(p)?;
            l.validate()?;
            l.rois(&scenario)?;
            Some(l)
        }
        None => None,
    };
    let out = ctx.config.output()?;
    create_dir(out)?;
    write_file(&out.join("spec.json"), pretty(&scenario.spec).as_bytes())?;

    let series_dir = out.join("series");
    let mut taken = BTreeSet::new();
    let mut entries = Vec::new();
    for s in scenario.all_series() {
        let file = series_file_name(&s.roi_name, &mut taken);
        write_csv(&series_dir.join(&file), |w| {
            irhvac::series::write_series(w, s)
        })?;
        entries.push(IndexEntry {
            roi_name: s.roi_name.clone(),
            label: s.label,
            file: file.into(),
        });
    }
    write_index(&series_dir, &entries)?;
    write_labels(&scenario, &out.join("labels"))?;

    if opts.frames {
        let layout = layout.unwrap_or_else(|| FrameLayout::automatic(&scenario, SCENE_ID));
        let frames_dir = out.join("frames");
        emit_frames(
            &scenario,
            &layout,
            &ctx.config.model()?,
            &ctx.config.scene,
            &frames_dir,
        )?;
        write_file(&frames_dir.join("layout.json"), pretty(&layout).as_bytes())?;
    }
    Ok(scenario)
}

fn stamp(t: &irhvac::series::Instant) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, false)
}

fn write_labels(sc: &Scenario, dir: &Path) -> Result<()> {
    write_csv(&dir.join("events.csv"), |w| {
        writeln!(w, "timestamp,kind")?;
        for e in &sc.labels.events {
            let kind = match e.kind {
                EventKind::SwitchOn => "switch_on",
                EventKind::SwitchOff => "switch_off",
            };
            writeln!(w, "{},{kind}", stamp(&e.instant))?;
        }
        Ok(())
    })?;
    let usage: Vec<(String, Vec<UsageInterval>)> = sc
        .spec
        .ac_units
        .iter()
        .map(|ac| {
            let spans = sc
                .usage_of(&ac.name)
                .into_iter()
                .map(|(start, end)| UsageInterval { start, end });
            (ac.name.clone(), spans.collect())
        })
        .collect();
    write_csv(&dir.join("usage.csv"), |w| write_usage_csv(w, &usage))?;
    write_csv(&dir.join("states.csv"), |w| {
        write!(w, "timestamp,hvac")?;
        for ac in &sc.spec.ac_units {
            write!(w, ",{}", ac.name)?;
        }
        writeln!(w)?;
        for i in 0..sc.wall.len() {
            write!(
                w,
                "{},{}",
                stamp(&sc.wall.time_at(i)),
                sc.labels.hvac_on[i] as u8
            )?;
            for c in &sc.labels.compressor {
                write!(w, ",{}", c[i] as u8)?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}
