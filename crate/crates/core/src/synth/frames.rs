use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Scenario;
use crate::error::{Error, Result};
use crate::ingest::{format_frame, frame_file_name, RoiMask, ThermalFrame};
use crate::radiometry::{total_signal, PlanckModel, RadiometricScene};

/// A rectangle of pixels `x0..x1` by `y0..y1` showing one scenario series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub series: String,
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Placement {
    fn overlaps(&self, o: &Placement) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }
}

/// Where each series appears in the synthetic frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameLayout {
    pub scene_id: String,
    pub width: usize,
    pub height: usize,
    pub placements: Vec<Placement>,
    /// Sample indices replaced by featureless frames, as in rain or fog.
    #[serde(default)]
    pub washout: Vec<usize>,
    /// Peak-to-peak count texture added to background pixels.
    #[serde(default = "default_texture")]
    pub texture: f64,
}

fn default_texture() -> f64 {
    90.0
}

impl FrameLayout {
    /// Wall and window side by side, then one 2 by 2 block per condenser,
    /// on a 32-pixel-wide frame tall enough for all of them.
    pub fn automatic(scenario: &Scenario, scene_id: &str) -> FrameLayout {
        let mut placements = vec![
            Placement {
                series: scenario.wall.roi_name.clone(),
                x0: 1,
                y0: 1,
                x1: 7,
                y1: 5,
            },
            Placement {
                series: scenario.window.roi_name.clone(),
                x0: 9,
                y0: 1,
                x1: 13,
                y1: 4,
            },
        ];
        for (k, c) in scenario.condensers.iter().enumerate() {
            let (col, row) = (k % 8, k / 8);
            placements.push(Placement {
                series: c.roi_name.clone(),
                x0: 1 + 4 * col,
                y0: 7 + 4 * row,
                x1: 3 + 4 * col,
                y1: 9 + 4 * row,
            });
        }
        let rows = scenario.condensers.len().div_ceil(8).max(1);
        FrameLayout {
            scene_id: scene_id.to_string(),
            width: 32,
            height: (7 + 4 * rows + 2).max(24),
            placements,
            washout: Vec::new(),
            texture: default_texture(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Layout("frame size must be positive".into()));
        }
        for (i, p) in self.placements.iter().enumerate() {
            if p.x0 >= p.x1 || p.y0 >= p.y1 || p.x1 > self.width || p.y1 > self.height {
                return Err(Error::Layout(format!(
                    "`{}` at ({}, {})-({}, {}) is empty or outside the {}x{} frame",
                    p.series, p.x0, p.y0, p.x1, p.y1, self.width, self.height
                )));
            }
            if let Some(o) = self.placements[..i].iter().find(|o| o.overlaps(p)) {
                return Err(Error::Layout(format!(
                    "`{}` overlaps `{}`",
                    p.series, o.series
                )));
            }
        }
        Ok(())
    }

    /// ROI definitions matching the placements, labelled after their series.
    pub fn rois(&self, scenario: &Scenario) -> Result<Vec<RoiMask>> {
        self.placements
            .iter()
            .map(|p| {
                let s = scenario.series(&p.series).ok_or_else(|| {
                    Error::Layout(format!("scenario has no series `{}`", p.series))
                })?;
                Ok(RoiMask::rectangle(
                    p.series.clone(),
                    self.scene_id.clone(),
                    s.label,
                    (p.x0, p.y0),
                    (p.x1, p.y1),
                ))
            })
            .collect()
    }
}

/// Summary of a frame export.
#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFrames {
    pub frame_dir: PathBuf,
    pub rois_path: PathBuf,
    pub rois: Vec<RoiMask>,
    pub frames: usize,
}

fn texture(x: usize, y: usize, amplitude: f64) -> f64 {
    ((x * 7 + y * 13) % 10) as f64 / 9.0 * amplitude
}

/// Write one raw-count frame per sample to `<out>/<scene_id>/` and the ROI
/// file to `<out>/rois.json`.
///
/// ROI pixels carry the exact counts of their series value, so extraction
/// reproduces the series. Background pixels follow the wall series with a
/// fixed texture. Wash-out frames are uniform.
pub fn emit_frames(
    scenario: &Scenario,
    layout: &FrameLayout,
    model: &PlanckModel,
    scene: &RadiometricScene,
    out: &Path,
) -> Result<EmittedFrames> {
    layout.validate()?;
    scene.validate()?;
    let rois = layout.rois(scenario)?;
    let series: Vec<_> = layout
        .placements
        .iter()
        .map(|p| scenario.series(&p.series).expect("checked by rois()"))
        .collect();
    let counts_of = |kelvin: f64| -> Result<f64> { Ok(total_signal(model.counts(kelvin)?, scene)) };

    let frame_dir = out.join(&layout.scene_id);
    std::fs::create_dir_all(&frame_dir).map_err(|e| Error::io(&frame_dir, e))?;
    let (w, h) = (layout.width, layout.height);
    let n = scenario.wall.len();
    for i in 0..n {
        let t = scenario.wall.time_at(i);
        let background = scenario
            .wall
            .filled_values()
            .map(|v| v[i])
            .unwrap_or(scenario.spec.ambient_mean);
        let base = counts_of(background)?;
        let mut counts = vec![base; w * h];
        if !layout.washout.contains(&i) {
            for y in 0..h {
                for x in 0..w {
                    counts[y * w + x] = base + texture(x, y, layout.texture);
                }
            }
            for (p, s) in layout.placements.iter().zip(&series) {
                let Some(v) = s.get(i) else { continue };
                let c = counts_of(v)?;
                for y in p.y0..p.y1 {
                    for x in p.x0..p.x1 {
                        counts[y * w + x] = c;
                    }
                }
            }
        }
        let frame = ThermalFrame::new(t, layout.scene_id.clone(), w, h, counts)?;
        let path = frame_dir.join(frame_file_name(&t));
        std::fs::write(&path, format_frame(&frame)).map_err(|e| Error::io(&path, e))?;
    }
    let rois_path = out.join("rois.json");
    let json = serde_json::to_string_pretty(&rois).map_err(|e| Error::Format {
        path: rois_path.clone(),
        message: e.to_string(),
    })?;
    std::fs::write(&rois_path, json + "\n").map_err(|e| Error::io(&rois_path, e))?;
    Ok(EmittedFrames {
        frame_dir,
        rois_path,
        rois,
        frames: n,
    })
}
