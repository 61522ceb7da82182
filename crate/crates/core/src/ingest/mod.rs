//! Frame and ROI loading, frame screening and per-ROI series extraction.

mod frame;
mod quality;
mod roi;

pub use frame::{
    format_frame, frame_file_name, load_frames, parse_frame, read_frame_file, LoadedFrames,
    ThermalFrame,
};
pub use quality::{
    quality_filter, screen_frames, FrameHistory, QualityReason, QualityThresholds, QualityVerdict,
};
pub use roi::{load_rois, parse_rois, rasterize, RoiLabel, RoiMask};

use crate::error::{Error, Result};
use crate::radiometry::{object_signal, PlanckModel, RadiometricScene};
use crate::series::{RawSample, RawSeries};

/// Mean ROI temperature per accepted frame; rejected frames become gap markers.
///
/// `verdicts` must be aligned with `frames` (as produced by [`screen_frames`]).
pub fn extract_series(
    frames: &[ThermalFrame],
    verdicts: &[QualityVerdict],
    mask: &RoiMask,
    model: &PlanckModel,
    scene: &RadiometricScene,
) -> Result<RawSeries> {
    if frames.len() != verdicts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} frames but {} verdicts",
            frames.len(),
            verdicts.len()
        )));
    }
    let first = frames
        .first()
        .ok_or_else(|| Error::EmptyInput("no frames to extract from".into()))?;
    let (width, height) = (first.width, first.height);
    for f in frames {
        if f.width != width || f.height != height {
            return Err(Error::DimensionMismatch(format!(
                "frame at {} is {}x{}, expected {width}x{height}",
                f.timestamp, f.width, f.height
            )));
        }
        if f.scene_id != mask.scene_id {
            return Err(Error::DimensionMismatch(format!(
                "frame at {} belongs to scene `{}`, roi `{}` to scene `{}`",
                f.timestamp, f.scene_id, mask.name, mask.scene_id
            )));
        }
    }
    if !verdicts.iter().any(|v| v.accepted) {
        return Err(Error::EmptyInput(format!(
            "every frame was rejected for roi `{}`",
            mask.name
        )));
    }
    scene.validate()?;
    let pixels = rasterize(mask, width, height)?;

    let mut samples = Vec::with_capacity(frames.len());
    for (f, v) in frames.iter().zip(verdicts) {
        let value = if v.accepted {
            let mut acc = 0.0;
            for &p in &pixels {
                let obj = object_signal(f.counts[p], scene)?;
                acc += model.temperature(obj)?;
            }
            Some(acc / pixels.len() as f64)
        } else {
            None
        };
        samples.push(RawSample {
            timestamp: f.timestamp,
            value,
        });
    }
    Ok(RawSeries {
        roi_name: mask.name.clone(),
        label: mask.label,
        samples,
    })
}
