//! Statistical screening of frames that are unusable for analysis: rain or
//! fog washout, saturated captures and frames taken mid-rotation.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::ThermalFrame;
use crate::series::Instant;
use crate::stats::{median, quantile_sorted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityReason {
    Ok,
    LowContrast,
    Saturated,
    OutOfFamily,
}

impl QualityReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            QualityReason::Ok => "ok",
            QualityReason::LowContrast => "low_contrast",
            QualityReason::Saturated => "saturated",
            QualityReason::OutOfFamily => "out_of_family",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityVerdict {
    pub timestamp: Instant,
    pub scene_id: String,
    pub accepted: bool,
    pub reason: QualityReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityThresholds {
    /// Minimum interquartile range of the counts.
    pub iqr_floor: f64,
    /// Counts at or below this value are saturated low.
    pub range_min: f64,
    /// Counts at or above this value are saturated high.
    pub range_max: f64,
    /// Largest tolerated fraction of saturated pixels.
    pub saturated_fraction: f64,
    /// Rejection distance of a frame mean from the history, in MADs.
    pub out_of_family_k: f64,
    /// History length below which the out-of-family test is skipped.
    pub min_history: usize,
    /// Number of accepted frame means kept in the history.
    pub history_len: usize,
    /// Lower bound on the history MAD, in counts.
    pub mad_floor: f64,
    /// Consecutive out-of-family rejections after which the history restarts.
    pub max_consecutive_rejects: usize,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        QualityThresholds {
            iqr_floor: 10.0,
            range_min: 0.0,
            range_max: 65535.0,
            saturated_fraction: 0.01,
            out_of_family_k: 8.0,
            min_history: 5,
            history_len: 12,
            mad_floor: 50.0,
            max_consecutive_rejects: 12,
        }
    }
}

/// Rolling record of recently accepted frame means.
#[derive(Debug, Clone, Default)]
pub struct FrameHistory {
    means: VecDeque<f64>,
    capacity: usize,
}

impl FrameHistory {
    pub fn new(capacity: usize) -> Self {
        FrameHistory {
            means: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
        }
    }

    pub fn push(&mut self, frame: &ThermalFrame) {
        self.push_mean(frame.mean());
    }

    pub fn push_mean(&mut self, mean: f64) {
        if self.means.len() == self.capacity {
            self.means.pop_front();
        }
        self.means.push_back(mean);
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn clear(&mut self) {
        self.means.clear();
    }

    pub fn means(&self) -> Vec<f64> {
        self.means.iter().copied().collect()
    }
}

/// Judge one frame against fixed thresholds and the recent history.
pub fn quality_filter(
    frame: &ThermalFrame,
    history: &FrameHistory,
    t: &QualityThresholds,
) -> QualityVerdict {
    let verdict = |reason: QualityReason| QualityVerdict {
        timestamp: frame.timestamp,
        scene_id: frame.scene_id.clone(),
        accepted: reason == QualityReason::Ok,
        reason,
    };

    let mut sorted = frame.counts.clone();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    if iqr < t.iqr_floor {
        return verdict(QualityReason::LowContrast);
    }

    let saturated = frame
        .counts
        .iter()
        .filter(|&&c| c <= t.range_min || c >= t.range_max)
        .count();
    if saturated as f64 > t.saturated_fraction * frame.counts.len() as f64 {
        return verdict(QualityReason::Saturated);
    }

    if history.len() >= t.min_history.max(1) {
        let means = history.means();
        let centre = median(&means).unwrap_or(0.0);
        let dev: Vec<f64> = means.iter().map(|m| (m - centre).abs()).collect();
        let mad = median(&dev).unwrap_or(0.0).max(t.mad_floor);
        if (frame.mean() - centre).abs() > t.out_of_family_k * mad {
            return verdict(QualityReason::OutOfFamily);
        }
    }
    verdict(QualityReason::Ok)
}

/// Screen an ordered frame sequence, feeding accepted frames into the history.
///
/// After `max_consecutive_rejects` out-of-family rejections in a row the
/// history is cleared so that a genuine level shift cannot lock the filter.
pub fn screen_frames(frames: &[ThermalFrame], t: &QualityThresholds) -> Vec<QualityVerdict> {
    let mut history = FrameHistory::new(t.history_len);
    let mut streak = 0usize;
    frames
        .iter()
        .map(|frame| {
            let v = quality_filter(frame, &history, t);
            if v.accepted {
                history.push(frame);
                streak = 0;
            } else if v.reason == QualityReason::OutOfFamily {
                streak += 1;
                if t.max_consecutive_rejects > 0 && streak >= t.max_consecutive_rejects {
                    history.clear();
                    streak = 0;
                }
            }
            v
        })
        .collect()
}
