use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a region of interest looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoiLabel {
    Wall,
    Window,
    AcUnit,
    None,
}

impl RoiLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RoiLabel::Wall => "wall",
            RoiLabel::Window => "window",
            RoiLabel::AcUnit => "ac_unit",
            RoiLabel::None => "none",
        }
    }
}

/// A labelled polygon in pixel coordinates. Pixel `(i, j)` has its centre at
/// `(i + 0.5, j + 0.5)`; a frame of `w x h` pixels spans `[0, w] x [0, h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiMask {
    pub name: String,
    pub scene_id: String,
    pub label: RoiLabel,
    pub polygon: Vec<[f64; 2]>,
}

impl RoiMask {
    /// Axis-aligned rectangle covering pixels `x0..x1` by `y0..y1`.
    pub fn rectangle(
        name: impl Into<String>,
        scene_id: impl Into<String>,
        label: RoiLabel,
        (x0, y0): (usize, usize),
        (x1, y1): (usize, usize),
    ) -> RoiMask {
        let (x0, y0, x1, y1) = (x0 as f64, y0 as f64, x1 as f64, y1 as f64);
        RoiMask {
            name: name.into(),
            scene_id: scene_id.into(),
            label,
            polygon: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
        }
    }

    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.polygon.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "roi `{}` polygon has {} vertices, need at least 3",
                self.name,
                self.polygon.len()
            )));
        }
        for &[x, y] in &self.polygon {
            if !(x.is_finite() && y.is_finite())
                || x < 0.0
                || y < 0.0
                || x > width as f64
                || y > height as f64
            {
                return Err(Error::InvalidParameter(format!(
                    "roi `{}` vertex ({x}, {y}) lies outside the {width}x{height} frame",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Read the ROI definition file: a JSON array of `{name, scene_id, label, polygon}`.
pub fn load_rois(path: &Path) -> Result<Vec<RoiMask>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rois(&text, path)
}

pub fn parse_rois(text: &str, path: &Path) -> Result<Vec<RoiMask>> {
    let rois: Vec<RoiMask> =
        serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
    let mut names: Vec<&str> = rois.iter().map(|r| r.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::format(
            path,
            format!("duplicate roi name `{}`", w[0]),
        ));
    }
    Ok(rois)
}

/// Row-major indices of the pixels whose centres fall inside the polygon
/// under the even-odd rule.
///
/// A scanline per pixel row collects the edge crossings using the same
/// half-open convention as the classic crossing-number test, so the result
/// agrees with testing every centre individually.
pub fn rasterize(mask: &RoiMask, width: usize, height: usize) -> Result<Vec<usize>> {
    mask.validate(width, height)?;
    let poly = &mask.polygon;
    let n = poly.len();
    let mut pixels = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for row in 0..height {
        let py = row as f64 + 0.5;
        xs.clear();
        for i in 0..n {
            let [xi, yi] = poly[i];
            let [xj, yj] = poly[(i + n - 1) % n];
            if (yi > py) != (yj > py) {
                xs.push((xj - xi) * (py - yi) / (yj - yi) + xi);
            }
        }
        xs.sort_by(f64::total_cmp);
        // a centre is inside iff an odd number of crossings lie strictly to its right,
        // i.e. it sits in some [xs[2k], xs[2k+1])
        for span in xs.chunks_exact(2) {
            let (a, b) = (span[0], span[1]);
            let lo = ((a - 0.5).floor().max(0.0) as usize).saturating_sub(1);
            let hi = ((b - 0.5).ceil().max(0.0) as usize + 1).min(width);
            for col in lo..hi {
                let px = col as f64 + 0.5;
                if px >= a && px < b {
                    pixels.push(row * width + col);
                }
            }
        }
    }
    if pixels.is_empty() {
        return Err(Error::EmptyRoi(mask.name.clone()));
    }
    pixels.sort_unstable();
    pixels.dedup();
    Ok(pixels)
}
