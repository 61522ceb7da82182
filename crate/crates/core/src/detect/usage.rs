use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Instant, TemperatureSeries};
use crate::spectral::{bandpass_clean, cwt, FrequencyBand, Morlet, PeriodGrid, Scalogram};
use crate::stats::median;

/// Shortest series accepted by [`detect_ac_usage`], seconds.
pub const MIN_USAGE_SPAN: f64 = 4.0 * 3600.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsageParams {
    /// In-band energy fraction above which a column counts as AC in use.
    pub threshold: f64,
    /// Runs of at most this many unflagged columns between flagged ones are filled.
    pub max_gap_columns: usize,
    pub omega0: f64,
    pub period_min: f64,
    pub period_max: f64,
    pub period_count: usize,
}

impl Default for UsageParams {
    fn default() -> Self {
        UsageParams {
            threshold: 0.35,
            max_gap_columns: 2,
            omega0: 6.0,
            period_min: 240.0,
            period_max: 15_360.0,
            period_count: 48,
        }
    }
}

impl UsageParams {
    pub fn wavelet(&self) -> Result<Morlet> {
        Morlet::new(self.omega0)
    }

    pub fn periods(&self) -> Result<PeriodGrid> {
        PeriodGrid::log_spaced(self.period_min, self.period_max, self.period_count)
    }
}

/// A span of AC operation, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UsageInterval {
    pub start: Instant,
    pub end: Instant,
}

impl UsageInterval {
    pub fn contains(&self, t: Instant) -> bool {
        self.start <= t && t < self.end
    }

    pub fn duration_seconds(&self) -> f64 {
        (self.end - self.start).num_milliseconds() as f64 / 1000.0
    }
}

/// Everything [`analyze_ac_usage`] derives on the way to the intervals.
#[derive(Debug, Clone)]
pub struct UsageDetection {
    pub intervals: Vec<UsageInterval>,
    /// Per-sample in-band energy fraction; 0 where the band reaches into the cone of influence.
    pub fractions: Vec<f64>,
    /// Per-sample flag: fraction above threshold and outside the cone of influence.
    pub flags: Vec<bool>,
    /// Per-sample in-band magnitude of the cleaned series.
    pub envelope: Vec<f64>,
    /// Scalogram of the series before cleaning.
    pub scalogram: Scalogram,
}

impl UsageDetection {
    pub fn in_use(&self, t: Instant) -> bool {
        self.intervals.iter().any(|iv| iv.contains(t))
    }
}

/// Fill false runs no longer than `max_gap` that sit between true values.
fn close_gaps(flags: &mut [bool], max_gap: usize) {
    let mut last_true: Option<usize> = None;
    for i in 0..flags.len() {
        if flags[i] {
            if let Some(j) = last_true {
                if i - j - 1 <= max_gap {
                    flags[j + 1..i].iter_mut().for_each(|f| *f = true);
                }
            }
            last_true = Some(i);
        }
    }
}

fn runs(flags: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if flags[i] {
            let s = i;
            while i < flags.len() && flags[i] {
                i += 1;
            }
            out.push((s, i - 1));
        } else {
            i += 1;
        }
    }
    out
}

/// Fractional column where `env` crosses `level` between columns `a` and `a + 1`.
fn crossing(env: &[f64], a: usize, level: f64) -> f64 {
    let (y0, y1) = (env[a], env[a + 1]);
    if y1 == y0 {
        a as f64 + 0.5
    } else {
        a as f64 + ((level - y0) / (y1 - y0)).clamp(0.0, 1.0)
    }
}

/// Move the edges of a run of flagged columns to where the in-band envelope
/// crosses half of its median level over the run. `lo..=hi` bounds the
/// search. Returns fractional column positions.
fn refine(env: &[f64], (s, e): (usize, usize), lo: usize, hi: usize) -> (f64, f64) {
    let level = 0.5 * median(&env[s..=e]).unwrap_or(0.0);
    let mut a = s;
    let start = if env[a] >= level {
        while a > lo && env[a - 1] >= level {
            a -= 1;
        }
        if a > lo {
            crossing(env, a - 1, level)
        } else {
            a as f64
        }
    } else {
        while a < e && env[a] < level {
            a += 1;
        }
        if a == 0 {
            0.0
        } else {
            crossing(env, a - 1, level)
        }
    };
    let mut b = e;
    let end = if env[b] >= level {
        while b < hi && env[b + 1] >= level {
            b += 1;
        }
        if b < hi {
            crossing(env, b, level)
        } else {
            b as f64
        }
    } else {
        while b > s && env[b] < level {
            b -= 1;
        }
        if b + 1 >= env.len() {
            b as f64
        } else {
            crossing(env, b, level)
        }
    };
    (start, end.max(start))
}

/// Band row with the largest median magnitude over columns `s..=e`.
fn ridge_row(magnitudes: &[Vec<f64>], band_rows: &[usize], (s, e): (usize, usize)) -> usize {
    let mut best = (band_rows[0], f64::NEG_INFINITY);
    for &r in band_rows {
        let m = median(&magnitudes[r][s..=e]).unwrap_or(0.0);
        if m > best.1 {
            best = (r, m);
        }
    }
    best.0
}

fn instant_at(series: &TemperatureSeries, column: f64) -> Instant {
    let ms = (column * series.step as f64 * 1000.0).round() as i64;
    series.start + chrono::Duration::milliseconds(ms)
}

/// Full usage analysis of one condenser series.
///
/// The series is band-pass cleaned and transformed; a column's fraction is
/// the in-band energy of the cleaned scalogram over the total energy of the
/// uncleaned scalogram. Only columns whose in-band periods all lie outside
/// the cone of influence can be flagged. Flagged columns are closed over short gaps, and
/// the edges of each run are placed where the magnitude of the strongest band
/// row crosses half of its median over the run.
pub fn analyze_ac_usage(
    series: &TemperatureSeries,
    band: &FrequencyBand,
    params: &UsageParams,
) -> Result<UsageDetection> {
    band.validate()?;
    if series.span_seconds() < MIN_USAGE_SPAN {
        return Err(Error::TooShort(format!(
            "`{}` spans {:.0} s, usage detection needs {MIN_USAGE_SPAN:.0} s",
            series.roi_name,
            series.span_seconds()
        )));
    }
    if !(params.threshold > 0.0 && params.threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "usage threshold must lie in (0, 1), got {}",
            params.threshold
        )));
    }
    let step = series.step as f64;
    let grid = params
        .periods()?
        .restricted_to(step, series.len() as f64 * step)
        .ok_or_else(|| {
            Error::TooShort(format!(
                "`{}` is too short for the period grid",
                series.roi_name
            ))
        })?;
    let wavelet = params.wavelet()?;
    let raw = cwt(series, &grid, &wavelet)?;
    let cleaned = cwt(&bandpass_clean(series, band)?, &grid, &wavelet)?;

    let rows: Vec<bool> = grid
        .periods()
        .iter()
        .map(|&p| band.contains_period(p))
        .collect();
    if !rows.iter().any(|&r| r) {
        return Err(Error::BandOutOfRange {
            low: band.low,
            high: band.high,
        });
    }
    let n = series.len();
    let mut fractions = vec![0.0; n];
    let mut valid = vec![false; n];
    let mut envelope = vec![0.0; n];
    for j in 0..n {
        let mut inside = 0.0;
        let mut total = 0.0;
        let mut band_visible = true;
        for (r, &in_band) in rows.iter().enumerate() {
            total += raw.magnitudes[r][j].powi(2);
            if in_band {
                band_visible &= !raw.coi[r][j];
                inside += cleaned.magnitudes[r][j].powi(2);
            }
        }
        valid[j] = band_visible;
        envelope[j] = inside.sqrt();
        fractions[j] = if band_visible && total > 0.0 {
            (inside / total).min(1.0)
        } else {
            0.0
        };
    }
    let flags: Vec<bool> = (0..n)
        .map(|j| valid[j] && fractions[j] > params.threshold)
        .collect();
    let mut closed = flags.clone();
    close_gaps(&mut closed, params.max_gap_columns);

    let lo = valid.iter().position(|&v| v).unwrap_or(0);
    let hi = valid.iter().rposition(|&v| v).unwrap_or(0);
    let band_rows: Vec<usize> = (0..rows.len()).filter(|&r| rows[r]).collect();
    let mut intervals: Vec<UsageInterval> = Vec::new();
    for run in runs(&closed) {
        let ridge = ridge_row(&cleaned.magnitudes, &band_rows, run);
        let (a, b) = refine(&cleaned.magnitudes[ridge], run, lo, hi);
        let iv = UsageInterval {
            start: instant_at(series, a),
            end: instant_at(series, b),
        };
        match intervals.last_mut() {
            Some(prev) if iv.start <= prev.end => prev.end = prev.end.max(iv.end),
            _ if iv.end > iv.start => intervals.push(iv),
            _ => {}
        }
    }
    Ok(UsageDetection {
        intervals,
        fractions,
        flags,
        envelope,
        scalogram: raw,
    })
}

/// Spans during which the condenser shows the duty-cycle signature.
pub fn detect_ac_usage(
    series: &TemperatureSeries,
    band: &FrequencyBand,
    params: &UsageParams,
) -> Result<Vec<UsageInterval>> {
    Ok(analyze_ac_usage(series, band, params)?.intervals)
}
