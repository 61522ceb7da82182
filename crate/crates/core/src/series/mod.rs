//! Uniform, gap-annotated temperature series and the time-domain operations
//! applied to them before detection.

mod io;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, NaiveTime, TimeZone};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::RoiLabel;
use crate::stats::line_fit;

pub(crate) use io::format_instant as io_format_instant;
pub use io::{read_raw_series, read_series, write_raw_series, write_series, write_slope_grid};

/// Wall-clock instant carrying the dataset's fixed UTC offset.
pub type Instant = DateTime<FixedOffset>;

const SECONDS_PER_DAY: i64 = 86_400;

/// One ROI sample per frame. `value` is `None` for a rejected frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub timestamp: Instant,
    pub value: Option<f64>,
}

/// Per-frame ROI temperatures as extracted, on the (irregular) frame clock.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub roi_name: String,
    pub label: RoiLabel,
    pub samples: Vec<RawSample>,
}

impl RawSeries {
    pub fn valid_count(&self) -> usize {
        self.samples.iter().filter(|s| s.value.is_some()).count()
    }

    pub fn gap_count(&self) -> usize {
        self.samples.len() - self.valid_count()
    }
}

/// Temperatures in kelvin on a uniform grid `start + i * step`.
///
/// Missing positions hold `NaN` and are flagged in `missing`; use
/// [`TemperatureSeries::get`] to read values. Equality ignores the
/// placeholder stored at missing positions.
#[derive(Debug, Clone)]
pub struct TemperatureSeries {
    pub roi_name: String,
    pub label: RoiLabel,
    pub start: Instant,
    pub step: u32,
    values: Vec<f64>,
    missing: Vec<bool>,
}

impl PartialEq for TemperatureSeries {
    fn eq(&self, other: &Self) -> bool {
        self.roi_name == other.roi_name
            && self.label == other.label
            && self.start == other.start
            && self.step == other.step
            && self.missing == other.missing
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.missing)
                .all(|((a, b), &m)| m || a == b)
    }
}

impl TemperatureSeries {
    pub fn new(
        roi_name: impl Into<String>,
        label: RoiLabel,
        start: Instant,
        step: u32,
        values: Vec<f64>,
        missing: Vec<bool>,
    ) -> Result<Self> {
        if step == 0 {
            return Err(Error::InvalidParameter(
                "series step must be positive".into(),
            ));
        }
        if values.len() != missing.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values but {} missing flags",
                values.len(),
                missing.len()
            )));
        }
        let values = values
            .into_iter()
            .zip(&missing)
            .map(|(v, &m)| if m || !v.is_finite() { f64::NAN } else { v })
            .collect::<Vec<_>>();
        let missing = values.iter().map(|v| v.is_nan()).collect();
        Ok(TemperatureSeries {
            roi_name: roi_name.into(),
            label,
            start,
            step,
            values,
            missing,
        })
    }

    /// Series whose only gaps are its non-finite values.
    pub fn from_values(
        roi_name: impl Into<String>,
        label: RoiLabel,
        start: Instant,
        step: u32,
        values: Vec<f64>,
    ) -> Result<Self> {
        let missing = vec![false; values.len()];
        Self::new(roi_name, label, start, step, values, missing)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        if self.missing[i] {
            None
        } else {
            Some(self.values[i])
        }
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.missing[i]
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    /// Raw storage including `NaN` placeholders.
    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn time_at(&self, i: usize) -> Instant {
        self.start + Duration::seconds(i as i64 * self.step as i64)
    }

    pub fn end(&self) -> Instant {
        self.time_at(self.len())
    }

    pub fn span_seconds(&self) -> f64 {
        self.len() as f64 * self.step as f64
    }

    /// `(index, value)` pairs for the non-missing samples.
    pub fn present(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.missing[*i])
            .map(|(i, &v)| (i, v))
    }

    /// Same grid, new values. `NaN` entries become missing.
    pub fn with_values(&self, values: Vec<f64>) -> TemperatureSeries {
        assert_eq!(values.len(), self.len(), "value count must match the grid");
        let missing = values.iter().map(|v| !v.is_finite()).collect();
        TemperatureSeries {
            roi_name: self.roi_name.clone(),
            label: self.label,
            start: self.start,
            step: self.step,
            values: values
                .into_iter()
                .map(|v| if v.is_finite() { v } else { f64::NAN })
                .collect(),
            missing,
        }
    }

    /// Sub-series covering sample indices `lo..hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> TemperatureSeries {
        TemperatureSeries {
            roi_name: self.roi_name.clone(),
            label: self.label,
            start: self.time_at(lo),
            step: self.step,
            values: self.values[lo..hi].to_vec(),
            missing: self.missing[lo..hi].to_vec(),
        }
    }

    pub fn same_grid(&self, other: &TemperatureSeries) -> bool {
        self.start == other.start && self.step == other.step && self.len() == other.len()
    }

    /// Seconds since local midnight of sample `i`.
    pub fn second_of_day(&self, i: usize) -> i64 {
        let t = self.time_at(i);
        let naive = t.naive_local();
        (naive - naive.date().and_hms_opt(0, 0, 0).unwrap()).num_seconds()
    }

    pub fn date_at(&self, i: usize) -> NaiveDate {
        self.time_at(i).date_naive()
    }

    /// Linear interpolation across interior gaps, nearest value at the edges.
    /// `None` when the series has no present sample.
    pub fn filled_values(&self) -> Option<Vec<f64>> {
        let present: Vec<(usize, f64)> = self.present().collect();
        let (&(first_i, first_v), &(last_i, last_v)) = (present.first()?, present.last()?);
        let mut out = self.values.clone();
        for v in out.iter_mut().take(first_i) {
            *v = first_v;
        }
        for v in out.iter_mut().skip(last_i + 1) {
            *v = last_v;
        }
        for w in present.windows(2) {
            let (i0, v0) = w[0];
            let (i1, v1) = w[1];
            for (k, slot) in out.iter_mut().enumerate().take(i1).skip(i0 + 1) {
                let frac = (k - i0) as f64 / (i1 - i0) as f64;
                *slot = v0 + (v1 - v0) * frac;
            }
        }
        Some(out)
    }
}

fn seconds_between(later: &Instant, earlier: &Instant) -> f64 {
    (*later - *earlier).num_milliseconds() as f64 / 1000.0
}

/// Uniform resampling by linear interpolation between neighbouring valid samples.
///
/// The grid is aligned to multiples of `step` on the local clock and spans the
/// first to the last valid sample. A grid point farther than
/// `max_gap_fill * step` from every valid sample is missing.
pub fn resample_uniform(
    raw: &RawSeries,
    step: u32,
    max_gap_fill: u32,
) -> Result<TemperatureSeries> {
    if step == 0 {
        return Err(Error::InvalidParameter(
            "resampling step must be positive".into(),
        ));
    }
    let mut valid: Vec<(Instant, f64)> = raw
        .samples
        .iter()
        .filter_map(|s| s.value.map(|v| (s.timestamp, v)))
        .collect();
    valid.sort_by_key(|p| p.0);
    valid.dedup_by_key(|p| p.0);
    if valid.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "series `{}` has {} valid samples, need at least 2",
            raw.roi_name,
            valid.len()
        )));
    }
    let first = valid[0].0;
    let last = valid[valid.len() - 1].0;
    let start = align_up(first, step);
    let origin = valid[0].0;
    let times: Vec<f64> = valid
        .iter()
        .map(|(t, _)| seconds_between(t, &origin))
        .collect();
    let reach = max_gap_fill as f64 * step as f64;

    let mut values = Vec::new();
    let mut missing = Vec::new();
    let mut k = 0usize;
    let mut cursor = 0usize;
    loop {
        let t = start + Duration::seconds(k as i64 * step as i64);
        if t > last {
            break;
        }
        let x = seconds_between(&t, &origin);
        while cursor + 1 < times.len() && times[cursor + 1] <= x {
            cursor += 1;
        }
        let (t0, v0) = (times[cursor], valid[cursor].1);
        let value = if x == t0 || cursor + 1 == times.len() {
            Some(v0).filter(|_| x == t0)
        } else {
            let (t1, v1) = (times[cursor + 1], valid[cursor + 1].1);
            let nearest = (x - t0).min(t1 - x);
            if nearest > reach {
                None
            } else {
                Some(v0 + (v1 - v0) * (x - t0) / (t1 - t0))
            }
        };
        values.push(value.unwrap_or(f64::NAN));
        missing.push(value.is_none());
        k += 1;
    }
    TemperatureSeries::new(
        raw.roi_name.clone(),
        raw.label,
        start,
        step,
        values,
        missing,
    )
}

fn align_up(t: Instant, step: u32) -> Instant {
    let nanos = t.timestamp_subsec_nanos() as i64;
    let rem = t
        .naive_local()
        .and_utc()
        .timestamp()
        .rem_euclid(step as i64);
    if rem == 0 && nanos == 0 {
        return t;
    }
    t - Duration::nanoseconds(nanos) - Duration::seconds(rem) + Duration::seconds(step as i64)
}

/// Subtract the ordinary least-squares line fitted over the present samples.
pub fn detrend(series: &TemperatureSeries) -> Result<TemperatureSeries> {
    let pts: Vec<(f64, f64)> = series
        .present()
        .map(|(i, v)| (i as f64 * series.step as f64, v))
        .collect();
    let fit = line_fit(&pts).ok_or_else(|| {
        Error::Degenerate(format!(
            "series `{}` has {} present samples, need at least 2 to detrend",
            series.roi_name,
            pts.len()
        ))
    })?;
    let out = (0..series.len())
        .map(|i| match series.get(i) {
            Some(v) => v - fit.eval(i as f64 * series.step as f64),
            None => f64::NAN,
        })
        .collect();
    Ok(series.with_values(out))
}

/// Detrend each local calendar day on its own. Days with fewer than two
/// present samples come out entirely missing.
pub fn detrend_per_day(series: &TemperatureSeries) -> TemperatureSeries {
    let mut out = vec![f64::NAN; series.len()];
    for (lo, hi) in day_ranges(series) {
        let day = series.slice(lo, hi);
        if let Ok(d) = detrend(&day) {
            out[lo..hi].copy_from_slice(d.raw_values());
        }
    }
    series.with_values(out)
}

/// Whether a least-squares line is removed per local day or once over the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetrendScope {
    #[default]
    PerDay,
    Whole,
}

pub fn detrend_scoped(
    series: &TemperatureSeries,
    scope: DetrendScope,
) -> Result<TemperatureSeries> {
    match scope {
        DetrendScope::PerDay => Ok(detrend_per_day(series)),
        DetrendScope::Whole => detrend(series),
    }
}

/// Index ranges `[lo, hi)` of consecutive samples sharing a local date.
pub fn day_ranges(series: &TemperatureSeries) -> Vec<(usize, usize)> {
    let mut ranges = Vec::new();
    let mut lo = 0;
    for i in 1..=series.len() {
        if i == series.len() || series.date_at(i) != series.date_at(lo) {
            ranges.push((lo, i));
            lo = i;
        }
    }
    ranges
}

/// Centred moving mean over `window` seconds.
///
/// The window covers `w = round(window / step)` sample spacings. Odd `w` uses
/// `w` equally weighted samples; even `w` spans `w + 1` samples with the two
/// end samples at half weight, so the kernel stays centred. Positions outside
/// the series count as missing; a point is missing when more than half of its
/// window weight is missing.
pub fn moving_average(series: &TemperatureSeries, window: u32) -> Result<TemperatureSeries> {
    if window < series.step {
        return Err(Error::InvalidParameter(format!(
            "moving-average window {window} s is shorter than the step {} s",
            series.step
        )));
    }
    let kernel = moving_average_kernel(window, series.step);
    let half = (kernel.len() / 2) as isize;
    let total: f64 = kernel.iter().sum();
    let n = series.len() as isize;
    let out = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            let mut weight = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let j = i + k as isize - half;
                if j < 0 || j >= n {
                    continue;
                }
                if let Some(v) = series.get(j as usize) {
                    acc += w * v;
                    weight += w;
                }
            }
            if total - weight > 0.5 * total || weight == 0.0 {
                f64::NAN
            } else {
                acc / weight
            }
        })
        .collect();
    Ok(series.with_values(out))
}

pub(crate) fn moving_average_kernel(window: u32, step: u32) -> Vec<f64> {
    let w = ((window as f64 / step as f64).round() as usize).max(1);
    if w % 2 == 1 {
        vec![1.0; w]
    } else {
        let mut k = vec![1.0; w + 1];
        k[0] = 0.5;
        k[w] = 0.5;
        k
    }
}

/// Elementwise `a - b`.
pub fn difference(a: &TemperatureSeries, b: &TemperatureSeries) -> Result<TemperatureSeries> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch(format!(
            "`{}` ({} samples from {} every {} s) vs `{}` ({} samples from {} every {} s)",
            a.roi_name,
            a.len(),
            a.start,
            a.step,
            b.roi_name,
            b.len(),
            b.start,
            b.step
        )));
    }
    let out = (0..a.len())
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x - y,
            _ => f64::NAN,
        })
        .collect();
    let mut d = a.with_values(out);
    d.roi_name = format!("{}-{}", a.roi_name, b.roi_name);
    Ok(d)
}

/// Day-by-bin grid of least-squares slopes in kelvin per hour.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeGrid {
    pub dates: Vec<NaiveDate>,
    pub bin_seconds: u32,
    pub bins: Vec<NaiveTime>,
    /// `slopes[day][bin]`; `None` for bins with fewer than two samples.
    pub slopes: Vec<Vec<Option<f64>>>,
    pub offset: FixedOffset,
}

impl SlopeGrid {
    pub fn bin_start(&self, day: usize, bin: usize) -> Instant {
        let naive = self.dates[day].and_time(self.bins[bin]);
        self.offset.from_local_datetime(&naive).unwrap()
    }

    pub fn usable_bins(&self, day: usize) -> usize {
        self.slopes[day].iter().filter(|s| s.is_some()).count()
    }
}

/// Least-squares slope of each `bin`-second interval of each local day.
pub fn interval_slopes(series: &TemperatureSeries, bin: u32) -> Result<SlopeGrid> {
    if bin == 0 || !bin.is_multiple_of(series.step) {
        return Err(Error::InvalidParameter(format!(
            "bin {bin} s must be a positive multiple of the step {} s",
            series.step
        )));
    }
    if SECONDS_PER_DAY % bin as i64 != 0 {
        return Err(Error::InvalidParameter(format!(
            "bin {bin} s must divide 24 h"
        )));
    }
    if series.span_seconds() < bin as f64 {
        return Err(Error::TooShort(format!(
            "series spans {} s, less than one {bin} s bin",
            series.span_seconds()
        )));
    }
    let n_bins = (SECONDS_PER_DAY / bin as i64) as usize;
    let first = series.date_at(0);
    let last = series.date_at(series.len() - 1);
    let dates: Vec<NaiveDate> = first.iter_days().take_while(|d| *d <= last).collect();
    let bins: Vec<NaiveTime> = (0..n_bins)
        .map(|b| NaiveTime::from_num_seconds_from_midnight_opt((b as u32) * bin, 0).unwrap())
        .collect();

    let mut points: Vec<Vec<Vec<(f64, f64)>>> = vec![vec![Vec::new(); n_bins]; dates.len()];
    for (i, v) in series.present() {
        let day = (series.date_at(i) - first).num_days() as usize;
        let sod = series.second_of_day(i);
        let b = (sod / bin as i64) as usize;
        points[day][b].push((sod as f64 / 3600.0, v));
    }
    let slopes = points
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|pts| line_fit(&pts).map(|f| f.slope))
                .collect()
        })
        .collect();
    Ok(SlopeGrid {
        dates,
        bin_seconds: bin,
        bins,
        slopes,
        offset: *series.start.offset(),
    })
}

/// Local clock times bounding the nightly analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NightWindow {
    #[serde(with = "hhmm")]
    pub start: NaiveTime,
    #[serde(with = "hhmm")]
    pub end: NaiveTime,
}

impl Default for NightWindow {
    fn default() -> Self {
        NightWindow {
            start: NaiveTime::from_hms_opt(20, 0, 0).unwrap(),
            end: NaiveTime::from_hms_opt(10, 0, 0).unwrap(),
        }
    }
}

impl NightWindow {
    pub fn new(start: &str, end: &str) -> Result<Self> {
        let parse = |s: &str| hhmm::parse(s).map_err(Error::InvalidParameter);
        Ok(NightWindow {
            start: parse(start)?,
            end: parse(end)?,
        })
    }

    /// Nominal bounds of the night that begins on `date`.
    pub fn bounds(&self, date: NaiveDate, offset: FixedOffset) -> (Instant, Instant) {
        let start = offset
            .from_local_datetime(&date.and_time(self.start))
            .unwrap();
        let end_date = if self.end <= self.start {
            date.succ_opt().unwrap()
        } else {
            date
        };
        let end = offset
            .from_local_datetime(&end_date.and_time(self.end))
            .unwrap();
        (start, end)
    }

    pub fn contains_time(&self, t: NaiveTime) -> bool {
        if self.end <= self.start {
            t >= self.start || t < self.end
        } else {
            t >= self.start && t < self.end
        }
    }
}

/// One night of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct NightSegment {
    /// Local date on which the night begins.
    pub date: NaiveDate,
    pub nominal_start: Instant,
    pub nominal_end: Instant,
    /// Index range of the segment in the source series.
    pub first_index: usize,
    pub end_index: usize,
    /// The series does not cover the whole nominal window.
    pub partial: bool,
    /// Every sample in the segment is missing.
    pub empty: bool,
    pub series: TemperatureSeries,
}

/// Split a series into nights `[start, next-day end)`.
pub fn night_window(series: &TemperatureSeries, window: &NightWindow) -> Vec<NightSegment> {
    if series.is_empty() {
        return Vec::new();
    }
    let offset = *series.start.offset();
    let first = series.date_at(0).pred_opt().unwrap();
    let last = series.date_at(series.len() - 1);
    let step = series.step as i64;
    let n = series.len() as i64;
    let index_at_or_after = |t: Instant| -> i64 {
        let secs = (t - series.start).num_seconds();
        secs.div_euclid(step) + i64::from(secs.rem_euclid(step) != 0)
    };
    first
        .iter_days()
        .take_while(|d| *d <= last)
        .filter_map(|date| {
            let (ns, ne) = window.bounds(date, offset);
            let lo = index_at_or_after(ns).clamp(0, n) as usize;
            let hi = index_at_or_after(ne).clamp(0, n) as usize;
            if lo >= hi {
                return None;
            }
            let seg = series.slice(lo, hi);
            let partial = ns < series.start || ne > series.end();
            let empty = seg.missing_count() == seg.len();
            Some(NightSegment {
                date,
                nominal_start: ns,
                nominal_end: ne,
                first_index: lo,
                end_index: hi,
                partial,
                empty,
                series: seg,
            })
        })
        .collect()
}

pub(crate) mod hhmm {
    use chrono::NaiveTime;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &NaiveTime, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.format("%H:%M").to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveTime, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }

    pub fn parse(s: &str) -> Result<NaiveTime, String> {
        NaiveTime::parse_from_str(s, "%H:%M")
            .or_else(|_| NaiveTime::parse_from_str(s, "%H:%M:%S"))
            .map_err(|e| format!("invalid clock time `{s}`: {e}"))
    }
}
