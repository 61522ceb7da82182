use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{
    detrend_per_day, difference, interval_slopes, Instant, SlopeGrid, TemperatureSeries,
};
use crate::stats::{mad, MAD_NORMAL_SCALE};

/// Days need this many slope bins before their spread is trusted.
pub const MIN_USABLE_BINS: usize = 4;
/// Smallest MAD used to normalise scores, kelvin per hour.
pub const MAD_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SwitchOn,
    SwitchOff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEvent {
    pub instant: Instant,
    pub kind: EventKind,
    /// `|slope - median| / MAD` of the flagged bin.
    pub score: f64,
}

/// Events found on one calendar day.
#[derive(Debug, Clone, PartialEq)]
pub struct DaySchedule {
    pub date: NaiveDate,
    pub usable_bins: usize,
    pub switch_on: Option<ScheduleEvent>,
    pub switch_off: Option<ScheduleEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub grid: SlopeGrid,
    /// Only days with at least [`MIN_USABLE_BINS`] usable bins.
    pub days: Vec<DaySchedule>,
}

impl ScheduleReport {
    pub fn events(&self) -> Vec<ScheduleEvent> {
        let mut ev: Vec<ScheduleEvent> = self
            .days
            .iter()
            .flat_map(|d| d.switch_on.iter().chain(d.switch_off.iter()).cloned())
            .collect();
        ev.sort_by(|a, b| a.instant.cmp(&b.instant).then(a.kind.cmp(&b.kind)));
        ev
    }
}

fn day_events(grid: &SlopeGrid, day: usize, k_mad: f64) -> DaySchedule {
    let row = &grid.slopes[day];
    let usable: Vec<f64> = row.iter().flatten().copied().collect();
    let mut out = DaySchedule {
        date: grid.dates[day],
        usable_bins: usable.len(),
        switch_on: None,
        switch_off: None,
    };
    let Some((centre, raw_mad)) = mad(&usable) else {
        return out;
    };
    let spread = (raw_mad * MAD_NORMAL_SCALE).max(MAD_FLOOR);
    let mut prev_on = false;
    let mut prev_off = false;
    for (b, slope) in row.iter().enumerate() {
        let (is_on, is_off) = match slope {
            Some(s) => (*s < centre - k_mad * spread, *s > centre + k_mad * spread),
            None => (false, false),
        };
        if let Some(s) = slope {
            let score = (s - centre).abs() / spread;
            let event = |kind| ScheduleEvent {
                instant: grid.bin_start(day, b),
                kind,
                score,
            };
            if is_on && !prev_on && out.switch_on.as_ref().is_none_or(|e| score > e.score) {
                out.switch_on = Some(event(EventKind::SwitchOn));
            }
            if is_off && !prev_off && out.switch_off.as_ref().is_none_or(|e| score > e.score) {
                out.switch_off = Some(event(EventKind::SwitchOff));
            }
        }
        prev_on = is_on;
        prev_off = is_off;
    }
    out
}

/// Slope grid of the per-day detrended window minus wall difference.
pub fn schedule_slopes(
    window: &TemperatureSeries,
    wall: &TemperatureSeries,
    bin: u32,
) -> Result<SlopeGrid> {
    let diff = difference(window, wall)?;
    interval_slopes(&detrend_per_day(&diff), bin)
}

/// Like [`detect_schedule`], but days with too few usable bins are left out
/// of the report instead of failing the whole run.
pub fn analyze_schedule(
    window: &TemperatureSeries,
    wall: &TemperatureSeries,
    bin: u32,
    k_mad: f64,
) -> Result<ScheduleReport> {
    if !(k_mad.is_finite() && k_mad > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k_mad must be positive, got {k_mad}"
        )));
    }
    schedule_from_grid(schedule_slopes(window, wall, bin)?, k_mad)
}

/// Events read from an existing slope grid, skipping days with too few usable bins.
pub fn schedule_from_grid(grid: SlopeGrid, k_mad: f64) -> Result<ScheduleReport> {
    if !(k_mad.is_finite() && k_mad > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "k_mad must be positive, got {k_mad}"
        )));
    }
    let days = (0..grid.dates.len())
        .filter(|&d| grid.usable_bins(d) >= MIN_USABLE_BINS)
        .map(|d| day_events(&grid, d, k_mad))
        .collect();
    Ok(ScheduleReport { grid, days })
}

/// Switch-on and switch-off events of a centralized system, at most one of
/// each per day, in time order.
///
/// A bin is a switch-on candidate when its slope is more than `k_mad` scaled
/// MADs below the day's median slope and the bin before it was not, and a
/// switch-off candidate symmetrically above; the strongest candidate of each
/// kind is kept.
pub fn detect_schedule(
    window: &TemperatureSeries,
    wall: &TemperatureSeries,
    bin: u32,
    k_mad: f64,
) -> Result<Vec<ScheduleEvent>> {
    let report = analyze_schedule(window, wall, bin, k_mad)?;
    if let Some(d) =
        (0..report.grid.dates.len()).find(|&d| report.grid.usable_bins(d) < MIN_USABLE_BINS)
    {
        return Err(Error::Degenerate(format!(
            "{} has {} usable slope bins, need {MIN_USABLE_BINS}",
            report.grid.dates[d],
            report.grid.usable_bins(d)
        )));
    }
    Ok(report.events())
}
