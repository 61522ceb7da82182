//! Operational findings from processed series: centralized HVAC schedules,
//! window AC usage intervals, on/off states, cycling fractions and accuracy
//! against reference states.

mod report;
mod schedule;
mod states;
mod usage;

use chrono::{NaiveDate, Timelike};
use serde::{Deserialize, Serialize};

pub use report::{write_accuracy_csv, write_cycling_csv, write_schedule_csv, write_usage_csv};
pub use schedule::{
    analyze_schedule, detect_schedule, schedule_from_grid, schedule_slopes, DaySchedule, EventKind,
    ScheduleEvent, ScheduleReport, MAD_FLOOR, MIN_USABLE_BINS,
};
pub use states::{
    kmeans2_split, kmeans2_states, states_from_intervals, truth_states_from_indoor, Polarity,
    Split, State, StateSeries, MIN_STATE_SAMPLES,
};
pub use usage::{
    analyze_ac_usage, detect_ac_usage, UsageDetection, UsageInterval, UsageParams, MIN_USAGE_SPAN,
};

use crate::error::{Error, Result};
use crate::series::{night_window, NightSegment, NightWindow, TemperatureSeries};
use crate::spectral::FrequencyBand;

/// Cycling summary of one night.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NightCycling {
    pub date: NaiveDate,
    pub cycling_fraction: f64,
    /// Non-missing samples in the night.
    pub samples_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclingReport {
    pub ac_name: String,
    pub nights: Vec<NightCycling>,
    /// Mean fraction over nights with `samples_used > 0`; 0 when there are none.
    pub overall_mean_fraction: f64,
}

impl CyclingReport {
    pub fn new(ac_name: impl Into<String>, nights: Vec<NightCycling>) -> Self {
        let used: Vec<f64> = nights
            .iter()
            .filter(|n| n.samples_used > 0)
            .map(|n| n.cycling_fraction)
            .collect();
        let overall_mean_fraction = if used.is_empty() {
            0.0
        } else {
            used.iter().sum::<f64>() / used.len() as f64
        };
        CyclingReport {
            ac_name: ac_name.into(),
            nights,
            overall_mean_fraction,
        }
    }

    pub fn usable_nights(&self) -> usize {
        self.nights.iter().filter(|n| n.samples_used > 0).count()
    }
}

/// Fraction of a night's samples spent cycling.
///
/// A sample cycles when it lies inside a usage interval and either its state
/// differs from a known state within two samples on either side, or its
/// in-band energy flag is set. `states` must be aligned with `night.series`
/// and `usage` with the series the night was cut from.
pub fn cycling_fraction(
    states: &StateSeries,
    usage: &UsageDetection,
    night: &NightSegment,
) -> NightCycling {
    let seg = &night.series;
    let total = seg.len() - seg.missing_count();
    let mut cycling = 0usize;
    for k in 0..seg.len().min(states.len()) {
        if seg.is_missing(k) || !usage.in_use(seg.time_at(k)) {
            continue;
        }
        let flagged = usage
            .flags
            .get(night.first_index + k)
            .copied()
            .unwrap_or(false);
        let here = states.states[k];
        let alternates = here != State::Unknown
            && (k.saturating_sub(2)..=(k + 2).min(states.len() - 1))
                .any(|j| j != k && states.states[j] != State::Unknown && states.states[j] != here);
        if flagged || alternates {
            cycling += 1;
        }
    }
    NightCycling {
        date: night.date,
        cycling_fraction: if total == 0 {
            0.0
        } else {
            cycling as f64 / total as f64
        },
        samples_used: total,
    }
}

/// Condenser states for a night; unknown everywhere when the night has too
/// few samples for a split.
pub fn night_states(night: &NightSegment) -> StateSeries {
    kmeans2_states(&night.series).unwrap_or_else(|_| StateSeries::unknown_like(&night.series))
}

/// Usage detection over a whole condenser series followed by per-night cycling.
pub fn ac_cycling_report(
    series: &TemperatureSeries,
    band: &FrequencyBand,
    params: &UsageParams,
    window: &NightWindow,
) -> Result<(CyclingReport, UsageDetection)> {
    let usage = analyze_ac_usage(series, band, params)?;
    let nights = night_window(series, window)
        .iter()
        .map(|night| cycling_fraction(&night_states(night), &usage, night))
        .collect();
    Ok((CyclingReport::new(series.roi_name.clone(), nights), usage))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourAccuracy {
    pub hour: u32,
    pub accuracy: f64,
    pub n: usize,
}

/// Agreement with reference states per local hour of day. Hours without any
/// comparable sample are omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AccuracyProfile {
    pub rows: Vec<HourAccuracy>,
}

impl AccuracyProfile {
    pub fn hour(&self, hour: u32) -> Option<&HourAccuracy> {
        self.rows.iter().find(|r| r.hour == hour)
    }

    /// Unweighted mean accuracy over the listed hours that have rows.
    pub fn mean_over(&self, hours: impl IntoIterator<Item = u32>) -> Option<f64> {
        let acc: Vec<f64> = hours
            .into_iter()
            .filter_map(|h| self.hour(h))
            .map(|r| r.accuracy)
            .collect();
        (!acc.is_empty()).then(|| acc.iter().sum::<f64>() / acc.len() as f64)
    }

    /// Merge several profiles, pooling the counts per hour.
    pub fn pooled(profiles: &[AccuracyProfile]) -> AccuracyProfile {
        let mut hits = [0.0f64; 24];
        let mut n = [0usize; 24];
        for p in profiles {
            for r in &p.rows {
                hits[r.hour as usize] += r.accuracy * r.n as f64;
                n[r.hour as usize] += r.n;
            }
        }
        AccuracyProfile {
            rows: (0..24)
                .filter(|&h| n[h] > 0)
                .map(|h| HourAccuracy {
                    hour: h as u32,
                    accuracy: hits[h] / n[h] as f64,
                    n: n[h],
                })
                .collect(),
        }
    }
}

/// Per local hour, the share of samples known in both series where the states agree.
pub fn accuracy_by_hour(predicted: &StateSeries, truth: &StateSeries) -> Result<AccuracyProfile> {
    if !predicted.same_grid(truth) {
        return Err(Error::GridMismatch(format!(
            "predicted states ({} from {}, step {}) and reference ({} from {}, step {}) differ",
            predicted.len(),
            predicted.start,
            predicted.step,
            truth.len(),
            truth.start,
            truth.step
        )));
    }
    let mut hits = [0usize; 24];
    let mut n = [0usize; 24];
    for (i, (p, t)) in predicted.states.iter().zip(&truth.states).enumerate() {
        if *p == State::Unknown || *t == State::Unknown {
            continue;
        }
        let h = predicted.time_at(i).hour() as usize;
        n[h] += 1;
        if p == t {
            hits[h] += 1;
        }
    }
    Ok(AccuracyProfile {
        rows: (0..24)
            .filter(|&h| n[h] > 0)
            .map(|h| HourAccuracy {
                hour: h as u32,
                accuracy: hits[h] as f64 / n[h] as f64,
                n: n[h],
            })
            .collect(),
    })
}
