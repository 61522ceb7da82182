use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Instant, TemperatureSeries};

/// Samples required for a two-cluster split.
pub const MIN_STATE_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    On,
    Off,
    Unknown,
}

/// Which cluster of a two-way split means "on".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Condenser surfaces: hotter while the compressor runs.
    HotIsOn,
    /// Room air: colder while the AC runs.
    ColdIsOn,
}

/// Per-sample on/off states on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    pub start: Instant,
    pub step: u32,
    pub states: Vec<State>,
    /// Decision boundary in kelvin.
    pub boundary: f64,
    /// Set when every value was equal and no split exists.
    pub degenerate: bool,
}

impl StateSeries {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time_at(&self, i: usize) -> Instant {
        self.start + chrono::Duration::seconds(i as i64 * self.step as i64)
    }

    pub fn same_grid(&self, other: &StateSeries) -> bool {
        self.start == other.start && self.step == other.step && self.len() == other.len()
    }

    /// All-unknown states on the grid of `series`.
    pub fn unknown_like(series: &TemperatureSeries) -> StateSeries {
        StateSeries {
            start: series.start,
            step: series.step,
            states: vec![State::Unknown; series.len()],
            boundary: f64::NAN,
            degenerate: true,
        }
    }
}

/// Optimal two-cluster split of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    /// Midpoint between the largest low value and the smallest high value.
    pub boundary: f64,
    pub low_mean: f64,
    pub high_mean: f64,
    /// Within-cluster sum of squares.
    pub wcss: f64,
    pub low_count: usize,
}

/// Exact univariate 2-means.
///
/// Every split of the sorted sample is scored from prefix sums of the
/// mean-centred values; the first split with the smallest within-cluster sum
/// of squares wins. Returns `None` for fewer than two distinct values.
pub fn kmeans2_split(values: &[f64]) -> Option<Split> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n < 2 || v[0] == v[n - 1] {
        return None;
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = v.iter().map(|x| x - mean).collect();
    let total_sq: f64 = c.iter().map(|x| x * x).sum();
    let total: f64 = c.iter().sum();

    let mut best: Option<(usize, f64)> = None;
    let mut left = 0.0;
    for i in 1..n {
        left += c[i - 1];
        if v[i - 1] == v[i] {
            continue;
        }
        let right = total - left;
        let wcss = total_sq - left * left / i as f64 - right * right / (n - i) as f64;
        if best.is_none_or(|(_, w)| wcss < w) {
            best = Some((i, wcss));
        }
    }
    let (i, wcss) = best?;
    let low_mean = v[..i].iter().sum::<f64>() / i as f64;
    let high_mean = v[i..].iter().sum::<f64>() / (n - i) as f64;
    Some(Split {
        boundary: 0.5 * (v[i - 1] + v[i]),
        low_mean,
        high_mean,
        wcss: wcss.max(0.0),
        low_count: i,
    })
}

fn classify(series: &TemperatureSeries, polarity: Polarity) -> Result<StateSeries> {
    let present: Vec<f64> = series.present().map(|(_, v)| v).collect();
    if present.len() < MIN_STATE_SAMPLES {
        return Err(Error::TooShort(format!(
            "`{}` has {} usable samples, state detection needs {MIN_STATE_SAMPLES}",
            series.roi_name,
            present.len()
        )));
    }
    let (states, boundary, degenerate) = match kmeans2_split(&present) {
        Some(split) => {
            let states = (0..series.len())
                .map(|i| match series.get(i) {
                    None => State::Unknown,
                    Some(v) => {
                        let high = v > split.boundary;
                        match (polarity, high) {
                            (Polarity::HotIsOn, true) | (Polarity::ColdIsOn, false) => State::On,
                            _ => State::Off,
                        }
                    }
                })
                .collect();
            (states, split.boundary, false)
        }
        None => {
            let states = (0..series.len())
                .map(|i| {
                    if series.is_missing(i) {
                        State::Unknown
                    } else {
                        State::Off
                    }
                })
                .collect();
            (states, present[0], true)
        }
    };
    Ok(StateSeries {
        start: series.start,
        step: series.step,
        states,
        boundary,
        degenerate,
    })
}

/// Condenser states: the hotter cluster is on. An all-equal input gives
/// all-off states with `degenerate` set.
pub fn kmeans2_states(segment: &TemperatureSeries) -> Result<StateSeries> {
    classify(segment, Polarity::HotIsOn)
}

/// Reference states from a room temperature trace: the colder cluster is on.
pub fn truth_states_from_indoor(indoor: &TemperatureSeries) -> Result<StateSeries> {
    classify(indoor, Polarity::ColdIsOn)
}

/// On inside the given `[start, end)` intervals, off elsewhere, unknown at
/// missing samples of `grid`.
pub fn states_from_intervals(
    grid: &TemperatureSeries,
    intervals: &[(Instant, Instant)],
) -> StateSeries {
    let states = (0..grid.len())
        .map(|i| {
            if grid.is_missing(i) {
                return State::Unknown;
            }
            let t = grid.time_at(i);
            if intervals.iter().any(|(s, e)| *s <= t && t < *e) {
                State::On
            } else {
                State::Off
            }
        })
        .collect();
    StateSeries {
        start: grid.start,
        step: grid.step,
        states,
        boundary: f64::NAN,
        degenerate: false,
    }
}
