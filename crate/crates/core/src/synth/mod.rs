//! Synthetic ground truth: facade, room and condenser temperature series
//! with known HVAC schedules, AC usage and duty cycles, and the raw-count
//! frames that would have produced them.

mod frames;

use std::f64::consts::PI;

use chrono::{Datelike, Duration, FixedOffset, NaiveDate, NaiveTime, TimeZone, Timelike, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use frames::{emit_frames, EmittedFrames, FrameLayout, Placement};

use crate::detect::EventKind;
use crate::error::{Error, Result};
use crate::ingest::RoiLabel;
use crate::series::{hhmm, Instant, TemperatureSeries};

/// A daily on/off pair in local time; `on` must precede `off`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DailySchedule {
    #[serde(with = "hhmm")]
    pub on: NaiveTime,
    #[serde(with = "hhmm")]
    pub off: NaiveTime,
}

impl DailySchedule {
    pub fn new(on: &str, off: &str) -> Result<Self> {
        let parse = |s: &str| hhmm::parse(s).map_err(Error::Spec);
        Ok(DailySchedule {
            on: parse(on)?,
            off: parse(off)?,
        })
    }
}

/// Centralized HVAC operating hours per weekday; `None` means off all day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeeklySchedule {
    pub mon: Option<DailySchedule>,
    pub tue: Option<DailySchedule>,
    pub wed: Option<DailySchedule>,
    pub thu: Option<DailySchedule>,
    pub fri: Option<DailySchedule>,
    pub sat: Option<DailySchedule>,
    pub sun: Option<DailySchedule>,
}

impl WeeklySchedule {
    /// On 06:00 to 22:00 on weekdays, 06:00 to 18:00 on Saturday, off on Sunday.
    pub fn office() -> Self {
        let weekday = DailySchedule::new("06:00", "22:00").expect("valid");
        WeeklySchedule {
            mon: Some(weekday),
            tue: Some(weekday),
            wed: Some(weekday),
            thu: Some(weekday),
            fri: Some(weekday),
            sat: Some(DailySchedule::new("06:00", "18:00").expect("valid")),
            sun: None,
        }
    }

    pub fn for_weekday(&self, d: Weekday) -> Option<DailySchedule> {
        match d {
            Weekday::Mon => self.mon,
            Weekday::Tue => self.tue,
            Weekday::Wed => self.wed,
            Weekday::Thu => self.thu,
            Weekday::Fri => self.fri,
            Weekday::Sat => self.sat,
            Weekday::Sun => self.sun,
        }
    }

    fn all(&self) -> [(Weekday, Option<DailySchedule>); 7] {
        [
            (Weekday::Mon, self.mon),
            (Weekday::Tue, self.tue),
            (Weekday::Wed, self.wed),
            (Weekday::Thu, self.thu),
            (Weekday::Fri, self.fri),
            (Weekday::Sat, self.sat),
            (Weekday::Sun, self.sun),
        ]
    }
}

/// Daily usage window of a window AC; `end <= start` runs past midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UsageWindow {
    #[serde(with = "hhmm")]
    pub start: NaiveTime,
    #[serde(with = "hhmm")]
    pub end: NaiveTime,
}

impl UsageWindow {
    pub fn new(start: &str, end: &str) -> Result<Self> {
        let parse = |s: &str| hhmm::parse(s).map_err(Error::Spec);
        Ok(UsageWindow {
            start: parse(start)?,
            end: parse(end)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcUnitSpec {
    pub name: String,
    /// Compressor cycle length, seconds.
    pub duty_period: f64,
    /// Share of each cycle with the compressor running.
    pub duty_fraction: f64,
    /// Condenser temperature rise while the compressor runs, kelvin.
    #[serde(default = "default_duty_amplitude")]
    pub amplitude: f64,
    /// Usage windows, repeated on every selected day.
    #[serde(default)]
    pub usage: Vec<UsageWindow>,
    /// Day indices (0-based) whose usage windows apply; all days when absent.
    #[serde(default)]
    pub days: Option<Vec<u32>>,
}

fn default_duty_amplitude() -> f64 {
    3.0
}

impl AcUnitSpec {
    pub fn new(
        name: impl Into<String>,
        duty_period: f64,
        duty_fraction: f64,
        usage: Vec<UsageWindow>,
    ) -> Self {
        AcUnitSpec {
            name: name.into(),
            duty_period,
            duty_fraction,
            amplitude: default_duty_amplitude(),
            usage,
            days: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    /// First local day of the scenario.
    pub start_date: NaiveDate,
    /// Fixed UTC offset of the site, e.g. `+08:00`.
    #[serde(with = "utc_offset")]
    pub utc_offset: FixedOffset,
    pub days: u32,
    /// Sample spacing, seconds.
    pub step: u32,
    pub hvac: WeeklySchedule,
    pub ac_units: Vec<AcUnitSpec>,
    /// Peak clear-sky solar heating of exposed surfaces, kelvin.
    pub solar_amplitude: f64,
    /// Daily mean air temperature, kelvin.
    pub ambient_mean: f64,
    /// Half the diurnal air temperature swing, kelvin.
    pub ambient_amplitude: f64,
    /// Linear drift of the air temperature, kelvin per day.
    pub drift_per_day: f64,
    /// Standard deviation of the independent noise on every series, kelvin.
    pub noise_sigma: f64,
    /// Share of solar heating blocked by passing clouds, in `[0, 1]`.
    pub cloud_cover: f64,
    /// Mean time between cloud transitions, seconds.
    pub cloud_dwell: f64,
    /// Indoor temperature held by the centralized system, kelvin.
    pub hvac_setpoint: f64,
    /// Room temperature held by a running window AC, kelvin.
    pub ac_setpoint: f64,
    pub seed: u64,
    /// Permit duty periods outside 16 to 32 minutes (negative fixtures).
    pub allow_out_of_band: bool,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            start_date: NaiveDate::from_ymd_opt(2022, 3, 7).expect("valid date"),
            utc_offset: FixedOffset::east_opt(8 * 3600).expect("valid offset"),
            days: 7,
            step: 300,
            hvac: WeeklySchedule::default(),
            ac_units: Vec::new(),
            solar_amplitude: 8.0,
            ambient_mean: 302.0,
            ambient_amplitude: 2.0,
            drift_per_day: 0.0,
            noise_sigma: 0.1,
            cloud_cover: 0.0,
            cloud_dwell: 600.0,
            hvac_setpoint: 296.0,
            ac_setpoint: 297.0,
            seed: 0,
            allow_out_of_band: false,
        }
    }
}

pub mod utc_offset {
    use chrono::FixedOffset;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(o: &FixedOffset, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&o.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FixedOffset, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<FixedOffset>()
            .map_err(|e| serde::de::Error::custom(format!("invalid UTC offset `{s}`: {e}")))
    }
}

impl ScenarioSpec {
    /// The office facade used throughout the tests: weekday and Saturday
    /// schedule, no window ACs.
    pub fn office(days: u32, step: u32, noise_sigma: f64, seed: u64) -> Self {
        ScenarioSpec {
            days,
            step,
            hvac: WeeklySchedule::office(),
            noise_sigma,
            seed,
            ..ScenarioSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        if self.days == 0 {
            return fail("days must be at least 1".into());
        }
        if self.step == 0 || 86_400 % self.step != 0 {
            return fail(format!(
                "step {} s must be positive and divide a day",
                self.step
            ));
        }
        for (v, what) in [
            (self.solar_amplitude, "solar_amplitude"),
            (self.ambient_amplitude, "ambient_amplitude"),
            (self.noise_sigma, "noise_sigma"),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{what} must be finite and non-negative, got {v}"));
            }
        }
        for (v, what) in [
            (self.ambient_mean, "ambient_mean"),
            (self.hvac_setpoint, "hvac_setpoint"),
            (self.ac_setpoint, "ac_setpoint"),
            (self.cloud_dwell, "cloud_dwell"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{what} must be positive, got {v}"));
            }
        }
        if !self.drift_per_day.is_finite() {
            return fail("drift_per_day must be finite".into());
        }
        if !(0.0..=1.0).contains(&self.cloud_cover) {
            return fail(format!(
                "cloud_cover must lie in [0, 1], got {}",
                self.cloud_cover
            ));
        }
        for (day, s) in self.hvac.all() {
            if let Some(s) = s {
                if s.on >= s.off {
                    return fail(format!(
                        "hvac on {day}: switch-on {} is not before switch-off {}",
                        s.on, s.off
                    ));
                }
            }
        }
        let mut names: Vec<&str> = Vec::new();
        for ac in &self.ac_units {
            if ac.name.is_empty() || names.contains(&ac.name.as_str()) {
                return fail(format!("ac unit name `{}` is empty or repeated", ac.name));
            }
            names.push(&ac.name);
            if !self.allow_out_of_band && !(960.0..=1920.0).contains(&ac.duty_period) {
                return fail(format!(
                    "ac `{}` duty_period {} s is outside 960 to 1920 s",
                    ac.name, ac.duty_period
                ));
            }
            if !(ac.duty_period > 2.0 * self.step as f64) {
                return fail(format!(
                    "ac `{}` duty_period {} s is not resolvable at step {} s",
                    ac.name, ac.duty_period, self.step
                ));
            }
            if !(ac.duty_fraction > 0.0 && ac.duty_fraction < 1.0) {
                return fail(format!("ac `{}` duty_fraction must lie in (0, 1)", ac.name));
            }
            if !(ac.amplitude.is_finite() && ac.amplitude > 0.0) {
                return fail(format!("ac `{}` amplitude must be positive", ac.name));
            }
            if let Some(w) = ac.usage.iter().find(|w| w.start == w.end) {
                return fail(format!(
                    "ac `{}` usage window starts and ends at {}",
                    ac.name, w.start
                ));
            }
            if let Some(d) = ac.days.iter().flatten().find(|&&d| d >= self.days) {
                return fail(format!(
                    "ac `{}` lists day {d}, scenario has {} days",
                    ac.name, self.days
                ));
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.days as usize) * (86_400 / self.step as usize)
    }

    pub fn start(&self) -> Instant {
        self.utc_offset
            .from_local_datetime(&self.start_date.and_time(NaiveTime::MIN))
            .single()
            .expect("fixed offsets are unambiguous")
    }

    pub fn end(&self) -> Instant {
        self.start() + Duration::days(self.days as i64)
    }

    fn at(&self, day: u32, time: NaiveTime) -> Instant {
        self.start()
            + Duration::days(day as i64)
            + Duration::seconds(time.num_seconds_from_midnight() as i64)
    }

    /// Labelled switch events implied by the weekly schedule.
    pub fn schedule_events(&self) -> Vec<LabelEvent> {
        let mut out = Vec::new();
        for d in 0..self.days {
            let date = self.start_date + Duration::days(d as i64);
            if let Some(s) = self.hvac.for_weekday(date.weekday()) {
                out.push(LabelEvent {
                    instant: self.at(d, s.on),
                    kind: EventKind::SwitchOn,
                });
                out.push(LabelEvent {
                    instant: self.at(d, s.off),
                    kind: EventKind::SwitchOff,
                });
            }
        }
        out
    }

    /// Usage spans of one AC, clipped to the scenario and merged where they touch.
    pub fn usage_intervals(&self, ac: &AcUnitSpec) -> Vec<(Instant, Instant)> {
        let mut spans: Vec<(Instant, Instant)> = Vec::new();
        for d in 0..self.days {
            if ac.days.as_ref().is_some_and(|days| !days.contains(&d)) {
                continue;
            }
            for w in &ac.usage {
                let start = self.at(d, w.start);
                let mut end = self.at(d, w.end);
                if w.end <= w.start {
                    end += Duration::days(1);
                }
                spans.push((start, end.min(self.end())));
            }
        }
        spans.sort();
        let mut merged: Vec<(Instant, Instant)> = Vec::new();
        for (s, e) in spans {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        merged
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEvent {
    pub instant: Instant,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageLabel {
    pub ac_name: String,
    pub start: Instant,
    pub end: Instant,
}

/// Ground truth of a generated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub events: Vec<LabelEvent>,
    pub usage: Vec<UsageLabel>,
    /// Per AC, whether the compressor runs at each sample.
    pub compressor: Vec<Vec<bool>>,
    /// Whether the centralized system runs at each sample.
    pub hvac_on: Vec<bool>,
}

/// Generated series plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub wall: TemperatureSeries,
    pub window: TemperatureSeries,
    /// Indoor air under the centralized system.
    pub indoor: TemperatureSeries,
    /// One condenser surface series per AC, named after the AC.
    pub condensers: Vec<TemperatureSeries>,
    /// Air temperature of the room each AC serves, named `<ac>_room`.
    pub rooms: Vec<TemperatureSeries>,
    pub labels: Labels,
}

impl Scenario {
    /// Every generated series, facade first.
    pub fn all_series(&self) -> Vec<&TemperatureSeries> {
        let mut v = vec![&self.wall, &self.window, &self.indoor];
        v.extend(self.condensers.iter());
        v.extend(self.rooms.iter());
        v
    }

    pub fn series(&self, name: &str) -> Option<&TemperatureSeries> {
        self.all_series().into_iter().find(|s| s.roi_name == name)
    }

    pub fn usage_of(&self, ac: &str) -> Vec<(Instant, Instant)> {
        self.labels
            .usage
            .iter()
            .filter(|u| u.ac_name == ac)
            .map(|u| (u.start, u.end))
            .collect()
    }
}

/// First-order lag `y' = (x - y) / tau`, exact for input held over each step.
fn lag(x: &[f64], tau: f64, step: f64) -> Vec<f64> {
    let a = (-step / tau).exp();
    let mut y = Vec::with_capacity(x.len());
    let mut state = x.first().copied().unwrap_or(0.0);
    for &v in x {
        state = a * state + (1.0 - a) * v;
        y.push(state);
    }
    y
}

/// Lag whose time constant switches with a boolean input.
fn switched_lag(target: &[f64], on: &[bool], tau_on: f64, tau_off: f64, step: f64) -> Vec<f64> {
    let (a_on, a_off) = ((-step / tau_on).exp(), (-step / tau_off).exp());
    let mut y = Vec::with_capacity(target.len());
    let mut state = target.first().copied().unwrap_or(0.0);
    for (&v, &o) in target.iter().zip(on) {
        let a = if o { a_on } else { a_off };
        state = a * state + (1.0 - a) * v;
        y.push(state);
    }
    y
}

const WALL_LAG: f64 = 2.0 * 3600.0;
const WINDOW_LAG: f64 = 3600.0;
const FREE_INDOOR_LAG: f64 = 3.0 * 3600.0;
const HVAC_TAU_ON: f64 = 10.0 * 60.0;
const HVAC_TAU_OFF: f64 = 30.0 * 60.0;
/// Share of the indoor cooling seen through the window glass.
const WINDOW_COUPLING: f64 = 0.8;
const ROOM_TAU_ON: f64 = 10.0 * 60.0;
const ROOM_TAU_OFF: f64 = 40.0 * 60.0;
const ROOM_DAMPING: f64 = 0.25;
/// Condenser casing heats more strongly in sun than the facade.
const CONDENSER_SOLAR_GAIN: f64 = 1.0;

/// Generate a scenario. Identical specs give bit-identical output.
pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let n = spec.samples();
    let step = spec.step as f64;
    let start = spec.start();
    let offset_hours = |i: usize| {
        let t = start + Duration::seconds(i as i64 * spec.step as i64);
        t.num_seconds_from_midnight() as f64 / 3600.0
    };

    let mut clouds = ChaCha8Rng::seed_from_u64(spec.seed);
    clouds.set_stream(1);
    let switch_p = (step / spec.cloud_dwell).min(1.0);
    let mut cloudy = false;
    let mut ambient = Vec::with_capacity(n);
    let mut solar = Vec::with_capacity(n);
    for i in 0..n {
        let h = offset_hours(i);
        let days = i as f64 * step / 86_400.0;
        ambient.push(
            spec.ambient_mean
                + spec.ambient_amplitude * (2.0 * PI * (h - 9.0) / 24.0).sin()
                + spec.drift_per_day * days,
        );
        if clouds.random_bool(switch_p) {
            cloudy = !cloudy;
        }
        let clear = spec.solar_amplitude * (PI * (h - 7.0) / 12.0).sin().max(0.0);
        solar.push(clear * if cloudy { 1.0 - spec.cloud_cover } else { 1.0 });
    }
    let forcing: Vec<f64> = ambient.iter().zip(&solar).map(|(a, s)| a + s).collect();

    let times: Vec<Instant> = (0..n)
        .map(|i| start + Duration::seconds(i as i64 * spec.step as i64))
        .collect();
    let events = spec.schedule_events();
    let hvac_on: Vec<bool> = times
        .iter()
        .map(|t| {
            spec.hvac
                .for_weekday(t.weekday())
                .is_some_and(|s| t.time() >= s.on && t.time() < s.off)
        })
        .collect();

    let wall = lag(&forcing, WALL_LAG, step);
    let indoor_free = lag(&forcing, FREE_INDOOR_LAG, step);
    let hvac_target: Vec<f64> = indoor_free
        .iter()
        .zip(&hvac_on)
        .map(|(&f, &on)| if on { spec.hvac_setpoint } else { f })
        .collect();
    let indoor = switched_lag(&hvac_target, &hvac_on, HVAC_TAU_ON, HVAC_TAU_OFF, step);
    let window: Vec<f64> = lag(&forcing, WINDOW_LAG, step)
        .iter()
        .zip(indoor.iter().zip(&indoor_free))
        .map(|(w, (i, f))| w + WINDOW_COUPLING * (i - f))
        .collect();

    let room_free: Vec<f64> = indoor_free
        .iter()
        .map(|v| spec.ambient_mean + ROOM_DAMPING * (v - spec.ambient_mean) + 1.0)
        .collect();
    let mut usage = Vec::new();
    let mut compressor = Vec::new();
    let mut condensers = Vec::new();
    let mut rooms = Vec::new();
    for ac in &spec.ac_units {
        let spans = spec.usage_intervals(ac);
        let mut running = vec![false; n];
        let mut in_use = vec![false; n];
        for &(s, e) in &spans {
            usage.push(UsageLabel {
                ac_name: ac.name.clone(),
                start: s,
                end: e,
            });
            for (i, t) in times.iter().enumerate() {
                if *t >= s && *t < e {
                    in_use[i] = true;
                    let phase = ((*t - s).num_seconds() as f64).rem_euclid(ac.duty_period);
                    running[i] = phase < ac.duty_fraction * ac.duty_period;
                }
            }
        }
        let square: Vec<f64> = running
            .iter()
            .map(|&r| if r { ac.amplitude } else { 0.0 })
            .collect();
        let condenser: Vec<f64> = (0..n)
            .map(|i| {
                let duty = 0.5 * (square[i] + square[i.saturating_sub(1)]);
                ambient[i] + CONDENSER_SOLAR_GAIN * solar[i] + duty
            })
            .collect();
        let room_target: Vec<f64> = room_free
            .iter()
            .zip(&in_use)
            .map(|(&f, &u)| if u { spec.ac_setpoint } else { f })
            .collect();
        condensers.push((ac.name.clone(), condenser));
        rooms.push((
            format!("{}_room", ac.name),
            switched_lag(&room_target, &in_use, ROOM_TAU_ON, ROOM_TAU_OFF, step),
        ));
        compressor.push(running);
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    noise_rng.set_stream(2);
    let normal = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Spec(e.to_string()))?;
    let mut finish =
        |name: &str, label: RoiLabel, mut values: Vec<f64>| -> Result<TemperatureSeries> {
            if spec.noise_sigma > 0.0 {
                for v in values.iter_mut() {
                    *v += normal.sample(&mut noise_rng);
                }
            }
            TemperatureSeries::from_values(name, label, start, spec.step, values)
        };

    let wall = finish("wall", RoiLabel::Wall, wall)?;
    let window = finish("window", RoiLabel::Window, window)?;
    let indoor = finish("indoor", RoiLabel::None, indoor)?;
    let condensers = condensers
        .into_iter()
        .map(|(name, v)| finish(&name, RoiLabel::AcUnit, v))
        .collect::<Result<Vec<_>>>()?;
    let rooms = rooms
        .into_iter()
        .map(|(name, v)| finish(&name, RoiLabel::None, v))
        .collect::<Result<Vec<_>>>()?;

    Ok(Scenario {
        spec: spec.clone(),
        wall,
        window,
        indoor,
        condensers,
        rooms,
        labels: Labels {
            events,
            usage,
            compressor,
            hvac_on,
        },
    })
}

#[cfg(test)]
mod tests;
