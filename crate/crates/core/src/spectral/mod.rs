//! Frequency-domain analysis of uniform series: one-sided FFT spectra, band
//! energy, FFT band-pass projection and the Morlet continuous wavelet
//! transform.

mod cwt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TemperatureSeries;

pub use cwt::{
    band_energy_columns, band_magnitude_columns, cwt, cwt_coefficients, write_scalogram_csv,
    Morlet, PeriodGrid, Scalogram, ScalogramSidecar, WaveletDescriptor,
};

/// Largest fraction of missing samples that is interpolated before a transform.
pub const MAX_MISSING_FRACTION: f64 = 0.10;
/// Shortest series accepted by the transforms.
pub const MIN_SAMPLES: usize = 8;

/// Compressor duty-cycle periods of window AC condensers, seconds (16 to 32 min).
pub const DUTY_PERIOD_RANGE: (f64, f64) = (960.0, 1920.0);

/// A closed frequency interval in hertz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyBand {
    pub low: f64,
    pub high: f64,
}

impl FrequencyBand {
    /// Band in which condenser duty cycling shows up, 0.0005 to 0.0011 Hz.
    pub const DUTY_CYCLE: FrequencyBand = FrequencyBand {
        low: 0.0005,
        high: 0.0011,
    };

    pub fn new(low: f64, high: f64) -> Result<Self> {
        let b = FrequencyBand { low, high };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.low > 0.0 && self.low < self.high && self.high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frequency band [{}, {}] Hz must satisfy 0 < low < high",
                self.low, self.high
            )));
        }
        Ok(())
    }

    pub fn contains(&self, hz: f64) -> bool {
        hz >= self.low && hz <= self.high
    }

    /// Period interval `(1 / high, 1 / low)` in seconds.
    pub fn period_range(&self) -> (f64, f64) {
        (1.0 / self.high, 1.0 / self.low)
    }

    pub fn contains_period(&self, seconds: f64) -> bool {
        let (lo, hi) = self.period_range();
        seconds >= lo && seconds <= hi
    }
}

impl Default for FrequencyBand {
    fn default() -> Self {
        Self::DUTY_CYCLE
    }
}

/// The default duty band must cover every 16 to 32 minute period.
pub fn check_default_band() -> Result<()> {
    let (lo, hi) = FrequencyBand::DUTY_CYCLE.period_range();
    let (dlo, dhi) = DUTY_PERIOD_RANGE;
    if lo <= dlo && hi >= dhi {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "default band periods [{lo}, {hi}] s do not bracket [{dlo}, {dhi}] s"
        )))
    }
}

/// One-sided spectrum normalised so that the squared magnitudes sum to the
/// energy of the mean-removed input.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Sample spacing of the source series, seconds.
    pub step: f64,
}

impl Spectrum {
    pub fn energy(&self) -> f64 {
        self.magnitudes.iter().map(|m| m * m).sum()
    }

    /// Frequency of the largest magnitude.
    pub fn peak_frequency(&self) -> f64 {
        let (i, _) = self
            .magnitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap_or((0, &0.0));
        self.frequencies[i]
    }
}

/// Gap-filled values ready for a transform.
pub(crate) fn prepare(series: &TemperatureSeries) -> Result<Vec<f64>> {
    if series.len() < MIN_SAMPLES {
        return Err(Error::TooShort(format!(
            "`{}` has {} samples, need at least {MIN_SAMPLES}",
            series.roi_name,
            series.len()
        )));
    }
    let frac = series.missing_count() as f64 / series.len() as f64;
    if frac > MAX_MISSING_FRACTION {
        return Err(Error::TooGappy(format!(
            "`{}` is {:.1}% missing, limit {:.0}%",
            series.roi_name,
            100.0 * frac,
            100.0 * MAX_MISSING_FRACTION
        )));
    }
    series
        .filled_values()
        .ok_or_else(|| Error::TooGappy(format!("`{}` has no samples", series.roi_name)))
}

pub(crate) fn remove_mean(values: &mut [f64]) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in values.iter_mut() {
        *v -= mean;
    }
}

/// Spectrum of raw values (mean removed here, zero-padded to a power of two).
pub fn spectrum_of(values: &[f64], step: f64) -> Spectrum {
    let mut centred = values.to_vec();
    if !centred.is_empty() {
        remove_mean(&mut centred);
    }
    let n_fft = values.len().next_power_of_two().max(2);
    let mut buf: Vec<Complex64> = centred.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n_fft, Complex64::new(0.0, 0.0));
    FftPlanner::<f64>::new()
        .plan_fft_forward(n_fft)
        .process(&mut buf);
    let norm = (n_fft as f64).sqrt();
    let half = n_fft / 2;
    let frequencies = (0..=half)
        .map(|k| k as f64 / (n_fft as f64 * step))
        .collect();
    let magnitudes = (0..=half)
        .map(|k| {
            let m = buf[k].norm() / norm;
            if k == 0 || k == half {
                m
            } else {
                std::f64::consts::SQRT_2 * m
            }
        })
        .collect();
    Spectrum {
        frequencies,
        magnitudes,
        step,
    }
}

/// One-sided magnitude spectrum of a uniform series.
pub fn fft_magnitude(series: &TemperatureSeries) -> Result<Spectrum> {
    let values = prepare(series)?;
    Ok(spectrum_of(&values, series.step as f64))
}

/// Fraction of spectral energy inside `band`; zero for an all-zero spectrum.
pub fn band_energy(spectrum: &Spectrum, band: &FrequencyBand) -> Result<f64> {
    band.validate()?;
    let f_min = spectrum.frequencies.first().copied().unwrap_or(0.0);
    let f_max = spectrum.frequencies.last().copied().unwrap_or(0.0);
    if band.low > f_max || band.high < f_min {
        return Err(Error::BandOutOfRange {
            low: band.low,
            high: band.high,
        });
    }
    let mut inside = 0.0;
    let mut total = 0.0;
    for (f, m) in spectrum.frequencies.iter().zip(&spectrum.magnitudes) {
        let e = m * m;
        total += e;
        if band.contains(*f) {
            inside += e;
        }
    }
    Ok(if total > 0.0 { inside / total } else { 0.0 })
}

/// Orthogonal projection onto the DFT bins inside `band`.
///
/// Works on the full-length DFT (no padding), so applying it twice is the
/// same as applying it once.
pub fn bandpass_values(values: &[f64], step: f64, band: &FrequencyBand) -> Vec<f64> {
    bandpass_complex(values, step, band)
        .iter()
        .map(|c| c.re)
        .collect()
}

pub(crate) fn bandpass_complex(values: &[f64], step: f64, band: &FrequencyBand) -> Vec<Complex64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for k in 0..n {
        // bin k and its mirror n - k share the frequency min(k, n - k) / (n step)
        let folded = k.min(n - k);
        let f = folded as f64 / (n as f64 * step);
        if !band.contains(f) {
            buf[k] = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c * scale).collect()
}

/// Remove every frequency outside `band`. The input's missing mask is kept.
pub fn bandpass_clean(
    series: &TemperatureSeries,
    band: &FrequencyBand,
) -> Result<TemperatureSeries> {
    band.validate()?;
    let values = prepare(series)?;
    let nyquist = 0.5 / series.step as f64;
    if band.low > nyquist {
        return Err(Error::BandOutOfRange {
            low: band.low,
            high: band.high,
        });
    }
    let mut cleaned = bandpass_values(&values, series.step as f64, band);
    for (v, &m) in cleaned.iter_mut().zip(series.missing_mask()) {
        if m {
            *v = f64::NAN;
        }
    }
    Ok(series.with_values(cleaned))
}
