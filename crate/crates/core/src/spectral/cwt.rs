use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use chrono::SecondsFormat;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{prepare, remove_mean, FrequencyBand};
use crate::error::{Error, Result};
use crate::series::{Instant, TemperatureSeries};

/// Morlet mother wavelet `pi^(-1/4) exp(i w0 u) exp(-u^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Morlet {
    pub omega0: f64,
}

impl Default for Morlet {
    fn default() -> Self {
        Morlet { omega0: 6.0 }
    }
}

impl Morlet {
    pub fn new(omega0: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "morlet omega0 must be positive, got {omega0}"
            )));
        }
        Ok(Morlet { omega0 })
    }

    pub fn psi(&self, u: f64) -> Complex64 {
        let envelope = PI.powf(-0.25) * (-0.5 * u * u).exp();
        Complex64::from_polar(envelope, self.omega0 * u)
    }

    /// Fourier period per unit scale, `4 pi / (w0 + sqrt(2 + w0^2))`.
    pub fn fourier_factor(&self) -> f64 {
        4.0 * PI / (self.omega0 + (2.0 + self.omega0 * self.omega0).sqrt())
    }

    pub fn scale_for_period(&self, period: f64) -> f64 {
        period / self.fourier_factor()
    }

    /// Cone-of-influence half width for a period, seconds.
    pub fn e_folding_time(&self, period: f64) -> f64 {
        SQRT_2 * self.scale_for_period(period)
    }

    pub fn descriptor(&self) -> WaveletDescriptor {
        WaveletDescriptor {
            family: "morlet".into(),
            omega0: self.omega0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletDescriptor {
    pub family: String,
    pub omega0: f64,
}

/// Strictly increasing analysis periods in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodGrid(Vec<f64>);

impl PeriodGrid {
    pub fn new(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() {
            return Err(Error::InvalidParameter("period grid is empty".into()));
        }
        if periods.iter().any(|p| !(p.is_finite() && *p > 0.0))
            || periods.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidParameter(
                "periods must be positive and strictly increasing".into(),
            ));
        }
        Ok(PeriodGrid(periods))
    }

    /// `count` periods evenly spaced in log from `min` to `max` inclusive.
    pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && max > min) || count < 2 {
            return Err(Error::InvalidParameter(format!(
                "log period grid needs 0 < min < max and count >= 2 (got {min}, {max}, {count})"
            )));
        }
        let ratio = (max / min).ln() / (count - 1) as f64;
        let mut p: Vec<f64> = (0..count).map(|i| min * (ratio * i as f64).exp()).collect();
        p[count - 1] = max;
        Self::new(p)
    }

    /// Default analysis grid: 48 periods from 4 to 256 minutes.
    pub fn standard() -> Self {
        Self::log_spaced(240.0, 15_360.0, 48).expect("static grid is valid")
    }

    pub fn periods(&self) -> &[f64] {
        &self.0
    }

    /// Periods strictly inside `(2 step, span / 2)`.
    pub fn restricted_to(&self, step: f64, span: f64) -> Option<PeriodGrid> {
        let kept: Vec<f64> = self
            .0
            .iter()
            .copied()
            .filter(|&p| p > 2.0 * step && p < span / 2.0)
            .collect();
        if kept.is_empty() {
            None
        } else {
            Some(PeriodGrid(kept))
        }
    }
}

/// Wavelet magnitude over (period, time) with its cone-of-influence mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    pub periods: Vec<f64>,
    pub times: Vec<Instant>,
    /// `magnitudes[period][time]`.
    pub magnitudes: Vec<Vec<f64>>,
    /// `coi[period][time]` is true where edge effects dominate.
    pub coi: Vec<Vec<bool>>,
    pub wavelet: WaveletDescriptor,
    pub step: f64,
}

impl Scalogram {
    pub fn columns(&self) -> usize {
        self.times.len()
    }

    /// Number of masked columns at each edge, per period.
    pub fn coi_edge_columns(&self) -> Vec<usize> {
        self.coi
            .iter()
            .map(|row| row.iter().take_while(|&&m| m).count())
            .collect()
    }
}

/// Wavelet coefficients `W(a, b) = step / sqrt(a) * sum_t x(t) conj(psi((t - b) / a))`
/// for every period and every sample position `b`.
///
/// The sum is evaluated as a linear convolution with the sampled kernel via
/// FFT, zero-padded to a power of two at least `2 n - 1` long, which makes it
/// equal to the direct sum up to rounding. The input is used as given.
pub fn cwt_coefficients(
    values: &[f64],
    step: f64,
    periods: &[f64],
    wavelet: &Morlet,
) -> Result<Vec<Vec<Complex64>>> {
    let n = values.len();
    let span = n as f64 * step;
    for &p in periods {
        if !(p > 2.0 * step && p < span / 2.0) {
            return Err(Error::PeriodOutOfRange {
                period: p,
                min: 2.0 * step,
                max: span / 2.0,
            });
        }
    }
    let n_fft = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n_fft);
    let inverse = planner.plan_fft_inverse(n_fft);

    let mut signal: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    signal.resize(n_fft, Complex64::new(0.0, 0.0));
    forward.process(&mut signal);

    let mut out = Vec::with_capacity(periods.len());
    let mut kernel = vec![Complex64::new(0.0, 0.0); n_fft];
    for &p in periods {
        let a = wavelet.scale_for_period(p);
        let weight = step / a.sqrt();
        kernel.fill(Complex64::new(0.0, 0.0));
        // g[m] = conj(psi(-m step / a)) = psi(m step / a) for |m| < n
        for m in 0..n {
            let u = m as f64 * step / a;
            if u > 40.0 {
                break;
            }
            let c = wavelet.psi(u) * weight;
            kernel[m] = c;
            if m > 0 {
                kernel[n_fft - m] = wavelet.psi(-u) * weight;
            }
        }
        forward.process(&mut kernel);
        for (k, s) in kernel.iter_mut().zip(&signal) {
            *k *= s;
        }
        inverse.process(&mut kernel);
        let scale = 1.0 / n_fft as f64;
        out.push(kernel[..n].iter().map(|c| c * scale).collect());
    }
    Ok(out)
}

/// Scalogram of a uniform series: gaps interpolated, mean removed.
pub fn cwt(
    series: &TemperatureSeries,
    periods: &PeriodGrid,
    wavelet: &Morlet,
) -> Result<Scalogram> {
    let mut values = prepare(series)?;
    remove_mean(&mut values);
    let step = series.step as f64;
    let coeffs = cwt_coefficients(&values, step, periods.periods(), wavelet)?;
    let n = values.len();
    let magnitudes = coeffs
        .iter()
        .map(|row| row.iter().map(|c| c.norm()).collect())
        .collect();
    let coi = periods
        .periods()
        .iter()
        .map(|&p| {
            let reach = wavelet.e_folding_time(p);
            (0..n)
                .map(|j| (j.min(n - 1 - j) as f64) * step < reach)
                .collect()
        })
        .collect();
    Ok(Scalogram {
        periods: periods.periods().to_vec(),
        times: (0..n).map(|i| series.time_at(i)).collect(),
        magnitudes,
        coi,
        wavelet: wavelet.descriptor(),
        step,
    })
}

fn band_rows(s: &Scalogram, band: &FrequencyBand) -> Result<Vec<bool>> {
    band.validate()?;
    let rows: Vec<bool> = s.periods.iter().map(|&p| band.contains_period(p)).collect();
    if !rows.iter().any(|&r| r) {
        return Err(Error::BandOutOfRange {
            low: band.low,
            high: band.high,
        });
    }
    Ok(rows)
}

/// Per-column fraction of squared magnitude inside `band`; zero-energy columns give 0.
pub fn band_energy_columns(s: &Scalogram, band: &FrequencyBand) -> Result<Vec<f64>> {
    let rows = band_rows(s, band)?;
    Ok((0..s.columns())
        .map(|j| {
            let mut inside = 0.0;
            let mut total = 0.0;
            for (r, row) in s.magnitudes.iter().enumerate() {
                let e = row[j] * row[j];
                total += e;
                if rows[r] {
                    inside += e;
                }
            }
            if total > 0.0 {
                inside / total
            } else {
                0.0
            }
        })
        .collect())
}

/// Per-column root of the in-band squared magnitude.
pub fn band_magnitude_columns(s: &Scalogram, band: &FrequencyBand) -> Result<Vec<f64>> {
    let rows = band_rows(s, band)?;
    Ok((0..s.columns())
        .map(|j| {
            s.magnitudes
                .iter()
                .zip(&rows)
                .filter(|(_, &r)| r)
                .map(|(row, _)| row[j] * row[j])
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}

/// Period rows by time columns.
pub fn write_scalogram_csv<W: Write>(mut w: W, s: &Scalogram) -> std::io::Result<()> {
    write!(w, "period_s")?;
    for t in &s.times {
        write!(w, ",{}", t.to_rfc3339_opts(SecondsFormat::AutoSi, false))?;
    }
    writeln!(w)?;
    for (p, row) in s.periods.iter().zip(&s.magnitudes) {
        write!(w, "{p}")?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// JSON companion of the scalogram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalogramSidecar {
    pub wavelet: WaveletDescriptor,
    pub step_seconds: f64,
    pub start: String,
    pub columns: usize,
    pub periods: Vec<f64>,
    /// Masked columns at each edge, per period row.
    pub coi_edge_columns: Vec<usize>,
}

impl ScalogramSidecar {
    pub fn of(s: &Scalogram) -> Self {
        ScalogramSidecar {
            wavelet: s.wavelet.clone(),
            step_seconds: s.step,
            start: s
                .times
                .first()
                .map(|t| t.to_rfc3339_opts(SecondsFormat::AutoSi, false))
                .unwrap_or_default(),
            columns: s.columns(),
            periods: s.periods.clone(),
            coi_edge_columns: s.coi_edge_columns(),
        }
    }
}
