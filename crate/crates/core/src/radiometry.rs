//! Camera Planck model: raw detector counts to apparent temperature and back,
//! plus the three-source decomposition of the detector signal.
//!
//! All temperatures are kelvin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Calibration constants of the camera Planck curve.
///
/// `r1`, `r2`, `b` and `f` must be strictly positive; `o` is a count offset
/// and is usually negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanckConstants {
    pub r1: f64,
    pub r2: f64,
    pub b: f64,
    pub o: f64,
    pub f: f64,
}

impl PlanckConstants {
    /// Factory constants of the FLIR A300 used for the reference deployment.
    pub const FLIR_A300: PlanckConstants = PlanckConstants {
        r1: 14911.1846,
        r2: 0.0108,
        b: 1396.6,
        o: -6303.0,
        f: 1.0,
    };

    pub fn new(r1: f64, r2: f64, b: f64, o: f64, f: f64) -> Result<Self> {
        let c = PlanckConstants { r1, r2, b, o, f };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("r1", self.r1),
            ("r2", self.r2),
            ("b", self.b),
            ("f", self.f),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "planck constant {name} must be positive and finite, got {v}"
                )));
            }
        }
        if !self.o.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "planck constant o must be finite, got {}",
                self.o
            )));
        }
        Ok(())
    }
}

impl Default for PlanckConstants {
    fn default() -> Self {
        Self::FLIR_A300
    }
}

/// How the count offset enters the Planck curve.
///
/// `Plus` evaluates `u + o`, which is the form that is coherent with a
/// negative factory offset. `Minus` evaluates `u - o`, the convention used by
/// some other camera toolchains that publish a positive offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanckSign {
    #[default]
    Plus,
    Minus,
}

/// Apparent temperature for a raw count, `b / ln(r1 / (r2 (u + o)) + f)`.
pub fn counts_to_temperature(counts: f64, c: &PlanckConstants) -> Result<f64> {
    temperature_from_shifted(counts + c.o, c)
}

/// Raw count that [`counts_to_temperature`] maps to `kelvin`.
pub fn temperature_to_counts(kelvin: f64, c: &PlanckConstants) -> Result<f64> {
    Ok(shifted_from_temperature(kelvin, c)? - c.o)
}

fn temperature_from_shifted(shifted: f64, c: &PlanckConstants) -> Result<f64> {
    if !shifted.is_finite() {
        return Err(Error::domain(format!("u + o is not finite ({shifted})")));
    }
    if shifted <= 0.0 {
        return Err(Error::domain(format!("u + o = {shifted} must be positive")));
    }
    let arg = c.r1 / (c.r2 * shifted) + c.f;
    if !(arg > 1.0) || !arg.is_finite() {
        return Err(Error::domain(format!(
            "ln argument r1 / (r2 (u + o)) + f = {arg} must exceed 1"
        )));
    }
    Ok(c.b / arg.ln())
}

fn shifted_from_temperature(kelvin: f64, c: &PlanckConstants) -> Result<f64> {
    if !(kelvin.is_finite() && kelvin > 0.0) {
        return Err(Error::domain(format!(
            "temperature {kelvin} K must be positive"
        )));
    }
    let e = (c.b / kelvin).exp();
    if !e.is_finite() {
        return Err(Error::domain(format!(
            "exp(b / t) overflows at t = {kelvin} K"
        )));
    }
    if e <= c.f {
        return Err(Error::domain(format!(
            "exp(b / t) = {e} must exceed f = {}",
            c.f
        )));
    }
    Ok(c.r1 / (c.r2 * (e - c.f)))
}

/// Planck constants together with the offset convention.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanckModel {
    pub constants: PlanckConstants,
    #[serde(default)]
    pub sign: PlanckSign,
}

impl PlanckModel {
    pub fn new(constants: PlanckConstants, sign: PlanckSign) -> Result<Self> {
        constants.validate()?;
        Ok(PlanckModel { constants, sign })
    }

    pub fn temperature(&self, counts: f64) -> Result<f64> {
        match self.sign {
            PlanckSign::Plus => counts_to_temperature(counts, &self.constants),
            PlanckSign::Minus => {
                temperature_from_shifted(counts - self.constants.o, &self.constants)
            }
        }
    }

    pub fn counts(&self, kelvin: f64) -> Result<f64> {
        let shifted = shifted_from_temperature(kelvin, &self.constants)?;
        Ok(match self.sign {
            PlanckSign::Plus => shifted - self.constants.o,
            PlanckSign::Minus => shifted + self.constants.o,
        })
    }
}

/// Emissivity, atmospheric transmissivity and the two parasitic signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiometricScene {
    pub emissivity: f64,
    pub transmissivity: f64,
    pub reflected_signal: f64,
    pub atmospheric_signal: f64,
}

impl RadiometricScene {
    pub fn new(
        emissivity: f64,
        transmissivity: f64,
        reflected_signal: f64,
        atmospheric_signal: f64,
    ) -> Result<Self> {
        let s = RadiometricScene {
            emissivity,
            transmissivity,
            reflected_signal,
            atmospheric_signal,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("emissivity", self.emissivity),
            ("transmissivity", self.transmissivity),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be in (0, 1], got {v}"
                )));
            }
        }
        if !(self.reflected_signal.is_finite() && self.atmospheric_signal.is_finite()) {
            return Err(Error::InvalidParameter(
                "scene signals must be finite".into(),
            ));
        }
        Ok(())
    }

    /// True when the scene leaves the detector signal untouched.
    pub fn is_identity(&self) -> bool {
        self.emissivity == 1.0 && self.transmissivity == 1.0
    }
}

/// Black body seen through a perfectly transparent atmosphere: output is apparent temperature.
impl Default for RadiometricScene {
    fn default() -> Self {
        RadiometricScene {
            emissivity: 1.0,
            transmissivity: 1.0,
            reflected_signal: 0.0,
            atmospheric_signal: 0.0,
        }
    }
}

/// Object signal recovered from the total detector signal.
pub fn object_signal(total: f64, s: &RadiometricScene) -> Result<f64> {
    let gain = s.emissivity * s.transmissivity;
    if gain == 0.0 || !gain.is_finite() {
        return Err(Error::domain(
            "emissivity * transmissivity must be non-zero",
        ));
    }
    let e = s.emissivity;
    let t = s.transmissivity;
    Ok((total - t * (1.0 - e) * s.reflected_signal - (1.0 - t) * s.atmospheric_signal) / gain)
}

/// Total detector signal produced by an object signal.
pub fn total_signal(object: f64, s: &RadiometricScene) -> f64 {
    let e = s.emissivity;
    let t = s.transmissivity;
    e * t * object + t * (1.0 - e) * s.reflected_signal + (1.0 - t) * s.atmospheric_signal
}
