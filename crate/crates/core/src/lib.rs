//! Thermal time-series analytics for building infrared observations.
//!
//! Raw detector counts become per-region temperature series, which are
//! then mined for centralized HVAC schedules and window AC duty cycles.

pub mod detect;
pub mod error;
pub mod ingest;
pub mod radiometry;
pub mod series;
pub mod spectral;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
