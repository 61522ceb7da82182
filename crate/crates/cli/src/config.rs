use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::FixedOffset;
use serde::{Deserialize, Serialize};

use irhvac::detect::UsageParams;
use irhvac::ingest::QualityThresholds;
use irhvac::radiometry::{PlanckConstants, PlanckModel, PlanckSign, RadiometricScene};
use irhvac::series::{DetrendScope, NightWindow};
use irhvac::spectral::FrequencyBand;

use crate::error::{CliError, Result};

/// Input and output locations. Relative paths in a config file are taken
/// relative to the file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Frame directory: one scene directory, or a parent of `<scene_id>/` directories.
    pub frames: Option<PathBuf>,
    /// ROI definition file.
    pub rois: Option<PathBuf>,
    /// Directory of series CSVs with an `index.csv`; `<output>/series` when absent.
    pub series: Option<PathBuf>,
    /// Reference room temperature series per AC name.
    pub ground_truth: BTreeMap<String, PathBuf>,
    pub output: Option<PathBuf>,
}

/// Run configuration; every field may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub planck: PlanckConstants,
    pub planck_sign: PlanckSign,
    pub scene: RadiometricScene,
    /// Resampling step, seconds.
    pub step: u32,
    /// Longest hole bridged by interpolation, in steps.
    pub max_gap_fill: u32,
    pub detrend: DetrendScope,
    /// Slope bin width for schedules, seconds.
    pub bin: u32,
    pub k_mad: f64,
    pub band: FrequencyBand,
    pub usage: UsageParams,
    pub night: NightWindow,
    /// Local offset used for day and night boundaries; the offset of the
    /// input timestamps when absent.
    #[serde(with = "optional_offset")]
    pub utc_offset: Option<FixedOffset>,
    pub quality: QualityThresholds,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            paths: Paths::default(),
            planck: PlanckConstants::default(),
            planck_sign: PlanckSign::default(),
            scene: RadiometricScene::default(),
            step: 300,
            max_gap_fill: 2,
            detrend: DetrendScope::default(),
            bin: 1800,
            k_mad: 4.0,
            band: FrequencyBand::DUTY_CYCLE,
            usage: UsageParams::default(),
            night: NightWindow::default(),
            utc_offset: None,
            quality: QualityThresholds::default(),
        }
    }
}

mod optional_offset {
    use chrono::FixedOffset;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(o: &Option<FixedOffset>, s: S) -> Result<S::Ok, S::Error> {
        match o {
            Some(o) => s.serialize_some(&o.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<FixedOffset>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| {
                s.parse::<FixedOffset>()
                    .map_err(|e| serde::de::Error::custom(format!("invalid UTC offset `{s}`: {e}")))
            })
            .transpose()
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises") + "\n"
    }

    /// Read a config file and anchor its relative paths at the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.anchor(base);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model()?;
        self.scene.validate()?;
        self.band.validate()?;
        self.usage.wavelet()?;
        self.usage.periods()?;
        if self.step == 0 || self.bin == 0 {
            return Err(CliError::Config("step and bin must be positive".into()));
        }
        if !(self.k_mad.is_finite() && self.k_mad > 0.0) {
            return Err(CliError::Config(format!(
                "k_mad must be positive, got {}",
                self.k_mad
            )));
        }
        if !(self.usage.threshold > 0.0 && self.usage.threshold < 1.0) {
            return Err(CliError::Config(format!(
                "usage.threshold must lie in (0, 1), got {}",
                self.usage.threshold
            )));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<PlanckModel> {
        Ok(PlanckModel::new(self.planck, self.planck_sign)?)
    }

    pub fn output(&self) -> Result<&Path> {
        self.paths
            .output
            .as_deref()
            .ok_or_else(|| CliError::Config("no output directory; pass --out".into()))
    }

    pub fn series_dir(&self) -> Result<PathBuf> {
        match &self.paths.series {
            Some(p) => Ok(p.clone()),
            None => Ok(self.output()?.join("series")),
        }
    }
}

impl Paths {
    fn anchor(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.frames,
            &mut self.rois,
            &mut self.series,
            &mut self.output,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self.ground_truth.values_mut().for_each(fix);
    }
}
