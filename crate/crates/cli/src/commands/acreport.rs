use std::collections::BTreeSet;

use irhvac::detect::{
    ac_cycling_report, accuracy_by_hour, states_from_intervals, truth_states_from_indoor,
    write_accuracy_csv, write_cycling_csv, write_usage_csv, AccuracyProfile, CyclingReport,
    StateSeries, UsageInterval,
};
use irhvac::ingest::RoiLabel;
use irhvac::series::read_series;

use super::{load_entry, localize, read_index, write_csv, write_file, Context};
use crate::error::{CliError, Result};
use crate::svg::{Heatmap, Scale};

/// Everything `acreport` computed.
#[derive(Debug, Clone)]
pub struct AcReport {
    pub cycling: Vec<CyclingReport>,
    pub usage: Vec<(String, Vec<UsageInterval>)>,
    pub accuracy: Option<AccuracyProfile>,
}

/// Crop two state series to the samples they share.
pub(crate) fn overlap(a: &StateSeries, b: &StateSeries) -> Result<(StateSeries, StateSeries)> {
    let mismatch = || {
        CliError::Core(irhvac::Error::GridMismatch(format!(
            "predicted states (step {} s from {}) and reference (step {} s from {}) share no sample grid",
            a.step, a.start, b.step, b.start
        )))
    };
    if a.step != b.step {
        return Err(mismatch());
    }
    let step = a.step as i64;
    let shift = (b.start - a.start).num_seconds();
    if shift % step != 0 {
        return Err(mismatch());
    }
    // index in `a` of b[0]
    let k = shift / step;
    let lo = k.max(0);
    let hi = (a.len() as i64).min(k + b.len() as i64);
    if hi <= lo {
        return Err(mismatch());
    }
    let crop = |s: &StateSeries, from: i64| StateSeries {
        start: s.time_at(from as usize),
        step: s.step,
        states: s.states[from as usize..(from + hi - lo) as usize].to_vec(),
        boundary: s.boundary,
        degenerate: s.degenerate,
    };
    Ok((crop(a, lo), crop(b, lo - k)))
}

/// Condenser series in; cycling, usage, heatmap and (with reference rooms) accuracy out.
pub fn run(ctx: &Context) -> Result<AcReport> {
    let cfg = &ctx.config;
    let entries = read_index(&cfg.series_dir()?)?;
    let mut acs: Vec<_> = entries
        .iter()
        .filter(|e| e.label == RoiLabel::AcUnit)
        .collect();
    if acs.is_empty() {
        return Err(CliError::Missing("no `ac_unit` series in the index".into()));
    }
    acs.sort_by(|a, b| a.roi_name.cmp(&b.roi_name));
    for name in cfg.paths.ground_truth.keys() {
        if !acs.iter().any(|e| &e.roi_name == name) {
            return Err(CliError::Config(format!(
                "ground truth given for unknown AC `{name}`"
            )));
        }
    }

    let mut cycling = Vec::new();
    let mut usage = Vec::new();
    let mut profiles = Vec::new();
    for entry in acs {
        let series = load_entry(entry, cfg.utc_offset)?;
        let (report, detection) = ac_cycling_report(&series, &cfg.band, &cfg.usage, &cfg.night)?;
        if let Some(path) = cfg.paths.ground_truth.get(&entry.roi_name) {
            let room = localize(
                read_series(path, &entry.roi_name, RoiLabel::None)?,
                cfg.utc_offset,
            );
            let truth = truth_states_from_indoor(&room)?;
            let spans: Vec<_> = detection
                .intervals
                .iter()
                .map(|iv| (iv.start, iv.end))
                .collect();
            let predicted = states_from_intervals(&series, &spans);
            let (p, t) = overlap(&predicted, &truth)?;
            profiles.push(accuracy_by_hour(&p, &t)?);
        }
        usage.push((entry.roi_name.clone(), detection.intervals));
        cycling.push(report);
    }
    if cycling.iter().all(|r| r.usable_nights() == 0) {
        return Err(CliError::Insufficient(format!(
            "no usable night between {} and {}",
            cfg.night.start.format("%H:%M"),
            cfg.night.end.format("%H:%M")
        )));
    }

    let out = cfg.output()?;
    write_csv(&out.join("cycling.csv"), |w| write_cycling_csv(w, &cycling))?;
    write_csv(&out.join("usage.csv"), |w| write_usage_csv(w, &usage))?;
    let svg = heatmap(&cycling).render(ctx.stamp().as_deref());
    write_file(&out.join("cycling_heatmap.svg"), svg.as_bytes())?;
    let accuracy = (!profiles.is_empty()).then(|| AccuracyProfile::pooled(&profiles));
    if let Some(p) = &accuracy {
        write_csv(&out.join("accuracy.csv"), |w| write_accuracy_csv(w, p))?;
    }
    Ok(AcReport {
        cycling,
        usage,
        accuracy,
    })
}

/// AC by night cycling fractions.
pub(crate) fn heatmap(reports: &[CyclingReport]) -> Heatmap {
    let dates: Vec<_> = reports
        .iter()
        .flat_map(|r| r.nights.iter().map(|n| n.date))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cells = reports
        .iter()
        .map(|r| {
            dates
                .iter()
                .map(|d| {
                    r.nights
                        .iter()
                        .find(|n| n.date == *d && n.samples_used > 0)
                        .map(|n| n.cycling_fraction)
                })
                .collect()
        })
        .collect();
    Heatmap {
        title: "Nightly cycling fraction per AC".into(),
        unit: "fraction of night".into(),
        row_labels: reports.iter().map(|r| r.ac_name.clone()).collect(),
        col_labels: dates
            .iter()
            .map(|d| d.format("%m-%d").to_string())
            .collect(),
        cells,
        scale: Scale::Sequential { lo: 0.0, hi: 1.0 },
        marks: Vec::new(),
    }
}
