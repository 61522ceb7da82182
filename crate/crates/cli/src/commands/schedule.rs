use irhvac::detect::{schedule_from_grid, write_schedule_csv, ScheduleReport};
use irhvac::ingest::RoiLabel;
use irhvac::series::{
    detrend_scoped, difference, interval_slopes, write_slope_grid, TemperatureSeries,
};

use super::{load_entry, read_index, write_csv, write_file, Context, IndexEntry};
use crate::error::{CliError, Result};
use crate::svg::{Heatmap, Scale};

const DAY: u64 = 86_400;

fn pick(entries: &[IndexEntry], label: RoiLabel) -> Result<&IndexEntry> {
    let mut found: Vec<&IndexEntry> = entries.iter().filter(|e| e.label == label).collect();
    found.sort_by(|a, b| a.roi_name.cmp(&b.roi_name));
    match found.as_slice() {
        [] => Err(CliError::Missing(format!(
            "no `{}` series in the index",
            label.as_str()
        ))),
        [one] => Ok(one),
        [first, ..] => {
            eprintln!(
                "warning: {} `{}` series; using `{}`",
                found.len(),
                label.as_str(),
                first.roi_name
            );
            Ok(first)
        }
    }
}

/// Window and wall series in, schedule report, slope grid and heatmap out.
pub fn run(ctx: &Context) -> Result<ScheduleReport> {
    let cfg = &ctx.config;
    let entries = read_index(&cfg.series_dir()?)?;
    let window = load_entry(pick(&entries, RoiLabel::Window)?, cfg.utc_offset)?;
    let wall = load_entry(pick(&entries, RoiLabel::Wall)?, cfg.utc_offset)?;
    for s in [&window, &wall] {
        if (s.len() as u64) * (s.step as u64) < DAY {
            return Err(CliError::Insufficient(format!(
                "`{}` covers {} s, a schedule needs a full day",
                s.roi_name,
                s.len() as u64 * s.step as u64
            )));
        }
    }
    let report = analyze(&window, &wall, ctx)?;
    if report.days.is_empty() {
        return Err(CliError::Insufficient(
            "no day has enough usable slope bins".into(),
        ));
    }
    let out = cfg.output()?;
    write_csv(&out.join("schedule.csv"), |w| {
        write_schedule_csv(w, &report.days)
    })?;
    write_csv(&out.join("slope_grid.csv"), |w| {
        write_slope_grid(w, &report.grid)
    })?;
    let svg = heatmap(&report).render(ctx.stamp().as_deref());
    write_file(&out.join("schedule_heatmap.svg"), svg.as_bytes())?;
    Ok(report)
}

fn analyze(
    window: &TemperatureSeries,
    wall: &TemperatureSeries,
    ctx: &Context,
) -> Result<ScheduleReport> {
    let cfg = &ctx.config;
    let diff = difference(window, wall)?;
    let grid = interval_slopes(&detrend_scoped(&diff, cfg.detrend)?, cfg.bin)?;
    Ok(schedule_from_grid(grid, cfg.k_mad)?)
}

/// Day by bin slopes with detected events outlined.
pub(crate) fn heatmap(report: &ScheduleReport) -> Heatmap {
    let grid = &report.grid;
    let mut marks = Vec::new();
    for d in &report.days {
        let Some(row) = grid.dates.iter().position(|x| *x == d.date) else {
            continue;
        };
        for e in d.switch_on.iter().chain(d.switch_off.iter()) {
            let local = e.instant.with_timezone(&grid.offset).time();
            if let Some(col) = grid.bins.iter().position(|b| *b == local) {
                marks.push((row, col));
            }
        }
    }
    Heatmap {
        title: "Slope of detrended window minus wall temperature".into(),
        unit: "K/h".into(),
        row_labels: grid
            .dates
            .iter()
            .map(|d| d.format("%Y-%m-%d %a").to_string())
            .collect(),
        col_labels: grid
            .bins
            .iter()
            .map(|b| b.format("%H:%M").to_string())
            .collect(),
        cells: grid.slopes.clone(),
        scale: Scale::Diverging,
        marks,
    }
}
