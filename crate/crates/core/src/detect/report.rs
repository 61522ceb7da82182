use std::io::Write;

use chrono::SecondsFormat;

use super::{AccuracyProfile, CyclingReport, DaySchedule, ScheduleEvent, UsageInterval};

fn time_cell(e: &Option<ScheduleEvent>) -> String {
    e.as_ref()
        .map(|e| e.instant.format("%H:%M").to_string())
        .unwrap_or_default()
}

fn score_cell(e: &Option<ScheduleEvent>) -> String {
    e.as_ref()
        .map(|e| format!("{:.3}", e.score))
        .unwrap_or_default()
}

/// `date,switch_on,switch_off,on_score,off_score`; empty cells where no event was found.
pub fn write_schedule_csv<W: Write>(mut w: W, days: &[DaySchedule]) -> std::io::Result<()> {
    writeln!(w, "date,switch_on,switch_off,on_score,off_score")?;
    for d in days {
        writeln!(
            w,
            "{},{},{},{},{}",
            d.date,
            time_cell(&d.switch_on),
            time_cell(&d.switch_off),
            score_cell(&d.switch_on),
            score_cell(&d.switch_off)
        )?;
    }
    Ok(())
}

/// `ac_name,date,cycling_fraction,samples_used`, one summary row per AC with
/// `date` set to `all` and the overall mean.
pub fn write_cycling_csv<W: Write>(mut w: W, reports: &[CyclingReport]) -> std::io::Result<()> {
    writeln!(w, "ac_name,date,cycling_fraction,samples_used")?;
    for r in reports {
        for n in &r.nights {
            writeln!(
                w,
                "{},{},{:.6},{}",
                r.ac_name, n.date, n.cycling_fraction, n.samples_used
            )?;
        }
    }
    for r in reports {
        let used: usize = r.nights.iter().map(|n| n.samples_used).sum();
        writeln!(
            w,
            "{},all,{:.6},{}",
            r.ac_name, r.overall_mean_fraction, used
        )?;
    }
    Ok(())
}

/// `hour,accuracy,n`.
pub fn write_accuracy_csv<W: Write>(mut w: W, profile: &AccuracyProfile) -> std::io::Result<()> {
    writeln!(w, "hour,accuracy,n")?;
    for r in &profile.rows {
        writeln!(w, "{},{:.6},{}", r.hour, r.accuracy, r.n)?;
    }
    Ok(())
}

/// `ac_name,start,end` for detected usage intervals.
pub fn write_usage_csv<W: Write>(
    mut w: W,
    usage: &[(String, Vec<UsageInterval>)],
) -> std::io::Result<()> {
    writeln!(w, "ac_name,start,end")?;
    for (name, intervals) in usage {
        for iv in intervals {
            writeln!(
                w,
                "{name},{},{}",
                iv.start.to_rfc3339_opts(SecondsFormat::AutoSi, false),
                iv.end.to_rfc3339_opts(SecondsFormat::AutoSi, false)
            )?;
        }
    }
    Ok(())
}
