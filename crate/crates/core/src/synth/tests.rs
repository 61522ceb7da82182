use std::f64::consts::PI;

use chrono::{Datelike, Timelike, Weekday};

use super::*;
use crate::detect::analyze_schedule;
use crate::ingest::{
    extract_series, load_frames, load_rois, screen_frames, QualityReason, QualityThresholds,
};
use crate::radiometry::{PlanckModel, RadiometricScene};
use crate::series::resample_uniform;

fn quiet(days: u32, step: u32) -> ScenarioSpec {
    ScenarioSpec {
        days,
        step,
        noise_sigma: 0.0,
        ..ScenarioSpec::default()
    }
}

fn with_ac(mut spec: ScenarioSpec, duty_period: f64, usage: &[(&str, &str)]) -> ScenarioSpec {
    let windows = usage
        .iter()
        .map(|(s, e)| UsageWindow::new(s, e).unwrap())
        .collect();
    spec.ac_units
        .push(AcUnitSpec::new("ac1", duty_period, 0.5, windows));
    spec
}

fn bits(s: &TemperatureSeries) -> Vec<u64> {
    s.raw_values().iter().map(|v| v.to_bits()).collect()
}

#[test]
fn same_seed_gives_identical_output() {
    let mut spec = with_ac(
        ScenarioSpec::office(3, 300, 0.2, 11),
        1440.0,
        &[("20:00", "02:00")],
    );
    spec.cloud_cover = 0.5;
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    for (x, y) in a.all_series().into_iter().zip(b.all_series()) {
        assert_eq!(bits(x), bits(y), "{}", x.roi_name);
    }
    assert_eq!(a.labels, b.labels);

    spec.seed = 12;
    let c = generate(&spec).unwrap();
    assert_ne!(bits(&a.wall), bits(&c.wall));
}

#[test]
fn office_labels_follow_the_weekly_schedule() {
    let spec = ScenarioSpec::office(14, 300, 0.1, 0);
    let sc = generate(&spec).unwrap();
    assert_eq!(sc.wall.len(), 14 * 288);
    assert_eq!(sc.wall.start, spec.start());
    // 2022-03-07 is a Monday: two weeks hold ten weekdays, two Saturdays, two Sundays.
    assert_eq!(sc.labels.events.len(), 2 * 12);
    for pair in sc.labels.events.chunks(2) {
        let (on, off) = (&pair[0], &pair[1]);
        assert_eq!(on.kind, EventKind::SwitchOn);
        assert_eq!(off.kind, EventKind::SwitchOff);
        assert_eq!(on.instant.date_naive(), off.instant.date_naive());
        assert_eq!((on.instant.hour(), on.instant.minute()), (6, 0));
        let expected_off = if on.instant.weekday() == Weekday::Sat {
            18
        } else {
            22
        };
        assert_eq!(
            (off.instant.hour(), off.instant.minute()),
            (expected_off, 0)
        );
        assert_eq!(*on.instant.offset(), spec.utc_offset);
    }
    assert!(sc
        .labels
        .events
        .iter()
        .all(|e| e.instant.weekday() != Weekday::Sun));

    for (i, &on) in sc.labels.hvac_on.iter().enumerate() {
        let t = sc.wall.time_at(i);
        let h = t.hour();
        let expected = match t.weekday() {
            Weekday::Sun => false,
            Weekday::Sat => (6..18).contains(&h),
            _ => (6..22).contains(&h),
        };
        assert_eq!(on, expected, "{t}");
    }
}

#[test]
fn usage_labels_wrap_midnight_and_clip_to_the_scenario() {
    let spec = with_ac(quiet(3, 300), 1440.0, &[("22:00", "02:00")]);
    let sc = generate(&spec).unwrap();
    let usage = sc.usage_of("ac1");
    assert_eq!(usage.len(), 3);
    for (d, (s, e)) in usage.iter().enumerate().take(2) {
        assert_eq!(
            *s,
            spec.start() + Duration::days(d as i64) + Duration::hours(22)
        );
        assert_eq!(*e - *s, Duration::hours(4));
    }
    assert_eq!(usage[2].1, spec.end());

    let running = &sc.labels.compressor[0];
    let in_use = |t: Instant| usage.iter().any(|(s, e)| *s <= t && t < *e);
    for (i, &r) in running.iter().enumerate() {
        if r {
            assert!(in_use(sc.wall.time_at(i)));
        }
    }
    let on = running.iter().filter(|&&r| r).count();
    let used = (0..running.len())
        .filter(|&i| in_use(sc.wall.time_at(i)))
        .count();
    assert!(
        (on as f64 / used as f64 - 0.5).abs() < 0.05,
        "{on} of {used}"
    );
}

#[test]
fn selected_days_limit_usage() {
    let mut spec = with_ac(quiet(4, 300), 1440.0, &[("10:00", "12:00")]);
    spec.ac_units[0].days = Some(vec![1, 3]);
    let usage = spec.usage_intervals(&spec.ac_units[0]);
    let days: Vec<i64> = usage
        .iter()
        .map(|(s, _)| (*s - spec.start()).num_days())
        .collect();
    assert_eq!(days, vec![1, 3]);
}

/// Peak of the one-sided DFT magnitude, evaluated term by term.
fn direct_dft_peak(x: &[f64], step: f64) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let power = |k: usize| {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            let ang = -2.0 * PI * (j * k % n) as f64 / n as f64;
            re += (v - mean) * ang.cos();
            im += (v - mean) * ang.sin();
        }
        re * re + im * im
    };
    let best = (1..=n / 2)
        .max_by(|&a, &b| power(a).total_cmp(&power(b)))
        .unwrap();
    best as f64 / (n as f64 * step)
}

#[test]
fn condenser_duty_cycle_peaks_in_the_band() {
    let mut spec = with_ac(quiet(1, 60), 1440.0, &[("00:00", "23:59")]);
    spec.solar_amplitude = 0.0;
    spec.ambient_amplitude = 0.0;
    let sc = generate(&spec).unwrap();
    let x = &sc.condensers[0].raw_values()[..1440];
    let f = direct_dft_peak(x, 60.0);
    assert!((f - 1.0 / 1440.0).abs() < 1.0 / 1440.0 * 0.01, "{f}");
    assert!((0.0005..=0.0011).contains(&f));
}

#[test]
fn condenser_duty_cycle_survives_solar_forcing() {
    let sc = generate(&with_ac(quiet(1, 60), 1440.0, &[("00:00", "23:59")])).unwrap();
    let x = &sc.condensers[0].raw_values()[..1440];
    // Strip the slow forcing with a 24-minute running mean before looking for the peak.
    let smooth: Vec<f64> = (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(12);
            let hi = (i + 12).min(x.len() - 1);
            x[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let resid: Vec<f64> = x.iter().zip(&smooth).map(|(a, b)| a - b).collect();
    let f = direct_dft_peak(&resid, 60.0);
    assert!((f - 6.94e-4).abs() < 2e-5, "{f}");
}

#[test]
fn noise_free_facade_without_hvac_has_no_events() {
    let sc = generate(&quiet(7, 300)).unwrap();
    assert!(sc.labels.events.is_empty());
    assert!(sc.labels.hvac_on.iter().all(|&o| !o));
    let report = analyze_schedule(&sc.window, &sc.wall, 1800, 4.0).unwrap();
    assert!(report.events().is_empty(), "{:?}", report.events());
}

#[test]
fn hvac_cools_the_room_and_the_window() {
    let sc = generate(&ScenarioSpec::office(7, 300, 0.0, 0)).unwrap();
    let noon_monday = 12 * 12;
    let noon_sunday = 6 * 288 + 12 * 12;
    assert!((sc.indoor.get(noon_monday).unwrap() - sc.spec.hvac_setpoint).abs() < 0.01);
    assert!(sc.indoor.get(noon_sunday).unwrap() > sc.spec.hvac_setpoint + 2.0);
    let gap = |i: usize| sc.window.get(i).unwrap() - sc.wall.get(i).unwrap();
    assert!(gap(noon_monday) < gap(noon_sunday) - 1.0);
}

#[test]
fn rooms_track_usage() {
    let sc = generate(&with_ac(quiet(2, 300), 1440.0, &[("10:00", "16:00")])).unwrap();
    let room = &sc.rooms[0];
    assert_eq!(room.roi_name, "ac1_room");
    let at = |h: usize| room.get(288 + h * 12).unwrap();
    assert!((at(15) - sc.spec.ac_setpoint).abs() < 0.05);
    assert!(at(9) > at(15) + 1.0);
    assert!(at(20) > at(15) + 1.0);
}

#[test]
fn invalid_specs_are_rejected() {
    let base = ScenarioSpec::office(2, 300, 0.1, 0);
    let cases: Vec<(&str, Box<dyn Fn(&mut ScenarioSpec)>)> = vec![
        ("zero days", Box::new(|s| s.days = 0)),
        ("step not dividing a day", Box::new(|s| s.step = 7)),
        (
            "switch-off before switch-on",
            Box::new(|s| s.hvac.mon = Some(DailySchedule::new("22:00", "06:00").unwrap())),
        ),
        ("negative noise", Box::new(|s| s.noise_sigma = -0.1)),
        ("cloud cover above one", Box::new(|s| s.cloud_cover = 1.5)),
        (
            "duty period outside the band",
            Box::new(|s| s.ac_units.push(AcUnitSpec::new("a", 600.0, 0.5, vec![]))),
        ),
        (
            "duty fraction of one",
            Box::new(|s| s.ac_units.push(AcUnitSpec::new("a", 1440.0, 1.0, vec![]))),
        ),
        (
            "repeated ac name",
            Box::new(|s| {
                s.ac_units.push(AcUnitSpec::new("a", 1440.0, 0.5, vec![]));
                s.ac_units.push(AcUnitSpec::new("a", 1200.0, 0.5, vec![]));
            }),
        ),
        (
            "empty usage window",
            Box::new(|s| {
                let w = UsageWindow::new("10:00", "10:00").unwrap();
                s.ac_units.push(AcUnitSpec::new("a", 1440.0, 0.5, vec![w]));
            }),
        ),
        (
            "usage day beyond the scenario",
            Box::new(|s| {
                let mut ac = AcUnitSpec::new("a", 1440.0, 0.5, vec![]);
                ac.days = Some(vec![5]);
                s.ac_units.push(ac);
            }),
        ),
    ];
    for (what, mutate) in cases {
        let mut spec = base.clone();
        mutate(&mut spec);
        assert!(matches!(generate(&spec), Err(Error::Spec(_))), "{what}");
    }
    assert!(matches!(
        DailySchedule::new("25:00", "26:00"),
        Err(Error::Spec(_))
    ));
}

#[test]
fn out_of_band_duty_is_allowed_when_asked() {
    let mut spec = ScenarioSpec::office(1, 60, 0.1, 0);
    spec.ac_units
        .push(AcUnitSpec::new("slow", 3600.0, 0.5, vec![]));
    assert!(spec.validate().is_err());
    spec.allow_out_of_band = true;
    assert!(generate(&spec).is_ok());
}

#[test]
fn spec_json_roundtrip_and_defaults() {
    let spec = with_ac(
        ScenarioSpec::office(5, 300, 0.2, 9),
        1500.0,
        &[("21:00", "03:00")],
    );
    let json = serde_json::to_string(&spec).unwrap();
    assert!(json.contains("\"utc_offset\":\"+08:00\""));
    assert!(json.contains("\"on\":\"06:00\""));
    let back: ScenarioSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, spec);

    let minimal: ScenarioSpec =
        serde_json::from_str(r#"{"days": 2, "utc_offset": "-05:00"}"#).unwrap();
    assert_eq!(minimal.days, 2);
    assert_eq!(minimal.utc_offset.local_minus_utc(), -5 * 3600);
    assert_eq!(minimal.step, 300);
    assert!(serde_json::from_str::<ScenarioSpec>(r#"{"dayz": 2}"#).is_err());
    assert!(serde_json::from_str::<ScenarioSpec>(r#"{"utc_offset": "8"}"#).is_err());
}

fn extract_all(
    out: &std::path::Path,
    scene_id: &str,
    step: u32,
) -> Vec<(String, TemperatureSeries, Vec<QualityReason>)> {
    let loaded = load_frames(out, scene_id).unwrap();
    assert!(loaded.errors.is_empty(), "{:?}", loaded.errors);
    let verdicts = screen_frames(&loaded.frames, &QualityThresholds::default());
    let rois = load_rois(&out.join("rois.json")).unwrap();
    rois.iter()
        .map(|roi| {
            let raw = extract_series(
                &loaded.frames,
                &verdicts,
                roi,
                &PlanckModel::default(),
                &RadiometricScene::default(),
            )
            .unwrap();
            let series = resample_uniform(&raw, step, 0).unwrap();
            (
                roi.name.clone(),
                series,
                verdicts.iter().map(|v| v.reason).collect(),
            )
        })
        .collect()
}

#[test]
fn frames_reproduce_the_series() {
    let spec = with_ac(quiet(1, 600), 1440.0, &[("08:00", "14:00")]);
    let sc = generate(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let layout = FrameLayout::automatic(&sc, "facade");
    let emitted = emit_frames(
        &sc,
        &layout,
        &PlanckModel::default(),
        &RadiometricScene::default(),
        dir.path(),
    )
    .unwrap();
    assert_eq!(emitted.frames, sc.wall.len());
    let files = std::fs::read_dir(dir.path().join("facade"))
        .unwrap()
        .count();
    assert_eq!(files, sc.wall.len());
    assert!(dir.path().join("rois.json").is_file());

    let extracted = extract_all(dir.path(), "facade", spec.step);
    assert_eq!(extracted.len(), 3);
    for (name, series, reasons) in extracted {
        assert!(
            reasons.iter().all(|r| *r == QualityReason::Ok),
            "{name}: {reasons:?}"
        );
        let truth = sc.series(&name).unwrap();
        assert_eq!(series.start, truth.start);
        assert_eq!(series.len(), truth.len());
        for i in 0..truth.len() {
            let (a, b) = (series.get(i).unwrap(), truth.get(i).unwrap());
            assert!((a - b).abs() < 1e-6, "{name}[{i}]: {a} vs {b}");
        }
    }
}

#[test]
fn frames_honour_a_non_identity_scene() {
    let sc = generate(&quiet(1, 600)).unwrap();
    let scene = RadiometricScene::new(0.95, 0.9, 1000.0, 900.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let layout = FrameLayout::automatic(&sc, "s");
    emit_frames(&sc, &layout, &PlanckModel::default(), &scene, dir.path()).unwrap();
    let loaded = load_frames(dir.path(), "s").unwrap();
    let verdicts = screen_frames(&loaded.frames, &QualityThresholds::default());
    let rois = load_rois(&dir.path().join("rois.json")).unwrap();
    let wall = rois.iter().find(|r| r.name == "wall").unwrap();
    let raw = extract_series(
        &loaded.frames,
        &verdicts,
        wall,
        &PlanckModel::default(),
        &scene,
    )
    .unwrap();
    for (s, truth) in raw.samples.iter().zip(sc.wall.raw_values()) {
        assert!((s.value.unwrap() - truth).abs() < 1e-6);
    }
}

#[test]
fn washed_out_frames_are_rejected() {
    let sc = generate(&quiet(1, 600)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut layout = FrameLayout::automatic(&sc, "facade");
    layout.washout = vec![20, 21, 30];
    emit_frames(
        &sc,
        &layout,
        &PlanckModel::default(),
        &RadiometricScene::default(),
        dir.path(),
    )
    .unwrap();
    let extracted = extract_all(dir.path(), "facade", 600);
    let (_, wall, reasons) = &extracted[0];
    for (i, r) in reasons.iter().enumerate() {
        if layout.washout.contains(&i) {
            assert_eq!(*r, QualityReason::LowContrast, "frame {i}");
            assert!(wall.is_missing(i));
        } else {
            assert_eq!(*r, QualityReason::Ok, "frame {i}");
        }
    }
}

#[test]
fn overlapping_or_outside_placements_are_layout_errors() {
    let sc = generate(&with_ac(quiet(1, 600), 1440.0, &[])).unwrap();
    let model = PlanckModel::default();
    let scene = RadiometricScene::default();
    let dir = tempfile::tempdir().unwrap();

    let mut overlap = FrameLayout::automatic(&sc, "f");
    overlap.placements[1].x0 = 5;
    let err = emit_frames(&sc, &overlap, &model, &scene, dir.path()).unwrap_err();
    assert!(
        matches!(err, Error::Layout(ref m) if m.contains("overlaps")),
        "{err}"
    );

    let mut outside = FrameLayout::automatic(&sc, "f");
    outside.placements[2].x1 = 40;
    assert!(matches!(
        emit_frames(&sc, &outside, &model, &scene, dir.path()),
        Err(Error::Layout(_))
    ));

    let mut unknown = FrameLayout::automatic(&sc, "f");
    unknown.placements[0].series = "roof".into();
    assert!(matches!(
        emit_frames(&sc, &unknown, &model, &scene, dir.path()),
        Err(Error::Layout(_))
    ));
    assert!(!dir.path().join("f").exists());
}

#[test]
fn automatic_layout_is_valid_for_many_units() {
    let mut spec = quiet(1, 600);
    for k in 0..11 {
        spec.ac_units
            .push(AcUnitSpec::new(format!("ac{k}"), 1440.0, 0.5, vec![]));
    }
    let sc = generate(&spec).unwrap();
    let layout = FrameLayout::automatic(&sc, "f");
    layout.validate().unwrap();
    assert_eq!(layout.placements.len(), 13);
    let rois = layout.rois(&sc).unwrap();
    assert_eq!(
        rois.iter().filter(|r| r.label == RoiLabel::AcUnit).count(),
        11
    );
}
