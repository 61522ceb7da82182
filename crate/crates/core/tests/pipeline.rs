use chrono::{Datelike, Weekday};

use irhvac::detect::{
    ac_cycling_report, analyze_schedule, detect_ac_usage, EventKind, UsageParams,
};
use irhvac::ingest::{extract_series, load_frames, load_rois, screen_frames, QualityThresholds};
use irhvac::radiometry::{PlanckModel, RadiometricScene};
use irhvac::series::{read_series, resample_uniform, write_series, NightWindow, TemperatureSeries};
use irhvac::spectral::FrequencyBand;
use irhvac::synth::{
    emit_frames, generate, AcUnitSpec, FrameLayout, Scenario, ScenarioSpec, UsageWindow,
};

fn scenario(days: u32) -> Scenario {
    let mut spec = ScenarioSpec::office(days, 300, 0.05, 11);
    spec.ac_units.push(AcUnitSpec::new(
        "ac1",
        1440.0,
        0.5,
        vec![UsageWindow::new("21:00", "03:00").unwrap()],
    ));
    spec.ac_units
        .push(AcUnitSpec::new("idle", 1200.0, 0.5, vec![]));
    generate(&spec).unwrap()
}

/// Frames on disk back to one uniform series per ROI.
fn through_frames(sc: &Scenario, dir: &std::path::Path) -> Vec<TemperatureSeries> {
    let model = PlanckModel::default();
    let scene = RadiometricScene::default();
    let layout = FrameLayout::automatic(sc, "facade");
    let emitted = emit_frames(sc, &layout, &model, &scene, dir).unwrap();
    assert_eq!(emitted.frames, sc.wall.len());

    let loaded = load_frames(dir, "facade").unwrap();
    assert!(loaded.errors.is_empty() && loaded.duplicates.is_empty());
    let verdicts = screen_frames(&loaded.frames, &QualityThresholds::default());
    assert!(verdicts.iter().all(|v| v.accepted));
    load_rois(&emitted.rois_path)
        .unwrap()
        .iter()
        .map(|roi| {
            let raw = extract_series(&loaded.frames, &verdicts, roi, &model, &scene).unwrap();
            resample_uniform(&raw, sc.spec.step, 2).unwrap()
        })
        .collect()
}

#[test]
fn frames_reproduce_every_placed_series() {
    let sc = scenario(2);
    let dir = tempfile::tempdir().unwrap();
    let extracted = through_frames(&sc, dir.path());
    assert!(extracted.len() >= 4);
    for got in &extracted {
        let want = sc.series(&got.roi_name).unwrap();
        assert!(got.same_grid(want), "{}", got.roi_name);
        for i in 0..want.len() {
            let (a, b) = (got.get(i).unwrap(), want.get(i).unwrap());
            assert!((a - b).abs() < 1e-6, "{}[{i}]: {a} vs {b}", got.roi_name);
        }
    }
}

#[test]
fn extracted_series_recover_labels() {
    let sc = scenario(7);
    let dir = tempfile::tempdir().unwrap();
    let extracted = through_frames(&sc, &dir.path().join("frames"));

    // persist and reload, as a batch run would
    let reloaded: Vec<TemperatureSeries> = extracted
        .iter()
        .map(|s| {
            let path = dir.path().join(format!("{}.csv", s.roi_name));
            write_series(std::fs::File::create(&path).unwrap(), s).unwrap();
            read_series(&path, &s.roi_name, s.label).unwrap()
        })
        .collect();
    let by_name = |n: &str| reloaded.iter().find(|s| s.roi_name == n).unwrap();

    let report = analyze_schedule(by_name("window"), by_name("wall"), 1800, 4.0).unwrap();
    let events = report.events();
    assert_eq!(events.len(), sc.labels.events.len());
    for (f, t) in events.iter().zip(&sc.labels.events) {
        assert_eq!(f.kind, t.kind);
        assert!(
            (f.instant - t.instant).num_seconds().abs() <= 1800,
            "{} vs {}",
            f.instant,
            t.instant
        );
        assert_ne!(f.instant.weekday(), Weekday::Sun);
    }
    assert!(events.iter().any(|e| e.kind == EventKind::SwitchOff));

    let band = FrequencyBand::DUTY_CYCLE;
    let found = detect_ac_usage(by_name("ac1"), &band, &UsageParams::default()).unwrap();
    let truth = sc.usage_of("ac1");
    let interior: Vec<_> = truth
        .iter()
        .filter(|(s, e)| *s > sc.wall.start && *e < sc.wall.end())
        .collect();
    for (s, e) in interior {
        assert!(
            found
                .iter()
                .any(|f| (f.start - *s).num_seconds().abs() <= 900
                    && (f.end - *e).num_seconds().abs() <= 900),
            "no match for {s}..{e} in {found:?}"
        );
    }
    assert!(
        detect_ac_usage(by_name("idle"), &band, &UsageParams::default())
            .unwrap()
            .is_empty()
    );

    let night = NightWindow::new("20:00", "10:00").unwrap();
    let (busy, _) =
        ac_cycling_report(by_name("ac1"), &band, &UsageParams::default(), &night).unwrap();
    let (idle, _) =
        ac_cycling_report(by_name("idle"), &band, &UsageParams::default(), &night).unwrap();
    assert_eq!(idle.overall_mean_fraction, 0.0);
    let full: Vec<f64> = busy
        .nights
        .iter()
        .filter(|n| n.samples_used == 168)
        .map(|n| n.cycling_fraction)
        .collect();
    assert_eq!(full.len(), 6);
    // six of fourteen night hours
    assert!(
        full.iter().all(|f| (f - 6.0 / 14.0).abs() < 0.03),
        "{full:?}"
    );
}
