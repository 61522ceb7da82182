use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use irhvac::ingest::RoiLabel;
use irhvac::series::read_series;

fn irhvac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irhvac"))
        .args(args)
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert_eq!(
        code(&o),
        0,
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&o.stdout),
        stderr(&o)
    );
    o
}

const OFFICE: &str = r#""hvac": {
    "mon": {"on": "06:00", "off": "22:00"}, "tue": {"on": "06:00", "off": "22:00"},
    "wed": {"on": "06:00", "off": "22:00"}, "thu": {"on": "06:00", "off": "22:00"},
    "fri": {"on": "06:00", "off": "22:00"}, "sat": {"on": "06:00", "off": "18:00"}}"#;

fn write_spec(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("spec.json");
    std::fs::write(&path, format!("{{{body}}}")).unwrap();
    path
}

fn synth(dir: &Path, body: &str, frames: bool) -> PathBuf {
    let spec = write_spec(dir, body);
    let out = dir.join("syn");
    let mut args = vec!["synth", p(&spec), "--out", p(&out), "--deterministic"];
    if !frames {
        args.push("--no-frames");
    }
    ok(irhvac(&args));
    out
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn extracted_series_match_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#""days": 1, "step": 300, "noise_sigma": 0.0,
        "ac_units": [{"name": "ac1", "duty_period": 1440, "duty_fraction": 0.5, "usage": [{"start": "08:00", "end": "14:00"}]}]"#;
    let syn = synth(dir.path(), body, true);
    let run = dir.path().join("run");
    let o = ok(irhvac(&[
        "extract",
        "--frames",
        p(&syn.join("frames")),
        "--rois",
        p(&syn.join("frames/rois.json")),
        "--out",
        p(&run),
    ]));
    assert!(String::from_utf8_lossy(&o.stdout).contains("288 frames, 0 rejected"));
    for (name, label) in [
        ("wall", RoiLabel::Wall),
        ("window", RoiLabel::Window),
        ("ac1", RoiLabel::AcUnit),
    ] {
        let got = read_series(&run.join(format!("series/{name}.csv")), name, label).unwrap();
        let want = read_series(&syn.join(format!("series/{name}.csv")), name, label).unwrap();
        assert_eq!(got.start, want.start);
        assert_eq!(got.len(), want.len());
        for i in 0..want.len() {
            let (a, b) = (got.get(i).unwrap(), want.get(i).unwrap());
            assert!((a - b).abs() < 1e-6, "{name}[{i}]: {a} vs {b}");
        }
    }
    let quality = read(&run.join("quality.csv"));
    assert_eq!(quality.lines().count(), 289);
    assert!(quality.lines().skip(1).all(|l| l.ends_with(",true,ok")));
    assert_eq!(read(&run.join("skipped.csv")), "scene_id,problem\n");
    let index = read(&run.join("series/index.csv"));
    assert!(index.contains("ac1,ac_unit,ac1.csv"), "{index}");
}

#[test]
fn empty_frame_directory_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("frames");
    std::fs::create_dir_all(frames.join("facade")).unwrap();
    let rois = dir.path().join("rois.json");
    std::fs::write(
        &rois,
        r#"[{"name": "wall", "scene_id": "facade", "label": "wall", "polygon": [[0,0],[2,0],[2,2],[0,2]]}]"#,
    )
    .unwrap();
    let o = irhvac(&[
        "extract",
        "--frames",
        p(&frames),
        "--rois",
        p(&rois),
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("no valid frames"));
}

#[test]
fn bad_roi_file_exits_3_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let rois = dir.path().join("rois.json");
    std::fs::write(&rois, r#"[{"name": "wall", "scene_id": "facade", "label": "wall", "polygon": [[0,0],[2,0],[2,2]], "colour": 3}]"#)
        .unwrap();
    let o = irhvac(&[
        "extract",
        "--frames",
        p(dir.path()),
        "--rois",
        p(&rois),
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));

    std::fs::write(
        &rois,
        r#"[{"name": "wall", "scene_id": "facade", "polygon": [[0,0],[2,0],[2,2]]}]"#,
    )
    .unwrap();
    let o = irhvac(&[
        "extract",
        "--frames",
        p(dir.path()),
        "--rois",
        p(&rois),
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("label"), "{}", stderr(&o));
}

#[test]
fn malformed_frames_are_skipped_and_logged() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#""days": 1, "step": 1800, "noise_sigma": 0.0"#;
    let syn = synth(dir.path(), body, true);
    let scene = syn.join("frames/facade");
    std::fs::write(
        scene.join("2022-03-07T23:59:00+08:00.csv"),
        "# 2,2\n1,2\n3\n",
    )
    .unwrap();
    std::fs::write(scene.join("not-a-time.csv"), "# 1,1\n5\n").unwrap();
    let run = dir.path().join("run");
    let o = ok(irhvac(&[
        "extract",
        "--frames",
        p(&syn.join("frames")),
        "--rois",
        p(&syn.join("frames/rois.json")),
        "--out",
        p(&run),
    ]));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 files skipped"));
    assert!(stderr(&o).contains("not-a-time"));
    assert_eq!(read(&run.join("skipped.csv")).lines().count(), 3);
}

fn schedule(series: &Path, out: &Path) -> Output {
    irhvac(&[
        "schedule",
        "--series",
        p(series),
        "--out",
        p(out),
        "--deterministic",
    ])
}

#[test]
fn schedule_reports_weekday_events_and_a_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let syn = synth(
        dir.path(),
        &format!(r#""days": 7, "step": 300, "noise_sigma": 0.05, "seed": 2, {OFFICE}"#),
        false,
    );
    let out = dir.path().join("sched");
    ok(schedule(&syn.join("series"), &out));
    let csv = read(&out.join("schedule.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("date,switch_on,switch_off,on_score,off_score")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);
    for (k, r) in rows.iter().enumerate() {
        if k == 6 {
            assert_eq!(r[1..], ["", "", "", ""], "Sunday {r:?}");
        } else {
            assert!(!r[1].is_empty() && !r[2].is_empty(), "{r:?}");
        }
    }
    let svg = read(&out.join("schedule_heatmap.svg"));
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert!(!svg.contains("<!--"));
    assert!(read(&out.join("slope_grid.csv")).lines().count() == 8);
}

#[test]
fn schedule_without_hvac_has_empty_event_columns() {
    let dir = tempfile::tempdir().unwrap();
    let syn = synth(
        dir.path(),
        r#""days": 3, "step": 300, "noise_sigma": 0.0"#,
        false,
    );
    let out = dir.path().join("sched");
    ok(schedule(&syn.join("series"), &out));
    let csv = read(&out.join("schedule.csv"));
    assert_eq!(csv.lines().count(), 4);
    for l in csv.lines().skip(1) {
        assert!(l.ends_with(",,,,"), "{l}");
    }
}

#[test]
fn schedule_needs_a_full_day() {
    let dir = tempfile::tempdir().unwrap();
    let syn = synth(
        dir.path(),
        r#""days": 1, "step": 300, "noise_sigma": 0.0"#,
        false,
    );
    let series = syn.join("series");
    for name in ["wall.csv", "window.csv"] {
        let text = read(&series.join(name));
        let half: Vec<&str> = text.lines().take(100).collect();
        std::fs::write(series.join(name), half.join("\n") + "\n").unwrap();
    }
    let o = schedule(&series, &dir.path().join("sched"));
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn schedule_without_series_index_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = schedule(dir.path(), dir.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

fn acreport(series: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "acreport",
        "--series",
        p(series),
        "--out",
        p(out),
        "--deterministic",
    ];
    args.extend_from_slice(extra);
    irhvac(&args)
}

fn cycling_means(csv: &str) -> Vec<(String, f64)> {
    csv.lines()
        .filter(|l| l.contains(",all,"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn nine_acs_are_ordered_by_nightly_usage() {
    let dir = tempfile::tempdir().unwrap();
    let units: Vec<String> = (0..9)
        .map(|k| {
            let usage = if k == 0 {
                String::new()
            } else {
                format!(r#"{{"start": "22:00", "end": "{:02}:00"}}"#, (22 + k) % 24)
            };
            format!(r#"{{"name": "ac{k}", "duty_period": 1440, "duty_fraction": 0.5, "usage": [{usage}]}}"#)
        })
        .collect();
    let body = format!(
        r#""days": 5, "step": 300, "noise_sigma": 0.05, "seed": 4, "ac_units": [{}]"#,
        units.join(",")
    );
    let syn = synth(dir.path(), &body, false);
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"night": {"start": "22:00", "end": "06:00"}}"#).unwrap();
    let out = dir.path().join("ac");
    ok(acreport(&syn.join("series"), &out, &["--config", p(&cfg)]));
    let means = cycling_means(&read(&out.join("cycling.csv")));
    assert_eq!(means.len(), 9);
    assert_eq!(means[0], ("ac0".to_string(), 0.0));
    for w in means.windows(2) {
        assert!(w[1].1 > w[0].1, "{means:?}");
    }
    let svg = read(&out.join("cycling_heatmap.svg"));
    roxmltree::Document::parse(&svg).unwrap();
    assert!(!out.join("accuracy.csv").exists());
}

#[test]
fn ground_truth_equal_to_prediction_is_fully_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#""days": 3, "step": 300, "noise_sigma": 0.05, "seed": 1,
        "ac_units": [{"name": "ac1", "duty_period": 1440, "duty_fraction": 0.5, "usage": [{"start": "10:00", "end": "23:20"}]}]"#;
    let syn = synth(dir.path(), body, false);
    let out = dir.path().join("ac");
    ok(acreport(&syn.join("series"), &out, &[]));
    let usage = read(&out.join("usage.csv"));
    let spans: Vec<(
        chrono::DateTime<chrono::FixedOffset>,
        chrono::DateTime<chrono::FixedOffset>,
    )> = usage
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                chrono::DateTime::parse_from_rfc3339(f[1]).unwrap(),
                chrono::DateTime::parse_from_rfc3339(f[2]).unwrap(),
            )
        })
        .collect();
    assert_eq!(spans.len(), 3);
    let condenser = read_series(&syn.join("series/ac1.csv"), "ac1", RoiLabel::AcUnit).unwrap();
    let mut room = String::from("timestamp,temperature_k,missing\n");
    for i in 0..condenser.len() {
        let t = condenser.time_at(i);
        let on = spans.iter().any(|(s, e)| *s <= t && t < *e);
        room.push_str(&format!(
            "{},{},false\n",
            t.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, false),
            if on { 297.0 } else { 303.0 }
        ));
    }
    let truth = dir.path().join("room.csv");
    std::fs::write(&truth, room).unwrap();
    let arg = format!("ac1={}", p(&truth));
    ok(acreport(
        &syn.join("series"),
        &out,
        &["--ground-truth", &arg],
    ));
    let acc = read(&out.join("accuracy.csv"));
    let rows: Vec<&str> = acc.lines().skip(1).collect();
    assert_eq!(rows.len(), 24);
    for r in rows {
        assert_eq!(r.split(',').nth(1), Some("1.000000"), "{r}");
    }
}

#[test]
fn unused_ac_gets_a_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#""days": 2, "step": 300, "noise_sigma": 0.05,
        "ac_units": [{"name": "spare", "duty_period": 1440, "duty_fraction": 0.5}]"#;
    let syn = synth(dir.path(), body, false);
    let out = dir.path().join("ac");
    ok(acreport(&syn.join("series"), &out, &[]));
    let means = cycling_means(&read(&out.join("cycling.csv")));
    assert_eq!(means, vec![("spare".to_string(), 0.0)]);
    assert_eq!(read(&out.join("usage.csv")), "ac_name,start,end\n");
}

#[test]
fn acreport_without_usable_nights_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#""days": 1, "step": 300, "noise_sigma": 0.05,
        "ac_units": [{"name": "ac1", "duty_period": 1440, "duty_fraction": 0.5, "usage": [{"start": "10:00", "end": "16:00"}]}]"#;
    let syn = synth(dir.path(), body, false);
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"night": {"start": "23:30", "end": "23:50"}}"#).unwrap();
    let series = syn.join("series");
    let text = read(&series.join("ac1.csv"));
    let day: Vec<&str> = text.lines().take(1 + 23 * 12).collect();
    std::fs::write(series.join("ac1.csv"), day.join("\n") + "\n").unwrap();
    let o = acreport(&series, &dir.path().join("ac"), &["--config", p(&cfg)]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn acreport_needs_an_ac_series() {
    let dir = tempfile::tempdir().unwrap();
    let syn = synth(dir.path(), r#""days": 1, "step": 300"#, false);
    let o = acreport(&syn.join("series"), dir.path(), &[]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let o = acreport(
        &syn.join("series"),
        dir.path(),
        &["--ground-truth", "ghost=x.csv"],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_scenarios_and_layouts_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        r#""days": 1, "ac_units": [{"name": "ac1", "duty_period": 300, "duty_fraction": 0.5}]"#,
    );
    let o = irhvac(&["synth", p(&spec), "--out", p(&dir.path().join("a"))]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));

    let spec = write_spec(dir.path(), r#""days": 1, "step": 1800"#);
    let layout = dir.path().join("layout.json");
    std::fs::write(
        &layout,
        r#"{"scene_id": "s", "width": 10, "height": 10, "placements": [
            {"series": "wall", "x0": 0, "y0": 0, "x1": 5, "y1": 5},
            {"series": "window", "x0": 4, "y0": 4, "x1": 8, "y1": 8}]}"#,
    )
    .unwrap();
    let o = irhvac(&[
        "synth",
        p(&spec),
        "--layout",
        p(&layout),
        "--out",
        p(&dir.path().join("b")),
    ]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));
    assert!(stderr(&o).contains("overlaps"));
}

#[test]
fn scenario_files_are_checked_for_format() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), r#""dayz": 1"#);
    let o = irhvac(&["synth", p(&spec), "--out", p(dir.path())]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("dayz"));
}

#[test]
fn usage_and_config_errors() {
    assert_eq!(code(&irhvac(&[])), 64);
    assert_eq!(code(&irhvac(&["frobnicate"])), 64);
    assert_eq!(code(&irhvac(&["schedule", "--bogus"])), 64);
    assert_eq!(code(&irhvac(&["--help"])), 0);
    let help = String::from_utf8(irhvac(&["--help"]).stdout).unwrap();
    assert!(help.contains("64  command-line usage error"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"k_mad": -1}"#).unwrap();
    let o = irhvac(&["schedule", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(code(&o), 1);
    std::fs::write(&cfg, r#"{"kmad": 4}"#).unwrap();
    let o = irhvac(&["schedule", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("kmad"));
    let o = irhvac(&["schedule", "--config", p(&dir.path().join("absent.json"))]);
    assert_eq!(code(&o), 1);
    let o = irhvac(&["schedule"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("--out"));
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((
                    path.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn pipeline(dir: &Path, spec: &Path, flags: &[&str]) {
    let syn = dir.join("syn");
    let run = dir.join("run");
    let with = |a: Vec<&str>| {
        let mut a: Vec<String> = a.into_iter().map(String::from).collect();
        a.extend(flags.iter().map(|f| f.to_string()));
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        ok(irhvac(&a));
    };
    with(vec!["synth", p(spec), "--out", p(&syn)]);
    with(vec![
        "extract",
        "--frames",
        p(&syn.join("frames")),
        "--rois",
        p(&syn.join("frames/rois.json")),
        "--out",
        p(&run),
    ]);
    with(vec!["schedule", "--out", p(&run)]);
    let truth = format!("ac1={}", p(&syn.join("series/ac1_room.csv")));
    with(vec!["acreport", "--out", p(&run), "--ground-truth", &truth]);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        &format!(
            r#""days": 3, "step": 300, "noise_sigma": 0.05, "seed": 9, {OFFICE},
            "ac_units": [{{"name": "ac1", "duty_period": 1440, "duty_fraction": 0.5, "usage": [{{"start": "19:00", "end": "02:00"}}]}}]"#
        ),
    );
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    pipeline(&a, &spec, &["--deterministic"]);
    pipeline(&b, &spec, &["--deterministic"]);
    pipeline(&c, &spec, &[]);
    let (ta, tb, tc) = (tree(&a), tree(&b), tree(&c));
    assert!(ta.len() > 20);
    assert_eq!(ta, tb);
    assert_eq!(ta.len(), tc.len());
    for ((pa, ba), (pc, bc)) in ta.iter().zip(&tc) {
        assert_eq!(pa, pc);
        if pa.extension().is_some_and(|e| e == "svg") {
            let strip = |b: &[u8]| {
                String::from_utf8_lossy(b)
                    .lines()
                    .filter(|l| !l.starts_with("<!-- generated "))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            assert_ne!(ba, bc, "{pa:?} should carry a stamp");
            assert_eq!(strip(ba), strip(bc), "{pa:?}");
        } else {
            assert_eq!(ba, bc, "{pa:?}");
        }
    }
}
