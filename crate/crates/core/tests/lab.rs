use gfl_stability::lab::{
    bode_export, mitigation_compare, run_cell, scr_study, sweep, write_scr_csv, Grid, Mitigation,
    SweepSpec, MAP_CORNER_HEADER, SCR_HEADER,
};
use gfl_stability::lti::log_grid;
use gfl_stability::modal::ClassifyConfig;
use gfl_stability::scenarios::{ChannelTarget, ScenarioFile};

fn short_smib() -> ScenarioFile {
    ScenarioFile {
        horizon: 4.0,
        ..ScenarioFile::default()
    }
}

fn small_grid() -> Grid {
    Grid {
        td: vec![0.0, 0.05, 0.1],
        ts: vec![0.0, 0.1],
    }
}

#[test]
fn sweep_result_does_not_depend_on_worker_count() {
    let f = short_smib();
    let c = ClassifyConfig::default();
    let one = sweep(&f, ChannelTarget::All, &small_grid(), Some(1), &c).unwrap();
    let three = sweep(&f, ChannelTarget::All, &small_grid(), Some(3), &c).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    one.write_json(&mut a).unwrap();
    three.write_json(&mut b).unwrap();
    assert_eq!(a, b);
    assert_eq!(one.cells.len(), 6);
}

#[test]
fn sweep_cells_equal_single_runs() {
    let f = short_smib();
    let c = ClassifyConfig::default();
    let map = sweep(&f, ChannelTarget::All, &small_grid(), None, &c).unwrap();
    for (i, &td) in map.td.iter().enumerate() {
        for (j, &ts) in map.ts.iter().enumerate() {
            let single = run_cell(&f.with_channels(ChannelTarget::All, td, ts), td, ts, &c);
            assert_eq!(map.cell(i, j), &single);
        }
    }
}

#[test]
fn identical_mitigation_changes_nothing() {
    let mut f = short_smib();
    let tp = f.smib_config().plant.p_filter_time_constant;
    f.overrides.tq = Some(tp);
    let r = mitigation_compare(
        &f,
        Mitigation::FilterTimeConstants(tp),
        ChannelTarget::All,
        &small_grid(),
        None,
        &ClassifyConfig::default(),
    )
    .unwrap();
    assert_eq!(r.stable_delta(), 0);
    assert_eq!((r.gained, r.lost), (0, 0));
    assert_eq!(r.baseline.cells, r.variant.cells);
}

#[test]
fn map_csv_layout() {
    let map = sweep(
        &short_smib(),
        ChannelTarget::All,
        &small_grid(),
        None,
        &ClassifyConfig::default(),
    )
    .unwrap();
    let mut buf = Vec::new();
    map.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], format!("{MAP_CORNER_HEADER},0,0.1"));
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,"));
    for l in &lines[1..] {
        for v in l.split(',').skip(1) {
            assert!(
                ["stable", "unstable", "indeterminate", "insufficient_data"].contains(&v),
                "{v}"
            );
        }
    }
}

#[test]
fn bode_magnitude_is_delay_invariant() {
    let study = bode_export(
        &short_smib(),
        &[0.0, 0.05, 0.1, 0.3],
        0,
        &log_grid(1.0, 1000.0, 200),
    )
    .unwrap();
    let base = &study.curves[0].points;
    for c in &study.curves[1..] {
        for (p, q) in base.iter().zip(&c.points) {
            assert_eq!(p.magnitude_db, q.magnitude_db);
            let lag = (q.omega * c.td).to_degrees();
            assert!((p.phase_deg - q.phase_deg - lag).abs() < 1e-9);
        }
    }
}

#[test]
fn scr_study_rows_follow_the_input_order() {
    let rows = scr_study(
        &short_smib(),
        &[5.0, 2.0],
        0.0,
        0.0,
        Some(2),
        &ClassifyConfig::default(),
    )
    .unwrap();
    assert_eq!(
        rows.iter().map(|r| r.scr).collect::<Vec<_>>(),
        vec![5.0, 2.0]
    );
    let mut buf = Vec::new();
    write_scr_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), SCR_HEADER.join(","));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn grid_rejects_bad_axes() {
    assert!(Grid {
        td: vec![],
        ts: vec![0.0]
    }
    .validate()
    .is_err());
    assert!(Grid {
        td: vec![-0.1],
        ts: vec![0.0]
    }
    .validate()
    .is_err());
    let g = Grid::uniform(26, 0.5);
    assert_eq!(g.td.len(), 26);
    assert_eq!(g.td[1], 0.02);
    assert_eq!(g.ts[25], 0.5);
}

#[test]
fn repository_sweep_file_loads() {
    let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios/sweep_smib_scr5.toml");
    let spec = SweepSpec::from_file(&p).unwrap();
    let base = spec.base().unwrap();
    base.validate().unwrap();
    assert_eq!(spec.axes().td.len(), 6);
}
