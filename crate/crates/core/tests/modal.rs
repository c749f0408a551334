use std::f64::consts::PI;

use gfl_stability::modal::{
    classify_stability, dominant_mode, era, matrix_pencil, mode_energy, write_modes_csv,
    ClassifyConfig, EstimatorConfig, ModeEstimate, RingdownWindow, Verdict,
};
use gfl_stability::sim::Trajectory;

fn synth(modes: &[(f64, f64, f64, f64)], fs: f64, secs: f64) -> Vec<f64> {
    let n = (fs * secs).round() as usize;
    (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            modes
                .iter()
                .map(|&(a, sigma, f, ph)| a * (sigma * t).exp() * (2.0 * PI * f * t + ph).cos())
                .sum()
        })
        .collect()
}

fn osc(modes: &[ModeEstimate], duration: f64) -> Vec<ModeEstimate> {
    let mut v: Vec<_> = modes
        .iter()
        .filter(|m| !m.is_offset(duration))
        .copied()
        .collect();
    v.sort_by(|a, b| a.freq_hz.total_cmp(&b.freq_hz));
    v
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn single_mode_recovered_by_both_estimators() {
    let y = synth(&[(1.0, -0.1, 1.5, 0.0)], 100.0, 10.0);
    let w = RingdownWindow::new(&y, 0.01).unwrap();
    let dr = 100.0 * 0.1 / (0.1f64.powi(2) + (2.0 * PI * 1.5).powi(2)).sqrt();
    for modes in [
        matrix_pencil(&w, &EstimatorConfig::default()).unwrap(),
        era(&w, &EstimatorConfig::default()).unwrap(),
    ] {
        let m = osc(&modes, w.duration());
        assert_eq!(m.len(), 1, "{modes:?}");
        assert!(rel(m[0].freq_hz, 1.5) < 1e-6);
        assert!(rel(m[0].damping_pct, dr) < 1e-6);
        assert!(rel(m[0].amplitude, 1.0) < 1e-6);
    }
}

#[test]
fn two_modes_with_even_energy() {
    let y = synth(
        &[(1.0, -0.05, 0.8, 0.3), (1.0, -0.05, 2.9, -1.0)],
        100.0,
        20.0,
    );
    let w = RingdownWindow::new(&y, 0.01).unwrap();
    let modes = matrix_pencil(&w, &EstimatorConfig::default()).unwrap();
    let m = osc(&modes, w.duration());
    assert_eq!(m.len(), 2, "{modes:?}");
    assert!(rel(m[0].freq_hz, 0.8) < 1e-6 && rel(m[1].freq_hz, 2.9) < 1e-6);
    assert!((m[0].energy_pct - 50.0).abs() < 2.0, "{m:?}");
    assert!((m[1].energy_pct - 50.0).abs() < 2.0, "{m:?}");
    let recomputed =
        mode_energy(&modes, &EstimatorConfig::default().condition(&w).unwrap()).unwrap();
    for (a, b) in modes.iter().zip(&recomputed) {
        assert!((a.energy_pct - b).abs() < 1e-6);
    }
}

#[test]
fn growing_mode_is_recovered() {
    let y = synth(&[(0.01, 0.173, 0.8, 0.0)], 100.0, 15.0);
    let w = RingdownWindow::new(&y, 0.01).unwrap();
    let m = osc(&era(&w, &EstimatorConfig::default()).unwrap(), w.duration());
    let sigma = m[0].pole.0;
    assert!(rel(sigma, 0.173) < 1e-6);
    assert!(m[0].damping_pct < 0.0);
}

#[test]
fn constant_window_gives_no_modes() {
    let w = RingdownWindow::new(&[2.5; 400], 0.01).unwrap();
    assert!(matrix_pencil(&w, &EstimatorConfig::default())
        .unwrap()
        .is_empty());
    assert!(era(&w, &EstimatorConfig::default()).unwrap().is_empty());
}

#[test]
fn shift_invariance() {
    let y = synth(&[(1.0, -0.2, 1.1, 0.4), (0.4, -0.5, 3.3, 1.0)], 50.0, 12.0);
    let a = RingdownWindow::new(&y[..500], 0.02).unwrap();
    let b = RingdownWindow::new(&y[1..501], 0.02).unwrap();
    let cfg = EstimatorConfig::default();
    let ma = osc(&matrix_pencil(&a, &cfg).unwrap(), a.duration());
    let mb = osc(&matrix_pencil(&b, &cfg).unwrap(), b.duration());
    assert_eq!(ma.len(), mb.len());
    for (p, q) in ma.iter().zip(&mb) {
        assert!(rel(p.freq_hz, q.freq_hz) < 1e-6, "{ma:?} {mb:?}");
        assert!(rel(p.freq_hz, q.freq_hz) < 1e-6);
        assert!(rel(p.damping_pct, q.damping_pct) < 1e-6);
    }
}

#[test]
fn too_short_window_rejected() {
    assert!(RingdownWindow::new(&[1.0, 2.0], 0.1).is_err());
    assert!(RingdownWindow::new(&[0.0; 20], 0.0).is_err());
}

#[test]
fn modes_csv_header() {
    let y = synth(&[(1.0, -0.1, 1.5, 0.0)], 100.0, 5.0);
    let w = RingdownWindow::new(&y, 0.01).unwrap();
    let modes = matrix_pencil(&w, &EstimatorConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_modes_csv(&modes, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(
        text.starts_with("frequency_hz,dr_percent,amplitude,phase_rad,energy_percent,estimator\n")
    );
}

fn traj_of(y: Vec<f64>, dt: f64) -> Trajectory {
    Trajectory {
        times: (0..y.len()).map(|k| k as f64 * dt).collect(),
        names: vec!["p".into()],
        traces: vec![y],
        ..Default::default()
    }
}

#[test]
fn decaying_signal_classified_stable() {
    // DR = 5% at 1 Hz
    let w = 2.0 * PI;
    let sigma = -0.05 * w / (1.0f64 - 0.0025).sqrt();
    let traj = traj_of(synth(&[(0.1, sigma, 1.0, 0.0)], 200.0, 20.0), 0.005);
    let a = classify_stability(&traj, "p", 0.0, &ClassifyConfig::default()).unwrap();
    assert_eq!(a.verdict, Verdict::Stable);
    assert!((a.dominant.unwrap().damping_pct - 5.0).abs() < 1e-4);
}

#[test]
fn growing_signal_classified_unstable() {
    let traj = traj_of(synth(&[(0.01, 0.05, 2.0, 0.0)], 200.0, 20.0), 0.005);
    let a = classify_stability(&traj, "p", 0.0, &ClassifyConfig::default()).unwrap();
    assert_eq!(a.verdict, Verdict::Unstable);
}

#[test]
fn divergence_marker_forces_unstable() {
    let mut traj = traj_of(synth(&[(0.01, -0.5, 2.0, 0.0)], 200.0, 20.0), 0.005);
    traj.divergence = Some(19.0);
    let a = classify_stability(&traj, "p", 0.0, &ClassifyConfig::default()).unwrap();
    assert_eq!(a.verdict, Verdict::Unstable);
}

#[test]
fn short_window_is_insufficient() {
    let traj = traj_of(synth(&[(0.1, -0.05, 0.2, 0.0)], 200.0, 8.0), 0.005);
    let a = classify_stability(&traj, "p", 0.0, &ClassifyConfig::default()).unwrap();
    assert_eq!(a.verdict, Verdict::InsufficientData, "{:?}", a.dominant);
}

#[test]
fn offset_modes_are_not_dominant() {
    let y: Vec<f64> = synth(&[(0.2, -0.4, 1.0, 0.0)], 100.0, 10.0)
        .iter()
        .enumerate()
        .map(|(k, v)| v + 1.0 - (-(k as f64) * 0.01 * 0.001).exp())
        .collect();
    let w = RingdownWindow::new(&y, 0.01).unwrap();
    let modes = matrix_pencil(&w, &EstimatorConfig::default()).unwrap();
    let d = dominant_mode(&modes, w.duration()).unwrap();
    assert!((d.freq_hz - 1.0).abs() < 1e-6);
}
