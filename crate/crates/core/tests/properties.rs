use std::f64::consts::PI;

use proptest::prelude::*;

use gfl_stability::lti::{
    bode_data, delayed_magnitude, make_second_order, pade_delay, FrequencyResponse, SecondOrderSpec,
};
use gfl_stability::modal::{era, matrix_pencil, EstimatorConfig, ModeEstimate, RingdownWindow};
use gfl_stability::sim::{
    integrate, linearize, ChannelSpec, DynamicSystem, IntegratorConfig, PulseDisturbance,
    SampledDelayChannel, SecondOrderLoop,
};
use gfl_stability::zoh::zoh_discretize;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn oscillatory(modes: &[ModeEstimate], duration: f64) -> Vec<ModeEstimate> {
    let mut v: Vec<_> = modes
        .iter()
        .filter(|m| !m.is_offset(duration) && m.freq_hz > 0.0)
        .copied()
        .collect();
    v.sort_by(|a, b| a.freq_hz.total_cmp(&b.freq_hz));
    v
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn mp_and_era_recover_noiseless_modes(
        f1 in 0.2f64..2.0,
        gap in 0.5f64..3.0,
        dr1 in 0.5f64..15.0,
        dr2 in 0.5f64..15.0,
        a1 in 0.3f64..2.0,
        a2 in 0.3f64..2.0,
        ph in -3.0f64..3.0,
    ) {
        let f2 = f1 + gap;
        let modes = [(a1, f1, dr1, ph), (a2, f2, dr2, 0.0)];
        let sigma = |f: f64, dr: f64| {
            let z = dr / 100.0;
            -z * 2.0 * PI * f / (1.0 - z * z).sqrt()
        };
        let fs = 50.0;
        let y: Vec<f64> = (0..1000)
            .map(|k| {
                let t = k as f64 / fs;
                modes.iter().map(|&(a, f, dr, p)| a * (sigma(f, dr) * t).exp() * (2.0 * PI * f * t + p).cos()).sum()
            })
            .collect();
        let w = RingdownWindow::new(&y, 1.0 / fs).unwrap();
        let cfg = EstimatorConfig::default();
        for est in [matrix_pencil(&w, &cfg).unwrap(), era(&w, &cfg).unwrap()] {
            let m = oscillatory(&est, w.duration());
            prop_assert_eq!(m.len(), 2, "{:?}", est);
            for (got, &(a, f, dr, _)) in m.iter().zip(&modes) {
                prop_assert!(rel(got.freq_hz, f) < 1e-6, "freq {} vs {}", got.freq_hz, f);
                prop_assert!(rel(got.damping_pct, dr) < 1e-6, "DR {} vs {}", got.damping_pct, dr);
                prop_assert!(rel(got.amplitude, a) < 1e-6, "amplitude {} vs {}", got.amplitude, a);
            }
        }
    }

    #[test]
    fn zoh_step_response_matches_continuous_samples(
        k in 0.1f64..3.0,
        wn in 0.5f64..10.0,
        zeta in 0.05f64..0.9,
        ts in 0.01f64..2.0,
    ) {
        let spec = SecondOrderSpec::new(k, wn, zeta).unwrap();
        let q = zoh_discretize(&spec, ts).unwrap();
        let (alpha, beta) = (spec.alpha(), spec.beta());
        let e = (-alpha * ts).exp();
        let c = 2.0 * e * (beta * ts).cos();
        let (mut y1, mut y2) = (0.0, 0.0);
        for n in 1..60 {
            let u1 = 1.0;
            let u2 = if n >= 2 { 1.0 } else { 0.0 };
            let y = c * y1 - e * e * y2 + q.a * u1 + q.b * u2;
            let t = n as f64 * ts;
            let exact = k * (1.0 - (-alpha * t).exp() * ((beta * t).cos() + alpha / beta * (beta * t).sin()));
            prop_assert!((y - exact).abs() < 1e-6 * k, "n={} {} vs {}", n, y, exact);
            y2 = y1;
            y1 = y;
        }
    }

    #[test]
    fn delay_leaves_magnitude_untouched(td in 0.0f64..5.0, w in 1e-3f64..1e3) {
        let g = make_second_order(SecondOrderSpec::new(0.5, 4.44, 0.1414).unwrap()).unwrap();
        let plain = g.response(w).norm();
        prop_assert!((delayed_magnitude(&g, td, w) - plain).abs() <= 4.0 * f64::EPSILON * plain);
        let omegas = [w, 2.0 * w];
        let a = bode_data(&g, 0.0, &omegas);
        let b = bode_data(&g, td, &omegas);
        for (p, q) in a.iter().zip(&b) {
            prop_assert_eq!(p.magnitude_db, q.magnitude_db);
            prop_assert!(((p.phase_deg - q.phase_deg) - (q.omega * td).to_degrees()).abs() < 1e-9);
        }
    }

    #[test]
    fn pade_is_all_pass_and_tracks_the_delay(td in 0.01f64..2.0, order in 1usize..=12, x in 0.0f64..0.05) {
        let p = pade_delay(td, order).unwrap();
        prop_assert!((p.response(x / td * 100.0).norm() - 1.0).abs() < 1e-10);
        // error of the [n/n] approximant is O((s Td)^(2n+1))
        let s = num_complex::Complex64::new(0.0, x / td);
        let err = (p.eval(s) - (-s * td).exp()).norm();
        prop_assert!(err <= x.powi(2 * order as i32 + 1) + 1e-14, "err {err:e}");
    }

    #[test]
    fn channel_releases_samples_after_the_delay(
        period in 1usize..40,
        delay in 0usize..60,
        seed in 0.0f64..10.0,
    ) {
        let h = 1e-3;
        let spec = ChannelSpec::new(period as f64 * h, delay as f64 * h);
        let input = |n: usize| (seed + 0.37 * n as f64).sin();
        let mut ch = SampledDelayChannel::new(spec, h, -7.0);
        for n in 0..400usize {
            ch.advance(n, input(n));
            // latest sample whose release time has passed
            let expected = if n >= delay {
                let k = (n - delay) / period * period;
                input(k)
            } else {
                -7.0
            };
            prop_assert_eq!(ch.output(n, 0.0), expected, "step {}", n);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn sampled_loop_simulation_matches_zoh_recursion(
        k in 0.1f64..2.0,
        zeta in 0.1f64..0.6,
        m in 50usize..600,
    ) {
        let ts = m as f64 * 1e-3;
        let spec = SecondOrderSpec::new(k, 4.44, zeta).unwrap();
        let sys = SecondOrderLoop::new(spec);
        let cfg = IntegratorConfig { step: 1e-3, end_time: 30.0 * ts, record_interval: ts, divergence_bound: 1e12, ..Default::default() };
        let traj = integrate(&sys, &[0.0, 0.0], &[ChannelSpec::new(ts, 0.0)], &[0.0], &[PulseDisturbance::step("reference", 1.0, 0.0)], &cfg).unwrap();
        let y = traj.signal("y").unwrap();

        let q = zoh_discretize(&spec, ts).unwrap();
        let e = (-spec.alpha() * ts).exp();
        let c = 2.0 * e * (spec.beta() * ts).cos();
        let mut yd = vec![0.0; y.len()];
        let mut err = vec![1.0; y.len()];
        for n in 1..y.len() {
            let prev2 = if n >= 2 { yd[n - 2] } else { 0.0 };
            let e2 = if n >= 2 { err[n - 2] } else { 0.0 };
            yd[n] = c * yd[n - 1] - e * e * prev2 + q.a * err[n - 1] + q.b * e2;
            err[n] = 1.0 - yd[n];
        }
        let scale = yd.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for n in 0..y.len() {
            prop_assert!((y[n] - yd[n]).abs() < 1e-6 * scale, "n={} sim {} vs zoh {}", n, y[n], yd[n]);
        }
    }
}

/// Damped pendulum with a torque channel: `θ'' = -g sin θ - c θ' + τ`.
struct Pendulum {
    g: f64,
    c: f64,
}

impl DynamicSystem for Pendulum {
    fn state_names(&self) -> Vec<String> {
        vec!["theta".into(), "omega".into()]
    }
    fn channel_names(&self) -> Vec<String> {
        vec!["torque".into()]
    }
    fn exogenous_names(&self) -> Vec<String> {
        vec!["bias".into()]
    }
    fn output_names(&self) -> Vec<String> {
        vec!["height".into()]
    }
    fn channel_inputs(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = u[0] - 0.3 * x[1];
    }
    fn derivatives(&self, x: &[f64], ch: &[f64], _u: &[f64], dx: &mut [f64]) {
        dx[0] = x[1];
        dx[1] = -self.g * x[0].sin() - self.c * x[1] + ch[0];
    }
    fn outputs(&self, x: &[f64], _ch: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = 1.0 - x[0].cos();
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn linearization_matches_analytic_jacobian(g in 1.0f64..20.0, c in 0.1f64..3.0, bias in -0.8f64..0.8) {
        let sys = Pendulum { g, c };
        let theta = (bias / g).asin();
        let lin = linearize(&sys, &[theta, 0.0], &[bias], 1e-6).unwrap();
        let m = &lin.model;
        let close = |got: f64, want: f64| (got - want).abs() <= 1e-5 * want.abs().max(1e-3);
        prop_assert!(close(m.a()[(1, 0)], -g * theta.cos()));
        prop_assert!(close(m.a()[(1, 1)], -c));
        prop_assert!(close(m.a()[(0, 1)], 1.0));
        prop_assert!(m.a()[(0, 0)].abs() < 1e-9);
        // rows of C: channel input, then output
        prop_assert!(close(m.c()[(0, 1)], -0.3));
        prop_assert!(close(m.c()[(1, 0)], theta.sin()) || theta.abs() < 1e-6);
        prop_assert!(close(m.b()[(1, 0)], 1.0));
        prop_assert!(close(m.d()[(0, 1)], 1.0));
    }
}

#[test]
fn single_precision_tracks_double() {
    let s64 = gfl_stability::LoopSpec::new(0.5, 4.44, 0.1414).unwrap();
    let s32 = gfl_stability::LoopSpec32::new(0.5, 4.44, 0.1414).unwrap();
    let (g64, g32) = (
        make_second_order(s64).unwrap(),
        make_second_order(s32).unwrap(),
    );
    for w in [0.1, 1.0, 4.4, 30.0] {
        let (a, b) = (g64.response(w).norm(), g32.response(w as f32).norm() as f64);
        assert!(rel(b, a) < 1e-5, "{a} vs {b}");
    }
    let i64 = gfl_stability::zoh::stability_intervals(&s64, (1e-3, 10.0), 200).unwrap();
    let i32: gfl_stability::StabilityIntervals32 =
        gfl_stability::zoh::stability_intervals(&s32, (1e-3, 10.0), 200).unwrap();
    let (u64, u32) = (i64.unstable_intervals(), i32.unstable_intervals());
    assert_eq!(u64.len(), u32.len());
    for (a, b) in u64.iter().zip(&u32) {
        assert!(
            (a.0 - b.0 as f64).abs() < 1e-3 && (a.1 - b.1 as f64).abs() < 1e-3,
            "{a:?} vs {b:?}"
        );
    }
}
