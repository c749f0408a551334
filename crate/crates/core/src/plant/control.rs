//! Controller blocks of the plant in rate form, suitable for any explicit
//! integrator.
//!
//! Plant level:
//! `Pcmd = LPF_Tp(Pset + (1 - f) / Dp)` with `f` the PLL frequency in pu, and
//! `Qcmd = LPF_Tq(Qset + PI_v(Vref - Vm - Dq (Qm - Qset)))`.
//!
//! Inverter level: `id* = PI_pq(P* - Pm)`, `iq* = -PI_pq(Q* - Qm)`, and
//! `v* = PI_i(i* - i) + Kff v + jX_f i` in the PLL frame.

use num_complex::Complex64;

use super::GflPlantParams;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PllState {
    /// Terminal voltage in the PLL frame after the input filter.
    pub v_filtered: Complex64,
    pub integrator: f64,
    /// Angle of the PLL frame relative to the synchronous frame (rad).
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PllOutput {
    /// Frequency deviation (rad/s).
    pub delta_omega: f64,
    /// Wrapped angle in (-π, π].
    pub angle: f64,
    pub rates: PllState,
    /// Set when the voltage is below the validity guard and the frequency
    /// is held.
    pub guarded: bool,
}

pub const PLL_VOLTAGE_GUARD: f64 = 0.01;

pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Synchronous-reference-frame PLL: the filtered q-axis voltage drives a PI
/// whose output is the frequency deviation. The filtered dq voltage is also
/// the feed-forward signal of the current loop.
pub fn pll_update(state: &PllState, v_dq: Complex64, params: &GflPlantParams) -> PllOutput {
    let scale = params.pll_output_scale();
    let wf = params.pll_filter_cutoff * params.omega0();
    let vq = state.v_filtered.im;
    let delta_omega = scale * (params.pll_kp * vq + state.integrator);
    let guarded = v_dq.norm() < PLL_VOLTAGE_GUARD;
    let rates = if guarded {
        PllState {
            v_filtered: Complex64::new(0.0, 0.0),
            integrator: 0.0,
            angle: delta_omega,
        }
    } else {
        PllState {
            v_filtered: (v_dq - state.v_filtered) * wf,
            integrator: params.pll_ki * vq,
            angle: delta_omega,
        }
    };
    PllOutput {
        delta_omega,
        angle: wrap_angle(state.angle),
        rates,
        guarded,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantLevelState {
    pub p_meas: f64,
    pub q_meas: f64,
    pub v_meas: f64,
    pub v_integrator: f64,
    pub p_cmd: f64,
    pub q_cmd: f64,
}

/// Instantaneous quantities seen by the plant controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantMeasurements {
    pub p: f64,
    pub q: f64,
    pub v: f64,
    /// Measured frequency (pu of nominal).
    pub freq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PlantSetpoints {
    pub p: f64,
    pub q: f64,
    pub v_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantLevelOutput {
    pub p_cmd: f64,
    pub q_cmd: f64,
    pub rates: PlantLevelState,
}

pub fn plant_level_update(
    state: &PlantLevelState,
    meas: &PlantMeasurements,
    set: &PlantSetpoints,
    params: &GflPlantParams,
) -> PlantLevelOutput {
    let wm = params.power_measurement_cutoff * params.omega0();
    let p_target = set.p + (1.0 - meas.freq) / params.p_f_droop;
    let v_err = set.v_ref - state.v_meas - params.q_v_droop * (state.q_meas - set.q);
    let q_target = set.q + params.voltage_control_kp * v_err + state.v_integrator;
    PlantLevelOutput {
        p_cmd: state.p_cmd,
        q_cmd: state.q_cmd,
        rates: PlantLevelState {
            p_meas: wm * (meas.p - state.p_meas),
            q_meas: wm * (meas.q - state.q_meas),
            v_meas: wm * (meas.v - state.v_meas),
            v_integrator: params.voltage_control_ki * v_err,
            p_cmd: (p_target - state.p_cmd) / params.p_filter_time_constant,
            q_cmd: (q_target - state.q_cmd) / params.q_filter_time_constant,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InverterState {
    pub p_integrator: f64,
    pub q_integrator: f64,
    /// Current-loop integrators (d + jq).
    pub i_integrator: Complex64,
}

/// Inverter-side signals in the PLL frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalMeasurements {
    pub p: f64,
    pub q: f64,
    pub i_dq: Complex64,
    /// Filtered terminal voltage used for feed-forward.
    pub v_dq: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverterOutput {
    pub i_ref: Complex64,
    /// Converter voltage reference in the PLL frame.
    pub v_ref: Complex64,
    pub rates: InverterState,
}

pub fn inverter_update(
    state: &InverterState,
    p_cmd: f64,
    q_cmd: f64,
    meas: &TerminalMeasurements,
    params: &GflPlantParams,
) -> InverterOutput {
    let ep = p_cmd - meas.p;
    let eq = q_cmd - meas.q;
    let id_ref = params.pq_control_kp * ep + state.p_integrator;
    let iq_ref = -(params.pq_control_kp * eq + state.q_integrator);
    let i_ref = Complex64::new(id_ref, iq_ref);
    let ei = i_ref - meas.i_dq;
    let v_ref = ei * params.current_control_kp
        + state.i_integrator
        + meas.v_dq * params.current_feed_forward_gain
        + Complex64::new(0.0, params.filter_inductance) * meas.i_dq;
    InverterOutput {
        i_ref,
        v_ref,
        rates: InverterState {
            p_integrator: params.pq_control_ki * ep,
            q_integrator: params.pq_control_ki * eq,
            i_integrator: ei * params.current_control_ki,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locked_pll_holds_frequency() {
        let p = GflPlantParams::default();
        let s = PllState {
            v_filtered: Complex64::new(1.0, 0.0),
            integrator: 0.3,
            angle: 1.0,
        };
        let out = pll_update(&s, Complex64::new(1.0, 0.0), &p);
        assert_eq!(out.rates.integrator, 0.0);
        assert_eq!(out.rates.v_filtered, Complex64::new(0.0, 0.0));
        assert_eq!(out.delta_omega, 0.3);
    }

    #[test]
    fn pll_proportional_path() {
        let p = GflPlantParams::default();
        let (v, delta) = (1.02, 1e-3);
        let s = PllState {
            v_filtered: Complex64::from_polar(v, delta),
            ..Default::default()
        };
        let out = pll_update(&s, Complex64::from_polar(v, delta), &p);
        assert!((out.delta_omega - 50.0 * v * delta).abs() < 1e-8);
        assert_eq!(out.rates.v_filtered, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn pll_guard_holds() {
        let p = GflPlantParams::default();
        let s = PllState {
            v_filtered: Complex64::new(0.0, 0.1),
            integrator: 0.0,
            angle: 0.0,
        };
        let out = pll_update(&s, Complex64::new(0.001, 0.0), &p);
        assert!(out.guarded);
        assert_eq!(out.rates.integrator, 0.0);
    }

    #[test]
    fn wrap_is_half_open() {
        let pi = std::f64::consts::PI;
        assert!((wrap_angle(pi) - pi).abs() < 1e-15);
        assert!((wrap_angle(-pi) - pi).abs() < 1e-15);
        assert!((wrap_angle(3.0 * pi / 2.0) + pi / 2.0).abs() < 1e-12);
    }

    #[test]
    fn plant_level_at_nominal_is_quiet() {
        let p = GflPlantParams::default();
        let set = PlantSetpoints {
            p: 0.8,
            q: 0.2,
            v_ref: 1.01,
        };
        let s = PlantLevelState {
            p_meas: 0.8,
            q_meas: 0.2,
            v_meas: 1.01,
            v_integrator: 0.0,
            p_cmd: 0.8,
            q_cmd: 0.2,
        };
        let m = PlantMeasurements {
            p: 0.8,
            q: 0.2,
            v: 1.01,
            freq: 1.0,
        };
        let out = plant_level_update(&s, &m, &set, &p);
        assert_eq!((out.p_cmd, out.q_cmd), (0.8, 0.2));
        assert_eq!(out.rates, PlantLevelState::default());
    }

    #[test]
    fn feed_forward_enters_once() {
        let p = GflPlantParams::default();
        let v = Complex64::new(1.03, -0.02);
        let m = TerminalMeasurements {
            p: 0.5,
            q: 0.1,
            i_dq: Complex64::new(0.5, -0.1),
            v_dq: v,
        };
        let s = InverterState {
            p_integrator: 0.5,
            q_integrator: 0.1,
            i_integrator: Complex64::new(0.0, 0.0),
        };
        let out = inverter_update(&s, 0.5, 0.1, &m, &p);
        let expected = v + Complex64::new(0.0, 0.009) * m.i_dq;
        assert!((out.v_ref - expected).norm() < 1e-15);
        assert_eq!(out.rates, InverterState::default());
    }
}
