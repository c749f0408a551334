use num_complex::Complex64;

use super::control::{
    inverter_update, plant_level_update, pll_update, InverterState, PlantLevelState,
    PlantMeasurements, PlantSetpoints, PllState, TerminalMeasurements,
};
use super::{GflPlantParams, MeasurementPoint, PlantError};

/// Offsets of the plant states inside its slice of the system state.
pub mod idx {
    pub const I_FILTER: usize = 0;
    pub const V_CAP: usize = 2;
    pub const I_BRANCH: usize = 4;
    pub const V_FILT: usize = 6;
    pub const PLL_INT: usize = 8;
    pub const PLL_ANGLE: usize = 9;
    pub const V_FF: usize = 10;
    pub const F_MEAS: usize = 12;
    pub const P_MEAS: usize = 13;
    pub const Q_MEAS: usize = 14;
    pub const V_MEAS: usize = 15;
    pub const P_INT: usize = 16;
    pub const Q_INT: usize = 17;
    pub const I_INT: usize = 18;
    pub const V_INT: usize = 20;
    pub const P_CMD: usize = 21;
    pub const Q_CMD: usize = 22;
    pub const P_TERM: usize = 23;
    pub const Q_TERM: usize = 24;
    pub const COUNT: usize = 25;
}

pub const STATE_NAMES: [&str; idx::COUNT] = [
    "if_d",
    "if_q",
    "vc_d",
    "vc_q",
    "ib_d",
    "ib_q",
    "vf_d",
    "vf_q",
    "pll_int",
    "pll_angle",
    "vff_d",
    "vff_q",
    "f_meas",
    "p_meas",
    "q_meas",
    "v_meas",
    "p_int",
    "q_int",
    "id_int",
    "iq_int",
    "v_int",
    "p_cmd",
    "q_cmd",
    "p_term",
    "q_term",
];

fn c(x: &[f64], i: usize) -> Complex64 {
    Complex64::new(x[i], x[i + 1])
}

fn put(dx: &mut [f64], i: usize, v: Complex64) {
    dx[i] = v.re;
    dx[i + 1] = v.im;
}

/// Series branch from the capacitor node to the external node, split at the
/// point of interconnection into a plant-side coupling part and an external
/// part (grid impedance or step-up transformer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub r_coupling: f64,
    pub x_coupling: f64,
    pub r_external: f64,
    pub x_external: f64,
}

impl Branch {
    pub fn r(&self) -> f64 {
        self.r_coupling + self.r_external
    }

    pub fn x(&self) -> f64 {
        self.x_coupling + self.x_external
    }
}

/// Inputs to one plant besides its own state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantInputs {
    /// Active-power command after the channel.
    pub p_cmd: f64,
    pub q_cmd: f64,
    pub p_set: f64,
    pub q_set: f64,
    /// Voltage of the external node in the synchronous frame.
    pub v_node: Complex64,
    /// Frequency of the synchronous frame relative to nominal (rad/s).
    pub frame_slip: f64,
}

/// POI quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poi {
    pub v: Complex64,
    pub s: Complex64,
}

/// Average dq model of one grid-following plant.
#[derive(Debug, Clone, PartialEq)]
pub struct GflPlant {
    pub params: GflPlantParams,
    pub branch: Branch,
    pub v_ref: f64,
}

impl GflPlant {
    pub fn new(
        params: GflPlantParams,
        r_external: f64,
        x_external: f64,
    ) -> Result<Self, PlantError> {
        params.validate()?;
        if !(x_external >= 0.0 && r_external >= 0.0) {
            return Err(PlantError::Invalid {
                name: "external branch",
                value: x_external.min(r_external),
            });
        }
        let branch = Branch {
            r_coupling: params.coupling_resistance,
            x_coupling: params.coupling_inductance,
            r_external,
            x_external,
        };
        Ok(Self {
            params,
            branch,
            v_ref: 1.0,
        })
    }

    pub fn branch_current(&self, x: &[f64]) -> Complex64 {
        c(x, idx::I_BRANCH)
    }

    pub fn channel_inputs(&self, x: &[f64]) -> (f64, f64) {
        (x[idx::P_CMD], x[idx::Q_CMD])
    }

    /// POI voltage and power. The POI sits between the coupling and the
    /// external part of the series branch; with both parts inductive the
    /// node voltage follows from the branch states without derivatives.
    pub fn poi(&self, x: &[f64], v_node: Complex64) -> Poi {
        let b = &self.branch;
        let vc = c(x, idx::V_CAP);
        let i = c(x, idx::I_BRANCH);
        let xt = b.x();
        let v = if xt > 0.0 {
            (vc * b.x_external + v_node * b.x_coupling) / xt
                + i * ((b.x_coupling * b.r_external - b.x_external * b.r_coupling) / xt)
        } else {
            vc - i * b.r_coupling
        };
        Poi { v, s: v * i.conj() }
    }

    /// PLL frequency in pu of nominal.
    pub fn frequency(&self, x: &[f64]) -> f64 {
        let s = self.params.pll_output_scale();
        1.0 + s * (self.params.pll_kp * x[idx::V_FILT + 1] + x[idx::PLL_INT]) / self.params.omega0()
    }

    /// Converter output power (pu).
    pub fn source_power(&self, x: &[f64], inp: &PlantInputs) -> f64 {
        let (vconv, _) = self.converter_voltage(x, inp);
        (vconv * c(x, idx::I_FILTER).conj()).re
    }

    fn rotation(&self, x: &[f64]) -> Complex64 {
        Complex64::from_polar(1.0, x[idx::PLL_ANGLE])
    }

    fn converter_voltage(
        &self,
        x: &[f64],
        inp: &PlantInputs,
    ) -> (Complex64, super::control::InverterOutput) {
        let rot = self.rotation(x);
        let if_dq = c(x, idx::I_FILTER) * rot.conj();
        let (pm, qm) = match self.params.inverter_power_point {
            MeasurementPoint::Poi => (x[idx::P_MEAS], x[idx::Q_MEAS]),
            MeasurementPoint::Terminal => (x[idx::P_TERM], x[idx::Q_TERM]),
        };
        let meas = TerminalMeasurements {
            p: pm,
            q: qm,
            i_dq: if_dq,
            v_dq: c(x, idx::V_FF),
        };
        let st = InverterState {
            p_integrator: x[idx::P_INT],
            q_integrator: x[idx::Q_INT],
            i_integrator: c(x, idx::I_INT),
        };
        let out = inverter_update(&st, inp.p_cmd, inp.q_cmd, &meas, &self.params);
        (out.v_ref * rot, out)
    }

    /// Writes the plant state derivatives into `dx`.
    pub fn rates(&self, x: &[f64], inp: &PlantInputs, dx: &mut [f64]) {
        let p = &self.params;
        let w0 = p.omega0();
        let b = &self.branch;
        let bc = p.capacitor_susceptance();
        let (xf, rf) = (p.filter_inductance, p.filter_resistance);
        let ws = w0 + inp.frame_slip;
        let j = Complex64::new(0.0, 1.0);

        let i_f = c(x, idx::I_FILTER);
        let vc = c(x, idx::V_CAP);
        let ib = c(x, idx::I_BRANCH);
        let (vconv, inv) = self.converter_voltage(x, inp);

        let di_f = (vconv - vc - i_f * rf - j * (xf * ws / w0) * i_f) * (w0 / xf);
        let dvc = (i_f - ib - j * (bc * ws / w0) * vc) * (w0 / bc);
        let xb = b.x();
        let dib = (vc - inp.v_node - ib * b.r() - j * (xb * ws / w0) * ib) * (w0 / xb);
        put(dx, idx::I_FILTER, di_f);
        put(dx, idx::V_CAP, dvc);
        put(dx, idx::I_BRANCH, dib);

        let rot = self.rotation(x);
        let poi = self.poi(x, inp.v_node);
        let v_pll = match p.pll_measurement_point {
            MeasurementPoint::Terminal => vc,
            MeasurementPoint::Poi => poi.v,
        };
        let wm = p.power_measurement_cutoff * w0;
        let s_term = vc * i_f.conj();
        dx[idx::P_TERM] = wm * (s_term.re - x[idx::P_TERM]);
        dx[idx::Q_TERM] = wm * (s_term.im - x[idx::Q_TERM]);
        let pll = pll_update(
            &PllState {
                v_filtered: c(x, idx::V_FILT),
                integrator: x[idx::PLL_INT],
                angle: x[idx::PLL_ANGLE],
            },
            v_pll * rot.conj(),
            p,
        );
        put(dx, idx::V_FILT, pll.rates.v_filtered);
        let wff = p.feed_forward_filter_cutoff * w0;
        put(dx, idx::V_FF, (vc * rot.conj() - c(x, idx::V_FF)) * wff);
        let wfm = p.frequency_measurement_cutoff * w0;
        dx[idx::F_MEAS] = wfm * (1.0 + pll.delta_omega / w0 - x[idx::F_MEAS]);
        dx[idx::PLL_INT] = pll.rates.integrator;
        // the synchronous frame itself may drift in multi-machine studies
        dx[idx::PLL_ANGLE] = pll.rates.angle - inp.frame_slip;

        let pl = plant_level_update(
            &PlantLevelState {
                p_meas: x[idx::P_MEAS],
                q_meas: x[idx::Q_MEAS],
                v_meas: x[idx::V_MEAS],
                v_integrator: x[idx::V_INT],
                p_cmd: x[idx::P_CMD],
                q_cmd: x[idx::Q_CMD],
            },
            &PlantMeasurements {
                p: poi.s.re,
                q: poi.s.im,
                v: poi.v.norm(),
                freq: x[idx::F_MEAS],
            },
            &PlantSetpoints {
                p: inp.p_set,
                q: inp.q_set,
                v_ref: self.v_ref,
            },
            p,
        );
        dx[idx::P_MEAS] = pl.rates.p_meas;
        dx[idx::Q_MEAS] = pl.rates.q_meas;
        dx[idx::V_MEAS] = pl.rates.v_meas;
        dx[idx::V_INT] = pl.rates.v_integrator;
        dx[idx::P_CMD] = pl.rates.p_cmd;
        dx[idx::Q_CMD] = pl.rates.q_cmd;
        dx[idx::P_INT] = inv.rates.p_integrator;
        dx[idx::Q_INT] = inv.rates.q_integrator;
        put(dx, idx::I_INT, inv.rates.i_integrator);
    }

    /// Steady-state plant state delivering `s_poi` at the POI when the
    /// external node sits at `v_node`, with the branch current `ib` already
    /// known. Sets `v_ref` to the resulting POI voltage magnitude.
    pub fn steady_state(&mut self, ib: Complex64, v_node: Complex64) -> Vec<f64> {
        let p = self.params.clone();
        let b = self.branch;
        let j = Complex64::new(0.0, 1.0);
        let bc = p.capacitor_susceptance();
        let vc = v_node + ib * Complex64::new(b.r(), b.x());
        let i_f = ib + j * bc * vc;
        let vconv = vc + i_f * Complex64::new(p.filter_resistance, p.filter_inductance);
        let mut x = vec![0.0; idx::COUNT];
        put(&mut x, idx::I_FILTER, i_f);
        put(&mut x, idx::V_CAP, vc);
        put(&mut x, idx::I_BRANCH, ib);
        let poi = self.poi(&x, v_node);
        let theta = match p.pll_measurement_point {
            MeasurementPoint::Terminal => vc.arg(),
            MeasurementPoint::Poi => poi.v.arg(),
        };
        let rot = Complex64::from_polar(1.0, theta);
        let if_dq = i_f * rot.conj();
        let vc_dq = vc * rot.conj();
        let vconv_dq = vconv * rot.conj();
        x[idx::PLL_ANGLE] = theta;
        put(
            &mut x,
            idx::V_FILT,
            if p.pll_measurement_point == MeasurementPoint::Poi {
                poi.v * rot.conj()
            } else {
                vc_dq
            },
        );
        put(&mut x, idx::V_FF, vc_dq);
        x[idx::F_MEAS] = 1.0;
        let s_term = vc * i_f.conj();
        x[idx::P_TERM] = s_term.re;
        x[idx::Q_TERM] = s_term.im;
        x[idx::P_MEAS] = poi.s.re;
        x[idx::Q_MEAS] = poi.s.im;
        x[idx::V_MEAS] = poi.v.norm();
        x[idx::P_INT] = if_dq.re;
        x[idx::Q_INT] = -if_dq.im;
        let xi = vconv_dq - vc_dq * p.current_feed_forward_gain - j * p.filter_inductance * if_dq;
        put(&mut x, idx::I_INT, xi);
        let fed_back = match p.inverter_power_point {
            MeasurementPoint::Poi => poi.s,
            MeasurementPoint::Terminal => s_term,
        };
        x[idx::P_CMD] = fed_back.re;
        x[idx::Q_CMD] = fed_back.im;
        self.v_ref = poi.v.norm();
        x
    }
}

/// Branch current that delivers `s_poi` at the POI of a plant whose external
/// branch `(r, x)` ends at `v_node`.
pub fn branch_current_for(
    s_poi: Complex64,
    v_node: Complex64,
    r: f64,
    x: f64,
) -> Result<Complex64, PlantError> {
    // v_poi = v_node + z i, s = v_poi conj(i); Newton on v_poi
    let z = Complex64::new(r, x);
    let f = |v: Complex64| -> Complex64 {
        let i = (v - v_node) / z;
        v * i.conj() - s_poi
    };
    if z.norm() == 0.0 {
        return Ok((s_poi / v_node).conj());
    }
    let mut v = v_node;
    for _ in 0..100 {
        let r0 = f(v);
        if r0.norm() < 1e-14 {
            return Ok((v - v_node) / z);
        }
        let h = 1e-7;
        let dre = (f(v + h) - r0) / h;
        let dim = (f(v + Complex64::new(0.0, h)) - r0) / h;
        // 2x2 real Jacobian [[dre.re, dim.re], [dre.im, dim.im]]
        let det = dre.re * dim.im - dim.re * dre.im;
        if det.abs() < 1e-300 {
            break;
        }
        let dx = (-r0.re * dim.im + dim.re * r0.im) / det;
        let dy = (-dre.re * r0.im + dre.im * r0.re) / det;
        v += Complex64::new(dx, dy);
    }
    let r0 = f(v);
    if r0.norm() < 1e-10 {
        Ok((v - v_node) / z)
    } else {
        Err(PlantError::NoPowerFlow(r0.norm()))
    }
}
