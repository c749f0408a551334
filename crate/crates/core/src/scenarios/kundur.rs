//! Two-area four-generator system with the generators at buses 2 and 3
//! replaced by grid-following plants.
//!
//! Buses 1 and 4 keep their synchronous machines. Each plant keeps its
//! step-up transformer as a dynamic series branch (the plant's external
//! branch); the rest of the network, including loads, is algebraic and solved
//! by a pre-inverted bus admittance matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use super::{Scenario, ScenarioError};
use crate::plant::{idx, GflPlant, GflPlantParams, PlantInputs, STATE_NAMES};
use crate::sim::{
    find_equilibrium, ChannelSpec, DynamicSystem, EquilibriumOptions, PulseDisturbance,
};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// System power base (MVA).
pub const SYSTEM_BASE_MVA: f64 = 100.0;

/// Sixth-order synchronous machine with a simple exciter and a droop governor,
/// all on the machine rating.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyncMachineParams {
    pub rating_mva: f64,
    /// Inertia constant (s).
    pub h: f64,
    pub damping: f64,
    pub ra: f64,
    pub xd: f64,
    pub xq: f64,
    pub xd_t: f64,
    pub xq_t: f64,
    /// Subtransient reactance, equal on both axes.
    pub x_st: f64,
    pub td0_t: f64,
    pub tq0_t: f64,
    pub td0_st: f64,
    pub tq0_st: f64,
    /// Exciter lead-lag ratio TA/TB.
    pub exciter_ta_tb: f64,
    pub exciter_tb: f64,
    pub exciter_gain: f64,
    pub exciter_te: f64,
    /// Governor permanent droop (pu speed per pu power).
    pub governor_droop: f64,
    pub governor_t1: f64,
    pub governor_t2: f64,
    pub governor_t3: f64,
}

impl Default for SyncMachineParams {
    fn default() -> Self {
        Self {
            rating_mva: 900.0,
            h: 6.5,
            damping: 0.0,
            ra: 0.0025,
            xd: 1.8,
            xq: 1.7,
            xd_t: 0.3,
            xq_t: 0.55,
            x_st: 0.25,
            td0_t: 8.0,
            tq0_t: 0.4,
            td0_st: 0.03,
            tq0_st: 0.05,
            exciter_ta_tb: 0.1,
            exciter_tb: 10.0,
            exciter_gain: 100.0,
            exciter_te: 0.1,
            governor_droop: 0.05,
            governor_t1: 0.5,
            governor_t2: 3.0,
            governor_t3: 10.0,
        }
    }
}

impl SyncMachineParams {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = [
            ("rating_mva", self.rating_mva),
            ("h", self.h),
            ("x_st", self.x_st),
            ("td0_t", self.td0_t),
            ("tq0_t", self.tq0_t),
            ("td0_st", self.td0_st),
            ("tq0_st", self.tq0_st),
            ("exciter_tb", self.exciter_tb),
            ("exciter_te", self.exciter_te),
            ("governor_droop", self.governor_droop),
            ("governor_t1", self.governor_t1),
            ("governor_t3", self.governor_t3),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ScenarioError::Invalid(format!(
                    "machine parameter `{name}` must be positive, got {v}"
                )));
            }
        }
        if !(self.xd >= self.xd_t
            && self.xd_t >= self.x_st
            && self.xq >= self.xq_t
            && self.xq_t >= self.x_st)
        {
            return Err(ScenarioError::Invalid(
                "machine reactances must satisfy X >= X' >= X''".into(),
            ));
        }
        if self.ra < 0.0 || self.damping < 0.0 || self.exciter_ta_tb < 0.0 || self.governor_t2 < 0.0
        {
            return Err(ScenarioError::Invalid(
                "machine resistance, damping and lead constants must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

mod ms {
    pub const DELTA: usize = 0;
    pub const OMEGA: usize = 1;
    pub const EQ_T: usize = 2;
    pub const ED_T: usize = 3;
    pub const EQ_ST: usize = 4;
    pub const ED_ST: usize = 5;
    pub const EXC_LL: usize = 6;
    pub const EFD: usize = 7;
    pub const GOV_VALVE: usize = 8;
    pub const GOV_LL: usize = 9;
    pub const COUNT: usize = 10;
}

const MACHINE_STATE_NAMES: [&str; ms::COUNT] = [
    "delta",
    "omega",
    "eq_t",
    "ed_t",
    "eq_st",
    "ed_st",
    "exc_ll",
    "efd",
    "gov_valve",
    "gov_ll",
];

/// Machine with its references fixed at the operating point.
#[derive(Debug, Clone, PartialEq)]
struct Machine {
    p: SyncMachineParams,
    bus: usize,
    v_ref: f64,
    p_ref: f64,
}

impl Machine {
    fn scale(&self) -> f64 {
        self.p.rating_mva / SYSTEM_BASE_MVA
    }

    fn rotor(x: &[f64]) -> Complex64 {
        Complex64::from_polar(1.0, x[ms::DELTA] - FRAC_PI_2)
    }

    /// Norton admittance in system per unit.
    fn admittance(&self) -> Complex64 {
        Complex64::new(self.p.ra, self.p.x_st).inv() * self.scale()
    }

    /// Subtransient voltage in the network frame.
    fn emf(&self, x: &[f64]) -> Complex64 {
        Complex64::new(x[ms::ED_ST], x[ms::EQ_ST]) * Self::rotor(x)
    }

    /// Stator current (machine pu) in the network frame.
    fn current(&self, x: &[f64], v: Complex64) -> Complex64 {
        (self.emf(x) - v) / Complex64::new(self.p.ra, self.p.x_st)
    }

    fn rates(&self, x: &[f64], v: Complex64, w0: f64, dx: &mut [f64]) {
        let p = &self.p;
        let rot = Self::rotor(x).conj();
        let i = self.current(x, v) * rot;
        let (id, iq) = (i.re, i.im);
        let te = x[ms::ED_ST] * id + x[ms::EQ_ST] * iq;
        let dw = x[ms::OMEGA] - 1.0;

        let pm = p.governor_t2 / p.governor_t3 * x[ms::GOV_VALVE]
            + (1.0 - p.governor_t2 / p.governor_t3) * x[ms::GOV_LL];
        dx[ms::DELTA] = w0 * dw;
        dx[ms::OMEGA] = (pm - te - p.damping * dw) / (2.0 * p.h);
        dx[ms::EQ_T] = (x[ms::EFD] - x[ms::EQ_T] - (p.xd - p.xd_t) * id) / p.td0_t;
        dx[ms::ED_T] = (-x[ms::ED_T] + (p.xq - p.xq_t) * iq) / p.tq0_t;
        dx[ms::EQ_ST] = (x[ms::EQ_T] - x[ms::EQ_ST] - (p.xd_t - p.x_st) * id) / p.td0_st;
        dx[ms::ED_ST] = (x[ms::ED_T] - x[ms::ED_ST] + (p.xq_t - p.x_st) * iq) / p.tq0_st;

        let err = self.v_ref - v.norm();
        let ll = p.exciter_ta_tb * err + (1.0 - p.exciter_ta_tb) * x[ms::EXC_LL];
        dx[ms::EXC_LL] = (err - x[ms::EXC_LL]) / p.exciter_tb;
        dx[ms::EFD] = (p.exciter_gain * ll - x[ms::EFD]) / p.exciter_te;

        dx[ms::GOV_VALVE] = (self.p_ref - dw / p.governor_droop - x[ms::GOV_VALVE]) / p.governor_t1;
        dx[ms::GOV_LL] = (x[ms::GOV_VALVE] - x[ms::GOV_LL]) / p.governor_t3;
    }

    /// Steady state for terminal voltage `v` and injected power `s` (system
    /// pu). Sets the exciter and governor references.
    fn steady_state(&mut self, v: Complex64, s: Complex64) -> Vec<f64> {
        let p = self.p.clone();
        let i = (s / v).conj() / self.scale();
        let eq = v + Complex64::new(p.ra, p.xq) * i;
        let delta = eq.arg();
        let mut x = vec![0.0; ms::COUNT];
        x[ms::DELTA] = delta;
        let rot = Self::rotor(&x).conj();
        let idq = i * rot;
        let vdq = v * rot;
        let (id, iq) = (idq.re, idq.im);
        let ed_st = vdq.re + p.ra * id - p.x_st * iq;
        let eq_st = vdq.im + p.ra * iq + p.x_st * id;
        let eq_t = eq_st + (p.xd_t - p.x_st) * id;
        let efd = eq_t + (p.xd - p.xd_t) * id;
        x[ms::OMEGA] = 1.0;
        x[ms::ED_T] = (p.xq - p.xq_t) * iq;
        x[ms::ED_ST] = ed_st;
        x[ms::EQ_ST] = eq_st;
        x[ms::EQ_T] = eq_t;
        x[ms::EXC_LL] = efd / p.exciter_gain;
        x[ms::EFD] = efd;
        let te = ed_st * id + eq_st * iq;
        x[ms::GOV_VALVE] = te;
        x[ms::GOV_LL] = te;
        self.v_ref = v.norm() + efd / p.exciter_gain;
        self.p_ref = te;
        x
    }
}

/// One plant slot of the study.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KundurPlantConfig {
    pub p_set_mw: f64,
    pub q_set_mvar: f64,
    pub p_channel: ChannelSpec,
    pub q_channel: ChannelSpec,
    pub plant: GflPlantParams,
    /// Step-up transformer reactance on the plant rating.
    pub transformer_reactance: f64,
}

impl KundurPlantConfig {
    fn new(p: f64, q: f64) -> Self {
        Self {
            p_set_mw: p,
            q_set_mvar: q,
            p_channel: ChannelSpec::PASS_THROUGH,
            q_channel: ChannelSpec::PASS_THROUGH,
            plant: GflPlantParams::default(),
            transformer_reactance: 0.15,
        }
    }

    pub fn with_channels(mut self, td: f64, ts: f64) -> Self {
        self.p_channel = ChannelSpec::new(ts, td);
        self.q_channel = ChannelSpec::new(ts, td);
        self
    }
}

impl Default for KundurPlantConfig {
    fn default() -> Self {
        Self::new(700.0, 215.0)
    }
}

/// Settings of the two-area study. Line data are per km on the system base.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KundurConfig {
    pub gfl2: KundurPlantConfig,
    pub gfl3: KundurPlantConfig,
    pub g1: SyncMachineParams,
    pub g4: SyncMachineParams,
    pub g1_p_mw: f64,
    pub g1_voltage: f64,
    pub g4_voltage: f64,
    pub load7_mw: f64,
    pub load7_mvar: f64,
    pub shunt7_mvar: f64,
    pub load9_mw: f64,
    pub load9_mvar: f64,
    pub shunt9_mvar: f64,
    pub line_r_per_km: f64,
    pub line_x_per_km: f64,
    pub line_b_per_km: f64,
    /// Generator step-up transformer reactance on the machine rating.
    pub machine_transformer_reactance: f64,
    pub pulse_magnitude: f64,
    pub pulse_duration: f64,
    pub pulse_start: f64,
    pub pulse_target: String,
    pub ring_signal: String,
}

impl Default for KundurConfig {
    fn default() -> Self {
        Self {
            gfl2: KundurPlantConfig::new(700.0, 215.0),
            gfl3: KundurPlantConfig::new(719.0, 175.0),
            g1: SyncMachineParams::default(),
            g4: SyncMachineParams {
                h: 6.175,
                ..SyncMachineParams::default()
            },
            g1_p_mw: 700.0,
            g1_voltage: 1.03,
            g4_voltage: 1.01,
            load7_mw: 967.0,
            load7_mvar: 100.0,
            shunt7_mvar: 200.0,
            load9_mw: 1767.0,
            load9_mvar: 100.0,
            shunt9_mvar: 350.0,
            line_r_per_km: 1e-4,
            line_x_per_km: 1e-3,
            line_b_per_km: 1.75e-3,
            machine_transformer_reactance: 0.15,
            pulse_magnitude: 0.01,
            pulse_duration: 0.01,
            pulse_start: 1.0,
            pulse_target: "gfl2_p_set_inverter".into(),
            ring_signal: "p_tie_mw".into(),
        }
    }
}

impl KundurConfig {
    /// Same (Td, Ts) on both paths of both plants.
    pub fn with_channels(mut self, td: f64, ts: f64) -> Self {
        self.gfl2 = self.gfl2.with_channels(td, ts);
        self.gfl3 = self.gfl3.with_channels(td, ts);
        self
    }
}

// network bus numbering: textbook bus -> matrix index
const BUSES: [usize; 11] = [1, 4, 5, 6, 7, 8, 9, 10, 11, 2, 3];
/// Buses kept in the dynamic network (plant LV buses 2 and 3 are internal to
/// the plant models).
const NET_BUSES: usize = 9;

fn bus(n: usize) -> usize {
    BUSES.iter().position(|&b| b == n).expect("known bus")
}

struct Lines {
    /// (from, to, series admittance, total shunt susceptance)
    branches: Vec<(usize, usize, Complex64, f64)>,
}

impl Lines {
    fn build(cfg: &KundurConfig) -> Self {
        let mut branches = Vec::new();
        let mut line = |a: usize, b: usize, km: f64, circuits: f64| {
            let z = Complex64::new(cfg.line_r_per_km, cfg.line_x_per_km) * km;
            branches.push((
                bus(a),
                bus(b),
                z.inv() * circuits,
                cfg.line_b_per_km * km * circuits,
            ));
        };
        line(5, 6, 25.0, 1.0);
        line(6, 7, 10.0, 1.0);
        line(7, 8, 110.0, 2.0);
        line(8, 9, 110.0, 2.0);
        line(9, 10, 10.0, 1.0);
        line(10, 11, 25.0, 1.0);
        let xt = cfg.machine_transformer_reactance * SYSTEM_BASE_MVA / cfg.g1.rating_mva;
        branches.push((bus(1), bus(5), Complex64::new(0.0, xt).inv(), 0.0));
        let xt = cfg.machine_transformer_reactance * SYSTEM_BASE_MVA / cfg.g4.rating_mva;
        branches.push((bus(4), bus(10), Complex64::new(0.0, xt).inv(), 0.0));
        Self { branches }
    }

    fn ybus(&self, n: usize) -> DMatrix<Complex64> {
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        for &(a, b, ys, bsh) in &self.branches {
            if a >= n || b >= n {
                continue;
            }
            let sh = J * (bsh / 2.0);
            y[(a, a)] += ys + sh;
            y[(b, b)] += ys + sh;
            y[(a, b)] -= ys;
            y[(b, a)] -= ys;
        }
        y
    }
}

fn plant_transformer(pc: &KundurPlantConfig) -> Complex64 {
    Complex64::new(
        0.0,
        pc.transformer_reactance * SYSTEM_BASE_MVA / pc.plant.rating_mva,
    )
}

/// Power-flow solution, voltages indexed like [`BUSES`].
#[derive(Debug, Clone)]
struct PowerFlow {
    v: Vec<Complex64>,
    /// Net injections (system pu).
    s: Vec<Complex64>,
}

/// Newton-Raphson power flow with constant-power loads. Bus 4 is the slack,
/// bus 1 is a PV bus and everything else is PQ.
fn power_flow(cfg: &KundurConfig) -> Result<PowerFlow, ScenarioError> {
    let n = BUSES.len();
    let lines = Lines::build(cfg);
    let mut y = lines.ybus(n);
    for (pc, lv, hv) in [(&cfg.gfl2, 2, 6), (&cfg.gfl3, 3, 11)] {
        let ys = plant_transformer(pc).inv();
        let (a, b) = (bus(lv), bus(hv));
        y[(a, a)] += ys;
        y[(b, b)] += ys;
        y[(a, b)] -= ys;
        y[(b, a)] -= ys;
    }
    y[(bus(7), bus(7))] += J * (cfg.shunt7_mvar / SYSTEM_BASE_MVA);
    y[(bus(9), bus(9))] += J * (cfg.shunt9_mvar / SYSTEM_BASE_MVA);

    let base = SYSTEM_BASE_MVA;
    let mut s_spec = vec![Complex64::new(0.0, 0.0); n];
    s_spec[bus(1)] = Complex64::new(cfg.g1_p_mw / base, 0.0);
    s_spec[bus(2)] = Complex64::new(cfg.gfl2.p_set_mw, cfg.gfl2.q_set_mvar) / base;
    s_spec[bus(3)] = Complex64::new(cfg.gfl3.p_set_mw, cfg.gfl3.q_set_mvar) / base;
    s_spec[bus(7)] = -Complex64::new(cfg.load7_mw, cfg.load7_mvar) / base;
    s_spec[bus(9)] = -Complex64::new(cfg.load9_mw, cfg.load9_mvar) / base;

    let slack = bus(4);
    let pv = bus(1);
    // unknowns: angle of every non-slack bus, magnitude of every PQ bus
    let ang_idx: Vec<usize> = (0..n).filter(|&k| k != slack).collect();
    let mag_idx: Vec<usize> = (0..n).filter(|&k| k != slack && k != pv).collect();
    let mut vm = vec![1.0; n];
    vm[slack] = cfg.g4_voltage;
    vm[pv] = cfg.g1_voltage;
    let mut va = vec![0.0; n];

    let mismatch = |vm: &[f64], va: &[f64]| -> Vec<f64> {
        let v: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(vm[k], va[k]))
            .collect();
        let s: Vec<Complex64> = (0..n)
            .map(|k| {
                let i: Complex64 = (0..n).map(|m| y[(k, m)] * v[m]).sum();
                v[k] * i.conj()
            })
            .collect();
        let mut f: Vec<f64> = ang_idx.iter().map(|&k| s[k].re - s_spec[k].re).collect();
        f.extend(mag_idx.iter().map(|&k| s[k].im - s_spec[k].im));
        f
    };
    let unpack = |z: &[f64], vm: &mut [f64], va: &mut [f64]| {
        for (j, &k) in ang_idx.iter().enumerate() {
            va[k] = z[j];
        }
        for (j, &k) in mag_idx.iter().enumerate() {
            vm[k] = z[ang_idx.len() + j];
        }
    };
    let mut z: Vec<f64> = ang_idx
        .iter()
        .map(|&k| va[k])
        .chain(mag_idx.iter().map(|&k| vm[k]))
        .collect();
    let m = z.len();
    let mut resid = f64::INFINITY;
    for _ in 0..30 {
        unpack(&z, &mut vm, &mut va);
        let f = mismatch(&vm, &va);
        resid = f.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        if resid < 1e-12 {
            break;
        }
        let jac = crate::sim::jacobian_central(&z, 1e-7, m, |zp, out| {
            let (mut a, mut b) = (vm.clone(), va.clone());
            unpack(zp, &mut a, &mut b);
            out.copy_from_slice(&mismatch(&a, &b));
        });
        let rhs = nalgebra::DVector::from_iterator(m, f.iter().map(|v| -v));
        let dz = jac
            .lu()
            .solve(&rhs)
            .ok_or_else(|| ScenarioError::Invalid("power-flow Jacobian is singular".into()))?;
        for (zi, d) in z.iter_mut().zip(dz.iter()) {
            *zi += d;
        }
    }
    unpack(&z, &mut vm, &mut va);
    if !(resid < 1e-8) {
        return Err(ScenarioError::Invalid(format!(
            "power flow did not converge (mismatch {resid:e} pu)"
        )));
    }
    let v: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(vm[k], va[k]))
        .collect();
    let s = (0..n)
        .map(|k| {
            let i: Complex64 = (0..n).map(|m| y[(k, m)] * v[m]).sum();
            v[k] * i.conj()
        })
        .collect();
    Ok(PowerFlow { v, s })
}

pub const KUNDUR_EXOGENOUS: [&str; 8] = [
    "gfl2_p_set_plant",
    "gfl2_q_set_plant",
    "gfl2_p_set_inverter",
    "gfl2_q_set_inverter",
    "gfl3_p_set_plant",
    "gfl3_q_set_plant",
    "gfl3_p_set_inverter",
    "gfl3_q_set_inverter",
];

pub const KUNDUR_OUTPUTS: [&str; 13] = [
    "p_tie_mw",
    "gfl2_p_poi",
    "gfl2_q_poi",
    "gfl2_v_poi",
    "gfl2_freq_pll",
    "gfl3_p_poi",
    "gfl3_q_poi",
    "gfl3_v_poi",
    "gfl3_freq_pll",
    "g1_omega",
    "g4_omega",
    "v_bus7",
    "v_bus8",
];

/// The two-area system with both plants and both machines.
#[derive(Debug, Clone)]
pub struct KundurSystem {
    plants: [GflPlant; 2],
    plant_bus: [usize; 2],
    machines: [Machine; 2],
    /// Inverse of the dynamic-network admittance matrix.
    z: DMatrix<Complex64>,
    /// Series admittance and half shunt of the 7-8 corridor.
    tie: (Complex64, Complex64),
    omega0: f64,
}

const PLANT_OFFSET: [usize; 2] = [0, idx::COUNT];
const MACHINE_OFFSET: [usize; 2] = [2 * idx::COUNT, 2 * idx::COUNT + ms::COUNT];
const KUNDUR_STATES: usize = 2 * idx::COUNT + 2 * ms::COUNT;

impl KundurSystem {
    fn plant_x<'a>(&self, x: &'a [f64], k: usize) -> &'a [f64] {
        &x[PLANT_OFFSET[k]..PLANT_OFFSET[k] + idx::COUNT]
    }

    fn machine_x<'a>(&self, x: &'a [f64], k: usize) -> &'a [f64] {
        &x[MACHINE_OFFSET[k]..MACHINE_OFFSET[k] + ms::COUNT]
    }

    /// Bus voltages of the algebraic network.
    pub fn bus_voltages(&self, x: &[f64]) -> Vec<Complex64> {
        let mut inj = [(0usize, Complex64::new(0.0, 0.0)); 4];
        for k in 0..2 {
            let pl = &self.plants[k];
            let ib =
                pl.branch_current(self.plant_x(x, k)) * (pl.params.rating_mva / SYSTEM_BASE_MVA);
            inj[k] = (self.plant_bus[k], ib);
            let m = &self.machines[k];
            inj[2 + k] = (m.bus, m.emf(self.machine_x(x, k)) * m.admittance());
        }
        (0..NET_BUSES)
            .map(|r| inj.iter().map(|&(b, i)| self.z[(r, b)] * i).sum())
            .collect()
    }

    fn plant_inputs(&self, k: usize, ch: &[f64], u: &[f64], v_node: Complex64) -> PlantInputs {
        PlantInputs {
            p_cmd: ch[2 * k] + u[4 * k + 2],
            q_cmd: ch[2 * k + 1] + u[4 * k + 3],
            p_set: u[4 * k],
            q_set: u[4 * k + 1],
            v_node,
            frame_slip: 0.0,
        }
    }

    /// Active power from bus 7 toward bus 8 (MW).
    pub fn tie_flow_mw(&self, v: &[Complex64]) -> f64 {
        let (v7, v8) = (v[bus(7)], v[bus(8)]);
        let i = (v7 - v8) * self.tie.0 + v7 * self.tie.1;
        (v7 * i.conj()).re * SYSTEM_BASE_MVA
    }
}

impl DynamicSystem for KundurSystem {
    fn state_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(KUNDUR_STATES);
        for p in ["gfl2", "gfl3"] {
            names.extend(STATE_NAMES.iter().map(|s| format!("{p}_{s}")));
        }
        for g in ["g1", "g4"] {
            names.extend(MACHINE_STATE_NAMES.iter().map(|s| format!("{g}_{s}")));
        }
        names
    }

    fn channel_names(&self) -> Vec<String> {
        ["gfl2_p_cmd", "gfl2_q_cmd", "gfl3_p_cmd", "gfl3_q_cmd"]
            .map(String::from)
            .to_vec()
    }

    fn exogenous_names(&self) -> Vec<String> {
        KUNDUR_EXOGENOUS.map(String::from).to_vec()
    }

    fn output_names(&self) -> Vec<String> {
        KUNDUR_OUTPUTS.map(String::from).to_vec()
    }

    fn monitored_outputs(&self) -> Vec<usize> {
        vec![1, 2, 3, 5, 6, 7]
    }

    fn channel_inputs(&self, x: &[f64], _u: &[f64], out: &mut [f64]) {
        for k in 0..2 {
            let (p, q) = self.plants[k].channel_inputs(self.plant_x(x, k));
            out[2 * k] = p;
            out[2 * k + 1] = q;
        }
    }

    fn derivatives(&self, x: &[f64], ch: &[f64], u: &[f64], dx: &mut [f64]) {
        let v = self.bus_voltages(x);
        for k in 0..2 {
            let inp = self.plant_inputs(k, ch, u, v[self.plant_bus[k]]);
            let o = PLANT_OFFSET[k];
            self.plants[k].rates(self.plant_x(x, k), &inp, &mut dx[o..o + idx::COUNT]);
            let m = &self.machines[k];
            let o = MACHINE_OFFSET[k];
            m.rates(
                self.machine_x(x, k),
                v[m.bus],
                self.omega0,
                &mut dx[o..o + ms::COUNT],
            );
        }
    }

    fn outputs(&self, x: &[f64], _ch: &[f64], _u: &[f64], y: &mut [f64]) {
        let v = self.bus_voltages(x);
        y[0] = self.tie_flow_mw(&v);
        for k in 0..2 {
            let xp = self.plant_x(x, k);
            let poi = self.plants[k].poi(xp, v[self.plant_bus[k]]);
            y[1 + 4 * k] = poi.s.re;
            y[2 + 4 * k] = poi.s.im;
            y[3 + 4 * k] = poi.v.norm();
            y[4 + 4 * k] = self.plants[k].frequency(xp);
            y[9 + k] = self.machine_x(x, k)[ms::OMEGA];
        }
        y[11] = v[bus(7)].norm();
        y[12] = v[bus(8)].norm();
    }
}

/// Builds and equilibrates the two-area study.
///
/// Loads are solved as constant power in the initial power flow and then
/// frozen as constant impedances at the solved voltages.
pub fn build_kundur(cfg: &KundurConfig) -> Result<Scenario<KundurSystem>, ScenarioError> {
    cfg.g1.validate()?;
    cfg.g4.validate()?;
    let pf = power_flow(cfg)?;

    let lines = Lines::build(cfg);
    let mut y = lines.ybus(NET_BUSES);
    for (b, s, sh) in [
        (
            7,
            Complex64::new(cfg.load7_mw, cfg.load7_mvar),
            cfg.shunt7_mvar,
        ),
        (
            9,
            Complex64::new(cfg.load9_mw, cfg.load9_mvar),
            cfg.shunt9_mvar,
        ),
    ] {
        let k = bus(b);
        y[(k, k)] += s.conj() / SYSTEM_BASE_MVA / pf.v[k].norm_sqr() + J * (sh / SYSTEM_BASE_MVA);
    }

    let mut machines = Vec::new();
    let mut mx = Vec::new();
    for (p, b) in [(&cfg.g1, 1), (&cfg.g4, 4)] {
        let mut m = Machine {
            p: p.clone(),
            bus: bus(b),
            v_ref: 1.0,
            p_ref: 0.0,
        };
        mx.push(m.steady_state(pf.v[bus(b)], pf.s[bus(b)]));
        y[(m.bus, m.bus)] += m.admittance();
        machines.push(m);
    }
    let z = y
        .try_inverse()
        .ok_or_else(|| ScenarioError::Invalid("network admittance matrix is singular".into()))?;

    let mut plants = Vec::new();
    let mut px = Vec::new();
    for (pc, lv, hv) in [(&cfg.gfl2, 2, 6), (&cfg.gfl3, 3, 11)] {
        let xt = pc.transformer_reactance;
        let mut plant = GflPlant::new(pc.plant.clone(), 0.0, xt)?;
        let s = Complex64::new(pc.p_set_mw, pc.q_set_mvar) / pc.plant.rating_mva;
        let ib = (s / pf.v[bus(lv)]).conj();
        px.push(plant.steady_state(ib, pf.v[bus(hv)]));
        plants.push(plant);
    }

    let tie = lines
        .branches
        .iter()
        .find(|(a, b, _, _)| (*a, *b) == (bus(7), bus(8)))
        .map(|&(_, _, ys, bsh)| (ys, J * (bsh / 2.0)))
        .expect("tie corridor present");
    let [m1, m4]: [Machine; 2] = machines.try_into().expect("two machines");
    let [p2, p3]: [GflPlant; 2] = plants.try_into().expect("two plants");
    let system = KundurSystem {
        plants: [p2, p3],
        plant_bus: [bus(6), bus(11)],
        machines: [m1, m4],
        z,
        tie,
        omega0: cfg.gfl2.plant.omega0(),
    };
    let mut guess = Vec::with_capacity(KUNDUR_STATES);
    for v in px.iter().chain(mx.iter()) {
        guess.extend_from_slice(v);
    }
    let u_base = vec![
        cfg.gfl2.p_set_mw / cfg.gfl2.plant.rating_mva,
        cfg.gfl2.q_set_mvar / cfg.gfl2.plant.rating_mva,
        0.0,
        0.0,
        cfg.gfl3.p_set_mw / cfg.gfl3.plant.rating_mva,
        cfg.gfl3.q_set_mvar / cfg.gfl3.plant.rating_mva,
        0.0,
        0.0,
    ];
    let x0 = find_equilibrium(&system, &guess, &u_base, &EquilibriumOptions::default())?;
    Ok(Scenario {
        system,
        x0,
        u_base,
        channels: vec![
            cfg.gfl2.p_channel,
            cfg.gfl2.q_channel,
            cfg.gfl3.p_channel,
            cfg.gfl3.q_channel,
        ],
        pulses: vec![PulseDisturbance::new(
            cfg.pulse_target.clone(),
            cfg.pulse_magnitude,
            cfg.pulse_duration,
            cfg.pulse_start,
        )],
        ring_signal: cfg.ring_signal.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_flow_balances() {
        let cfg = KundurConfig::default();
        let pf = power_flow(&cfg).unwrap();
        let total: Complex64 = pf.s.iter().sum();
        // losses are small and positive
        assert!(total.re > 0.0 && total.re < 1.0, "losses {}", total.re);
        assert!((pf.v[bus(4)].norm() - 1.01).abs() < 1e-12);
        assert!((pf.v[bus(1)].norm() - 1.03).abs() < 1e-9);
    }

    #[test]
    fn machine_steady_state_is_rest() {
        let mut m = Machine {
            p: SyncMachineParams::default(),
            bus: 0,
            v_ref: 1.0,
            p_ref: 0.0,
        };
        let v = Complex64::from_polar(1.03, 0.3);
        let x = m.steady_state(v, Complex64::new(7.0, 1.8));
        let mut dx = vec![0.0; ms::COUNT];
        m.rates(&x, v, 377.0, &mut dx);
        assert!(dx.iter().all(|d| d.abs() < 1e-10), "{dx:?}");
        let s = v * m.current(&x, v).conj() * m.scale();
        assert!((s - Complex64::new(7.0, 1.8)).norm() < 1e-10);
    }
}
