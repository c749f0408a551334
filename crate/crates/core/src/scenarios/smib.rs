use num_complex::Complex64;

use super::{Scenario, ScenarioError};
use crate::plant::{
    branch_current_for, grid_from_scr, idx, GflPlant, GflPlantParams, PlantInputs, STATE_NAMES,
};
use crate::sim::{
    find_equilibrium, ChannelSpec, DynamicSystem, EquilibriumOptions, PulseDisturbance,
};

pub const SMIB_EXOGENOUS: [&str; 4] = [
    "p_set_plant",
    "q_set_plant",
    "p_set_inverter",
    "q_set_inverter",
];
pub const SMIB_OUTPUTS: [&str; 6] = ["p_poi", "q_poi", "v_poi", "freq_pll", "p_cmd", "q_cmd"];

/// Plant connected to an infinite bus through its Thevenin impedance.
#[derive(Debug, Clone)]
pub struct SmibSystem {
    pub plant: GflPlant,
    pub source_voltage: f64,
}

impl SmibSystem {
    fn inputs(&self, ch: &[f64], u: &[f64]) -> PlantInputs {
        PlantInputs {
            p_cmd: ch[0] + u[2],
            q_cmd: ch[1] + u[3],
            p_set: u[0],
            q_set: u[1],
            v_node: Complex64::new(self.source_voltage, 0.0),
            frame_slip: 0.0,
        }
    }
}

impl DynamicSystem for SmibSystem {
    fn state_names(&self) -> Vec<String> {
        STATE_NAMES.iter().map(|s| s.to_string()).collect()
    }

    fn channel_names(&self) -> Vec<String> {
        vec!["p_cmd".into(), "q_cmd".into()]
    }

    fn exogenous_names(&self) -> Vec<String> {
        SMIB_EXOGENOUS.iter().map(|s| s.to_string()).collect()
    }

    fn output_names(&self) -> Vec<String> {
        SMIB_OUTPUTS.iter().map(|s| s.to_string()).collect()
    }

    fn monitored_outputs(&self) -> Vec<usize> {
        vec![0, 1, 2]
    }

    fn channel_inputs(&self, x: &[f64], _u: &[f64], out: &mut [f64]) {
        let (p, q) = self.plant.channel_inputs(x);
        out[0] = p;
        out[1] = q;
    }

    fn derivatives(&self, x: &[f64], ch: &[f64], u: &[f64], dx: &mut [f64]) {
        let inp = self.inputs(ch, u);
        self.plant.rates(x, &inp, dx);
    }

    fn outputs(&self, x: &[f64], _ch: &[f64], _u: &[f64], y: &mut [f64]) {
        let poi = self.plant.poi(x, Complex64::new(self.source_voltage, 0.0));
        y[0] = poi.s.re;
        y[1] = poi.s.im;
        y[2] = poi.v.norm();
        y[3] = self.plant.frequency(x);
        y[4] = x[idx::P_CMD];
        y[5] = x[idx::Q_CMD];
    }
}

/// Settings of a single-plant infinite-bus study.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmibConfig {
    pub scr: f64,
    pub x_over_r: f64,
    pub source_voltage: f64,
    pub p_set_mw: f64,
    pub q_set_mvar: f64,
    pub p_channel: ChannelSpec,
    pub q_channel: ChannelSpec,
    pub plant: GflPlantParams,
    pub pulse_magnitude: f64,
    pub pulse_duration: f64,
    pub pulse_start: f64,
    /// Exogenous input receiving the pulse.
    pub pulse_target: String,
}

impl Default for SmibConfig {
    fn default() -> Self {
        Self {
            scr: 3.5,
            x_over_r: 10.0,
            source_voltage: 1.0,
            p_set_mw: 800.0,
            q_set_mvar: 150.0,
            p_channel: ChannelSpec::PASS_THROUGH,
            q_channel: ChannelSpec::PASS_THROUGH,
            plant: GflPlantParams::default(),
            pulse_magnitude: 0.01,
            pulse_duration: 0.01,
            pulse_start: 1.0,
            pulse_target: "p_set_inverter".into(),
        }
    }
}

impl SmibConfig {
    /// Same (Td, Ts) on both command paths.
    pub fn with_channels(mut self, td: f64, ts: f64) -> Self {
        self.p_channel = ChannelSpec::new(ts, td);
        self.q_channel = ChannelSpec::new(ts, td);
        self
    }

    pub fn with_scr(mut self, scr: f64) -> Self {
        self.scr = scr;
        self
    }
}

/// Builds and equilibrates the SMIB study.
pub fn build_smib(cfg: &SmibConfig) -> Result<Scenario<SmibSystem>, ScenarioError> {
    let grid = grid_from_scr(cfg.scr, cfg.x_over_r, cfg.plant.rating_mva)?;
    let mut plant = GflPlant::new(cfg.plant.clone(), grid.resistance(), grid.reactance())?;
    let base = cfg.plant.rating_mva;
    let (p, q) = (cfg.p_set_mw / base, cfg.q_set_mvar / base);
    let v_node = Complex64::new(cfg.source_voltage, 0.0);
    let ib = branch_current_for(
        Complex64::new(p, q),
        v_node,
        grid.resistance(),
        grid.reactance(),
    )?;
    let guess = plant.steady_state(ib, v_node);
    let system = SmibSystem {
        plant,
        source_voltage: cfg.source_voltage,
    };
    let u_base = vec![p, q, 0.0, 0.0];
    let x0 = find_equilibrium(&system, &guess, &u_base, &EquilibriumOptions::default())?;
    Ok(Scenario {
        system,
        x0,
        u_base,
        channels: vec![cfg.p_channel, cfg.q_channel],
        pulses: vec![PulseDisturbance::new(
            cfg.pulse_target.clone(),
            cfg.pulse_magnitude,
            cfg.pulse_duration,
            cfg.pulse_start,
        )],
        ring_signal: "p_poi".into(),
    })
}
