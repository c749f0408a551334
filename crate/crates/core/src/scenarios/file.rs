//! Scenario definition files.
//!
//! ```toml
//! kind = "smib"          # or "kundur"
//! scr = 3.5              # smib only
//! x_over_r = 10.0        # smib only
//! horizon = 20.0         # s
//! step = 1e-4            # s
//! record_interval = 2e-3 # s
//!
//! [channel]              # smib: both command paths
//! td = 0.08
//! ts = 0.1
//! [q_channel]            # optional reactive-path override
//! td = 0.0
//! ts = 0.0
//!
//! [gfl2]                 # kundur: per plant, same keys plus q_td / q_ts
//! td = 0.02
//! ts = 0.2
//!
//! [overrides]            # applied to every plant
//! tp = 0.02
//! tq = 0.02
//! kp = 2.08
//! p_set_mw = 800.0       # smib only
//! q_set_mvar = 150.0     # smib only
//!
//! [plant]                # optional full plant parameter table
//! ```

use std::path::Path;

use super::{
    build_kundur, build_smib, KundurConfig, KundurSystem, Scenario, ScenarioError, SmibConfig,
    SmibSystem,
};
use crate::modal::{Assessment, ClassifyConfig};
use crate::plant::GflPlantParams;
use crate::sim::{ChannelSpec, IntegratorConfig, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Smib,
    Kundur,
}

/// (Td, Ts) of one plant, with an optional reactive-path override.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSetting {
    pub td: f64,
    pub ts: f64,
    pub q_td: Option<f64>,
    pub q_ts: Option<f64>,
}

impl ChannelSetting {
    pub fn new(td: f64, ts: f64) -> Self {
        Self {
            td,
            ts,
            q_td: None,
            q_ts: None,
        }
    }

    pub fn p(&self) -> ChannelSpec {
        ChannelSpec::new(self.ts, self.td)
    }

    pub fn q(&self) -> ChannelSpec {
        ChannelSpec::new(self.q_ts.unwrap_or(self.ts), self.q_td.unwrap_or(self.td))
    }
}

/// Keys that may be changed without a full plant table.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Plant-level active-power filter time constant (s).
    pub tp: Option<f64>,
    /// Plant-level reactive-power filter time constant (s).
    pub tq: Option<f64>,
    /// Proportional gain of the inverter P/Q controllers.
    pub kp: Option<f64>,
    pub p_set_mw: Option<f64>,
    pub q_set_mvar: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, p: &mut GflPlantParams) {
        if let Some(v) = self.tp {
            p.p_filter_time_constant = v;
        }
        if let Some(v) = self.tq {
            p.q_filter_time_constant = v;
        }
        if let Some(v) = self.kp {
            p.pq_control_kp = v;
        }
    }
}

/// Which plants receive the swept (Td, Ts).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelTarget {
    /// Every plant of the scenario.
    #[default]
    All,
    Gfl2,
    Gfl3,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub kind: ScenarioKind,
    pub scr: f64,
    pub x_over_r: f64,
    pub horizon: f64,
    pub step: f64,
    pub record_interval: f64,
    pub channel: ChannelSetting,
    pub q_channel: Option<ChannelSetting>,
    pub gfl2: ChannelSetting,
    pub gfl3: ChannelSetting,
    pub overrides: Overrides,
    pub plant: Option<GflPlantParams>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::Smib,
            scr: 3.5,
            x_over_r: 10.0,
            horizon: 20.0,
            step: 1e-4,
            record_interval: 2e-3,
            channel: ChannelSetting::default(),
            q_channel: None,
            gfl2: ChannelSetting::default(),
            gfl3: ChannelSetting::default(),
            overrides: Overrides::default(),
            plant: None,
        }
    }
}

impl ScenarioFile {
    pub fn from_toml_str(s: &str) -> Result<Self, ScenarioError> {
        let f: Self = toml::from_str(s)?;
        f.validate()?;
        Ok(f)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut all = vec![self.channel, self.gfl2, self.gfl3];
        all.extend(self.q_channel);
        for c in all {
            let vals = [Some(c.td), Some(c.ts), c.q_td, c.q_ts];
            if vals.iter().flatten().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(ScenarioError::Invalid(
                    "channel Td and Ts must be non-negative".into(),
                ));
            }
        }
        if !(self.horizon > 0.0 && self.step > 0.0 && self.record_interval > 0.0) {
            return Err(ScenarioError::Invalid(
                "horizon, step and record_interval must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Replaces the (Td, Ts) of the targeted plants.
    pub fn with_channels(&self, target: ChannelTarget, td: f64, ts: f64) -> Self {
        let mut f = self.clone();
        let c = ChannelSetting::new(td, ts);
        match (self.kind, target) {
            (ScenarioKind::Smib, _) => {
                f.channel = c;
                f.q_channel = None;
            }
            (ScenarioKind::Kundur, ChannelTarget::All) => {
                f.gfl2 = c;
                f.gfl3 = c;
            }
            (ScenarioKind::Kundur, ChannelTarget::Gfl2) => f.gfl2 = c,
            (ScenarioKind::Kundur, ChannelTarget::Gfl3) => f.gfl3 = c,
        }
        f
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            step: self.step,
            end_time: self.horizon,
            record_interval: self.record_interval,
            ..IntegratorConfig::default()
        }
    }

    fn plant_params(&self) -> GflPlantParams {
        let mut p = self.plant.clone().unwrap_or_default();
        self.overrides.apply(&mut p);
        p
    }

    pub fn smib_config(&self) -> SmibConfig {
        let d = SmibConfig::default();
        let q = self
            .q_channel
            .map(|c| c.p())
            .unwrap_or_else(|| self.channel.q());
        SmibConfig {
            scr: self.scr,
            x_over_r: self.x_over_r,
            p_set_mw: self.overrides.p_set_mw.unwrap_or(d.p_set_mw),
            q_set_mvar: self.overrides.q_set_mvar.unwrap_or(d.q_set_mvar),
            p_channel: self.channel.p(),
            q_channel: q,
            plant: self.plant_params(),
            ..d
        }
    }

    pub fn kundur_config(&self) -> KundurConfig {
        let mut k = KundurConfig::default();
        for (slot, c) in [(&mut k.gfl2, self.gfl2), (&mut k.gfl3, self.gfl3)] {
            slot.p_channel = c.p();
            slot.q_channel = c.q();
            slot.plant = self.plant_params();
        }
        k
    }

    pub fn build(&self) -> Result<BuiltScenario, ScenarioError> {
        Ok(match self.kind {
            ScenarioKind::Smib => BuiltScenario::Smib(build_smib(&self.smib_config())?),
            ScenarioKind::Kundur => {
                BuiltScenario::Kundur(Box::new(build_kundur(&self.kundur_config())?))
            }
        })
    }
}

/// An equilibrated scenario of either kind.
#[derive(Debug, Clone)]
pub enum BuiltScenario {
    Smib(Scenario<SmibSystem>),
    Kundur(Box<Scenario<KundurSystem>>),
}

impl BuiltScenario {
    pub fn run_disturbance(&self, cfg: &IntegratorConfig) -> Result<Trajectory, ScenarioError> {
        match self {
            Self::Smib(s) => s.run_disturbance(cfg),
            Self::Kundur(s) => s.run_disturbance(cfg),
        }
    }

    pub fn assess(
        &self,
        cfg: &IntegratorConfig,
        classify: &ClassifyConfig,
    ) -> Result<(Trajectory, Assessment), ScenarioError> {
        match self {
            Self::Smib(s) => s.assess(cfg, classify),
            Self::Kundur(s) => s.assess(cfg, classify),
        }
    }

    pub fn ring_signal(&self) -> &str {
        match self {
            Self::Smib(s) => &s.ring_signal,
            Self::Kundur(s) => &s.ring_signal,
        }
    }
}
