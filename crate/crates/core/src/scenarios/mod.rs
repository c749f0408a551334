//! Prebuilt experiment systems and their disturbance protocol.

mod file;
mod kundur;
mod smib;

pub use file::{
    BuiltScenario, ChannelSetting, ChannelTarget, Overrides, ScenarioFile, ScenarioKind,
};
pub use kundur::{
    build_kundur, KundurConfig, KundurPlantConfig, KundurSystem, SyncMachineParams,
    KUNDUR_EXOGENOUS, KUNDUR_OUTPUTS, SYSTEM_BASE_MVA,
};
pub use smib::{build_smib, SmibConfig, SmibSystem, SMIB_EXOGENOUS, SMIB_OUTPUTS};

use crate::modal::{classify_stability, Assessment, ClassifyConfig, ModalError};
use crate::sim::{
    integrate, ChannelSpec, DynamicSystem, IntegratorConfig, PulseDisturbance, SimError, Trajectory,
};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Plant(#[from] crate::plant::PlantError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Modal(#[from] ModalError),
    #[error("scenario file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An equilibrated system with its channels and disturbance.
#[derive(Debug, Clone)]
pub struct Scenario<S> {
    pub system: S,
    pub x0: Vec<f64>,
    pub u_base: Vec<f64>,
    pub channels: Vec<ChannelSpec>,
    pub pulses: Vec<PulseDisturbance>,
    /// Signal used for ring-down classification.
    pub ring_signal: String,
}

impl<S: DynamicSystem> Scenario<S> {
    /// End of the last disturbance pulse.
    pub fn disturbance_end(&self) -> f64 {
        self.pulses.iter().map(|p| p.end()).fold(0.0, f64::max)
    }

    pub fn run_disturbance(&self, cfg: &IntegratorConfig) -> Result<Trajectory, ScenarioError> {
        Ok(integrate(
            &self.system,
            &self.x0,
            &self.channels,
            &self.u_base,
            &self.pulses,
            cfg,
        )?)
    }

    /// Simulates and classifies the ring-down after the pulse.
    pub fn assess(
        &self,
        cfg: &IntegratorConfig,
        classify: &ClassifyConfig,
    ) -> Result<(Trajectory, Assessment), ScenarioError> {
        let traj = self.run_disturbance(cfg)?;
        let a = classify_stability(&traj, &self.ring_signal, self.disturbance_end(), classify)?;
        Ok((traj, a))
    }
}
