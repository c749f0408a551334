//! Average-value model of a grid-following plant: plant-level droop and
//! voltage control, inverter PQ and current loops, PLL, LC filter and a
//! series branch to the grid.

mod control;
mod grid;
mod model;
mod params;

pub use control::{
    inverter_update, plant_level_update, pll_update, wrap_angle, InverterOutput, InverterState,
    PlantLevelOutput, PlantLevelState, PlantMeasurements, PlantSetpoints, PllOutput, PllState,
    TerminalMeasurements, PLL_VOLTAGE_GUARD,
};
pub use grid::{grid_from_scr, GridThevenin};
pub use model::{branch_current_for, idx, Branch, GflPlant, PlantInputs, Poi, STATE_NAMES};
pub use params::{CapacitanceConvention, GflPlantParams, MeasurementPoint, PllGainUnits};

#[derive(Debug, thiserror::Error)]
pub enum PlantError {
    #[error("parameter `{name}` has invalid value {value}")]
    Invalid { name: &'static str, value: f64 },
    #[error("no power-flow solution (residual {0:e})")]
    NoPowerFlow(f64),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
