//! Ring-down modal identification (Matrix Pencil, ERA) and stability
//! classification of simulated trajectories.

mod classify;
mod estimate;
mod window;

pub use classify::{classify_stability, dominant_mode, Assessment, ClassifyConfig, Verdict};
pub use estimate::{
    era, estimate, matrix_pencil, mode_energy, write_modes_csv, Estimator, ModeEstimate,
    MODES_HEADER,
};
pub use window::{EstimatorConfig, RingdownWindow};

#[derive(Debug, thiserror::Error)]
pub enum ModalError {
    #[error("window has {got} samples, at least {needed} required")]
    TooShort { needed: usize, got: usize },
    #[error("sample spacing must be positive and finite")]
    BadSpacing,
    #[error("window contains non-finite samples")]
    NonFinite,
    #[error("signal `{0}` not present in trajectory")]
    UnknownSignal(String),
    #[error("reconstruction energy is zero; energy shares undefined")]
    ZeroEnergy,
    #[error("invalid estimator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
