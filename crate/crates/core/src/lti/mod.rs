//! Continuous-time LTI models: rational transfer functions, state-space
//! models, delayed-loop margins, Nyquist stability and Padé delays.

mod bode;
mod eigen;
pub mod margins;
mod pade;
pub mod poly;
mod ss;
mod tf;

pub use bode::{bode_data, write_bode_csv, BodePoint, BODE_HEADER};
pub use eigen::eigenvalues;
pub use margins::{
    crossover_margins, delayed_loop_stable, delayed_loop_stable_with, delayed_magnitude,
    delayed_phase, log_grid, nyquist_count, MarginReport, NyquistConfig, NyquistCount,
};
pub use pade::{pade_delay, MAX_PADE_ORDER};
pub use ss::{SisoView, StateSpaceModel};
pub use tf::{
    make_second_order, modes_from_poles, ContinuousMode, FrequencyResponse,
    RationalTransferFunction, SecondOrderSpec,
};

#[derive(Debug, thiserror::Error)]
pub enum LtiError {
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("improper transfer function: numerator degree {num_degree} exceeds denominator degree {den_degree}")]
    Improper {
        num_degree: usize,
        den_degree: usize,
    },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("invalid second-order spec: {0}")]
    InvalidSpec(&'static str),
    #[error("frequency range must be finite, positive and increasing")]
    InvalidRange,
    #[error("delay must be non-negative (and positive for Padé)")]
    NegativeDelay,
    #[error("Padé order {0} outside 1..=20")]
    PadeOrder(usize),
    #[error("Nyquist locus passes within {distance:e} of -1; stability indeterminate")]
    Indeterminate { distance: f64 },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
