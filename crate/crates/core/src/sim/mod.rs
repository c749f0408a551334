//! Fixed-step time-domain simulation of continuous dynamics interconnected
//! through sampled, delayed command channels.

mod channel;
mod equilibrium;
mod integrate;
mod linearize;
mod reference;
mod trajectory;

pub use channel::{ChannelSpec, SampledDelayChannel};
pub use equilibrium::{find_equilibrium, EquilibriumOptions};
pub use integrate::{integrate, IntegratorConfig, PulseDisturbance};
pub use linearize::{jacobian_central, linearize, Linearization};
pub use reference::SecondOrderLoop;
pub use trajectory::{ChannelEvent, EventKind, Trajectory, TRAJECTORY_TIME_HEADER};

/// A continuous system whose command signals pass through sampled-delay
/// channels.
///
/// Channel inputs (sampler inputs) must be algebraic functions of the state
/// and exogenous inputs only. Channel outputs enter the vector field.
pub trait DynamicSystem: Sync {
    fn state_names(&self) -> Vec<String>;
    fn channel_names(&self) -> Vec<String>;
    fn exogenous_names(&self) -> Vec<String>;
    fn output_names(&self) -> Vec<String>;

    fn channel_inputs(&self, x: &[f64], u: &[f64], out: &mut [f64]);
    fn derivatives(&self, x: &[f64], ch: &[f64], u: &[f64], dx: &mut [f64]);
    fn outputs(&self, x: &[f64], ch: &[f64], u: &[f64], y: &mut [f64]);

    /// Outputs checked against the divergence bound. Defaults to all.
    fn monitored_outputs(&self) -> Vec<usize> {
        (0..self.output_names().len()).collect()
    }

    fn dim(&self) -> usize {
        self.state_names().len()
    }
}

/// Vector field with every channel treated as a pass-through.
pub fn closed_vector_field<S: DynamicSystem + ?Sized>(
    sys: &S,
    x: &[f64],
    u: &[f64],
    dx: &mut [f64],
) {
    let mut ch = vec![0.0; sys.channel_names().len()];
    sys.channel_inputs(x, u, &mut ch);
    sys.derivatives(x, &ch, u, dx);
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error("state vector has length {got}, system expects {expected}")]
    StateLength { expected: usize, got: usize },
    #[error("unknown disturbance target `{0}`")]
    UnknownTarget(String),
    #[error("equilibrium search did not converge after {iterations} iterations (residual {residual:e}, worst state `{worst}`)")]
    NoEquilibrium {
        iterations: usize,
        residual: f64,
        worst: String,
    },
    #[error("linearization requires an equilibrium (residual {0:e})")]
    NotEquilibrium(f64),
    #[error(transparent)]
    Lti(#[from] crate::lti::LtiError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
