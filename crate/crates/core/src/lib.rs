//! Small-signal stability of grid-following inverter plants whose plant-level
//! commands pass through a sampler and a communication delay.
//!
//! The analytic layers (`lti` transfer functions, margins, Padé, `zoh`) are
//! generic over [`scalar::Scalar`] (`f32` or `f64`); the aliases below fix the
//! width. Simulation, linearization and modal estimation run in `f64`.

pub mod lab;
pub mod lti;
pub mod modal;
pub mod plant;
pub mod scalar;
pub mod scenarios;
pub mod sim;
pub mod zoh;

pub type TransferFunction = lti::RationalTransferFunction<f64>;
pub type TransferFunction32 = lti::RationalTransferFunction<f32>;
pub type LoopSpec = lti::SecondOrderSpec<f64>;
pub type LoopSpec32 = lti::SecondOrderSpec<f32>;
pub type Margins = lti::MarginReport<f64>;
pub type Margins32 = lti::MarginReport<f32>;
pub type ZohLoop = zoh::ZohQuadratic<f64>;
pub type ZohLoop32 = zoh::ZohQuadratic<f32>;
pub type StabilityIntervals = zoh::StabilityIntervalList<f64>;
pub type StabilityIntervals32 = zoh::StabilityIntervalList<f32>;
