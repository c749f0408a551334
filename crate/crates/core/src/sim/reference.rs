use super::DynamicSystem;
use crate::lti::SecondOrderSpec;

/// Unity-feedback loop around the second-order reference plant with one
/// command channel on the error signal.
///
/// States are `[x, x']` with plant output `y = k x`; the channel carries
/// `e = r - y` and drives `x'' = ωn² (e - x) - 2ζωn x'`.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrderLoop {
    pub spec: SecondOrderSpec<f64>,
}

impl SecondOrderLoop {
    pub fn new(spec: SecondOrderSpec<f64>) -> Self {
        Self { spec }
    }
}

impl DynamicSystem for SecondOrderLoop {
    fn state_names(&self) -> Vec<String> {
        vec!["x".into(), "x_dot".into()]
    }

    fn channel_names(&self) -> Vec<String> {
        vec!["error".into()]
    }

    fn exogenous_names(&self) -> Vec<String> {
        vec!["reference".into()]
    }

    fn output_names(&self) -> Vec<String> {
        vec!["y".into()]
    }

    fn channel_inputs(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = u[0] - self.spec.k * x[0];
    }

    fn derivatives(&self, x: &[f64], ch: &[f64], _u: &[f64], dx: &mut [f64]) {
        let SecondOrderSpec { omega_n, zeta, .. } = self.spec;
        dx[0] = x[1];
        dx[1] = omega_n * omega_n * (ch[0] - x[0]) - 2.0 * zeta * omega_n * x[1];
    }

    fn outputs(&self, x: &[f64], _ch: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = self.spec.k * x[0];
    }
}
