use nalgebra::{DMatrix, DVector};

use super::linearize::jacobian_central;
use super::{closed_vector_field, DynamicSystem, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative singular-value cutoff for the Newton least-squares step.
    pub rank_cutoff: f64,
    /// Pseudo-transient continuation sweeps when Newton stalls.
    pub continuation_steps: usize,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 60,
            rank_cutoff: 1e-12,
            continuation_steps: 400,
        }
    }
}

fn residual<S: DynamicSystem + ?Sized>(sys: &S, x: &[f64], u: &[f64]) -> DVector<f64> {
    let mut dx = vec![0.0; x.len()];
    closed_vector_field(sys, x, u, &mut dx);
    DVector::from_vec(dx)
}

fn norm(v: &DVector<f64>) -> f64 {
    if v.iter().any(|x| !x.is_finite()) {
        f64::INFINITY
    } else {
        v.norm()
    }
}

fn closed_jacobian<S: DynamicSystem + ?Sized>(sys: &S, x: &[f64], u: &[f64]) -> DMatrix<f64> {
    jacobian_central(x, 1e-6, x.len(), |xp, out| {
        closed_vector_field(sys, xp, u, out)
    })
}

/// Damped Newton iterations. Returns the final state and residual norm.
fn newton<S: DynamicSystem + ?Sized>(
    sys: &S,
    mut x: Vec<f64>,
    u: &[f64],
    opts: &EquilibriumOptions,
) -> (Vec<f64>, f64, usize) {
    let mut f = residual(sys, &x, u);
    let mut r = norm(&f);
    let mut it = 0;
    while it < opts.max_iterations && r >= opts.tolerance {
        it += 1;
        let j = closed_jacobian(sys, &x, u);
        let svd = j.svd(true, true);
        let smax = svd.singular_values.max();
        let step = match svd.solve(&(-&f), opts.rank_cutoff * smax.max(f64::MIN_POSITIVE)) {
            Ok(s) => s,
            Err(_) => break,
        };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-6 {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a + lambda * d)
                .collect();
            let ft = residual(sys, &trial, u);
            let rt = norm(&ft);
            if rt < r {
                x = trial;
                f = ft;
                r = rt;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (x, r, it)
}

/// Pseudo-transient continuation: implicit-Euler steps with growing pseudo
/// time step, driving the closed-loop flow toward a steady state.
fn continuation<S: DynamicSystem + ?Sized>(
    sys: &S,
    mut x: Vec<f64>,
    u: &[f64],
    steps: usize,
) -> Vec<f64> {
    let n = x.len();
    let mut tau = 1e-3;
    let mut r = norm(&residual(sys, &x, u));
    for _ in 0..steps {
        let f = residual(sys, &x, u);
        let j = closed_jacobian(sys, &x, u);
        let m = DMatrix::<f64>::identity(n, n) / tau - j;
        let Some(d) = m.lu().solve(&f) else {
            tau *= 0.5;
            continue;
        };
        let trial: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + b).collect();
        let rt = norm(&residual(sys, &trial, u));
        if rt.is_finite() && rt < 10.0 * r.max(1e-300) {
            x = trial;
            tau = (tau * if rt < r { 2.0 } else { 1.0 }).min(1e6);
            r = rt;
        } else {
            tau *= 0.25;
        }
        if r < 1e-12 {
            break;
        }
    }
    x
}

/// Finds a state where the closed vector field (all channels pass-through)
/// vanishes.
pub fn find_equilibrium<S: DynamicSystem + ?Sized>(
    system: &S,
    guess: &[f64],
    u: &[f64],
    opts: &EquilibriumOptions,
) -> Result<Vec<f64>, SimError> {
    let n = system.dim();
    if guess.len() != n {
        return Err(SimError::StateLength {
            expected: n,
            got: guess.len(),
        });
    }
    let (x, r, it) = newton(system, guess.to_vec(), u, opts);
    if r < opts.tolerance {
        return Ok(x);
    }
    log::debug!("newton stalled at residual {r:e} after {it} iterations, continuing");
    let x = continuation(system, x, u, opts.continuation_steps);
    let (x, r2, it2) = newton(system, x, u, opts);
    if r2 < opts.tolerance {
        return Ok(x);
    }
    let f = residual(system, &x, u);
    let worst = f.iamax();
    Err(SimError::NoEquilibrium {
        iterations: it + it2,
        residual: r2,
        worst: system.state_names().get(worst).cloned().unwrap_or_default(),
    })
}
