use nalgebra::DMatrix;

use super::{closed_vector_field, DynamicSystem, SimError};
use crate::lti::StateSpaceModel;

/// Central-difference Jacobian of `f` at `x` with per-coordinate step
/// `eps * max(1, |x_j|)`.
pub fn jacobian_central<F>(x: &[f64], eps: f64, m: usize, mut f: F) -> DMatrix<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    for j in 0..n {
        let dj = eps * x[j].abs().max(1.0);
        xp[j] = x[j] + dj;
        f(&xp, &mut fp);
        xp[j] = x[j] - dj;
        f(&xp, &mut fm);
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * dj);
        }
    }
    jac
}

/// Small-signal model around an equilibrium.
///
/// Inputs are `[channel outputs, exogenous]`; outputs are
/// `[channel inputs, system outputs]`.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub model: StateSpaceModel,
    pub channels: Vec<String>,
    pub exogenous: Vec<String>,
    pub outputs: Vec<String>,
    /// Jacobian entries where the two step sizes disagreed.
    pub warnings: Vec<String>,
}

impl Linearization {
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Closes the listed channels as pass-through.
    pub fn close_channels(&self, which: &[usize]) -> Result<StateSpaceModel, SimError> {
        let pairs: Vec<(usize, usize)> = which.iter().map(|&i| (i, i)).collect();
        Ok(self.model.close_loops(&pairs)?)
    }

    /// Model with every channel closed.
    pub fn closed_loop(&self) -> Result<StateSpaceModel, SimError> {
        let all: Vec<usize> = (0..self.channel_count()).collect();
        self.close_channels(&all)
    }

    /// Model with every channel except `open` closed; the loop through
    /// `open` is then available as `siso(open, open)`.
    pub fn open_at(&self, open: usize) -> Result<StateSpaceModel, SimError> {
        let others: Vec<usize> = (0..self.channel_count()).filter(|&i| i != open).collect();
        self.close_channels(&others)
    }
}

struct Blocks {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

fn blocks<S: DynamicSystem + ?Sized>(sys: &S, x: &[f64], u: &[f64], eps: f64) -> Blocks {
    let n = x.len();
    let nc = sys.channel_names().len();
    let ne = u.len();
    let ny = sys.output_names().len();
    let mut ch0 = vec![0.0; nc];
    sys.channel_inputs(x, u, &mut ch0);

    // z = [x, ch, u]
    let mut z: Vec<f64> = Vec::with_capacity(n + nc + ne);
    z.extend_from_slice(x);
    z.extend_from_slice(&ch0);
    z.extend_from_slice(u);
    let rows = n + nc + ny;
    let full = jacobian_central(&z, eps, rows, |zp, out| {
        let (xp, rest) = zp.split_at(n);
        let (cp, up) = rest.split_at(nc);
        let (dx, rest) = out.split_at_mut(n);
        let (ci, yo) = rest.split_at_mut(nc);
        sys.derivatives(xp, cp, up, dx);
        sys.channel_inputs(xp, up, ci);
        sys.outputs(xp, cp, up, yo);
    });
    let a = full.view((0, 0), (n, n)).into_owned();
    let b = full.view((0, n), (n, nc + ne)).into_owned();
    let c = full.view((n, 0), (nc + ny, n)).into_owned();
    let d = full.view((n, n), (nc + ny, nc + ne)).into_owned();
    Blocks { a, b, c, d }
}

/// Linearizes `system` at the equilibrium `x` by central differences,
/// cross-checking steps `eps` and `eps/2` and returning the Richardson
/// extrapolation of the two.
pub fn linearize<S: DynamicSystem + ?Sized>(
    system: &S,
    x: &[f64],
    u: &[f64],
    eps: f64,
) -> Result<Linearization, SimError> {
    let mut dx = vec![0.0; x.len()];
    closed_vector_field(system, x, u, &mut dx);
    let res = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(res < 1e-9) {
        return Err(SimError::NotEquilibrium(res));
    }
    let coarse = blocks(system, x, u, eps);
    let fine = blocks(system, x, u, eps / 2.0);
    let mut warnings = Vec::new();
    let mut check = |name: &str, m1: &DMatrix<f64>, m2: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = m2.clone();
        for i in 0..m1.nrows() {
            // entries far below the row's largest are round-off dominated
            let floor = 1e-9 * m2.row(i).amax();
            for j in 0..m1.ncols() {
                let (p, q) = (m1[(i, j)], m2[(i, j)]);
                let scale = p.abs().max(q.abs());
                if scale > 1e-8_f64.max(floor) && (p - q).abs() > 1e-5 * scale {
                    warnings.push(format!("{name}[{i},{j}]: {p:.6e} vs {q:.6e}"));
                }
                out[(i, j)] = (4.0 * q - p) / 3.0;
            }
        }
        out
    };
    let a = check("A", &coarse.a, &fine.a);
    let b = check("B", &coarse.b, &fine.b);
    let c = check("C", &coarse.c, &fine.c);
    let d = check("D", &coarse.d, &fine.d);
    for w in &warnings {
        log::warn!("linearization step disagreement {w}");
    }
    let model = StateSpaceModel::new(a, b, c, d)?;
    Ok(Linearization {
        model,
        channels: system.channel_names(),
        exogenous: system.exogenous_names(),
        outputs: system.output_names(),
        warnings,
    })
}
