use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::window::{EstimatorConfig, RingdownWindow};
use super::ModalError;

pub const MODES_HEADER: [&str; 6] = [
    "frequency_hz",
    "dr_percent",
    "amplitude",
    "phase_rad",
    "energy_percent",
    "estimator",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Estimator {
    MatrixPencil,
    Era,
}

impl Estimator {
    pub fn label(self) -> &'static str {
        match self {
            Estimator::MatrixPencil => "MP",
            Estimator::Era => "ERA",
        }
    }
}

/// One fitted mode; conjugate pole pairs are merged into a single entry.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModeEstimate {
    pub freq_hz: f64,
    pub damping_pct: f64,
    /// Peak amplitude of the mode's contribution at the window start.
    pub amplitude: f64,
    pub phase_rad: f64,
    pub energy_pct: f64,
    /// Continuous pole `σ + jω` (upper half plane for oscillatory modes).
    pub pole: (f64, f64),
    pub estimator: Estimator,
}

impl ModeEstimate {
    /// A non-oscillatory pole so slow that it only represents a level shift
    /// within the window.
    pub fn is_offset(&self, window_duration: f64) -> bool {
        let (re, im) = self.pole;
        im.abs() < 1e-9 && re.abs() * window_duration < 0.05
    }

    pub fn is_oscillatory(&self) -> bool {
        self.pole.1 > 0.0
    }
}

/// Model order from a descending singular-value list.
fn order(sv: &[f64], cfg: &EstimatorConfig) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) {
        return 0;
    }
    sv.iter()
        .take_while(|&&s| s > cfg.threshold * smax)
        .count()
        .min(cfg.max_order)
}

/// SVD with singular triplets sorted by descending value.
fn sorted_svd(m: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let u = DMatrix::from_fn(u.nrows(), idx.len(), |r, c| u[(r, idx[c])]);
    let vt = DMatrix::from_fn(idx.len(), vt.ncols(), |r, c| vt[(idx[r], c)]);
    (u, sv, vt)
}

fn hankel(y: &[f64], rows: usize, cols: usize, shift: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| y[i + j + shift])
}

fn check_len(w: &RingdownWindow) -> Result<(), ModalError> {
    if w.len() < 16 {
        return Err(ModalError::TooShort {
            needed: 16,
            got: w.len(),
        });
    }
    Ok(())
}

fn pencil_poles(w: &RingdownWindow, cfg: &EstimatorConfig) -> Vec<Complex64> {
    let y = w.values();
    let n = y.len();
    let l = cfg.pencil(n);
    let (_, sv, vt) = sorted_svd(hankel(y, n - l, l + 1, 0));
    let m = order(&sv, cfg);
    if m == 0 {
        return Vec::new();
    }
    // rows of V' are the right singular vectors' components over L+1 lags
    let vp = vt.rows(0, m).transpose();
    let v1 = vp.rows(0, l).into_owned();
    let v2 = vp.rows(1, l).into_owned();
    let Some(a) = lstsq(v1, v2) else {
        return Vec::new();
    };
    crate::lti::eigenvalues(&a).unwrap_or_default()
}

fn era_poles(w: &RingdownWindow, cfg: &EstimatorConfig) -> Vec<Complex64> {
    let y = w.values();
    let n = y.len();
    let cols = cfg.pencil(n);
    let rows = n - cols;
    let (u, sv, vt) = sorted_svd(hankel(y, rows, cols, 0));
    let m = order(&sv, cfg);
    if m == 0 {
        return Vec::new();
    }
    let h1 = hankel(y, rows, cols, 1);
    let s_inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(
        m,
        sv[..m].iter().map(|s| 1.0 / s.sqrt()),
    ));
    let a =
        &s_inv_sqrt * u.columns(0, m).transpose() * h1 * vt.rows(0, m).transpose() * &s_inv_sqrt;
    crate::lti::eigenvalues(&a).unwrap_or_default()
}

/// Least-squares solution of `A X = B` for full-column-rank `A` via QR.
fn lstsq<T: nalgebra::ComplexField>(a: DMatrix<T>, b: DMatrix<T>) -> Option<DMatrix<T>> {
    let qr = a.qr();
    let qtb = qr.q().adjoint() * b;
    qr.r().solve_upper_triangular(&qtb)
}

/// Least-squares residues of `y[n] = Σ r_m z_m^n`.
fn residues(y: &[f64], z: &[Complex64]) -> Vec<Complex64> {
    let n = y.len();
    if z.is_empty() || n == 0 {
        return Vec::new();
    }
    let v = DMatrix::from_fn(n, z.len(), |i, j| z[j].powu(i as u32));
    let b = DMatrix::from_iterator(n, 1, y.iter().map(|&v| Complex64::new(v, 0.0)));
    match lstsq(v, b) {
        Some(r) if r.iter().all(|c| c.re.is_finite() && c.im.is_finite()) => {
            r.iter().copied().collect()
        }
        _ => vec![Complex64::new(0.0, 0.0); z.len()],
    }
}

struct Component {
    pole: Complex64,
    residue: Complex64,
    oscillatory: bool,
}

impl Component {
    fn trace(&self, n: usize) -> Vec<f64> {
        let mut p = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let c = self.residue * p;
            out.push(if self.oscillatory { 2.0 * c.re } else { c.re });
            p *= self.pole;
        }
        out
    }
}

fn components(y: &[f64], z: &[Complex64]) -> Vec<Component> {
    let r = residues(y, z);
    let mut out = Vec::new();
    for (zi, ri) in z.iter().zip(&r) {
        let tol = 1e-10 * zi.norm().max(1e-300);
        if zi.im > tol {
            out.push(Component {
                pole: *zi,
                residue: *ri,
                oscillatory: true,
            });
        } else if zi.im.abs() <= tol {
            out.push(Component {
                pole: Complex64::new(zi.re, 0.0),
                residue: Complex64::new(ri.re, 0.0),
                oscillatory: false,
            });
        }
    }
    out
}

/// Energy share of each component trace relative to the full reconstruction.
fn energy_shares(traces: &[Vec<f64>]) -> Result<Vec<f64>, ModalError> {
    let n = traces.first().map_or(0, Vec::len);
    let total: f64 = (0..n)
        .map(|k| {
            let s: f64 = traces.iter().map(|t| t[k]).sum();
            s * s
        })
        .sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(ModalError::ZeroEnergy);
    }
    Ok(traces
        .iter()
        .map(|t| (t.iter().map(|v| v * v).sum::<f64>() / total * 100.0).clamp(0.0, 100.0))
        .collect())
}

fn to_modes(w: &RingdownWindow, z: &[Complex64], estimator: Estimator) -> Vec<ModeEstimate> {
    let y = w.values();
    let comps = components(y, z);
    let traces: Vec<Vec<f64>> = comps.iter().map(|c| c.trace(y.len())).collect();
    let shares = energy_shares(&traces).unwrap_or_else(|_| vec![0.0; traces.len()]);
    let dt = w.dt();
    let mut modes: Vec<ModeEstimate> = comps
        .iter()
        .zip(shares)
        .filter(|(c, _)| c.pole.norm() > 0.0)
        .map(|(c, energy)| {
            let s = c.pole.ln() / dt;
            let mag = s.norm();
            let damping_pct = if mag > 0.0 { -s.re / mag * 100.0 } else { 0.0 };
            let amp = if c.oscillatory {
                2.0 * c.residue.norm()
            } else {
                c.residue.norm()
            };
            ModeEstimate {
                freq_hz: s.im.abs() / (2.0 * std::f64::consts::PI),
                damping_pct,
                amplitude: amp,
                phase_rad: c.residue.arg(),
                energy_pct: energy,
                pole: (s.re, s.im.abs()),
                estimator,
            }
        })
        .collect();
    modes.sort_by(|a, b| b.energy_pct.total_cmp(&a.energy_pct));
    modes
}

/// Runs one estimator on a conditioned copy of `window`.
pub fn estimate(
    window: &RingdownWindow,
    cfg: &EstimatorConfig,
    estimator: Estimator,
) -> Result<Vec<ModeEstimate>, ModalError> {
    cfg.validate()?;
    let w = cfg.condition(window)?;
    check_len(&w)?;
    let z = match estimator {
        Estimator::MatrixPencil => pencil_poles(&w, cfg),
        Estimator::Era => era_poles(&w, cfg),
    };
    Ok(to_modes(&w, &z, estimator))
}

/// Matrix Pencil estimate; modes sorted by energy, largest first.
pub fn matrix_pencil(
    window: &RingdownWindow,
    cfg: &EstimatorConfig,
) -> Result<Vec<ModeEstimate>, ModalError> {
    estimate(window, cfg, Estimator::MatrixPencil)
}

/// Eigensystem Realization Algorithm estimate; same contract as
/// [`matrix_pencil`].
pub fn era(
    window: &RingdownWindow,
    cfg: &EstimatorConfig,
) -> Result<Vec<ModeEstimate>, ModalError> {
    estimate(window, cfg, Estimator::Era)
}

/// Energy share (%) of each mode over `window`, recomputing the residues by
/// least squares against the window samples.
pub fn mode_energy(
    modes: &[ModeEstimate],
    window: &RingdownWindow,
) -> Result<Vec<f64>, ModalError> {
    let dt = window.dt();
    let mut z = Vec::new();
    for m in modes {
        let s = Complex64::new(m.pole.0, m.pole.1);
        let zi = (s * dt).exp();
        z.push(zi);
        if m.pole.1 > 0.0 {
            z.push(zi.conj());
        }
    }
    let comps = components(window.values(), &z);
    let traces: Vec<Vec<f64>> = comps.iter().map(|c| c.trace(window.len())).collect();
    energy_shares(&traces)
}

pub fn write_modes_csv<W: Write>(modes: &[ModeEstimate], w: W) -> Result<(), ModalError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(MODES_HEADER)?;
    for m in modes {
        wtr.write_record([
            format!("{:.6}", m.freq_hz),
            format!("{:.4}", m.damping_pct),
            format!("{:.6e}", m.amplitude),
            format!("{:.6}", m.phase_rad),
            format!("{:.4}", m.energy_pct),
            m.estimator.label().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
