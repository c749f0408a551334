//! Gain, phase and delay margins of delayed open loops, and a Nyquist
//! winding-number stability test for `e^{-sTd} L(s)` under unity negative
//! feedback.

use num_complex::Complex;

use super::{FrequencyResponse, LtiError};
use crate::scalar::Scalar;

/// Phase of `e^{-jωTd} L(jω)`: the principal argument of `L(jω)` minus `ωTd`.
///
/// The delay term is subtracted without wrapping, so
/// `delayed_phase(m, td, w) - delayed_phase(m, 0, w) == -w * td`.
pub fn delayed_phase<T: Scalar, M: FrequencyResponse<T> + ?Sized>(model: &M, td: T, omega: T) -> T {
    model.response(omega).arg() - omega * td
}

/// Magnitude of the delayed loop; equals `|L(jω)|` up to rounding.
pub fn delayed_magnitude<T: Scalar, M: FrequencyResponse<T> + ?Sized>(
    model: &M,
    td: T,
    omega: T,
) -> T {
    (model.response(omega) * Complex::from_polar(T::one(), -omega * td)).norm()
}

fn principal<T: Scalar>(x: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut y = x % two_pi;
    if y > T::PI() {
        y = y - two_pi;
    } else if y <= -T::PI() {
        y = y + two_pi;
    }
    y
}

/// Log-spaced grid of `n` points in `[lo, hi]`.
pub fn log_grid<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(lo > T::zero() && hi > lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    let last = T::from_usize(n - 1).unwrap();
    let mut g: Vec<T> = (0..n)
        .map(|i| (l0 + (l1 - l0) * T::from_usize(i).unwrap() / last).exp())
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Continuous (unwrapped) phase of `L(jω)` along an increasing grid.
pub fn unwrapped_phase<T: Scalar, M: FrequencyResponse<T> + ?Sized>(
    model: &M,
    omegas: &[T],
) -> Vec<T> {
    let mut out = Vec::with_capacity(omegas.len());
    let mut prev_arg = T::zero();
    let mut acc = T::zero();
    for (i, &w) in omegas.iter().enumerate() {
        let a = model.response(w).arg();
        if i == 0 {
            acc = a;
        } else {
            acc = acc + principal(a - prev_arg);
        }
        prev_arg = a;
        out.push(acc);
    }
    out
}

/// Margin enumeration of a delayed open loop over a frequency range.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport<T> {
    /// Frequencies where `|L| = 1`, ascending (rad/s).
    pub gain_crossovers: Vec<T>,
    /// Frequencies where the delayed phase is an odd multiple of -180°, ascending (rad/s).
    pub phase_crossovers: Vec<T>,
    /// `-20 log10 |L|` at each phase crossover (dB).
    pub gain_margins_db: Vec<T>,
    /// Lagging phase distance to -180° at each gain crossover, in `[0, 360)` degrees.
    pub phase_margins_deg: Vec<T>,
    /// Additional delay that brings each gain-crossover phase to -180° (s).
    pub delay_margins: Vec<T>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> MarginReport<T> {
    /// Smallest gain margin over all phase crossovers; `None` when the
    /// delayed phase never crosses -180° inside the range.
    pub fn min_gain_margin_db(&self) -> Option<T> {
        self.gain_margins_db
            .iter()
            .copied()
            .fold(None, |acc, g| Some(acc.map_or(g, |a: T| a.min(g))))
    }

    /// Smallest delay margin, if any gain crossover exists.
    pub fn min_delay_margin(&self) -> Option<T> {
        self.delay_margins
            .iter()
            .copied()
            .fold(None, |acc, g| Some(acc.map_or(g, |a: T| a.min(g))))
    }
}

fn bisect<T: Scalar, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, rel_tol: T) -> T {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = (a + b) / T::lit(2.0);
        if (b - a) <= rel_tol * m.abs() {
            return m;
        }
        let fm = f(m);
        if fm.is_zero() {
            return m;
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) / T::lit(2.0)
}

/// Enumerates every gain and phase crossover of `e^{-jωTd} L(jω)` inside
/// `omega_range` using a log grid of `points` samples, sign-change
/// bracketing and bisection to 1e-9 relative tolerance.
pub fn crossover_margins<T: Scalar, M: FrequencyResponse<T> + ?Sized>(
    model: &M,
    td: T,
    omega_range: (T, T),
    points: usize,
) -> Result<MarginReport<T>, LtiError> {
    let (lo, hi) = omega_range;
    if !(lo > T::zero()) || !(hi > lo) || !hi.is_finite() {
        return Err(LtiError::InvalidRange);
    }
    if td < T::zero() {
        return Err(LtiError::NegativeDelay);
    }
    let grid = log_grid(lo, hi, points.max(2));
    let base_phase = unwrapped_phase(model, &grid);
    let mags: Vec<T> = grid.iter().map(|&w| model.response(w).norm()).collect();
    let rel_tol = T::lit(1e-9);
    let two_pi = T::PI() + T::PI();
    let mut report = MarginReport {
        gain_crossovers: Vec::new(),
        phase_crossovers: Vec::new(),
        gain_margins_db: Vec::new(),
        phase_margins_deg: Vec::new(),
        delay_margins: Vec::new(),
        warnings: Vec::new(),
    };

    // Continuous delayed phase at any ω inside grid cell `i`.
    let phase_in_cell = |i: usize, w: T| -> T {
        let left = model.response(grid[i]).arg();
        base_phase[i] + principal(model.response(w).arg() - left) - w * td
    };

    let mut coarse = false;
    for i in 0..grid.len() - 1 {
        let (w0, w1) = (grid[i], grid[i + 1]);
        let (m0, m1) = (mags[i], mags[i + 1]);

        if (m0 - T::one()) * (m1 - T::one()) < T::zero() || (m0 - T::one()).is_zero() {
            let wc = bisect(|w| model.response(w).norm().ln(), w0, w1, rel_tol);
            let phase = phase_in_cell(i, wc);
            let mut pm = (phase + T::PI()) % two_pi;
            if pm < T::zero() {
                pm = pm + two_pi;
            }
            report.gain_crossovers.push(wc);
            report.phase_margins_deg.push(pm.to_degrees());
            report.delay_margins.push(pm / wc);
        }

        let p0 = base_phase[i] - w0 * td;
        let p1 = base_phase[i + 1] - w1 * td;
        if (p1 - p0).abs() > T::PI() {
            coarse = true;
        }
        // Odd multiples of -π: p + π = 2πn for integer n.
        let n0 = ((p0 + T::PI()) / two_pi).floor();
        let n1 = ((p1 + T::PI()) / two_pi).floor();
        if n0 != n1 {
            let (lo_n, hi_n) = if n0 < n1 { (n0, n1) } else { (n1, n0) };
            let mut n = lo_n + T::one();
            while n <= hi_n {
                let target = two_pi * n - T::PI();
                let wp = bisect(|w| phase_in_cell(i, w) - target, w0, w1, rel_tol);
                let gm = -T::lit(20.0) * model.response(wp).norm().log10();
                report.phase_crossovers.push(wp);
                report.gain_margins_db.push(gm);
                n = n + T::one();
            }
        }
    }
    if coarse {
        report.warnings.push(format!(
            "frequency grid too coarse for Td = {td}: delayed phase moves more than 180 degrees between samples"
        ));
    }
    if td > T::zero() && *mags.last().unwrap() > T::lit(0.1) {
        report.warnings.push(format!(
            "upper bound {hi} rad/s truncates the phase-crossover family of the delayed loop while |L| = {} is still significant",
            mags.last().unwrap()
        ));
    }
    Ok(report)
}

/// Settings for the Nyquist winding-number count.
#[derive(Debug, Clone, Copy)]
pub struct NyquistConfig<T> {
    pub omega_min: T,
    pub omega_max: T,
    pub points: usize,
    /// Distance to -1 below which the verdict is indeterminate.
    pub marginal_tolerance: T,
    pub max_refine_depth: u32,
}

impl<T: Scalar> Default for NyquistConfig<T> {
    fn default() -> Self {
        Self {
            omega_min: T::lit(1e-3),
            omega_max: T::lit(1e4),
            points: 100_000,
            marginal_tolerance: T::lit(1e-3),
            max_refine_depth: 24,
        }
    }
}

/// Outcome of a Nyquist count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NyquistCount<T> {
    /// Closed-loop right-half-plane poles (`Z = N + P` with `P = 0`).
    pub rhp_poles: i64,
    /// Closest approach of `1 + e^{-jωTd}L(jω)` to the origin.
    pub min_distance: T,
}

struct Winding<'a, T, M: ?Sized> {
    model: &'a M,
    td: T,
    min_dist: T,
    max_depth: u32,
}

impl<T: Scalar, M: FrequencyResponse<T> + ?Sized> Winding<'_, T, M> {
    fn f(&mut self, w: T) -> Complex<T> {
        let v = Complex::new(T::one(), T::zero())
            + self.model.response(w) * Complex::from_polar(T::one(), -w * self.td);
        let d = v.norm();
        if d < self.min_dist {
            self.min_dist = d;
        }
        v
    }

    /// Continuous change of `arg F` from `w0` to `w1`.
    fn sweep(&mut self, w0: T, f0: Complex<T>, w1: T, f1: Complex<T>, depth: u32) -> T {
        let d = principal(f1.arg() - f0.arg());
        if d.abs() < T::lit(0.5) || depth >= self.max_depth {
            return d;
        }
        let wm = (w0 + w1) / T::lit(2.0);
        let fm = self.f(wm);
        self.sweep(w0, f0, wm, fm, depth + 1) + self.sweep(wm, fm, w1, f1, depth + 1)
    }
}

/// Counts closed-loop RHP poles of `e^{-sTd} L(s)` under unity negative
/// feedback, assuming `L` is stable and strictly proper.
pub fn nyquist_count<T: Scalar, M: FrequencyResponse<T> + ?Sized>(
    model: &M,
    td: T,
    cfg: &NyquistConfig<T>,
) -> NyquistCount<T> {
    let mut w = Winding {
        model,
        td,
        min_dist: T::infinity(),
        max_depth: cfg.max_refine_depth,
    };
    let grid = log_grid(cfg.omega_min, cfg.omega_max, cfg.points.max(2));
    let mut prev_w = T::zero();
    let mut prev_f = w.f(T::zero());
    let mut total = T::zero();
    for &wk in &grid {
        let fk = w.f(wk);
        total = total + w.sweep(prev_w, prev_f, wk, fk, 0);
        prev_w = wk;
        prev_f = fk;
    }
    // Beyond omega_max |L| < 1 is assumed, so F returns to +1 without winding.
    total = total + principal(T::zero() - prev_f.arg());
    // Z = N_cw = -Δarg(full contour)/2π = -Δarg(half)/π.
    let z = (-total / T::PI()).round();
    NyquistCount {
        rhp_poles: z.to_i64().unwrap_or(i64::MAX),
        min_distance: w.min_dist,
    }
}

/// Closed-loop stability of `e^{-sTd} L(s)` with unity negative feedback.
/// Errors with [`LtiError::Indeterminate`] when the locus passes within
/// the marginal tolerance of -1.
pub fn delayed_loop_stable<T: Scalar, M: FrequencyResponse<T> + ?Sized>(
    model: &M,
    td: T,
) -> Result<bool, LtiError> {
    delayed_loop_stable_with(model, td, &NyquistConfig::default())
}

pub fn delayed_loop_stable_with<T: Scalar, M: FrequencyResponse<T> + ?Sized>(
    model: &M,
    td: T,
    cfg: &NyquistConfig<T>,
) -> Result<bool, LtiError> {
    if td < T::zero() {
        return Err(LtiError::NegativeDelay);
    }
    let count = nyquist_count(model, td, cfg);
    if count.min_distance < cfg.marginal_tolerance {
        return Err(LtiError::Indeterminate {
            distance: count.min_distance.as_f64(),
        });
    }
    Ok(count.rhp_poles == 0)
}
