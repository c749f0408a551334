//! Exact z-domain analysis of the unity-feedback loop formed by a sampler,
//! a zero-order hold and an underdamped second-order plant.
//!
//! With open-loop poles `-α ± jβ`, the hold-equivalent plant is
//! `G(z) = (A z + B) / (z² - 2e^{-αTs}cos(βTs) z + e^{-2αTs})` and the closed
//! loop has the characteristic quadratic
//! `z² + (A - 2e^{-αTs}cos βTs) z + (B + e^{-2αTs}) = 0`.

use std::io::Write;

use num_complex::Complex;

use crate::lti::{ContinuousMode, SecondOrderSpec};
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum ZohError {
    #[error("sampling period must be positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("invalid Ts range [{0}, {1}]")]
    InvalidRange(f64, f64),
    #[error("pole magnitude stays on the unit circle around Ts = {0}; boundary is degenerate")]
    DegenerateBoundary(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coefficients of the hold-equivalent second-order plant at one `Ts`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZohQuadratic<T> {
    pub a: T,
    pub b: T,
    pub alpha: T,
    pub beta: T,
    pub ts: T,
}

impl<T: Scalar> ZohQuadratic<T> {
    /// Open-loop discrete poles `e^{-αTs}(cos βTs ± j sin βTs)`.
    pub fn open_loop_poles(&self) -> [Complex<T>; 2] {
        let r = (-self.alpha * self.ts).exp();
        let th = self.beta * self.ts;
        [Complex::from_polar(r, th), Complex::from_polar(r, -th)]
    }

    /// `(c1, c0)` of the monic closed-loop characteristic quadratic.
    pub fn characteristic(&self) -> (T, T) {
        let e = (-self.alpha * self.ts).exp();
        let two = T::lit(2.0);
        (
            self.a - two * e * (self.beta * self.ts).cos(),
            self.b + e * e,
        )
    }

    /// `G(z)` evaluated at a complex point.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let e = (-self.alpha * self.ts).exp();
        let two = T::lit(2.0);
        let den = z * z - z * (two * e * (self.beta * self.ts).cos()) + e * e;
        (z * self.a + self.b) / den
    }
}

pub fn zoh_discretize<T: Scalar>(
    spec: &SecondOrderSpec<T>,
    ts: T,
) -> Result<ZohQuadratic<T>, ZohError> {
    if !(ts > T::zero()) || !ts.is_finite() {
        return Err(ZohError::NonPositivePeriod(ts.as_f64()));
    }
    let (k, wn) = (spec.k, spec.omega_n);
    let alpha = spec.alpha();
    let beta = spec.beta();
    let phi = beta.atan2(alpha);
    let e = (-alpha * ts).exp();
    let scale = k * wn / beta;
    let a = k - scale * e * (beta * ts + phi).sin();
    let b = k * e * e + scale * e * (beta * ts - phi).sin();
    Ok(ZohQuadratic {
        a,
        b,
        alpha,
        beta,
        ts,
    })
}

/// Closed-loop roots of the characteristic quadratic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretePolePair<T> {
    pub z1: Complex<T>,
    pub z2: Complex<T>,
}

impl<T: Scalar> DiscretePolePair<T> {
    pub fn max_magnitude(&self) -> T {
        self.z1.norm().max(self.z2.norm())
    }
}

pub fn char_roots<T: Scalar>(q: &ZohQuadratic<T>) -> DiscretePolePair<T> {
    let (c1, c0) = q.characteristic();
    let two = T::lit(2.0);
    let disc = c1 * c1 - T::lit(4.0) * c0;
    let pair = if disc >= T::zero() {
        let sq = disc.sqrt();
        let qq = -(c1 + c1.signum() * sq) / two;
        let z1 = qq;
        let z2 = if qq.is_zero() { T::zero() } else { c0 / qq };
        DiscretePolePair {
            z1: Complex::new(z1, T::zero()),
            z2: Complex::new(z2, T::zero()),
        }
    } else {
        let re = -c1 / two;
        let im = (-disc).sqrt() / two;
        DiscretePolePair {
            z1: Complex::new(re, im),
            z2: Complex::new(re, -im),
        }
    };
    debug_assert!({
        let res = |z: Complex<T>| (z * z + z * c1 + c0).norm();
        let scale = T::one() + c1.abs() + c0.abs();
        let tol = T::epsilon() * T::lit(1e3) * scale;
        res(pair.z1) <= tol && res(pair.z2) <= tol
    });
    pair
}

pub fn max_pole_magnitude<T: Scalar>(spec: &SecondOrderSpec<T>, ts: T) -> Result<T, ZohError> {
    Ok(char_roots(&zoh_discretize(spec, ts)?).max_magnitude())
}

/// Ordered, disjoint `Ts` intervals on which every closed-loop pole lies
/// strictly inside the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityIntervalList<T> {
    pub intervals: Vec<(T, T)>,
    pub range: (T, T),
}

impl<T: Scalar> StabilityIntervalList<T> {
    pub fn contains(&self, ts: T) -> bool {
        self.intervals.iter().any(|&(a, b)| ts >= a && ts <= b)
    }

    /// Complement of the stable set within the queried range.
    pub fn unstable_intervals(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        let mut cursor = self.range.0;
        for &(a, b) in &self.intervals {
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < self.range.1 {
            out.push((cursor, self.range.1));
        }
        out
    }
}

/// Scans `ts_range` on a log grid with `points_per_decade` samples and
/// refines every `max|z| = 1` boundary by bisection.
pub fn stability_intervals<T: Scalar>(
    spec: &SecondOrderSpec<T>,
    ts_range: (T, T),
    points_per_decade: usize,
) -> Result<StabilityIntervalList<T>, ZohError> {
    let (lo, hi) = ts_range;
    if !(lo > T::zero()) || !(hi > lo) || !hi.is_finite() {
        return Err(ZohError::InvalidRange(lo.as_f64(), hi.as_f64()));
    }
    let decades = (hi / lo).log10();
    let n = ((decades * T::from_usize(points_per_decade.max(2)).unwrap())
        .ceil()
        .to_usize()
        .unwrap())
    .max(2);
    let grid = crate::lti::log_grid(lo, hi, n + 1);
    let margin = |ts: T| -> Result<T, ZohError> { Ok(max_pole_magnitude(spec, ts)? - T::one()) };

    let boundary_tol = T::lit(1e-12);
    let mut intervals = Vec::new();
    let mut start: Option<T> = None;
    let mut prev = margin(grid[0])?;
    let mut flat_run = 0usize;
    if prev < T::zero() {
        start = Some(grid[0]);
    }
    for i in 1..grid.len() {
        let cur = margin(grid[i])?;
        if cur.abs() < boundary_tol {
            flat_run += 1;
            if flat_run >= 3 {
                return Err(ZohError::DegenerateBoundary(grid[i].as_f64()));
            }
        } else {
            flat_run = 0;
        }
        let was_stable = prev < T::zero();
        let is_stable = cur < T::zero();
        if was_stable != is_stable {
            let (mut a, mut b) = (grid[i - 1], grid[i]);
            for _ in 0..200 {
                let m = (a + b) / T::lit(2.0);
                if b - a <= T::lit(1e-13) * m {
                    break;
                }
                if (margin(m)? < T::zero()) == was_stable {
                    a = m;
                } else {
                    b = m;
                }
            }
            let edge = (a + b) / T::lit(2.0);
            if is_stable {
                start = Some(edge);
            } else if let Some(s) = start.take() {
                intervals.push((s, edge));
            }
        }
        prev = cur;
    }
    if let Some(s) = start {
        intervals.push((s, hi));
    }
    Ok(StabilityIntervalList {
        intervals,
        range: (lo, hi),
    })
}

/// Continuous-time image of one discrete pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscreteModeImage<T> {
    Mode(ContinuousMode<T>),
    /// `z = 0`: the pole decays completely within one sample.
    InstantDecay,
}

/// Maps the closed-loop pair through the principal branch `s = ln(z)/Ts`.
/// Conjugate pairs yield one entry; every reported frequency is at most
/// `1/(2Ts)`.
pub fn z_to_continuous_modes<T: Scalar>(
    pair: &DiscretePolePair<T>,
    ts: T,
) -> Vec<DiscreteModeImage<T>> {
    let conj = pair.z1.im != T::zero()
        && (pair.z1.conj() - pair.z2).norm()
            <= T::epsilon() * T::lit(16.0) * (T::one() + pair.z1.norm());
    let roots: Vec<Complex<T>> = if conj {
        vec![if pair.z1.im > T::zero() {
            pair.z1
        } else {
            pair.z2
        }]
    } else {
        vec![pair.z1, pair.z2]
    };
    roots
        .into_iter()
        .map(|z| {
            if z.norm().is_zero() {
                DiscreteModeImage::InstantDecay
            } else {
                let s = z.ln() / ts;
                DiscreteModeImage::Mode(ContinuousMode::from_pole(s))
            }
        })
        .collect()
}

pub const POLE_SWEEP_HEADER: [&str; 3] = ["ts_s", "max_pole_magnitude", "stable_flag"];

/// Writes `max|z|` over a list of sampling periods.
pub fn write_pole_sweep_csv<T: Scalar, W: Write>(
    out: W,
    spec: &SecondOrderSpec<T>,
    ts_values: &[T],
) -> Result<(), ZohError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POLE_SWEEP_HEADER)?;
    for &ts in ts_values {
        let m = max_pole_magnitude(spec, ts)?;
        w.write_record(&[
            format!("{}", ts.as_f64()),
            format!("{:e}", m.as_f64()),
            (if m < T::one() { "1" } else { "0" }).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
