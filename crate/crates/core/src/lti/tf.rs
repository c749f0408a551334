use num_complex::Complex;

use super::{poly, LtiError};
use crate::scalar::Scalar;

/// Anything with a complex frequency response `G(jω)`.
pub trait FrequencyResponse<T: Scalar> {
    fn response(&self, omega: T) -> Complex<T>;
}

/// SISO rational transfer function `num(s) / den(s)`, coefficients in
/// descending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTransferFunction<T> {
    num: Vec<T>,
    den: Vec<T>,
}

impl<T: Scalar> RationalTransferFunction<T> {
    pub fn new(num: Vec<T>, den: Vec<T>) -> Result<Self, LtiError> {
        if num.iter().chain(den.iter()).any(|c| !c.is_finite()) {
            return Err(LtiError::NonFinite);
        }
        let num = poly::trim(&num);
        let den = poly::trim(&den);
        if den.len() == 1 && den[0].is_zero() {
            return Err(LtiError::ZeroDenominator);
        }
        if num.len() > den.len() {
            return Err(LtiError::Improper {
                num_degree: num.len() - 1,
                den_degree: den.len() - 1,
            });
        }
        Ok(Self { num, den })
    }

    /// Static gain `k`.
    pub fn gain(k: T) -> Self {
        Self {
            num: vec![k],
            den: vec![T::one()],
        }
    }

    pub fn numerator(&self) -> &[T] {
        &self.num
    }

    pub fn denominator(&self) -> &[T] {
        &self.den
    }

    pub fn eval(&self, s: Complex<T>) -> Complex<T> {
        poly::eval(&self.num, s) / poly::eval(&self.den, s)
    }

    /// Value at `s = 0`.
    pub fn dc_gain(&self) -> T {
        *self.num.last().unwrap() / *self.den.last().unwrap()
    }

    /// Series connection `self · other`.
    pub fn series(&self, other: &Self) -> Self {
        Self {
            num: poly::mul(&self.num, &other.num),
            den: poly::mul(&self.den, &other.den),
        }
    }

    /// Unity negative-feedback closed loop `G / (1 + G)`.
    pub fn unity_feedback(&self) -> Self {
        Self {
            num: self.num.clone(),
            den: poly::add(&self.den, &self.num),
        }
    }

    pub fn poles(&self) -> Vec<Complex<T>> {
        poly::roots(&self.den)
    }

    pub fn zeros(&self) -> Vec<Complex<T>> {
        poly::roots(&self.num)
    }

    /// Oscillatory and real modes of the poles, one entry per conjugate
    /// pair, sorted by ascending damping ratio (least damped first).
    pub fn modes(&self) -> Vec<ContinuousMode<T>> {
        modes_from_poles(&self.poles())
    }
}

impl<T: Scalar> FrequencyResponse<T> for RationalTransferFunction<T> {
    fn response(&self, omega: T) -> Complex<T> {
        self.eval(Complex::new(T::zero(), omega))
    }
}

/// Frequency (Hz) and damping ratio (%) of a continuous pole `σ ± jω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousMode<T> {
    pub freq_hz: T,
    pub damping_pct: T,
}

impl<T: Scalar> ContinuousMode<T> {
    pub fn from_pole(p: Complex<T>) -> Self {
        let two_pi = T::PI() + T::PI();
        let mag = p.norm();
        let damping_pct = if mag.is_zero() {
            T::zero()
        } else {
            -p.re / mag * T::lit(100.0)
        };
        Self {
            freq_hz: p.im.abs() / two_pi,
            damping_pct,
        }
    }
}

pub fn modes_from_poles<T: Scalar>(poles: &[Complex<T>]) -> Vec<ContinuousMode<T>> {
    let mut modes: Vec<ContinuousMode<T>> = poles
        .iter()
        .filter(|p| p.im >= T::zero())
        .map(|&p| ContinuousMode::from_pole(p))
        .collect();
    modes.sort_by(|a, b| a.damping_pct.partial_cmp(&b.damping_pct).unwrap());
    modes
}

/// Open-loop gain, natural frequency and damping ratio of
/// `k ωn² / (s² + 2ζωn s + ωn²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderSpec<T> {
    pub k: T,
    pub omega_n: T,
    pub zeta: T,
}

impl<T: Scalar> SecondOrderSpec<T> {
    pub fn new(k: T, omega_n: T, zeta: T) -> Result<Self, LtiError> {
        if !(omega_n > T::zero()) || !omega_n.is_finite() {
            return Err(LtiError::InvalidSpec("omega_n must be positive"));
        }
        if !(zeta > T::zero() && zeta < T::one()) {
            return Err(LtiError::InvalidSpec("zeta must lie in (0, 1)"));
        }
        if !k.is_finite() {
            return Err(LtiError::NonFinite);
        }
        Ok(Self { k, omega_n, zeta })
    }

    /// `α = ζωn`, the negated real part of the open-loop poles.
    pub fn alpha(&self) -> T {
        self.zeta * self.omega_n
    }

    /// `β = ωn√(1−ζ²)`, the damped natural frequency.
    pub fn beta(&self) -> T {
        self.omega_n * (T::one() - self.zeta * self.zeta).sqrt()
    }

    /// Peak of `|G(jω)|`, reached at `ωn√(1−2ζ²)` when `ζ < 1/√2`.
    pub fn resonance_peak(&self) -> T {
        let z = self.zeta;
        if z * z < T::lit(0.5) {
            self.k.abs() / (T::lit(2.0) * z * (T::one() - z * z).sqrt())
        } else {
            self.k.abs()
        }
    }
}

/// Builds `G(s) = k ωn² / (s² + 2ζωn s + ωn²)`.
pub fn make_second_order<T: Scalar>(
    spec: SecondOrderSpec<T>,
) -> Result<RationalTransferFunction<T>, LtiError> {
    let spec = SecondOrderSpec::new(spec.k, spec.omega_n, spec.zeta)?;
    let wn2 = spec.omega_n * spec.omega_n;
    RationalTransferFunction::new(
        vec![spec.k * wn2],
        vec![T::one(), T::lit(2.0) * spec.zeta * spec.omega_n, wn2],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_spec() -> SecondOrderSpec<f64> {
        SecondOrderSpec::new(0.5, 4.44, 0.1414).unwrap()
    }

    #[test]
    fn second_order_coefficients() {
        let g = make_second_order(reference_spec()).unwrap();
        assert!((g.numerator()[0] - 0.5 * 19.7136).abs() < 1e-12);
        let d = g.denominator();
        assert_eq!(d.len(), 3);
        assert!((d[1] - 1.255_632).abs() < 1e-9);
        assert!((d[2] - 19.7136).abs() < 1e-12);
        assert!((g.dc_gain() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn poles_match_alpha_beta() {
        let spec = reference_spec();
        let g = make_second_order(spec).unwrap();
        for p in g.poles() {
            assert!((p.re + spec.alpha()).abs() < 1e-10);
            assert!((p.im.abs() - spec.beta()).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SecondOrderSpec::new(0.5, 4.44, 1.0).is_err());
        assert!(SecondOrderSpec::new(0.5, 4.44, 0.0).is_err());
        assert!(SecondOrderSpec::new(0.5, -1.0, 0.1).is_err());
        assert!(make_second_order(SecondOrderSpec {
            k: 0.5,
            omega_n: 1.0,
            zeta: 1.5
        })
        .is_err());
    }

    #[test]
    fn unity_feedback_mode_at_zero_delay() {
        let cl = make_second_order(reference_spec())
            .unwrap()
            .unity_feedback();
        let m = cl.modes()[0];
        assert!((m.freq_hz - 0.86).abs() < 0.005, "{m:?}");
        assert!((m.damping_pct - 11.54).abs() < 0.01, "{m:?}");
    }

    #[test]
    fn improper_is_rejected() {
        assert!(matches!(
            RationalTransferFunction::new(vec![1.0, 0.0, 0.0], vec![1.0, 1.0]),
            Err(LtiError::Improper { .. })
        ));
        assert!(RationalTransferFunction::<f64>::new(vec![1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let g = make_second_order(SecondOrderSpec::new(0.5_f32, 4.44, 0.1414).unwrap()).unwrap();
        assert!((g.response(0.0).re - 0.5).abs() < 1e-6);
    }
}
