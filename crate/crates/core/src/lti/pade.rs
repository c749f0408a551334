use super::{LtiError, RationalTransferFunction};
use crate::scalar::Scalar;

pub const MAX_PADE_ORDER: usize = 20;

/// Diagonal `[n/n]` Padé approximant of `e^{-sTd}`.
pub fn pade_delay<T: Scalar>(td: T, order: usize) -> Result<RationalTransferFunction<T>, LtiError> {
    if order == 0 || order > MAX_PADE_ORDER {
        return Err(LtiError::PadeOrder(order));
    }
    if !(td > T::zero()) || !td.is_finite() {
        return Err(LtiError::NegativeDelay);
    }
    let n = order;
    // c_j = (2n-j)! n! / ((2n)! j! (n-j)!), built incrementally to avoid
    // factorial overflow: c_0 = 1, c_{j+1} = c_j (n-j) / ((2n-j) (j+1)).
    let mut c = Vec::with_capacity(n + 1);
    let mut cj = T::one();
    for j in 0..=n {
        c.push(cj);
        if j < n {
            let num = T::from_usize(n - j).unwrap();
            let den = T::from_usize((2 * n - j) * (j + 1)).unwrap();
            cj = cj * num / den;
        }
    }
    // Ascending powers first, then reverse into descending storage.
    let mut num = Vec::with_capacity(n + 1);
    let mut den = Vec::with_capacity(n + 1);
    let mut tpow = T::one();
    for (j, &cj) in c.iter().enumerate() {
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        num.push(sign * cj * tpow);
        den.push(cj * tpow);
        tpow = tpow * td;
    }
    num.reverse();
    den.reverse();
    RationalTransferFunction::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::FrequencyResponse;

    #[test]
    fn first_order_is_canonical() {
        let p = pade_delay(0.4_f64, 1).unwrap();
        // (1 - 0.2 s) / (1 + 0.2 s) in descending powers.
        assert_eq!(p.numerator(), &[-0.2, 1.0]);
        assert_eq!(p.denominator(), &[0.2, 1.0]);
    }

    #[test]
    fn all_pass_magnitude() {
        for order in [1, 3, 10, 20] {
            let p = pade_delay(0.2_f64, order).unwrap();
            for w in [0.0, 0.1, 1.0, 10.0, 100.0, 1e4] {
                assert!(
                    (p.response(w).norm() - 1.0).abs() < 1e-12,
                    "order {order} w {w}"
                );
            }
        }
    }

    #[test]
    fn matches_taylor_series_to_order_2n() {
        // Compare the power series of num/den with exp(-sTd) through s^{2n}.
        let td = 0.3_f64;
        for n in 1..=6usize {
            let p = pade_delay(td, n).unwrap();
            let mut num: Vec<f64> = p.numerator().to_vec();
            let mut den: Vec<f64> = p.denominator().to_vec();
            num.reverse();
            den.reverse();
            let m = 2 * n + 1;
            num.resize(m, 0.0);
            den.resize(m, 0.0);
            // Series division q = num / den.
            let mut q = vec![0.0; m];
            for k in 0..m {
                let mut acc = num[k];
                for j in 1..=k {
                    acc -= den[j] * q[k - j];
                }
                q[k] = acc / den[0];
            }
            let mut fact = 1.0;
            for (k, qk) in q.iter().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                let expected = (-td).powi(k as i32) / fact;
                assert!(
                    (qk - expected).abs() < 1e-12 * (1.0 + expected.abs()),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn order_guard() {
        assert!(matches!(
            pade_delay(0.2_f64, 21),
            Err(LtiError::PadeOrder(21))
        ));
        assert!(pade_delay(0.2_f64, 0).is_err());
        assert!(pade_delay(0.0_f64, 3).is_err());
    }
}
