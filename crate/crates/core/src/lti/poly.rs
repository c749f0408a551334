//! Dense polynomial helpers. Coefficients are stored in descending powers.

use num_complex::Complex;

use crate::scalar::Scalar;

/// Evaluates a real-coefficient polynomial at a complex point (Horner).
pub fn eval<T: Scalar>(coeffs: &[T], s: Complex<T>) -> Complex<T> {
    coeffs
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * s + c)
}

/// Evaluates a complex-coefficient polynomial at a complex point.
pub fn eval_complex<T: Scalar>(coeffs: &[Complex<T>], s: Complex<T>) -> Complex<T> {
    coeffs
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * s + c)
}

pub fn mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

/// Adds two polynomials, aligning them on the constant term.
pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    let mut out = vec![T::zero(); n];
    for (k, &x) in a.iter().rev().enumerate() {
        out[n - 1 - k] = out[n - 1 - k] + x;
    }
    for (k, &x) in b.iter().rev().enumerate() {
        out[n - 1 - k] = out[n - 1 - k] + x;
    }
    out
}

pub fn scale<T: Scalar>(a: &[T], k: T) -> Vec<T> {
    a.iter().map(|&x| x * k).collect()
}

/// Removes leading (highest-power) coefficients that are exactly zero.
pub fn trim<T: Scalar>(a: &[T]) -> Vec<T> {
    let first = a.iter().position(|c| !c.is_zero()).unwrap_or(a.len());
    let trimmed = a[first..].to_vec();
    if trimmed.is_empty() {
        vec![T::zero()]
    } else {
        trimmed
    }
}

pub fn derivative<T: Scalar>(a: &[T]) -> Vec<T> {
    let n = a.len();
    if n <= 1 {
        return vec![T::zero()];
    }
    a[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * T::from_usize(n - 1 - i).unwrap())
        .collect()
}

/// All complex roots of a real polynomial by simultaneous Aberth–Ehrlich
/// iteration followed by Newton polishing.
pub fn roots<T: Scalar>(coeffs: &[T]) -> Vec<Complex<T>> {
    let p = trim(coeffs);
    let n = p.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = p[0];
    let monic: Vec<T> = p.iter().map(|&c| c / lead).collect();
    let dp = derivative(&monic);

    // Fujiwara-style bound for the initial circle.
    let mut radius = T::zero();
    for (i, c) in monic.iter().enumerate().skip(1) {
        let r = c.abs().powf(T::one() / T::from_usize(i).unwrap());
        if r > radius {
            radius = r;
        }
    }
    if radius.is_zero() {
        radius = T::one();
    }
    let two_pi = T::PI() + T::PI();
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let ang = two_pi * T::from_usize(k).unwrap() / T::from_usize(n).unwrap() + T::lit(0.4);
            Complex::from_polar(radius, ang)
        })
        .collect();

    let tol = T::epsilon() * T::lit(8.0);
    for _ in 0..500 {
        let mut max_step = T::zero();
        for k in 0..n {
            let pk = eval(&monic, z[k]);
            let dpk = eval(&dp, z[k]);
            if pk.norm().is_zero() {
                continue;
            }
            let ratio = pk / dpk;
            let mut sum = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if !d.norm().is_zero() {
                        sum = sum + Complex::new(T::one(), T::zero()) / d;
                    }
                }
            }
            let denom = Complex::new(T::one(), T::zero()) - ratio * sum;
            let step = if denom.norm().is_zero() {
                ratio
            } else {
                ratio / denom
            };
            if step.re.is_finite() && step.im.is_finite() {
                z[k] = z[k] - step;
                let rel = step.norm() / (z[k].norm() + T::one());
                if rel > max_step {
                    max_step = rel;
                }
            }
        }
        if max_step < tol {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..3 {
            let d = eval(&dp, *root);
            if d.norm().is_zero() {
                break;
            }
            let step = eval(&monic, *root) / d;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *root = *root - step;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_quadratic_and_cubic() {
        let r = roots(&[1.0_f64, -3.0, 2.0]);
        let mut re: Vec<f64> = r.iter().map(|c| c.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] - 1.0).abs() < 1e-12 && (re[1] - 2.0).abs() < 1e-12);

        // (s+1)(s^2+2s+5)
        let r = roots(&[1.0_f64, 3.0, 7.0, 5.0]);
        assert_eq!(r.len(), 3);
        for z in &r {
            assert!(eval(&[1.0, 3.0, 7.0, 5.0], *z).norm() < 1e-10);
        }
    }

    #[test]
    fn add_aligns_constant_terms() {
        assert_eq!(add(&[1.0, 2.0, 3.0], &[5.0]), vec![1.0, 2.0, 8.0]);
        assert_eq!(mul(&[1.0, 1.0], &[1.0, -1.0]), vec![1.0, 0.0, -1.0]);
    }
}
