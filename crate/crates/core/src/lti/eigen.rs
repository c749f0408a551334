use nalgebra::DMatrix;
use num_complex::Complex64;

use super::LtiError;

/// Diagonal similarity scaling by powers of two that evens out row and
/// column norms before the QR iteration.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of a real square matrix, balanced first.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>, LtiError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(LtiError::Dimension(format!(
            "eigenvalues of a {}x{} matrix",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(LtiError::NonFinite);
    }
    let mut m = a.clone();
    balance(&mut m);
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let ev = fm.eigenvalues().map_err(|_| LtiError::NoConvergence)?;
    Ok(ev.iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn badly_scaled_companion() {
        // poles at -1, -1e3, -1e5
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0,
                1.0,
                0.0,
                0.0,
                0.0,
                1.0,
                -1e8,
                -100_101_000.0,
                -101_001.0,
            ],
        );
        let mut p: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.re).collect();
        p.sort_by(|a, b| a.total_cmp(b));
        assert!((p[0] + 1e5).abs() < 1e-6 * 1e5);
        assert!((p[1] + 1e3).abs() < 1e-6 * 1e3);
        assert!((p[2] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn rotation_block() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 3.0, -3.0, -0.5]);
        let p = eigenvalues(&a).unwrap();
        assert!(p
            .iter()
            .all(|z| (z.re + 0.5).abs() < 1e-12 && (z.im.abs() - 3.0).abs() < 1e-12));
    }
}
