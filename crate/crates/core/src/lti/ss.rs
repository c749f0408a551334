use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use super::{FrequencyResponse, LtiError};

/// Continuous state-space model `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpaceModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self, LtiError> {
        let n = a.nrows();
        let ok = a.ncols() == n
            && b.nrows() == n
            && c.ncols() == n
            && d.nrows() == c.nrows()
            && d.ncols() == b.ncols();
        if !ok {
            return Err(LtiError::Dimension(format!(
                "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }
    pub fn states(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// `C (sI - A)^{-1} B + D` at `s = jω`.
    pub fn freq_response(&self, omega: f64) -> DMatrix<Complex64> {
        self.eval(Complex::new(0.0, omega))
    }

    pub fn eval(&self, s: Complex64) -> DMatrix<Complex64> {
        let n = self.states();
        let to_c = |m: &DMatrix<f64>| m.map(|v| Complex::new(v, 0.0));
        let mut si_a = -to_c(&self.a);
        for i in 0..n {
            si_a[(i, i)] += s;
        }
        let b = to_c(&self.b);
        let x = si_a.lu().solve(&b).unwrap_or_else(|| {
            DMatrix::from_element(n, self.inputs(), Complex::new(f64::NAN, f64::NAN))
        });
        to_c(&self.c) * x + to_c(&self.d)
    }

    /// Eigenvalues of `A`.
    pub fn poles(&self) -> Result<Vec<Complex64>, LtiError> {
        super::eigenvalues(&self.a)
    }

    /// Single input/output channel as a frequency-response object.
    pub fn siso(&self, output: usize, input: usize) -> SisoView<'_> {
        SisoView {
            model: self,
            output,
            input,
            gain: 1.0,
        }
    }

    /// Closes `u[input] = u_ext + y[output]` (positive feedback with unit
    /// gain) for every pair simultaneously. Inputs and outputs keep their
    /// indices, so the closed model is driven by the external parts.
    pub fn close_loops(&self, pairs: &[(usize, usize)]) -> Result<Self, LtiError> {
        let (m, p) = (self.inputs(), self.outputs());
        let mut e = DMatrix::<f64>::zeros(m, p);
        for &(out, inp) in pairs {
            if out >= p || inp >= m {
                return Err(LtiError::Dimension(format!(
                    "loop ({out}, {inp}) out of range"
                )));
            }
            e[(inp, out)] = 1.0;
        }
        let lhs = DMatrix::<f64>::identity(m, m) - &e * &self.d;
        let mm = lhs
            .try_inverse()
            .ok_or_else(|| LtiError::Dimension("algebraic loop is singular".into()))?;
        let ec = &e * &self.c;
        let a = &self.a + &self.b * &mm * &ec;
        let b = &self.b * &mm;
        let c = &self.c + &self.d * &mm * &ec;
        let d = &self.d * &mm;
        Self::new(a, b, c, d)
    }
}

/// One channel of a [`StateSpaceModel`], optionally scaled.
#[derive(Debug, Clone, Copy)]
pub struct SisoView<'a> {
    model: &'a StateSpaceModel,
    output: usize,
    input: usize,
    gain: f64,
}

impl SisoView<'_> {
    /// Multiplies the channel by `k` (use `-1.0` for the negated loop).
    pub fn scaled(mut self, k: f64) -> Self {
        self.gain *= k;
        self
    }
}

impl FrequencyResponse<f64> for SisoView<'_> {
    fn response(&self, omega: f64) -> Complex64 {
        self.model.freq_response(omega)[(self.output, self.input)] * self.gain
    }
}
