use std::io::Write;

use super::margins::unwrapped_phase;
use super::{FrequencyResponse, LtiError};
use crate::scalar::Scalar;

/// One row of a Bode table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodePoint<T> {
    pub omega: T,
    pub magnitude_db: T,
    pub phase_deg: T,
}

/// Magnitude and continuous phase of `e^{-jωTd} L(jω)` on `omegas`
/// (ascending).
pub fn bode_data<T: Scalar, M: FrequencyResponse<T> + ?Sized>(
    model: &M,
    td: T,
    omegas: &[T],
) -> Vec<BodePoint<T>> {
    let phase = unwrapped_phase(model, omegas);
    omegas
        .iter()
        .zip(phase)
        .map(|(&w, p)| BodePoint {
            omega: w,
            magnitude_db: T::lit(20.0) * model.response(w).norm().log10(),
            phase_deg: (p - w * td).to_degrees(),
        })
        .collect()
}

pub const BODE_HEADER: [&str; 3] = ["omega_rad_s", "magnitude_db", "phase_deg"];

pub fn write_bode_csv<T: Scalar, W: Write>(
    out: W,
    points: &[BodePoint<T>],
) -> Result<(), LtiError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BODE_HEADER)?;
    for p in points {
        w.write_record(&[
            format!("{:e}", p.omega.as_f64()),
            format!("{:e}", p.magnitude_db.as_f64()),
            format!("{:e}", p.phase_deg.as_f64()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
