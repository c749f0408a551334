use super::PlantError;

/// Thevenin equivalent of the grid behind the point of interconnection.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridThevenin {
    pub scr: f64,
    pub x_over_r: f64,
    /// Source voltage magnitude (pu).
    pub voltage: f64,
    pub base_mva: f64,
}

impl GridThevenin {
    pub fn new(scr: f64, x_over_r: f64, voltage: f64, base_mva: f64) -> Result<Self, PlantError> {
        if !(scr > 0.0) || scr.is_nan() {
            return Err(PlantError::Invalid {
                name: "scr",
                value: scr,
            });
        }
        if !(x_over_r > 0.0 && x_over_r.is_finite()) {
            return Err(PlantError::Invalid {
                name: "x_over_r",
                value: x_over_r,
            });
        }
        if !(voltage > 0.0 && voltage.is_finite()) {
            return Err(PlantError::Invalid {
                name: "voltage",
                value: voltage,
            });
        }
        Ok(Self {
            scr,
            x_over_r,
            voltage,
            base_mva,
        })
    }

    /// `|Z| = 1 / SCR` on the plant base.
    pub fn impedance_magnitude(&self) -> f64 {
        1.0 / self.scr
    }

    pub fn reactance(&self) -> f64 {
        let xr = self.x_over_r;
        self.impedance_magnitude() * xr / (1.0 + xr * xr).sqrt()
    }

    pub fn resistance(&self) -> f64 {
        self.reactance() / self.x_over_r
    }

    /// Short-circuit capacity at the POI (MVA).
    pub fn short_circuit_mva(&self) -> f64 {
        self.scr * self.base_mva
    }
}

/// Grid impedance `(R, X)` in pu for a given SCR and X/R ratio.
pub fn grid_from_scr(scr: f64, x_over_r: f64, base_mva: f64) -> Result<GridThevenin, PlantError> {
    GridThevenin::new(scr, x_over_r, 1.0, base_mva)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scr_two_is_half_pu() {
        let g = grid_from_scr(2.0, 10.0, 900.0).unwrap();
        assert!((g.impedance_magnitude() - 0.5).abs() < 1e-15);
        assert!((g.resistance().hypot(g.reactance()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn base_case_impedance() {
        let g = grid_from_scr(3.5, 10.0, 900.0).unwrap();
        assert!((g.impedance_magnitude() - 0.285714).abs() < 1e-6);
        assert!((g.reactance() - 0.28430).abs() < 1e-4);
        assert!((g.resistance() - 0.028430).abs() < 1e-5);
    }

    #[test]
    fn stiff_limit() {
        let g = grid_from_scr(1e12, 10.0, 900.0).unwrap();
        assert!(g.reactance() < 1e-11);
        assert!(grid_from_scr(0.0, 10.0, 900.0).is_err());
        assert!(grid_from_scr(3.5, -1.0, 900.0).is_err());
    }
}
