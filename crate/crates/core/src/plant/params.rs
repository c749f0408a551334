use std::path::Path;

use super::PlantError;

/// How the filter capacitance figure is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacitanceConvention {
    /// The value is the capacitor susceptance at nominal frequency.
    Susceptance,
    /// The value is the capacitor reactance; susceptance is its reciprocal.
    #[default]
    Reactance,
}

/// Unit of the PLL PI output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PllGainUnits {
    /// PI output is a frequency deviation in rad/s per pu of q-axis voltage.
    #[default]
    RadPerSecond,
    /// PI output is a frequency deviation in Hz.
    Hertz,
    /// PI output is a frequency deviation in pu of nominal frequency.
    PerUnit,
}

/// Where a plant signal is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementPoint {
    /// Filter capacitor (inverter terminal).
    #[default]
    Terminal,
    /// Point of interconnection.
    Poi,
}

/// Main parameters of a grid-following plant, per unit on the plant rating.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GflPlantParams {
    pub filter_inductance: f64,
    pub filter_resistance: f64,
    pub filter_capacitance: f64,
    pub coupling_inductance: f64,
    pub coupling_resistance: f64,
    pub p_f_droop: f64,
    pub q_v_droop: f64,
    pub voltage_control_kp: f64,
    pub voltage_control_ki: f64,
    /// Plant-level P command filter time constant (s).
    pub p_filter_time_constant: f64,
    /// Plant-level Q command filter time constant (s).
    pub q_filter_time_constant: f64,
    pub pq_control_kp: f64,
    pub pq_control_ki: f64,
    pub current_control_kp: f64,
    pub current_control_ki: f64,
    pub current_feed_forward_gain: f64,
    /// Power and voltage measurement filter cutoff, pu of nominal frequency.
    pub power_measurement_cutoff: f64,
    /// PLL input filter cutoff, pu of nominal frequency.
    pub pll_filter_cutoff: f64,
    pub pll_kp: f64,
    pub pll_ki: f64,
    /// Cutoff of the voltage filter feeding the current-loop feed-forward,
    /// pu of nominal frequency.
    pub feed_forward_filter_cutoff: f64,
    /// Cutoff of the plant-level frequency measurement, pu of nominal
    /// frequency.
    pub frequency_measurement_cutoff: f64,
    /// Voltage tracked by the PLL.
    pub pll_measurement_point: MeasurementPoint,
    /// Power fed back by the inverter P/Q loops.
    pub inverter_power_point: MeasurementPoint,
    pub rating_mva: f64,
    pub nominal_kv: f64,
    pub nominal_frequency_hz: f64,
    pub capacitance_convention: CapacitanceConvention,
    pub pll_gain_units: PllGainUnits,
}

impl Default for GflPlantParams {
    fn default() -> Self {
        Self {
            filter_inductance: 0.009,
            filter_resistance: 0.016,
            filter_capacitance: 2.55,
            coupling_inductance: 0.002,
            coupling_resistance: 0.003,
            p_f_droop: 0.05,
            q_v_droop: 0.05,
            voltage_control_kp: 0.003,
            voltage_control_ki: 0.09,
            p_filter_time_constant: 0.02,
            q_filter_time_constant: 0.02,
            pq_control_kp: 2.0,
            pq_control_ki: 20.0,
            current_control_kp: 0.38,
            current_control_ki: 0.7,
            current_feed_forward_gain: 1.0,
            power_measurement_cutoff: 0.132,
            pll_filter_cutoff: 1.32,
            pll_kp: 50.0,
            pll_ki: 410.0,
            feed_forward_filter_cutoff: 0.132,
            frequency_measurement_cutoff: 1.32,
            pll_measurement_point: MeasurementPoint::Terminal,
            inverter_power_point: MeasurementPoint::Poi,
            rating_mva: 900.0,
            nominal_kv: 20.0,
            nominal_frequency_hz: 60.0,
            capacitance_convention: CapacitanceConvention::Reactance,
            pll_gain_units: PllGainUnits::RadPerSecond,
        }
    }
}

impl GflPlantParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let positive = [
            ("filter_inductance", self.filter_inductance),
            ("filter_resistance", self.filter_resistance),
            ("filter_capacitance", self.filter_capacitance),
            ("coupling_inductance", self.coupling_inductance),
            ("coupling_resistance", self.coupling_resistance),
            ("p_f_droop", self.p_f_droop),
            ("q_v_droop", self.q_v_droop),
            ("p_filter_time_constant", self.p_filter_time_constant),
            ("q_filter_time_constant", self.q_filter_time_constant),
            ("power_measurement_cutoff", self.power_measurement_cutoff),
            ("pll_filter_cutoff", self.pll_filter_cutoff),
            (
                "feed_forward_filter_cutoff",
                self.feed_forward_filter_cutoff,
            ),
            (
                "frequency_measurement_cutoff",
                self.frequency_measurement_cutoff,
            ),
            ("rating_mva", self.rating_mva),
            ("nominal_kv", self.nominal_kv),
            ("nominal_frequency_hz", self.nominal_frequency_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PlantError::Invalid { name, value: v });
            }
        }
        let non_negative = [
            ("voltage_control_kp", self.voltage_control_kp),
            ("voltage_control_ki", self.voltage_control_ki),
            ("pq_control_kp", self.pq_control_kp),
            ("pq_control_ki", self.pq_control_ki),
            ("current_control_kp", self.current_control_kp),
            ("current_control_ki", self.current_control_ki),
            ("current_feed_forward_gain", self.current_feed_forward_gain),
            ("pll_kp", self.pll_kp),
            ("pll_ki", self.pll_ki),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(PlantError::Invalid { name, value: v });
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self, PlantError> {
        let p: Self = toml::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self, PlantError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.nominal_frequency_hz
    }

    /// Filter capacitor susceptance (pu) after applying the convention.
    pub fn capacitor_susceptance(&self) -> f64 {
        match self.capacitance_convention {
            CapacitanceConvention::Susceptance => self.filter_capacitance,
            CapacitanceConvention::Reactance => 1.0 / self.filter_capacitance,
        }
    }

    /// Multiplier turning the PLL PI output into rad/s.
    pub fn pll_output_scale(&self) -> f64 {
        match self.pll_gain_units {
            PllGainUnits::RadPerSecond => 1.0,
            PllGainUnits::Hertz => std::f64::consts::TAU,
            PllGainUnits::PerUnit => self.omega0(),
        }
    }

    /// Base current in kA.
    pub fn base_current_ka(&self) -> f64 {
        self.rating_mva / (3f64.sqrt() * self.nominal_kv)
    }
}
