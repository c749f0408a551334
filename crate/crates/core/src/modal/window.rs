use super::ModalError;
use crate::sim::Trajectory;

/// Uniformly sampled, mean-removed signal segment.
#[derive(Debug, Clone, PartialEq)]
pub struct RingdownWindow {
    values: Vec<f64>,
    dt: f64,
    offset: f64,
    start: f64,
}

impl RingdownWindow {
    /// Builds a window from raw samples; the mean is subtracted and kept as
    /// `offset`.
    pub fn new(samples: &[f64], dt: f64) -> Result<Self, ModalError> {
        Self::with_start(samples, dt, 0.0)
    }

    pub fn with_start(samples: &[f64], dt: f64, start: f64) -> Result<Self, ModalError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ModalError::BadSpacing);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(ModalError::NonFinite);
        }
        if samples.len() < 8 {
            return Err(ModalError::TooShort {
                needed: 8,
                got: samples.len(),
            });
        }
        let offset = samples.iter().sum::<f64>() / samples.len() as f64;
        Ok(Self {
            values: samples.iter().map(|v| v - offset).collect(),
            dt,
            offset,
            start,
        })
    }

    /// Segment `[t_start, t_end)` of one trajectory signal. `t_end = None`
    /// runs to the end of the record.
    pub fn from_trajectory(
        traj: &Trajectory,
        signal: &str,
        t_start: f64,
        t_end: Option<f64>,
    ) -> Result<Self, ModalError> {
        let trace = traj
            .signal(signal)
            .ok_or_else(|| ModalError::UnknownSignal(signal.to_string()))?;
        let i0 = traj.index_at(t_start);
        let i1 = t_end
            .map_or(trace.len(), |t| traj.index_at(t))
            .min(trace.len());
        let seg = if i0 < i1 {
            &trace[i0..i1]
        } else {
            &trace[0..0]
        };
        let start = traj.times.get(i0).copied().unwrap_or(t_start);
        Self::with_start(seg, traj.dt(), start)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.dt
    }

    /// Keeps every `factor`-th sample (the mean is recomputed).
    pub fn decimate(&self, factor: usize) -> Result<Self, ModalError> {
        if factor <= 1 {
            return Ok(self.clone());
        }
        let raw: Vec<f64> = self
            .values
            .iter()
            .step_by(factor)
            .map(|v| v + self.offset)
            .collect();
        Self::with_start(&raw, self.dt * factor as f64, self.start)
    }

    /// Drops trailing samples beyond `n`.
    pub fn truncate(&self, n: usize) -> Result<Self, ModalError> {
        if n >= self.values.len() {
            return Ok(self.clone());
        }
        let raw: Vec<f64> = self.values[..n].iter().map(|v| v + self.offset).collect();
        Self::with_start(&raw, self.dt, self.start)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Pencil parameter as a fraction of the window length.
    pub pencil_fraction: f64,
    /// Singular values below `threshold * σ_max` are discarded.
    pub threshold: f64,
    /// Windows sampled faster than this are decimated first (Hz).
    pub max_rate_hz: f64,
    /// Cap on the number of samples handed to the estimators.
    pub max_samples: usize,
    /// Hard cap on the retained model order.
    pub max_order: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            pencil_fraction: 0.36,
            threshold: 1e-8,
            max_rate_hz: 50.0,
            max_samples: 1000,
            max_order: 40,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), ModalError> {
        if !(self.pencil_fraction > 1.0 / 3.0 && self.pencil_fraction < 0.5) {
            return Err(ModalError::Config(format!(
                "pencil fraction {} outside (1/3, 1/2)",
                self.pencil_fraction
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ModalError::Config(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        if !(self.max_rate_hz > 0.0) || self.max_samples < 16 || self.max_order == 0 {
            return Err(ModalError::Config(
                "rate, sample and order caps must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Applies decimation and the sample cap.
    pub fn condition(&self, w: &RingdownWindow) -> Result<RingdownWindow, ModalError> {
        let rate = 1.0 / w.dt();
        let factor = (rate / self.max_rate_hz - 1e-9).ceil().max(1.0) as usize;
        w.decimate(factor)?.truncate(self.max_samples)
    }

    pub(crate) fn pencil(&self, n: usize) -> usize {
        let l = (self.pencil_fraction * n as f64).round() as usize;
        l.clamp(n / 3 + 1, n / 2)
    }
}
