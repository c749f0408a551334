use super::estimate::{estimate, Estimator, ModeEstimate};
use super::window::{EstimatorConfig, RingdownWindow};
use super::ModalError;
use crate::sim::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    InsufficientData,
    /// The run itself failed (equilibrium, configuration); never produced by
    /// [`classify_stability`].
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::InsufficientData => "insufficient_data",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    pub estimator: EstimatorConfig,
    /// Half-width of the indecisive damping band (DR points).
    pub band: f64,
    pub min_cycles: f64,
    /// Late/early envelope ratio above which the ring-down counts as growing.
    pub growth_limit: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorConfig::default(),
            band: 0.2,
            min_cycles: 3.0,
            growth_limit: 2.0,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Assessment {
    pub verdict: Verdict,
    pub dominant: Option<ModeEstimate>,
    pub mp: Vec<ModeEstimate>,
    pub era: Vec<ModeEstimate>,
    /// Peak deviation in the last quarter over the first quarter.
    pub envelope_growth: f64,
    pub reason: String,
}

/// Highest-energy mode that is not a mere level shift.
pub fn dominant_mode(modes: &[ModeEstimate], duration: f64) -> Option<ModeEstimate> {
    modes
        .iter()
        .filter(|m| !m.is_offset(duration))
        .max_by(|a, b| a.energy_pct.total_cmp(&b.energy_pct))
        .copied()
}

fn quarter_peaks(v: &[f64]) -> (f64, f64) {
    let q = (v.len() / 4).max(1);
    let peak = |s: &[f64]| s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (peak(&v[..q]), peak(&v[v.len() - q..]))
}

/// Least-squares slope of the log envelope (chunk peaks) in 1/s.
fn envelope_slope(w: &RingdownWindow, chunk: usize) -> f64 {
    let v = w.values();
    let chunk = chunk.max(2);
    let pts: Vec<(f64, f64)> = v
        .chunks(chunk)
        .enumerate()
        .filter_map(|(i, c)| {
            let p = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            (p > 0.0).then(|| ((i as f64 + 0.5) * chunk as f64 * w.dt(), p.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Classifies the ring-down of `signal` after `window_start` (typically the
/// end of the disturbance pulse).
pub fn classify_stability(
    traj: &Trajectory,
    signal: &str,
    window_start: f64,
    cfg: &ClassifyConfig,
) -> Result<Assessment, ModalError> {
    let diverged = traj.diverged();
    let window = match RingdownWindow::from_trajectory(traj, signal, window_start, traj.divergence)
    {
        Ok(w) => w,
        Err(ModalError::TooShort { .. }) if diverged => {
            return Ok(Assessment {
                verdict: Verdict::Unstable,
                dominant: None,
                mp: Vec::new(),
                era: Vec::new(),
                envelope_growth: f64::INFINITY,
                reason: "diverged before the analysis window".into(),
            })
        }
        Err(e) => return Err(e),
    };
    let (early, late) = quarter_peaks(window.values());
    let growth = if early > 0.0 { late / early } else { 0.0 };
    let fit = |e| match estimate(&window, &cfg.estimator, e) {
        Ok(m) => m,
        Err(ModalError::TooShort { .. }) => Vec::new(),
        Err(err) => {
            log::warn!("{} failed: {err}", e.label());
            Vec::new()
        }
    };
    let mp = fit(Estimator::MatrixPencil);
    let era = fit(Estimator::Era);
    let duration = window.duration();
    let dominant = dominant_mode(&mp, duration).or_else(|| dominant_mode(&era, duration));
    let mut out = Assessment {
        verdict: Verdict::Stable,
        dominant,
        mp,
        era,
        envelope_growth: growth,
        reason: String::new(),
    };
    if diverged {
        out.verdict = Verdict::Unstable;
        out.reason = "divergence marker".into();
        return Ok(out);
    }
    if growth > cfg.growth_limit {
        out.verdict = Verdict::Unstable;
        out.reason = format!("envelope grew by {growth:.2}x");
        return Ok(out);
    }
    let Some(dom) = dominant else {
        out.reason = "no modal content above threshold".into();
        return Ok(out);
    };
    if dom.freq_hz > 0.0 && duration * dom.freq_hz < cfg.min_cycles {
        out.verdict = Verdict::InsufficientData;
        out.reason = format!("window covers {:.2} cycles", duration * dom.freq_hz);
        return Ok(out);
    }
    if dom.damping_pct < -cfg.band {
        out.verdict = Verdict::Unstable;
        out.reason = format!("dominant DR {:.3}%", dom.damping_pct);
    } else if dom.damping_pct > cfg.band {
        out.reason = format!("dominant DR {:.3}%", dom.damping_pct);
    } else {
        let period = if dom.freq_hz > 0.0 {
            1.0 / dom.freq_hz
        } else {
            duration / 8.0
        };
        let slope = envelope_slope(&window, (period / window.dt()).round() as usize);
        out.verdict = if slope > 0.0 {
            Verdict::Unstable
        } else {
            Verdict::Stable
        };
        out.reason = format!(
            "marginal DR {:.3}%, envelope slope {slope:.4}/s",
            dom.damping_pct
        );
    }
    Ok(out)
}
