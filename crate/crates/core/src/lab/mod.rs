//! Batch studies over scenarios: (Td, Ts) stability maps, SCR sensitivity,
//! mitigation comparisons and open-loop frequency responses.

mod map;

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use map::{MapCell, StabilityMap, MAP_CORNER_HEADER};

use crate::lti::{
    bode_data, crossover_margins, log_grid, BodePoint, FrequencyResponse, MarginReport,
};
use crate::modal::{ClassifyConfig, Verdict};
use crate::scenarios::{ChannelTarget, Overrides, ScenarioError, ScenarioFile, ScenarioKind};
use crate::sim::linearize;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Lti(#[from] crate::lti::LtiError),
    #[error("sweep file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Config(String),
}

/// Axes of a (Td, Ts) map.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub td: Vec<f64>,
    pub ts: Vec<f64>,
}

impl Grid {
    /// `n` evenly spaced points over `[0, max]` on both axes.
    pub fn uniform(n: usize, max: f64) -> Self {
        let axis: Vec<f64> = if n < 2 {
            vec![0.0]
        } else {
            (0..n)
                .map(|k| round12(max * k as f64 / (n - 1) as f64))
                .collect()
        };
        Self {
            td: axis.clone(),
            ts: axis,
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.td.is_empty() || self.ts.is_empty() {
            return Err(LabError::Config("Td and Ts lists must be non-empty".into()));
        }
        if self
            .td
            .iter()
            .chain(&self.ts)
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(LabError::Config(
                "Td and Ts values must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Both axes snapped to multiples of `step`.
    pub fn snapped(&self, step: f64) -> Self {
        let snap = |v: &f64| {
            let s = round12((v / step).round() * step);
            if (s - v).abs() > 1e-12 {
                log::info!("grid value {v} snapped to {s} (step {step})");
            }
            s
        };
        Self {
            td: self.td.iter().map(snap).collect(),
            ts: self.ts.iter().map(snap).collect(),
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::uniform(26, 0.5)
    }
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Sweep definition file.
///
/// ```toml
/// scenario = "smib.toml"   # relative to this file
/// target = "all"           # all | gfl2 | gfl3
/// grid = 26                # points over [0, max] on both axes
/// max = 0.5
/// td = [0.0, 0.1]          # explicit axes replace `grid`
/// ts = [0.0, 0.1]
/// scr = [2.0, 3.5]         # optional: one map per SCR
/// jobs = 4
/// [overrides]
/// tp = 0.1
/// ```
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: PathBuf,
    pub target: ChannelTarget,
    pub grid: usize,
    pub max: f64,
    pub td: Option<Vec<f64>>,
    pub ts: Option<Vec<f64>>,
    pub scr: Option<Vec<f64>>,
    pub overrides: Overrides,
    pub jobs: Option<usize>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            scenario: PathBuf::new(),
            target: ChannelTarget::All,
            grid: 26,
            max: 0.5,
            td: None,
            ts: None,
            scr: None,
            overrides: Overrides::default(),
            jobs: None,
        }
    }
}

impl SweepSpec {
    pub fn from_file(path: &Path) -> Result<Self, LabError> {
        let mut s: Self = toml::from_str(&std::fs::read_to_string(path)?)?;
        if s.scenario.is_relative() {
            if let Some(dir) = path.parent() {
                s.scenario = dir.join(&s.scenario);
            }
        }
        Ok(s)
    }

    pub fn axes(&self) -> Grid {
        let u = Grid::uniform(self.grid, self.max);
        Grid {
            td: self.td.clone().unwrap_or(u.td),
            ts: self.ts.clone().unwrap_or(u.ts),
        }
    }

    /// Scenario file with the sweep-level overrides merged in.
    pub fn base(&self) -> Result<ScenarioFile, LabError> {
        let mut f = ScenarioFile::from_file(&self.scenario)?;
        merge_overrides(&mut f.overrides, &self.overrides);
        Ok(f)
    }
}

fn merge_overrides(into: &mut Overrides, from: &Overrides) {
    into.tp = from.tp.or(into.tp);
    into.tq = from.tq.or(into.tq);
    into.kp = from.kp.or(into.kp);
    into.p_set_mw = from.p_set_mw.or(into.p_set_mw);
    into.q_set_mvar = from.q_set_mvar.or(into.q_set_mvar);
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, LabError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    Ok(b.build()?)
}

/// Builds, simulates and classifies one scenario. Failures become
/// indeterminate cells.
pub fn run_cell(f: &ScenarioFile, td: f64, ts: f64, classify: &ClassifyConfig) -> MapCell {
    let mut cell = MapCell {
        td,
        ts,
        verdict: Verdict::Indeterminate,
        freq_hz: None,
        damping_pct: None,
        energy_pct: None,
        note: String::new(),
    };
    let result = f.build().and_then(|s| s.assess(&f.integrator(), classify));
    match result {
        Ok((_, a)) => {
            cell.verdict = a.verdict;
            if let Some(d) = a.dominant {
                cell.freq_hz = Some(d.freq_hz);
                cell.damping_pct = Some(d.damping_pct);
                cell.energy_pct = Some(d.energy_pct);
            }
            cell.note = a.reason;
        }
        Err(e) => cell.note = e.to_string(),
    }
    cell
}

/// Runs every (Td, Ts) cell of `grid` on the targeted plants of `base`.
///
/// Cells are independent; results are collected in grid order, so the map
/// does not depend on `jobs`.
pub fn sweep(
    base: &ScenarioFile,
    target: ChannelTarget,
    grid: &Grid,
    jobs: Option<usize>,
    classify: &ClassifyConfig,
) -> Result<StabilityMap, LabError> {
    base.validate()?;
    grid.validate()?;
    let grid = grid.snapped(base.step);
    let pairs: Vec<(f64, f64)> = grid
        .td
        .iter()
        .flat_map(|&td| grid.ts.iter().map(move |&ts| (td, ts)))
        .collect();
    let cells = pool(jobs)?.install(|| {
        pairs
            .par_iter()
            .map(|&(td, ts)| run_cell(&base.with_channels(target, td, ts), td, ts, classify))
            .collect::<Vec<_>>()
    });
    Ok(StabilityMap {
        td: grid.td,
        ts: grid.ts,
        cells,
        config: serde_json::json!({ "scenario": base, "target": target, "classify": classify }),
    })
}

/// Dominant mode of one SCR.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScrRow {
    pub scr: f64,
    pub verdict: Verdict,
    pub freq_hz: Option<f64>,
    pub damping_pct: Option<f64>,
    pub energy_pct: Option<f64>,
    pub note: String,
}

pub const SCR_HEADER: [&str; 6] = [
    "scr",
    "verdict",
    "freq_hz",
    "damping_pct",
    "energy_pct",
    "note",
];

/// Dominant modes at fixed (Td, Ts) across `scrs`.
pub fn scr_study(
    base: &ScenarioFile,
    scrs: &[f64],
    td: f64,
    ts: f64,
    jobs: Option<usize>,
    classify: &ClassifyConfig,
) -> Result<Vec<ScrRow>, LabError> {
    if base.kind != ScenarioKind::Smib {
        return Err(LabError::Config(
            "SCR studies need an infinite-bus scenario".into(),
        ));
    }
    if scrs.is_empty() || scrs.iter().any(|s| !(*s > 0.0)) {
        return Err(LabError::Config(
            "SCR list must be non-empty and positive".into(),
        ));
    }
    let f = base.with_channels(ChannelTarget::All, td, ts);
    let rows = pool(jobs)?.install(|| {
        scrs.par_iter()
            .map(|&scr| {
                let g = ScenarioFile { scr, ..f.clone() };
                let c = run_cell(&g, td, ts, classify);
                ScrRow {
                    scr,
                    verdict: c.verdict,
                    freq_hz: c.freq_hz,
                    damping_pct: c.damping_pct,
                    energy_pct: c.energy_pct,
                    note: c.note,
                }
            })
            .collect()
    });
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn write_scr_csv<W: Write>(rows: &[ScrRow], w: W) -> Result<(), LabError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(SCR_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.scr.to_string(),
            r.verdict.as_str().to_string(),
            opt(r.freq_hz),
            opt(r.damping_pct),
            opt(r.energy_pct),
            r.note.clone(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// A single documented parameter change.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mitigation {
    /// Plant-level P and Q filter time constants (s).
    FilterTimeConstants(f64),
    /// Inverter P/Q proportional gain.
    ProportionalGain(f64),
}

impl Mitigation {
    pub fn apply(&self, f: &ScenarioFile) -> ScenarioFile {
        let mut g = f.clone();
        match *self {
            Mitigation::FilterTimeConstants(t) => {
                g.overrides.tp = Some(t);
                g.overrides.tq = Some(t);
            }
            Mitigation::ProportionalGain(k) => g.overrides.kp = Some(k),
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MitigationReport {
    pub baseline: StabilityMap,
    pub variant: StabilityMap,
    /// Cells unstable (or otherwise not stable) in the baseline and stable in the variant.
    pub gained: usize,
    /// Cells stable in the baseline and not stable in the variant.
    pub lost: usize,
}

impl MitigationReport {
    pub fn stable_delta(&self) -> i64 {
        self.variant.stable_count() as i64 - self.baseline.stable_count() as i64
    }
}

/// Maps `baseline` and `baseline` with `variant` applied over the same grid.
pub fn mitigation_compare(
    baseline: &ScenarioFile,
    variant: Mitigation,
    target: ChannelTarget,
    grid: &Grid,
    jobs: Option<usize>,
    classify: &ClassifyConfig,
) -> Result<MitigationReport, LabError> {
    let a = sweep(baseline, target, grid, jobs, classify)?;
    let b = sweep(&variant.apply(baseline), target, grid, jobs, classify)?;
    let stable = |m: &StabilityMap, k: usize| m.cells[k].verdict == Verdict::Stable;
    let gained = (0..a.cells.len())
        .filter(|&k| !stable(&a, k) && stable(&b, k))
        .count();
    let lost = (0..a.cells.len())
        .filter(|&k| stable(&a, k) && !stable(&b, k))
        .count();
    Ok(MitigationReport {
        baseline: a,
        variant: b,
        gained,
        lost,
    })
}

/// Negated open-loop response of one channel for one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct BodeCurve {
    pub td: f64,
    pub points: Vec<BodePoint<f64>>,
    pub margins: MarginReport<f64>,
}

/// Open-loop frequency responses of a scenario, loop broken at the input of
/// channel `channel` (between the delay input and the sampler input).
#[derive(Debug, Clone, PartialEq)]
pub struct BodeStudy {
    pub channel: String,
    /// `|L(0)|` of the loop.
    pub dc_gain: f64,
    pub curves: Vec<BodeCurve>,
    pub warnings: Vec<String>,
}

pub const CROSSOVER_HEADER: [&str; 4] = ["td_s", "kind", "omega_rad_s", "margin"];

impl BodeStudy {
    /// Writes `bode_td_<Td>.csv` per delay and `crossovers.csv`.
    pub fn save(&self, dir: &Path) -> Result<(), LabError> {
        std::fs::create_dir_all(dir)?;
        for c in &self.curves {
            let f = std::fs::File::create(dir.join(format!("bode_td_{}.csv", c.td)))?;
            crate::lti::write_bode_csv(f, &c.points)?;
        }
        self.write_crossovers(std::fs::File::create(dir.join("crossovers.csv"))?)
    }

    /// Gain crossovers carry the phase margin (deg), phase crossovers the
    /// gain margin (dB).
    pub fn write_crossovers<W: Write>(&self, w: W) -> Result<(), LabError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(CROSSOVER_HEADER)?;
        for c in &self.curves {
            let m = &c.margins;
            for (w, pm) in m.gain_crossovers.iter().zip(&m.phase_margins_deg) {
                wtr.write_record([
                    c.td.to_string(),
                    "gain".into(),
                    format!("{w:.6}"),
                    format!("{pm:.6}"),
                ])?;
            }
            for (w, gm) in m.phase_crossovers.iter().zip(&m.gain_margins_db) {
                wtr.write_record([
                    c.td.to_string(),
                    "phase".into(),
                    format!("{w:.6}"),
                    format!("{gm:.6}"),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Linearizes `base` at equilibrium and evaluates the negated open loop of
/// `channel` for each delay in `tds` on `omegas` (rad/s, ascending).
pub fn bode_export(
    base: &ScenarioFile,
    tds: &[f64],
    channel: usize,
    omegas: &[f64],
) -> Result<BodeStudy, LabError> {
    if omegas.len() < 2 {
        return Err(LabError::Config("need at least two frequencies".into()));
    }
    // the channels themselves are represented by the delay term below
    let f = base.with_channels(ChannelTarget::All, 0.0, 0.0);
    let built = f.build()?;
    let lin = match &built {
        crate::scenarios::BuiltScenario::Smib(s) => linearize(&s.system, &s.x0, &s.u_base, 1e-6)?,
        crate::scenarios::BuiltScenario::Kundur(s) => linearize(&s.system, &s.x0, &s.u_base, 1e-6)?,
    };
    if channel >= lin.channel_count() {
        return Err(LabError::Config(format!(
            "channel {channel} out of range ({} channels)",
            lin.channel_count()
        )));
    }
    let open = lin.open_at(channel)?;
    let loop_ = open.siso(channel, channel).scaled(-1.0);
    let range = (omegas[0], omegas[omegas.len() - 1]);
    let mut curves = Vec::with_capacity(tds.len());
    for &td in tds {
        curves.push(BodeCurve {
            td,
            points: bode_data(&loop_, td, omegas),
            margins: crossover_margins(&loop_, td, range, omegas.len().max(2000))?,
        });
    }
    Ok(BodeStudy {
        channel: lin.channels[channel].clone(),
        dc_gain: loop_.response(0.0).norm(),
        curves,
        warnings: lin.warnings.clone(),
    })
}

/// Default Bode frequency grid: 600 log-spaced points over 1-1000 rad/s.
pub fn default_omegas() -> Vec<f64> {
    log_grid(1.0, 1000.0, 600)
}
