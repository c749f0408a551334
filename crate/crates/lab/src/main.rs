use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gfl_stability::lab::{
    bode_export, default_omegas, mitigation_compare, scr_study, sweep, write_scr_csv, Grid,
    Mitigation, StabilityMap, SweepSpec,
};
use gfl_stability::lti::SecondOrderSpec;
use gfl_stability::modal::{classify_stability, write_modes_csv, ClassifyConfig};
use gfl_stability::scenarios::{ChannelTarget, ScenarioFile};
use gfl_stability::sim::Trajectory;
use gfl_stability::zoh::{stability_intervals, write_pole_sweep_csv};

#[derive(Parser, Debug)]
#[command(
    name = "stability-lab",
    version,
    about = "Delay and sampling stability studies of grid-following plants"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Integration step (s).
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Simulation horizon (s).
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Points per axis of the (Td, Ts) grid over [0, 0.5] s.
    #[arg(long, global = true)]
    grid: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario file, classify its ring-down and write the trajectory.
    Simulate { scenario: PathBuf },
    /// Run a (Td, Ts) sweep described by a sweep file.
    Sweep { sweep: PathBuf },
    /// Dominant mode across SCR values at fixed (Td, Ts).
    ScrStudy {
        /// Base scenario (default: built-in SMIB).
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "10,5,3.5,2")]
        scr: Vec<f64>,
        #[arg(long, default_value_t = 0.06)]
        td: f64,
        #[arg(long, default_value_t = 0.06)]
        ts: f64,
    },
    /// Stability maps before and after one parameter change.
    Mitigate {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// SCR of the built-in SMIB when no scenario is given.
        #[arg(long)]
        scr: Option<f64>,
        /// New plant-level P/Q filter time constant (s).
        #[arg(long, conflicts_with = "kp")]
        tp: Option<f64>,
        /// New inverter P/Q proportional gain.
        #[arg(long)]
        kp: Option<f64>,
        #[arg(long, value_enum, default_value = "all")]
        target: TargetArg,
    },
    /// Negated open-loop frequency response of one command channel.
    Bode {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        scr: Option<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1")]
        td: Vec<f64>,
        /// Channel index (0 = active-power command of the first plant).
        #[arg(long, default_value_t = 0)]
        channel: usize,
    },
    /// Sampled second-order loop: pole magnitudes and stable Ts intervals.
    Zoh {
        #[arg(long, default_value_t = 0.5)]
        k: f64,
        #[arg(long, default_value_t = 4.44)]
        omega_n: f64,
        #[arg(long, default_value_t = 0.1414)]
        zeta: f64,
        #[arg(long, default_value_t = 10.0)]
        ts_max: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
    },
    /// Modal estimates of one signal of a trajectory CSV.
    Modes {
        trace: PathBuf,
        #[arg(long, default_value = "p_poi")]
        signal: String,
        /// Start of the ring-down window (s).
        #[arg(long, default_value_t = 1.01)]
        start: f64,
    },
}

#[derive(clap::ValueEnum, Debug, Clone, Copy)]
enum TargetArg {
    All,
    Gfl2,
    Gfl3,
}

impl From<TargetArg> for ChannelTarget {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::All => ChannelTarget::All,
            TargetArg::Gfl2 => ChannelTarget::Gfl2,
            TargetArg::Gfl3 => ChannelTarget::Gfl3,
        }
    }
}

impl Common {
    fn apply(&self, f: &mut ScenarioFile) {
        if let Some(s) = self.step {
            f.step = s;
        }
        if let Some(h) = self.horizon {
            f.horizon = h;
        }
    }

    fn grid_or(&self, g: Grid) -> Grid {
        self.grid.map(|n| Grid::uniform(n, 0.5)).unwrap_or(g)
    }
}

fn load_scenario(path: Option<&Path>, scr: Option<f64>, common: &Common) -> Result<ScenarioFile> {
    let mut f = match path {
        Some(p) => {
            ScenarioFile::from_file(p).with_context(|| format!("reading {}", p.display()))?
        }
        None => ScenarioFile::default(),
    };
    if let Some(s) = scr {
        f.scr = s;
    }
    common.apply(&mut f);
    Ok(f)
}

fn create(dir: &Path, name: &str) -> Result<File> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    File::create(&p).with_context(|| format!("creating {}", p.display()))
}

fn summarize(map: &StabilityMap) {
    println!(
        "{} cells: {} stable, {} unstable, {} other",
        map.cells.len(),
        map.stable_count(),
        map.unstable_set().len(),
        map.cells.len() - map.stable_count() - map.unstable_set().len()
    );
    print!("{}", map.render());
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let c = &cli.common;
    let classify = ClassifyConfig::default();
    match &cli.cmd {
        Command::Simulate { scenario } => {
            let f = load_scenario(Some(scenario), None, c)?;
            let built = f.build()?;
            let (traj, a) = built.assess(&f.integrator(), &classify)?;
            let stem = scenario
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("run");
            traj.save(&c.out_dir, stem)?;
            let mut modes = a.mp.clone();
            modes.extend(a.era.iter().copied());
            write_modes_csv(&modes, create(&c.out_dir, &format!("{stem}_modes.csv"))?)?;
            println!("verdict: {} ({})", a.verdict.as_str(), a.reason);
            if let Some(d) = a.dominant {
                println!(
                    "dominant: {:.3} Hz, DR {:.2}%, energy {:.1}%",
                    d.freq_hz, d.damping_pct, d.energy_pct
                );
            }
        }
        Command::Sweep { sweep: path } => {
            let spec = SweepSpec::from_file(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let mut base = spec.base()?;
            c.apply(&mut base);
            let grid = c.grid_or(spec.axes());
            let jobs = c.jobs.or(spec.jobs);
            let scrs = spec.scr.clone().unwrap_or_else(|| vec![base.scr]);
            for scr in scrs {
                let f = ScenarioFile {
                    scr,
                    ..base.clone()
                };
                let map = sweep(&f, spec.target, &grid, jobs, &classify)?;
                let stem = format!("map_scr{scr}");
                map.save(&c.out_dir, &stem)?;
                println!("SCR {scr}: wrote {stem}.csv/.json");
                summarize(&map);
            }
        }
        Command::ScrStudy {
            scenario,
            scr,
            td,
            ts,
        } => {
            let f = load_scenario(scenario.as_deref(), None, c)?;
            let rows = scr_study(&f, scr, *td, *ts, c.jobs, &classify)?;
            write_scr_csv(&rows, create(&c.out_dir, "scr_study.csv")?)?;
            for r in &rows {
                println!(
                    "SCR {:>6}: {:<17} {:>8.3} Hz  DR {:>8.2}%",
                    r.scr,
                    r.verdict.as_str(),
                    r.freq_hz.unwrap_or(f64::NAN),
                    r.damping_pct.unwrap_or(f64::NAN)
                );
            }
        }
        Command::Mitigate {
            scenario,
            scr,
            tp,
            kp,
            target,
        } => {
            let f = load_scenario(scenario.as_deref(), *scr, c)?;
            let m = match (tp, kp) {
                (Some(t), None) => Mitigation::FilterTimeConstants(*t),
                (None, Some(k)) => Mitigation::ProportionalGain(*k),
                _ => bail!("give exactly one of --tp or --kp"),
            };
            let r = mitigation_compare(
                &f,
                m,
                (*target).into(),
                &c.grid_or(Grid::default()),
                c.jobs,
                &classify,
            )?;
            r.baseline.save(&c.out_dir, "mitigation_baseline")?;
            r.variant.save(&c.out_dir, "mitigation_variant")?;
            println!("baseline:");
            summarize(&r.baseline);
            println!("variant:");
            summarize(&r.variant);
            println!(
                "stable-cell delta {:+} (gained {}, lost {})",
                r.stable_delta(),
                r.gained,
                r.lost
            );
        }
        Command::Bode {
            scenario,
            scr,
            td,
            channel,
        } => {
            let f = load_scenario(scenario.as_deref(), *scr, c)?;
            let study = bode_export(&f, td, *channel, &default_omegas())?;
            study.save(&c.out_dir)?;
            println!("loop at `{}`: |L(0)| = {:.4}", study.channel, study.dc_gain);
            for curve in &study.curves {
                let m = &curve.margins;
                println!(
                    "Td {}: gain crossovers {:?} rad/s, phase margins {:?} deg",
                    curve.td, m.gain_crossovers, m.phase_margins_deg
                );
            }
            if !study.warnings.is_empty() {
                println!("{} linearization warnings (see log)", study.warnings.len());
            }
        }
        Command::Zoh {
            k,
            omega_n,
            zeta,
            ts_max,
            points,
        } => {
            let spec = SecondOrderSpec::new(*k, *omega_n, *zeta)?;
            let n = (*points).max(2);
            let ts: Vec<f64> = (1..=n).map(|i| ts_max * i as f64 / n as f64).collect();
            write_pole_sweep_csv(create(&c.out_dir, "zoh_poles.csv")?, &spec, &ts)?;
            let iv = stability_intervals(&spec, (1e-4, *ts_max), 2000)?;
            println!("stable Ts intervals: {:?}", iv.intervals);
            println!("unstable Ts intervals: {:?}", iv.unstable_intervals());
        }
        Command::Modes {
            trace,
            signal,
            start,
        } => {
            let traj = Trajectory::read_csv(
                File::open(trace).with_context(|| format!("opening {}", trace.display()))?,
            )?;
            let a = classify_stability(&traj, signal, *start, &classify)?;
            let mut modes = a.mp.clone();
            modes.extend(a.era.iter().copied());
            write_modes_csv(&modes, create(&c.out_dir, "modes.csv")?)?;
            println!("verdict: {} ({})", a.verdict.as_str(), a.reason);
            for m in modes.iter().take(10) {
                println!(
                    "{:<13} {:>8.3} Hz  DR {:>8.2}%  energy {:>6.2}%",
                    m.estimator.label(),
                    m.freq_hz,
                    m.damping_pct,
                    m.energy_pct
                );
            }
        }
    }
    Ok(())
}
