use std::io::Write;
use std::path::Path;

use super::SimError;

pub const TRAJECTORY_TIME_HEADER: &str = "time_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Sample,
    Release,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Sample => "sample",
            EventKind::Release => "release",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChannelEvent {
    pub time: f64,
    pub channel: usize,
    pub kind: EventKind,
}

/// Uniformly sampled simulation record.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub names: Vec<String>,
    pub traces: Vec<Vec<f64>>,
    pub events: Vec<ChannelEvent>,
    /// Time at which a monitored signal left the admissible band.
    pub divergence: Option<f64>,
    /// Non-fatal remarks (grid snapping and similar).
    pub notes: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    /// Sample spacing of the stored grid.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    pub fn signal(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.traces[i].as_slice())
    }

    /// Index of the first stored sample at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let dt = self.dt();
        if dt <= 0.0 {
            return 0;
        }
        let t0 = self.times[0];
        let k = ((t - t0) / dt - 1e-9).ceil().max(0.0) as usize;
        k.min(self.times.len())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec![TRAJECTORY_TIME_HEADER.to_string()];
        header.extend(self.names.iter().cloned());
        wtr.write_record(&header)?;
        let mut row = Vec::with_capacity(header.len());
        for (k, t) in self.times.iter().enumerate() {
            row.clear();
            row.push(format!("{t:.6}"));
            for tr in &self.traces {
                row.push(format!("{:.10e}", tr[k]));
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_events_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["time_s", "channel_id", "event"])?;
        for e in &self.events {
            wtr.write_record([
                format!("{:.6}", e.time),
                e.channel.to_string(),
                e.kind.as_str().to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a trajectory written by [`Trajectory::write_csv`] (or any CSV
    /// whose first column is `time_s`).
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self, SimError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some(TRAJECTORY_TIME_HEADER) {
            return Err(SimError::Config(format!(
                "first column must be `{TRAJECTORY_TIME_HEADER}`"
            )));
        }
        let names: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut traj = Trajectory {
            traces: vec![Vec::new(); names.len()],
            names,
            ..Default::default()
        };
        for rec in rdr.records() {
            let rec = rec?;
            let mut vals = rec.iter().map(|f| f.trim().parse::<f64>());
            let t = vals.next().and_then(Result::ok).ok_or_else(|| {
                SimError::Config(format!("bad time value on line {}", traj.len() + 2))
            })?;
            traj.times.push(t);
            for (tr, v) in traj.traces.iter_mut().zip(vals) {
                tr.push(v.map_err(|e| SimError::Config(format!("bad value at t={t}: {e}")))?);
            }
        }
        Ok(traj)
    }

    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), SimError> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join(format!("{stem}.csv")))?)?;
        if !self.events.is_empty() {
            self.write_events_csv(std::fs::File::create(
                dir.join(format!("{stem}_events.csv")),
            )?)?;
        }
        Ok(())
    }
}
