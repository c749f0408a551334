use std::io::Write;
use std::path::Path;

use super::LabError;
use crate::modal::Verdict;

/// Outcome of one (Td, Ts) cell.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MapCell {
    pub td: f64,
    pub ts: f64,
    pub verdict: Verdict,
    pub freq_hz: Option<f64>,
    pub damping_pct: Option<f64>,
    pub energy_pct: Option<f64>,
    /// Failure cause for indeterminate cells, classification reason otherwise.
    pub note: String,
}

/// Verdicts over a (Td, Ts) grid; rows follow `td`, columns follow `ts`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StabilityMap {
    pub td: Vec<f64>,
    pub ts: Vec<f64>,
    pub cells: Vec<MapCell>,
    /// Configuration the map was produced from.
    pub config: serde_json::Value,
}

pub const MAP_CORNER_HEADER: &str = "td_s\\ts_s";

impl StabilityMap {
    pub fn cell(&self, i_td: usize, j_ts: usize) -> &MapCell {
        &self.cells[i_td * self.ts.len() + j_ts]
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.cells.iter().filter(|c| c.verdict == v).count()
    }

    pub fn stable_count(&self) -> usize {
        self.count(Verdict::Stable)
    }

    /// Indices of unstable cells.
    pub fn unstable_set(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&k| self.cells[k].verdict == Verdict::Unstable)
            .collect()
    }

    /// CSV matrix of verdict labels. The first row lists Ts values, the first
    /// column Td values.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), LabError> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec![MAP_CORNER_HEADER.to_string()];
        header.extend(self.ts.iter().map(|t| format!("{t}")));
        wtr.write_record(&header)?;
        for (i, td) in self.td.iter().enumerate() {
            let mut row = vec![format!("{td}")];
            row.extend((0..self.ts.len()).map(|j| self.cell(i, j).verdict.as_str().to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<(), LabError> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), LabError> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join(format!("{stem}.csv")))?)?;
        self.write_json(std::fs::File::create(dir.join(format!("{stem}.json")))?)?;
        Ok(())
    }

    /// Compact text rendering: rows are Td, `.` stable, `#` unstable,
    /// `?` anything else.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for i in 0..self.td.len() {
            for j in 0..self.ts.len() {
                s.push(match self.cell(i, j).verdict {
                    Verdict::Stable => '.',
                    Verdict::Unstable => '#',
                    _ => '?',
                });
            }
            s.push('\n');
        }
        s
    }
}
