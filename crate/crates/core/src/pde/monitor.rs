use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Sampled conserved quantities and mode actions of one evolution.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MonitorSeries {
    pub times: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub momentum: Vec<f64>,
    pub mass: Vec<f64>,
    pub tracked_modes: Vec<i64>,
    /// `mode_actions[k][n]` is `|z_j|^2` of `tracked_modes[k]` at `times[n]`.
    pub mode_actions: Vec<Vec<f64>>,
    pub sobolev_index: f64,
    pub sobolev: Vec<f64>,
    /// Empty when no reference trajectory was supplied; `None` past its end.
    pub model_distance: Vec<Option<f64>>,
}

/// Which conserved quantity goes into the CSV next to the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConservedColumn {
    Momentum,
    Mass,
}

impl MonitorSeries {
    pub fn new(tracked_modes: Vec<i64>, sobolev_index: f64) -> Self {
        Self {
            mode_actions: vec![Vec::new(); tracked_modes.len()],
            tracked_modes,
            sobolev_index,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Lengths agree and every stored value is finite.
    pub fn is_well_formed(&self) -> bool {
        let n = self.times.len();
        let same = [&self.hamiltonian, &self.momentum, &self.mass, &self.sobolev]
            .iter()
            .all(|s| s.len() == n)
            && self.mode_actions.iter().all(|s| s.len() == n)
            && (self.model_distance.is_empty() || self.model_distance.len() == n);
        let finite = [&self.times, &self.hamiltonian, &self.momentum, &self.mass, &self.sobolev]
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
            && self.mode_actions.iter().flatten().all(|v| v.is_finite())
            && self.model_distance.iter().flatten().all(|v| v.is_finite());
        same && finite
    }

    /// `max |q(t) - q(0)| / scale` for a sampled series.
    pub fn drift(series: &[f64], scale: f64) -> f64 {
        let Some(&q0) = series.first() else {
            return 0.0;
        };
        series
            .iter()
            .map(|q| (q - q0).abs())
            .fold(0.0, f64::max)
            / scale
    }

    /// Largest model distance over the samples where it is defined.
    pub fn max_model_distance(&self) -> Option<f64> {
        self.model_distance.iter().flatten().copied().reduce(f64::max)
    }

    pub fn sobolev_label(&self) -> String {
        format!("sobolev_{}", self.sobolev_index)
    }

    pub fn csv_header(&self, conserved: ConservedColumn) -> Vec<String> {
        let mut h = vec!["time".to_string()];
        h.extend(self.tracked_modes.iter().map(|j| format!("action_{j}")));
        h.push("hamiltonian".into());
        h.push(
            match conserved {
                ConservedColumn::Momentum => "momentum",
                ConservedColumn::Mass => "mass",
            }
            .into(),
        );
        h.push(self.sobolev_label());
        h.push("model_distance".into());
        h
    }

    /// Writes the series as CSV; floats use the shortest round-trip form and a
    /// missing model distance is left blank.
    pub fn write_csv<W: Write>(&self, mut w: W, conserved: ConservedColumn) -> Result<()> {
        writeln!(w, "{}", self.csv_header(conserved).join(","))?;
        for n in 0..self.times.len() {
            let mut row = vec![format!("{:?}", self.times[n])];
            row.extend(self.mode_actions.iter().map(|a| format!("{:?}", a[n])));
            row.push(format!("{:?}", self.hamiltonian[n]));
            let c = match conserved {
                ConservedColumn::Momentum => self.momentum[n],
                ConservedColumn::Mass => self.mass[n],
            };
            row.push(format!("{c:?}"));
            row.push(format!("{:?}", self.sobolev[n]));
            row.push(
                self.model_distance
                    .get(n)
                    .copied()
                    .flatten()
                    .map(|d| format!("{d:?}"))
                    .unwrap_or_default(),
            );
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut m = MonitorSeries::new(vec![1, -2], 3.0);
        m.times = vec![0.0, 0.5];
        m.hamiltonian = vec![1.0, 1.0 + 1e-17];
        m.momentum = vec![0.0, 0.0];
        m.mass = vec![2.0, 2.0];
        m.sobolev = vec![0.1, 0.2];
        m.mode_actions = vec![vec![0.25, 0.125], vec![1e-20, 3.0]];
        assert!(m.is_well_formed());
        let mut buf = Vec::new();
        m.write_csv(&mut buf, ConservedColumn::Mass).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(
            lines[0],
            "time,action_1,action_-2,hamiltonian,mass,sobolev_3,model_distance"
        );
        assert_eq!(lines[1], "0.0,0.25,1e-20,1.0,2.0,0.1,");
        assert_eq!(lines.len(), 3);
        for field in lines[2].split(',').filter(|f| !f.is_empty()) {
            let v: f64 = field.parse().unwrap();
            assert!(v.is_finite());
        }
        assert_eq!(MonitorSeries::drift(&[2.0, 2.5, 1.0], 2.0), 0.5);
    }

    #[test]
    fn malformed_series_detected() {
        let mut m = MonitorSeries::new(vec![1], 1.0);
        m.times = vec![0.0];
        assert!(!m.is_well_formed());
    }
}
