use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{ExperimentReport, ExperimentRun};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn report_text(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let eq = match r.equation {
        crate::pde::EquationKind::Wave => format!("wave, p = {}", r.config.p.unwrap_or_default()),
        crate::pde::EquationKind::Nls => format!("nls, N = {}", r.config.n.unwrap_or_default()),
    };
    let _ = writeln!(s, "{}", r.provenance.version);
    let _ = writeln!(s, "equation      {eq}");
    let _ = writeln!(s, "mu            {:?}", r.mu);
    let _ = writeln!(s, "epsilon       {:?}", r.epsilon);
    let _ = writeln!(s, "j_max         {} (grid {})", r.j_max, r.grid);
    let _ = writeln!(s, "dt            {:?} ({} steps)", r.config.dt, r.steps);
    let _ = writeln!(s, "T0            {:?}", r.channel.t0);
    let _ = writeln!(s, "T             {:?}", r.t_final);
    let _ = writeln!(
        s,
        "T bounds      [{:?}, {:?}] {}",
        r.t_formula_bounds[0],
        r.t_formula_bounds[1],
        if r.t_within_formula_bounds { "inside" } else { "outside" }
    );
    let _ = writeln!(s, "norm0         {:?}", r.norms.norm0);
    let _ = writeln!(s, "normT         {:?}", r.norms.norm_t);
    let _ = writeln!(s, "ratio         {:?}", r.norms.ratio);
    let _ = writeln!(s, "model ratio   {:?}", r.norms.predicted_ratio);
    let _ = writeln!(s, "H drift       {:e}", r.drifts.hamiltonian);
    if let Some(d) = r.drifts.momentum {
        let _ = writeln!(s, "M drift       {d:e}");
    }
    if let Some(d) = r.drifts.mass {
        let _ = writeln!(s, "mass drift    {d:e}");
    }
    let _ = writeln!(s, "model dist    {:?} (max), {:?} (final)", r.max_model_distance, r.final_model_distance);
    for h in &r.high_modes {
        let _ = writeln!(
            s,
            "I_{:<11} {:?} -> {:?} (target {:?})",
            h.mode, h.initial, h.final_, h.target
        );
    }
    for v in &r.config.violations {
        let _ = writeln!(s, "violates      {v}");
    }
    s
}

/// Writes the report to `path` in the given format.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let body = match format {
        ReportFormat::Json => report_json(report)?,
        ReportFormat::Text => report_text(report),
    };
    std::fs::write(path, body)?;
    Ok(())
}

/// Writes the monitor time series as CSV.
pub fn write_monitor_csv(run: &ExperimentRun, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    run.monitors.write_csv(&mut w, run.report.conserved_column())?;
    w.flush()?;
    Ok(())
}
