//! Parameter selection, threshold constants and end-to-end runs.

mod config;
mod constants;
mod report;
mod run;
mod select;
mod sweep;

pub use config::{ExperimentConfig, Regime, SweepConfig, TimePolicy, DEFAULT_NLS_GAMMA};
pub use constants::{evaluate_constants, log_f_gamma, LogCheck, ThresholdConstants};
pub use report::{emit_report, report_json, report_text, write_monitor_csv, ReportFormat};
pub use run::{
    resonance_check, run_experiment, time_formula_bounds, Correction, Drifts, ExperimentReport, ExperimentRun,
    HighMode, Norms, Provenance, ResonanceCheck,
};
pub use select::{
    nls_epsilon, select_parameters_nls, select_parameters_wave, wave_epsilon, Condition, DeskScale, GrowthTime,
    LogScales, NlsOptions, NlsSelection, WaveSelection, DESK_N_CAP, NLS_GUARD,
};
pub use sweep::sweep;
