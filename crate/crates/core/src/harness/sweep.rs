use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::run::{run_experiment, ExperimentRun};
use crate::error::Result;

/// Runs every config on the rayon pool; results keep the config order.
pub fn sweep(configs: &[ExperimentConfig]) -> Vec<Result<ExperimentRun>> {
    configs.par_iter().map(run_experiment).collect()
}
