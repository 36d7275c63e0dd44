use thiserror::Error;

use crate::pde::MonitorSeries;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode {0} is not covered by the frequency table")]
    MissingMode(i64),

    #[error("combinatorial guard exceeded: {count} candidate multi-indices (limit {limit})")]
    CombinatorialGuard { count: u128, limit: u128 },

    #[error("monomial class {0} has no admissible members")]
    EmptyClass(String),

    #[error("divisor {value:e} of {monomial} is below the tolerance {tolerance:e}")]
    SmallDivisor {
        value: f64,
        tolerance: f64,
        monomial: String,
    },

    #[error("no diophantine vector found in {trials} trials (gamma = {gamma}); try a smaller gamma")]
    NoDiophantineVector { trials: usize, gamma: f64 },

    #[error("action {value} outside the channel [{lower}, {upper}]")]
    OutsideChannel { value: f64, lower: f64, upper: f64 },

    #[error("ODE diffusion time {ode} disagrees with quadrature {quadrature} (relative {relative:e})")]
    QuadratureMismatch {
        ode: f64,
        quadrature: f64,
        relative: f64,
    },

    #[error("section condition violated: resonant angle {angle} (expected pi/2)")]
    SectionViolated { angle: f64 },

    #[error("dealiasing grid of {grid} points is too small; at least {required} needed")]
    InsufficientPadding { grid: usize, required: usize },

    #[error("non-finite amplitude at t = {time}")]
    BlowUp {
        time: f64,
        monitors: Box<MonitorSeries>,
    },

    #[error("state is already in the {0} frame")]
    Frame(&'static str),

    #[error("time {t} outside the reference span [0, {end}]")]
    OutsideReference { t: f64, end: f64 },

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Wraps an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
