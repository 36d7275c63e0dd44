use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::{EquationKind, NonlinearityScale};

/// Asymptotic parameters, evaluated but never simulated, or moderate desk
/// parameters with a list of the threshold conditions they violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    #[serde(alias = "paper")]
    Asymptotic,
    #[default]
    Desk,
}

/// Length of the simulated interval relative to the rescaled diffusion time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimePolicy {
    /// `T = time_scale * T0`.
    #[default]
    Model,
    /// `1.2 T`.
    Extended,
}

impl TimePolicy {
    pub fn factor(self) -> f64 {
        match self {
            TimePolicy::Model => 1.0,
            TimePolicy::Extended => 1.2,
        }
    }
}

/// Parameters of one run. Deserializes from TOML with defaults for every
/// optional field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub equation: EquationKind,
    #[serde(default)]
    pub regime: Regime,
    /// Wave degree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    /// NLS potential wavenumber.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    /// NLS tangential modes `k1, k2, k3`; `k4 = k1 - k2 + k3 + N`.
    #[serde(default = "default_k")]
    pub k: [i64; 3],
    /// NLS frequency vector; searched for when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<[f64; 3]>,
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Growth target: `C` for the wave, `K` for NLS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default = "one")]
    pub c: f64,
    /// Initial high-mode action; its cap when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<usize>,
    #[serde(default)]
    pub t_policy: TimePolicy,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default)]
    pub seed: u64,
    /// Smallest acceptable Diophantine constant of the frequencies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_bound: Option<f64>,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_trials")]
    pub q_trials: usize,
    #[serde(default)]
    pub apply_gamma_correction: bool,
    #[serde(default)]
    pub scale: NonlinearityScale,
    /// Constant in `N^{3s/4} >= C0 gamma^{-2} c^5`.
    #[serde(default = "one")]
    pub nls_c0: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

fn default_k() -> [i64; 3] {
    [1, -1, 2]
}

fn one() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    10
}

fn default_tau() -> f64 {
    crate::spectral::DEFAULT_TAU
}

fn default_trials() -> usize {
    10_000
}

/// Target Diophantine constant of the `q` search when no bound is given.
pub const DEFAULT_NLS_GAMMA: f64 = 0.02;

impl ExperimentConfig {
    fn base(equation: EquationKind, s: f64) -> Self {
        Self {
            equation,
            regime: Regime::Desk,
            p: None,
            n: None,
            k: default_k(),
            q: None,
            s,
            delta: None,
            growth: None,
            mu: None,
            c: 1.0,
            epsilon: None,
            j_max: None,
            dt: default_dt(),
            padding: None,
            t_policy: TimePolicy::Model,
            sample_stride: default_stride(),
            seed: 0,
            gamma_bound: None,
            tau: default_tau(),
            q_trials: default_trials(),
            apply_gamma_correction: false,
            scale: NonlinearityScale::Matched,
            nls_c0: 1.0,
            violations: Vec::new(),
        }
    }

    pub fn wave(p: u32, s: f64) -> Self {
        Self {
            p: Some(p),
            ..Self::base(EquationKind::Wave, s)
        }
    }

    pub fn nls(n: i64, s: f64) -> Self {
        Self {
            n: Some(n),
            ..Self::base(EquationKind::Nls, s)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// NLS `k4 = k1 - k2 + k3 + N`.
    pub fn k4(&self) -> Option<i64> {
        self.n.map(|n| self.k[0] - self.k[1] + self.k[2] + n)
    }

    /// Checks field combinations that do not depend on the physics.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self.equation {
            EquationKind::Wave if self.p.is_none() => return bad("wave config needs `p`".into()),
            EquationKind::Nls if self.n.is_none() => return bad("NLS config needs `n`".into()),
            _ => {}
        }
        if !(self.s.is_finite() && self.s >= 0.0) {
            return bad(format!("s must be finite and nonnegative (got {})", self.s));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive (got {})", self.dt));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c must be positive (got {})", self.c));
        }
        if let Some(mu) = self.mu {
            if !(mu >= 1.0 && mu.is_finite()) {
                return bad(format!("mu must be at least 1 (got {mu})"));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("epsilon must be positive (got {e})"));
            }
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be at least 1".into());
        }
        Ok(())
    }
}

/// A list of runs, written as `[[run]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub run: Vec<ExperimentConfig>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (i, r) in cfg.run.iter().enumerate() {
            r.validate()
                .map_err(|e| Error::Config(format!("run {i}: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "equation = \"wave\"\np = 2\ns = 3.0\nmu = 10.0\nepsilon = 1e-3\nj_max = 32\n",
        )
        .unwrap();
        assert_eq!(cfg.regime, Regime::Desk);
        assert_eq!(cfg.dt, 1e-3);
        assert_eq!(cfg.c, 1.0);
        assert_eq!(cfg.scale, NonlinearityScale::Matched);
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn regime_alias_and_errors() {
        let cfg = ExperimentConfig::from_toml("equation = \"nls\"\nn = 8\ns = 1.0\nregime = \"paper\"\n").unwrap();
        assert_eq!(cfg.regime, Regime::Asymptotic);
        assert_eq!(cfg.k4(), Some(12));
        assert!(matches!(
            ExperimentConfig::from_toml("equation = \"wave\"\ns = 1.0\n"),
            Err(Error::Config(_))
        ));
        assert!(ExperimentConfig::from_toml("equation = \"wave\"\np = 2\ns = 1.0\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("equation = \"wave\"\np = 2\ns = 1.0\ndt = 0.0\n").is_err());
    }

    #[test]
    fn sweep_list() {
        let text = "[[run]]\nequation = \"wave\"\np = 2\ns = 3.0\n\n[[run]]\nequation = \"nls\"\nn = 8\ns = 1.0\n";
        let sweep = SweepConfig::from_toml(text).unwrap();
        assert_eq!(sweep.run.len(), 2);
        assert_eq!(sweep.run[1].equation, EquationKind::Nls);
    }
}
