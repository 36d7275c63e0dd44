use std::f64::consts::{LN_10, SQRT_2};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Regime};
use super::constants::{evaluate_constants, log_f_gamma, ThresholdConstants};
use crate::error::{Error, Result};
use crate::resonance::compute_gamma_sqrt2;

/// Largest potential wavenumber the NLS selection will consider.
pub const NLS_GUARD: i64 = 1_000_000;
/// Largest potential wavenumber treated as simulable on a desk.
pub const DESK_N_CAP: i64 = 64;

/// One threshold inequality at the selected parameters. `holds` is `None`
/// when the quantity is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub holds: Option<bool>,
    pub detail: String,
}

impl Condition {
    fn new(name: &str, holds: Option<bool>, detail: String) -> Self {
        Self {
            name: name.to_string(),
            holds,
            detail,
        }
    }

    fn violation(&self) -> Option<String> {
        match self.holds {
            Some(true) => None,
            Some(false) => Some(format!("{} fails: {}", self.name, self.detail)),
            None => Some(format!("{} is undefined: {}", self.name, self.detail)),
        }
    }
}

/// Amplitude and size of the channel for a desk run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeskScale {
    pub mu: f64,
    pub c: f64,
}

/// Natural logarithms of parameters too large for `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogScales {
    pub log_mu: Option<f64>,
    pub log_c: f64,
    pub log_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSelection {
    /// `None` in the asymptotic regime.
    pub config: Option<ExperimentConfig>,
    pub constants: ThresholdConstants,
    pub conditions: Vec<Condition>,
    /// Smallest `s` with `p^{s-2} >= 2 sqrt(2) C`.
    pub min_s: f64,
    /// Smallest even `p <= 40` with `F_gamma(p) <= delta / 2`.
    pub required_p: Option<u32>,
    pub log_scales: Option<LogScales>,
}

fn log10(x: f64) -> f64 {
    x / LN_10
}

fn sqrt2_gamma(p: u32) -> f64 {
    compute_gamma_sqrt2((p as u64) * (p as u64)).gamma
}

/// `epsilon_0 p^{-2s}` with `epsilon_0 = c / (1 - p^{1-2s})`.
pub fn wave_epsilon(p: u32, s: f64, c: f64) -> f64 {
    let pf = p as f64;
    c / (1.0 - pf.powf(1.0 - 2.0 * s)) * pf.powf(-2.0 * s)
}

fn f_gamma_conditions(p: u32, delta: f64, gamma: f64) -> [Condition; 2] {
    match log_f_gamma(p, gamma) {
        Some(lf) => [
            Condition::new(
                "F_gamma(p) <= delta/2",
                Some(lf <= (delta / 2.0).ln()),
                format!("log10 F_gamma = {:.6e}, log10(delta/2) = {:.6}", log10(lf), log10(delta / 2.0)),
            ),
            Condition::new(
                "F_gamma(p) >= delta/(2 sqrt 2)",
                Some(lf >= (delta / (2.0 * SQRT_2)).ln()),
                format!(
                    "log10 F_gamma = {:.6e}, log10(delta/(2 sqrt 2)) = {:.6}",
                    log10(lf),
                    log10(delta / (2.0 * SQRT_2))
                ),
            ),
        ],
        None => [
            Condition::new("F_gamma(p) <= delta/2", None, format!("p = {p}")),
            Condition::new("F_gamma(p) >= delta/(2 sqrt 2)", None, format!("p = {p}")),
        ],
    }
}

/// Chooses wave parameters for growth factor `growth` at smallness `delta`.
///
/// The desk regime needs `desk` and returns a runnable config listing every
/// threshold condition it violates; the asymptotic regime returns the
/// constants and log-scale parameters only.
pub fn select_parameters_wave(
    p: u32,
    s: f64,
    delta: f64,
    growth: f64,
    regime: Regime,
    desk: Option<DeskScale>,
) -> Result<WaveSelection> {
    crate::spectral::check_wave_degree(p)?;
    if !(s > 2.0 && s.is_finite()) {
        return Err(Error::invalid(format!("growth needs s > 2 (got {s})")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1) (got {delta})")));
    }
    if !(growth >= 1.0 && growth.is_finite()) {
        return Err(Error::invalid(format!("growth target must be at least 1 (got {growth})")));
    }
    let pf = p as f64;
    let min_s = 2.0 + (2.0 * SQRT_2 * growth).ln() / pf.ln();
    if pf.powf(s - 2.0) < 2.0 * SQRT_2 * growth {
        return Err(Error::invalid(format!(
            "p^(s-2) >= 2 sqrt(2) C fails at p = {p}, s = {s}, C = {growth}; need s >= {min_s:.6}"
        )));
    }
    let gamma = sqrt2_gamma(p);
    let constants = evaluate_constants(p, gamma.min(1.0), None)?;

    let mut conditions = vec![Condition::new(
        "p^(s-2) >= 2 sqrt(2) C",
        Some(true),
        format!("{:.6} >= {:.6}", pf.powf(s - 2.0), 2.0 * SQRT_2 * growth),
    )];
    conditions.extend(f_gamma_conditions(p, delta, gamma));
    conditions.push(Condition::new(
        "b = 1/(p/4 - 2) > 0",
        constants.b.map(|b| b > 0.0),
        format!("p = {p}"),
    ));

    let required_p = (2..=20)
        .map(|h| 2 * h)
        .find(|&q| log_f_gamma(q, sqrt2_gamma(q)).is_some_and(|lf| q > 8 && lf <= (delta / 2.0).ln()));

    match regime {
        Regime::Asymptotic => {
            let log_epsilon = constants.log_c_minus
                - (1.0 - pf.powf(1.0 - 2.0 * s)).ln()
                - 2.0 * s * pf.ln();
            Ok(WaveSelection {
                config: None,
                log_scales: Some(LogScales {
                    log_mu: constants.log_mu0,
                    log_c: constants.log_c_minus,
                    log_epsilon,
                }),
                constants,
                conditions,
                min_s,
                required_p,
            })
        }
        Regime::Desk => {
            let desk = desk.ok_or_else(|| Error::invalid("the desk regime needs an explicit mu and c"))?;
            let mut violations: Vec<String> = conditions.iter().filter_map(Condition::violation).collect();
            match constants.log_mu0 {
                Some(l) if desk.mu.ln() < l => violations.push(format!(
                    "mu = {} is below mu_0 = 10^{:.6e}",
                    desk.mu,
                    log10(l)
                )),
                None => violations.push(format!("mu_0 is undefined at p = {p}")),
                _ => {}
            }
            if desk.c.ln() < constants.log_c_minus {
                violations.push(format!(
                    "c = {} is below c_- = 10^{:.6e}",
                    desk.c,
                    log10(constants.log_c_minus)
                ));
            }
            let mut config = ExperimentConfig::wave(p, s);
            config.delta = Some(delta);
            config.growth = Some(growth);
            config.mu = Some(desk.mu);
            config.c = desk.c;
            config.epsilon = Some(wave_epsilon(p, s, desk.c));
            config.violations = violations;
            Ok(WaveSelection {
                config: Some(config),
                constants,
                conditions,
                min_s,
                required_p,
                log_scales: None,
            })
        }
    }
}

/// Choices for the NLS selection beyond the targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlsOptions {
    pub k: [i64; 3],
    pub c0: f64,
    pub regime: Regime,
    pub mu: Option<f64>,
    /// Wavenumber used when the required one exceeds [`DESK_N_CAP`].
    pub desk_n: Option<i64>,
}

impl Default for NlsOptions {
    fn default() -> Self {
        Self {
            k: [1, -1, 2],
            c0: 1.0,
            regime: Regime::Desk,
            mu: None,
            desk_n: None,
        }
    }
}

/// Growth-time estimate when `K = delta^{-alpha}`: with `N^{s/4} = sqrt(6) delta^{-alpha}`
/// the run time obeys `T <= 6 mu^2 T0 <= 36 mu^2 / c`, of order `C^{6 alpha / (1 + alpha)}`
/// for `C = K / delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTime {
    pub alpha: f64,
    pub n: f64,
    pub mu: f64,
    pub time_bound: f64,
    pub exponent: f64,
    pub within_c6: bool,
    pub accumulation_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlsSelection {
    pub config: Option<ExperimentConfig>,
    pub conditions: Vec<Condition>,
    /// Smallest integer wavenumber meeting every condition, up to [`NLS_GUARD`].
    pub required_n: Option<i64>,
    pub required_n_estimate: f64,
    pub desk_simulable: bool,
    /// Smallest `s` bringing the required wavenumber down to [`DESK_N_CAP`].
    pub min_s_for_desk: f64,
    pub growth_time: Option<GrowthTime>,
}

struct NlsTargets {
    s: f64,
    delta: f64,
    k_growth: f64,
    c: f64,
    gamma: f64,
    c0: f64,
}

impl NlsTargets {
    /// `(ln X, e)` for each condition `N^{e s} >= X`.
    fn terms(&self) -> [(&'static str, f64, f64); 3] {
        [
            ("N^(3s/4) >= C0 gamma^-2 c^5", (self.c0 * self.c.powi(5) / (self.gamma * self.gamma)).ln(), 0.75),
            ("N^(s/4)/sqrt(2c) >= 1/delta", ((2.0 * self.c).sqrt() / self.delta).ln(), 0.25),
            ("sqrt(c/6) N^(s/4) >= K", (self.k_growth * (6.0 / self.c).sqrt()).ln(), 0.25),
        ]
    }

    fn ln_n_required(&self, s: f64) -> f64 {
        self.terms()
            .iter()
            .map(|(_, lx, e)| lx / (e * s))
            .fold(0.0, f64::max)
    }

    fn conditions(&self, n: i64) -> Vec<Condition> {
        let ln_n = (n as f64).ln();
        self.terms()
            .iter()
            .map(|(name, lx, e)| {
                let lhs = e * self.s * ln_n;
                Condition::new(
                    name,
                    Some(lhs >= lx - 1e-12 * lx.abs().max(1.0)),
                    format!("ln lhs = {lhs:.6}, ln rhs = {lx:.6} at N = {n}"),
                )
            })
            .collect()
    }
}

/// Chooses `N`, `epsilon` and `mu` for the NLS construction.
pub fn select_parameters_nls(
    s: f64,
    delta: f64,
    k_growth: f64,
    c: f64,
    gamma: f64,
    tau: f64,
    opts: &NlsOptions,
) -> Result<NlsSelection> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!("s must be positive (got {s})")));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::invalid(format!("c must be at least 1 (got {c})")));
    }
    if !(delta > 0.0 && delta < 1.0) || !(k_growth >= 1.0) {
        return Err(Error::invalid(format!(
            "need delta in (0, 1) and K >= 1 (got delta = {delta}, K = {k_growth})"
        )));
    }
    if !(gamma > 0.0 && gamma < 1.0) || !(tau >= 0.0) || !(opts.c0 > 0.0) {
        return Err(Error::invalid("need gamma in (0, 1), tau >= 0 and C0 > 0"));
    }
    let [k1, k2, k3] = opts.k;
    if k1 <= 0 || k3 <= 0 || k2 >= 0 {
        return Err(Error::invalid(format!("need k1, k3 > 0 and k2 < 0 (got {:?})", opts.k)));
    }
    let targets = NlsTargets {
        s,
        delta,
        k_growth,
        c,
        gamma,
        c0: opts.c0,
    };
    let kmax = k1.max(-k2).max(k3);
    let n_tangential = kmax * kmax;
    let ln_req = targets.ln_n_required(s);
    let estimate = ln_req.exp().max(n_tangential as f64);
    let required_n = (ln_req <= (NLS_GUARD as f64).ln()).then(|| {
        let mut n = (estimate.ceil() as i64 - 1).max(n_tangential).max(1);
        while !targets.conditions(n).iter().all(|c| c.holds == Some(true)) {
            n += 1;
        }
        n
    });
    let desk_simulable = required_n.is_some_and(|n| n <= DESK_N_CAP);
    let ln_cap = (DESK_N_CAP as f64).ln();
    let min_s_for_desk = targets
        .terms()
        .iter()
        .map(|(_, lx, e)| lx / (e * ln_cap))
        .fold(0.0, f64::max);

    let growth_time = (k_growth > 1.0).then(|| {
        let alpha = k_growth.ln() / (1.0 / delta).ln();
        let n = (6f64.sqrt() * delta.powf(-alpha)).powf(4.0 / s);
        let mu = n.powf(0.75 * s);
        let time_bound = 36.0 * mu * mu / c;
        let exponent = 6.0 * alpha / (1.0 + alpha);
        GrowthTime {
            alpha,
            n,
            mu,
            time_bound,
            exponent,
            within_c6: exponent <= 6.0,
            accumulation_holds: mu.ln() >= targets.terms()[0].1,
        }
    });

    let chosen = match opts.regime {
        Regime::Asymptotic => required_n,
        Regime::Desk => match (opts.desk_n, desk_simulable) {
            (Some(n), _) => Some(n),
            (None, true) => required_n,
            (None, false) => {
                return Err(Error::invalid(format!(
                    "required N ~ {estimate:.3e} exceeds the desk cap {DESK_N_CAP}; supply a desk N or use s >= {min_s_for_desk:.4}"
                )))
            }
        },
    };
    let conditions = targets.conditions(chosen.unwrap_or(NLS_GUARD));
    let config = match chosen {
        Some(n) if n >= n_tangential && n <= NLS_GUARD => {
            let mut config = ExperimentConfig::nls(n, s);
            config.k = opts.k;
            config.c = c;
            config.delta = Some(delta);
            config.growth = Some(k_growth);
            config.tau = tau;
            config.gamma_bound = Some(gamma);
            config.nls_c0 = opts.c0;
            config.regime = opts.regime;
            config.epsilon = Some(nls_epsilon(s, n, c));
            let natural_mu = (n as f64).powf(0.75 * s);
            config.mu = Some(match opts.regime {
                Regime::Desk => opts.mu.ok_or_else(|| Error::invalid("the desk regime needs an explicit mu"))?,
                Regime::Asymptotic => natural_mu,
            });
            if opts.regime == Regime::Desk {
                config.violations = conditions.iter().filter_map(Condition::violation).collect();
                let mu = config.mu.expect("set above");
                if (mu - natural_mu).abs() > 1e-12 * natural_mu {
                    config
                        .violations
                        .push(format!("mu = {mu} differs from N^(3s/4) = {natural_mu:.6}"));
                }
            }
            Some(config)
        }
        Some(n) => {
            return Err(Error::invalid(format!(
                "N = {n} is outside [{n_tangential}, {NLS_GUARD}] (tangential cap max|k| <= sqrt(N))"
            )))
        }
        None => None,
    };
    Ok(NlsSelection {
        config,
        conditions,
        required_n,
        required_n_estimate: estimate,
        desk_simulable,
        min_s_for_desk,
        growth_time,
    })
}

/// `c / (2^{2s} N^s - 1)`.
pub fn nls_epsilon(s: f64, n: i64, c: f64) -> f64 {
    c / (2f64.powf(2.0 * s) * (n as f64).powf(s) - 1.0)
}
