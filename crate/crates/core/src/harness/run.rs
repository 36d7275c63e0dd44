use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Regime, DEFAULT_NLS_GAMMA};
use super::select::{nls_epsilon, wave_epsilon};
use crate::error::{Error, Result};
use crate::model::{integrate_channel, lift_and_rescale, ChannelOrbit, ChannelSpec, ChannelSummary, TangentialTrajectory};
use crate::pde::{evolve, ConservedColumn, EquationKind, EvolutionProblem, EvolveOptions, MonitorSeries, PdeState};
use crate::resonance::{
    certify_q, enumerate_monomials, find_q_vector, normal_form_generator, DiophantineCertificate, Filters,
    MomentumRule, MonomialClass,
};
use crate::spectral::{ell1_norm, frequencies_nls, frequencies_wave, Frame, FrequencyTable, ModeSet};

/// Resonant monomials of the tangential class found by enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceCheck {
    pub class: String,
    pub monomials: Vec<String>,
    pub expected: usize,
    /// Resonant monomials with exactly one normal mode (wave only).
    pub one_normal: Option<usize>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub s: f64,
    pub norm0: f64,
    #[serde(rename = "normT")]
    pub norm_t: f64,
    pub ratio: f64,
    /// Ratio of the resonant model between the channel endpoints.
    pub predicted_ratio: f64,
}

/// Largest relative excursion of each conserved quantity; `None` where the
/// equation does not conserve it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drifts {
    pub hamiltonian: f64,
    pub momentum: Option<f64>,
    pub mass: Option<f64>,
    /// Distance of the wave state from the real subspace at the final time.
    pub real_subspace_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighMode {
    pub mode: i64,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_: f64,
    /// `c / (p^2 mu^2)` or `c / (6 mu^2)`.
    pub target: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub generator_terms: usize,
    pub min_divisor: f64,
    /// `l^1` size of `Gamma(r) - r` at `t = 0`.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub provenance: Provenance,
    pub equation: EquationKind,
    pub mu: f64,
    pub epsilon: f64,
    pub j_max: usize,
    pub grid: usize,
    pub nonlinearity_scale: f64,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<DiophantineCertificate>,
    pub resonance: ResonanceCheck,
    pub channel: ChannelSummary,
    pub time_scale: f64,
    /// `time_scale * T0`.
    #[serde(rename = "T_model")]
    pub t_model: f64,
    /// Simulated interval.
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(rename = "T_formula_bounds")]
    pub t_formula_bounds: [f64; 2],
    #[serde(rename = "T_within_formula_bounds")]
    pub t_within_formula_bounds: bool,
    pub norms: Norms,
    pub drifts: Drifts,
    pub max_model_distance: f64,
    pub final_model_distance: f64,
    pub high_modes: Vec<HighMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction: Option<Correction>,
    pub steps: usize,
    pub samples: usize,
}

impl ExperimentReport {
    pub fn conserved_column(&self) -> ConservedColumn {
        match self.equation {
            EquationKind::Wave => ConservedColumn::Momentum,
            EquationKind::Nls => ConservedColumn::Mass,
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub monitors: MonitorSeries,
    pub final_state: PdeState,
    pub reference: TangentialTrajectory,
}

struct Setup {
    freq: FrequencyTable,
    modes: ModeSet,
    q: Option<[f64; 3]>,
    certificate: Option<DiophantineCertificate>,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

fn frequencies(cfg: &ExperimentConfig) -> Result<Setup> {
    match cfg.equation {
        EquationKind::Wave => {
            let p = cfg.p.expect("validated");
            let modes = ModeSet::wave(p, cfg.j_max)?;
            let freq = frequencies_wave(p, modes.j_max())?;
            if let Some(bound) = cfg.gamma_bound {
                if freq.gamma < bound {
                    return Err(Error::invalid(format!(
                        "gamma = {} of the wave frequencies is below the bound {bound}",
                        freq.gamma
                    )));
                }
            }
            Ok(Setup {
                freq,
                modes,
                q: None,
                certificate: None,
            })
        }
        EquationKind::Nls => {
            let n = cfg.n.expect("validated");
            let modes = ModeSet::nls(cfg.k, n, cfg.j_max)?;
            let bound = cfg.gamma_bound.unwrap_or(DEFAULT_NLS_GAMMA);
            let (q, cert) = match cfg.q {
                Some(q) => {
                    let cert = certify_q(q, cfg.tau);
                    if cert.gamma < bound {
                        return Err(Error::invalid(format!(
                            "q = {q:?} certifies gamma = {} below the bound {bound}",
                            cert.gamma
                        )));
                    }
                    (q, cert)
                }
                None => find_q_vector(bound, cfg.tau, cfg.q_trials, cfg.seed)?,
            };
            let (freq, _) = frequencies_nls(&modes, q)?;
            Ok(Setup {
                freq,
                modes,
                q: Some(q),
                certificate: Some(cert),
            })
        }
    }
}

/// Enumerates the resonant tangential monomials and compares with the model.
pub fn resonance_check(modes: &ModeSet, freq: &FrequencyTable) -> Result<ResonanceCheck> {
    let rule = MomentumRule::for_table(freq);
    let filters = Filters::resonant(rule);
    let (degree, expected) = match freq.model() {
        crate::spectral::FrequencyModel::Wave { p } => (p + 1, 4),
        crate::spectral::FrequencyModel::Nls { .. } => (4, 2),
    };
    let tangential = MonomialClass::exactly(degree, 0);
    let found = enumerate_monomials(&tangential, modes, freq, &filters)?;
    let one_normal = if freq.is_wave() {
        Some(enumerate_monomials(&MonomialClass::exactly(degree, 1), modes, freq, &filters)?.len())
    } else {
        None
    };
    Ok(ResonanceCheck {
        class: tangential.to_string(),
        monomials: found.iter().map(|m| m.to_string()).collect(),
        expected,
        passed: found.len() == expected && one_normal.unwrap_or(0) == 0,
        one_normal,
    })
}

/// `[2^{p-1}/p, 2^{p+2}/p] ||z(0)||_s^{1-p}` for the wave and
/// `[0, 12 N^s ||z(0)||_s^{-2}]` for NLS.
pub fn time_formula_bounds(cfg: &ExperimentConfig, norm0: f64) -> [f64; 2] {
    match cfg.equation {
        EquationKind::Wave => {
            let p = cfg.p.expect("validated") as f64;
            let f = norm0.powf(1.0 - p) / p;
            [2f64.powf(p - 1.0) * f, 2f64.powf(p + 2.0) * f]
        }
        EquationKind::Nls => {
            let n = cfg.n.expect("validated") as f64;
            [0.0, 12.0 * n.powf(cfg.s) / (norm0 * norm0)]
        }
    }
}

/// Runs the pipeline frequencies, resonance check, channel, lift, optional
/// normal-form correction, evolution. Errors carry the failing stage.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    stage("config", cfg.validate())?;
    if cfg.regime == Regime::Asymptotic {
        return Err(Error::Config(
            "asymptotic-regime parameters are evaluated, not simulated; use the desk regime".into(),
        )
        .in_stage("config"));
    }
    let mu = cfg
        .mu
        .ok_or_else(|| Error::Config("a desk run needs an explicit mu".into()).in_stage("config"))?;

    let setup = stage("frequencies", frequencies(cfg))?;
    let resonance = stage("resonance", resonance_check(&setup.modes, &setup.freq))?;
    if !resonance.passed {
        return Err(Error::Integration(format!(
            "resonance self-check found {:?} (one normal: {:?}), expected {}",
            resonance.monomials, resonance.one_normal, resonance.expected
        ))
        .in_stage("resonance"));
    }

    let (spec, epsilon) = match cfg.equation {
        EquationKind::Wave => {
            let p = cfg.p.expect("validated");
            let eps = cfg.epsilon.unwrap_or_else(|| wave_epsilon(p, cfg.s, cfg.c));
            (ChannelSpec::wave(p, cfg.c, eps), eps)
        }
        EquationKind::Nls => {
            let n = cfg.n.expect("validated");
            let eps = cfg.epsilon.unwrap_or_else(|| nls_epsilon(cfg.s, n, cfg.c));
            let k4 = cfg.k4().expect("validated");
            (ChannelSpec::nls([cfg.k[0], cfg.k[1], cfg.k[2], k4], cfg.c, eps), eps)
        }
    };
    let orbit = stage("channel", integrate_channel(&spec))?;
    let reference = stage("lift", lift(&orbit, mu))?;

    let problem = stage(
        "evolve",
        EvolutionProblem::new(setup.freq.clone(), cfg.padding).map(|p| p.with_scale(cfg.scale)),
    )?;
    let mut z0 = stage("lift", reference.state_at(0.0, setup.modes.j_max()))?;
    z0.frame = Frame::Lab;
    let mut correction = None;
    if cfg.apply_gamma_correction {
        let p = match cfg.equation {
            EquationKind::Wave => cfg.p.expect("validated"),
            EquationKind::Nls => {
                return Err(Error::invalid("the normal-form correction is implemented for the wave equation")
                    .in_stage("correction"))
            }
        };
        let generator = stage(
            "correction",
            normal_form_generator(p, &setup.modes, &setup.freq, problem.scale()),
        )?;
        let corrected = generator.polynomial.flow(&z0, 1.0, 64);
        let mut diff = corrected.clone();
        for (d, v) in diff.amplitudes_mut().iter_mut().zip(z0.amplitudes()) {
            *d -= v;
        }
        correction = Some(Correction {
            generator_terms: generator.polynomial.len(),
            min_divisor: generator.min_divisor,
            shift: ell1_norm(&diff),
        });
        z0 = corrected;
    }
    let state0 = stage("evolve", PdeState::for_problem(&problem, z0))?;

    let t_model = reference.final_time();
    let t_final = t_model * cfg.t_policy.factor();
    let opts = EvolveOptions {
        sample_stride: cfg.sample_stride,
        tracked_modes: setup.freq.tangential(),
        sobolev_index: cfg.s,
    };
    let (final_state, monitors) = stage(
        "evolve",
        evolve(&problem, &state0, t_final, cfg.dt, &opts, Some(&reference)),
    )?;

    let report = build_report(cfg, &setup, &problem, &orbit, &reference, resonance, correction, &monitors, &final_state, mu, epsilon, t_final);
    Ok(ExperimentRun {
        report,
        monitors,
        final_state,
        reference,
    })
}

fn lift(orbit: &ChannelOrbit, mu: f64) -> Result<TangentialTrajectory> {
    let traj = lift_and_rescale(orbit, mu, None)?;
    match orbit.spec.kind {
        crate::model::ChannelKind::Wave { .. } => traj.with_component(&orbit.mirrored()?, None),
        crate::model::ChannelKind::Nls { .. } => Ok(traj),
    }
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    cfg: &ExperimentConfig,
    setup: &Setup,
    problem: &EvolutionProblem,
    orbit: &ChannelOrbit,
    reference: &TangentialTrajectory,
    resonance: ResonanceCheck,
    correction: Option<Correction>,
    m: &MonitorSeries,
    final_state: &PdeState,
    mu: f64,
    epsilon: f64,
    t_final: f64,
) -> ExperimentReport {
    let norm0 = m.sobolev[0];
    let norm_t = *m.sobolev.last().expect("non-empty");
    let h0 = m.hamiltonian[0];
    let mass0 = m.mass[0];
    let wave = cfg.equation == EquationKind::Wave;
    let drifts = Drifts {
        hamiltonian: MonitorSeries::drift(&m.hamiltonian, h0.abs()),
        momentum: wave.then(|| MonitorSeries::drift(&m.momentum, m.momentum[0].abs().max(mass0))),
        mass: (!wave).then(|| MonitorSeries::drift(&m.mass, mass0)),
        real_subspace_defect: wave.then(|| final_state.real_subspace_defect()),
    };

    let t_formula_bounds = time_formula_bounds(cfg, norm0);
    let t_model = reference.final_time();
    let target = orbit.spec.target() / (mu * mu);
    let high = orbit.spec.kind.high_index();
    let high_modes = reference
        .components
        .iter()
        .map(|c| c.orbit.modes[high])
        .map(|j| {
            let k = m.tracked_modes.iter().position(|&t| t == j).expect("tangential modes are tracked");
            let fin = *m.mode_actions[k].last().expect("non-empty");
            HighMode {
                mode: j,
                initial: m.mode_actions[k][0],
                final_: fin,
                target,
                relative_error: (fin - target).abs() / target,
            }
        })
        .collect();
    let final_model_distance = m
        .model_distance
        .iter()
        .rev()
        .flatten()
        .next()
        .copied()
        .unwrap_or(f64::NAN);

    ExperimentReport {
        config: cfg.clone(),
        provenance: Provenance {
            version: format!("sobolev-growth {}", env!("CARGO_PKG_VERSION")),
            threads: rayon::current_num_threads(),
        },
        equation: cfg.equation,
        mu,
        epsilon,
        j_max: problem.j_max(),
        grid: problem.grid(),
        nonlinearity_scale: problem.scale(),
        gamma: setup.freq.gamma,
        q: setup.q,
        certificate: setup.certificate,
        resonance,
        channel: orbit.summary(),
        time_scale: reference.time_scale,
        t_model,
        t_final,
        t_within_formula_bounds: t_model >= t_formula_bounds[0] && t_model <= t_formula_bounds[1],
        t_formula_bounds,
        norms: Norms {
            s: cfg.s,
            norm0,
            norm_t,
            ratio: norm_t / norm0,
            predicted_ratio: reference.predicted_ratio(cfg.s),
        },
        drifts,
        max_model_distance: m.max_model_distance().unwrap_or(f64::NAN),
        final_model_distance,
        high_modes,
        correction,
        steps: ((t_final / cfg.dt) * (1.0 - 1e-12)).ceil() as usize,
        samples: m.len(),
    }
}
