use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::monitor::MonitorSeries;
use super::problem::{check_state, hamiltonian, EquationKind, EvolutionProblem, PdeState, Workspace};
use crate::error::{Error, Result};
use crate::model::TangentialTrajectory;
use crate::spectral::{ell1_norm, mass, momentum, sobolev_norm, Frame, FrequencyTable, SpectralState};

/// Strang splitting: exact half rotation, one RK4 step of the nonlinear
/// field, exact half rotation.
pub struct Stepper<'a> {
    problem: &'a EvolutionProblem,
    work: Workspace,
    dt: f64,
    half_phase: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a EvolutionProblem, dt: f64) -> Self {
        let n = problem.flat_len();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        let mut s = Self {
            problem,
            work: Workspace::new(problem),
            dt,
            half_phase: Vec::new(),
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            tmp: zero,
        };
        s.set_dt(dt);
        s
    }

    pub fn set_dt(&mut self, dt: f64) {
        self.dt = dt;
        let omega = self.problem.freq().dense();
        let mut phase: Vec<Complex64> = omega
            .iter()
            .map(|w| Complex64::from_polar(1.0, w * dt / 2.0))
            .collect();
        if self.problem.kind() == EquationKind::Wave {
            let conj: Vec<Complex64> = phase.iter().map(|z| z.conj()).collect();
            phase.extend(conj);
        }
        self.half_phase = phase;
    }

    fn rotate(&self, y: &mut [Complex64]) {
        for (v, r) in y.iter_mut().zip(&self.half_phase) {
            *v *= r;
        }
    }

    /// Advances the flat state by one step of size `dt` (negative allowed).
    pub fn advance(&mut self, y: &mut [Complex64]) {
        let h = self.dt;
        self.rotate(y);
        let n = y.len();
        let zero = Complex64::new(0.0, 0.0);
        for stage in 0..4 {
            let a = match stage {
                0 => 0.0,
                3 => h,
                _ => h / 2.0,
            };
            if stage == 0 {
                self.tmp.copy_from_slice(y);
            } else {
                for i in 0..n {
                    self.tmp[i] = y[i] + self.k[stage - 1][i] * a;
                }
            }
            self.k[stage].iter_mut().for_each(|v| *v = zero);
            let (tmp, k) = (&self.tmp, &mut self.k[stage]);
            self.work.nonlinear(self.problem, tmp, k);
        }
        for i in 0..n {
            y[i] += (self.k[0][i] + (self.k[1][i] + self.k[2][i]) * 2.0 + self.k[3][i]) * (h / 6.0);
        }
        self.rotate(y);
    }
}

/// One splitting step of size `dt` from `state`.
pub fn step(problem: &EvolutionProblem, state: &PdeState, dt: f64) -> Result<PdeState> {
    check_state(problem, state)?;
    let mut y = state.to_flat();
    Stepper::new(problem, dt).advance(&mut y);
    Ok(state.from_flat(&y, state.time() + dt))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Monitors are sampled every this many steps, and at the final time.
    pub sample_stride: usize,
    pub tracked_modes: Vec<i64>,
    pub sobolev_index: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            sample_stride: 10,
            tracked_modes: Vec::new(),
            sobolev_index: 1.0,
        }
    }
}

fn record(
    problem: &EvolutionProblem,
    state: &PdeState,
    opts: &EvolveOptions,
    reference: Option<&TangentialTrajectory>,
    series: &mut MonitorSeries,
) -> Result<()> {
    let z = &state.primary;
    series.times.push(state.time());
    series.hamiltonian.push(hamiltonian(problem, state)?);
    series.momentum.push(momentum(z));
    series.mass.push(mass(z));
    series.sobolev.push(sobolev_norm(z, opts.sobolev_index));
    for (k, &j) in opts.tracked_modes.iter().enumerate() {
        series.mode_actions[k].push(z.get(j).norm_sqr());
    }
    if let Some(r) = reference {
        let t = state.time();
        let d = if t <= r.final_time() * (1.0 + 1e-12) {
            let rotating = rotating_frame(z, problem.freq(), Frame::Rotating)?;
            Some(model_distance(&rotating, r, t)?)
        } else {
            None
        };
        series.model_distance.push(d);
    }
    Ok(())
}

/// Integrates from `state0` to `state0.time + t_final` with `ceil(t_final/dt)`
/// equal steps no longer than `dt`.
pub fn evolve(
    problem: &EvolutionProblem,
    state0: &PdeState,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
    reference: Option<&TangentialTrajectory>,
) -> Result<(PdeState, MonitorSeries)> {
    check_state(problem, state0)?;
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::invalid(format!(
            "need dt > 0 and t_final >= 0 (got dt = {dt}, t_final = {t_final})"
        )));
    }
    if problem.kind() == EquationKind::Wave && state0.real_subspace_defect() > 1e-12 {
        return Err(Error::invalid("initial wave state is off the real subspace"));
    }
    let steps = ((t_final / dt) * (1.0 - 1e-12)).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let stride = opts.sample_stride.max(1);
    let t_start = state0.time();

    let mut series = MonitorSeries::new(opts.tracked_modes.clone(), opts.sobolev_index);
    let mut state = state0.clone();
    record(problem, &state, opts, reference, &mut series)?;
    let mut y = state0.to_flat();
    let mut stepper = Stepper::new(problem, h);
    for n in 1..=steps {
        stepper.advance(&mut y);
        let t = t_start + n as f64 * h;
        if !y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::BlowUp {
                time: t,
                monitors: Box::new(series),
            });
        }
        if n % stride == 0 || n == steps {
            state = state0.from_flat(&y, t);
            record(problem, &state, opts, reference, &mut series)?;
        }
    }
    if steps > 0 {
        state = state0.from_flat(&y, t_start + t_final);
    }
    Ok((state, series))
}

/// Multiplies by `exp(-i omega t)` into the rotating frame or `exp(i omega t)` back.
pub fn rotating_frame(state: &SpectralState, freq: &FrequencyTable, target: Frame) -> Result<SpectralState> {
    if state.frame == target {
        return Err(Error::Frame(target.name()));
    }
    let sign = if target == Frame::Rotating { -1.0 } else { 1.0 };
    let mut out = state.clone();
    let t = state.time;
    for (j, z) in (-(state.j_max() as i64)..).zip(out.amplitudes_mut()) {
        *z *= Complex64::from_polar(1.0, sign * freq.omega(j)? * t);
    }
    out.frame = target;
    Ok(out)
}

/// `l^1` distance between a rotating-frame state and the reference at time `t`.
pub fn model_distance(state: &SpectralState, reference: &TangentialTrajectory, t: f64) -> Result<f64> {
    if state.frame != Frame::Rotating {
        return Err(Error::invalid("model distance needs a rotating-frame state"));
    }
    let r = reference.state_at(t, state.j_max())?;
    let mut diff = state.clone();
    for (d, rv) in diff.amplitudes_mut().iter_mut().zip(r.amplitudes()) {
        *d -= rv;
    }
    Ok(ell1_norm(&diff))
}
