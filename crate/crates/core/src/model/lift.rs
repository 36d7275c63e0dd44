use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::{ChannelKind, ChannelOrbit};
use crate::error::{Error, Result};
use crate::spectral::{Frame, SpectralState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedOrbit {
    pub orbit: ChannelOrbit,
    pub angles: Vec<f64>,
}

/// Rescaled model solution `mu^{-1} b(t / time_scale)` on the tangential modes,
/// in the rotating frame, with the angles frozen on the section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentialTrajectory {
    pub components: Vec<LiftedOrbit>,
    pub mu: f64,
    /// `mu^{p-1}` (wave) or `mu^2` (NLS).
    pub time_scale: f64,
}

fn time_exponent(kind: &ChannelKind) -> f64 {
    match kind {
        ChannelKind::Wave { p, .. } => *p as f64 - 1.0,
        ChannelKind::Nls { .. } => 2.0,
    }
}

fn check_section(orbit: &ChannelOrbit, angles: &[f64]) -> Result<()> {
    if angles.len() != orbit.modes.len() {
        return Err(Error::invalid(format!(
            "expected {} angles, got {}",
            orbit.modes.len(),
            angles.len()
        )));
    }
    let phi = orbit.spec.kind.resonant_angle(angles);
    if (phi.cos()).abs() > 1e-9 || phi.sin() <= 0.0 {
        return Err(Error::SectionViolated { angle: phi });
    }
    Ok(())
}

/// Lifts an orbit to Fourier amplitudes and rescales by `mu`. `angles` default
/// to the orbit's frozen section angles.
pub fn lift_and_rescale(
    orbit: &ChannelOrbit,
    mu: f64,
    angles: Option<&[f64]>,
) -> Result<TangentialTrajectory> {
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("mu must be at least 1 (got {mu})")));
    }
    let angles = angles.unwrap_or(&orbit.frozen_angles).to_vec();
    check_section(orbit, &angles)?;
    Ok(TangentialTrajectory {
        components: vec![LiftedOrbit {
            orbit: orbit.clone(),
            angles,
        }],
        mu,
        time_scale: mu.powf(time_exponent(&orbit.spec.kind)),
    })
}

impl TangentialTrajectory {
    /// Adds an independent orbit on other modes with the same diffusion time.
    pub fn with_component(mut self, orbit: &ChannelOrbit, angles: Option<&[f64]>) -> Result<Self> {
        let first = &self.components[0].orbit;
        if time_exponent(&first.spec.kind) != time_exponent(&orbit.spec.kind)
            || (first.t0 - orbit.t0).abs() > 1e-12 * first.t0.max(1.0)
        {
            return Err(Error::invalid("components must share the model and diffusion time"));
        }
        if self
            .components
            .iter()
            .any(|c| c.orbit.modes.iter().any(|j| orbit.modes.contains(j)))
        {
            return Err(Error::invalid("components must live on disjoint modes"));
        }
        let angles = angles.unwrap_or(&orbit.frozen_angles).to_vec();
        check_section(orbit, &angles)?;
        self.components.push(LiftedOrbit {
            orbit: orbit.clone(),
            angles,
        });
        Ok(self)
    }

    /// `T = time_scale * T0`.
    pub fn final_time(&self) -> f64 {
        self.time_scale * self.components[0].orbit.t0
    }

    pub fn modes(&self) -> Vec<i64> {
        self.components
            .iter()
            .flat_map(|c| c.orbit.modes.iter().copied())
            .collect()
    }

    /// Rescaled actions `mu^{-2} I_j(t / time_scale)` keyed by mode.
    pub fn actions_at(&self, t: f64) -> Result<Vec<(i64, f64)>> {
        let end = self.final_time();
        let tol = 1e-12 * end.max(1.0);
        if !(t >= -tol && t <= end + tol) {
            return Err(Error::OutsideReference { t, end });
        }
        let s = (t / self.time_scale).clamp(0.0, self.components[0].orbit.t0);
        let mu2 = self.mu * self.mu;
        let mut out = Vec::new();
        for c in &self.components {
            let a = c.orbit.actions_at(s)?;
            out.extend(c.orbit.modes.iter().zip(a).map(|(&j, v)| (j, v / mu2)));
        }
        Ok(out)
    }

    /// Rotating-frame amplitudes `r^mu(t)` on `[-j_max, j_max]`.
    pub fn state_at(&self, t: f64, j_max: usize) -> Result<SpectralState> {
        let mut state = SpectralState::zeros(j_max);
        state.frame = Frame::Rotating;
        state.time = t;
        let actions = self.actions_at(t)?;
        let angles = self.components.iter().flat_map(|c| c.angles.iter().copied());
        for ((j, a), theta) in actions.into_iter().zip(angles) {
            state.set(j, Complex64::from_polar(a.max(0.0).sqrt(), theta))?;
        }
        Ok(state)
    }

    /// `sum <j>^{2s} I_j` at the two ends of the orbit, unscaled.
    pub fn weighted_actions(&self, s: f64) -> (f64, f64) {
        let weight = |j: i64| (j.unsigned_abs().max(1) as f64).powf(2.0 * s);
        let mut start = 0.0;
        let mut end = 0.0;
        for c in &self.components {
            for (k, &j) in c.orbit.modes.iter().enumerate() {
                start += weight(j) * c.orbit.actions[k][0];
                end += weight(j) * c.orbit.actions[k].last().expect("non-empty");
            }
        }
        (start, end)
    }

    /// Norm ratio of the model between `t = 0` and `t = T`.
    pub fn predicted_ratio(&self, s: f64) -> f64 {
        let (a, b) = self.weighted_actions(s);
        (b / a).sqrt()
    }
}
