use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ode::Dopri5;
use super::quadrature;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "snake_case")]
pub enum ChannelKind {
    /// Modes `(1, p)` or `(-1, -p)` coupled by `z_1^p zbar_p`.
    Wave { p: u32, branch: Branch },
    /// Modes `k1..k4` coupled by `u_{k1} ubar_{k2} u_{k3} ubar_{k4}`.
    Nls { tangential: [i64; 4] },
}

impl ChannelKind {
    pub fn modes(&self) -> Vec<i64> {
        match self {
            ChannelKind::Wave { p, branch } => {
                let s = if *branch == Branch::Plus { 1 } else { -1 };
                vec![s, s * *p as i64]
            }
            ChannelKind::Nls { tangential } => tangential.to_vec(),
        }
    }

    /// Position of the mode whose action grows along the channel.
    pub fn high_index(&self) -> usize {
        match self {
            ChannelKind::Wave { .. } => 1,
            ChannelKind::Nls { .. } => 3,
        }
    }

    /// Angle combination whose cosine multiplies the reduced Hamiltonian, taken
    /// with the sign that makes the high action grow when it equals `pi/2`:
    /// `theta_p - p theta_1` or `theta_4 - theta_1 + theta_2 - theta_3`.
    pub fn resonant_angle(&self, angles: &[f64]) -> f64 {
        match self {
            ChannelKind::Wave { p, .. } => angles[1] - *p as f64 * angles[0],
            ChannelKind::Nls { .. } => angles[3] - angles[0] + angles[1] - angles[2],
        }
    }

    fn arity(&self) -> usize {
        match self {
            ChannelKind::Wave { .. } => 2,
            ChannelKind::Nls { .. } => 4,
        }
    }
}

/// Diffusion channel at height `c` starting from high-mode action `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub c: f64,
    pub epsilon: f64,
    #[serde(default = "default_section")]
    pub section_angle: f64,
}

fn default_section() -> f64 {
    FRAC_PI_2
}

fn lambda(p: u32) -> f64 {
    2f64.sqrt().powi(1 - p as i32)
}

impl ChannelSpec {
    pub fn wave(p: u32, c: f64, epsilon: f64) -> Self {
        Self {
            kind: ChannelKind::Wave {
                p,
                branch: Branch::Plus,
            },
            c,
            epsilon,
            section_angle: FRAC_PI_2,
        }
    }

    pub fn nls(tangential: [i64; 4], c: f64, epsilon: f64) -> Self {
        Self {
            kind: ChannelKind::Nls { tangential },
            c,
            epsilon,
            section_angle: FRAC_PI_2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) || !(self.epsilon > 0.0) {
            return Err(Error::invalid(format!(
                "channel needs c > 0 and epsilon > 0 (got c = {}, epsilon = {})",
                self.c, self.epsilon
            )));
        }
        let cos = self.section_angle.cos();
        if cos.abs() > 1e-9 || self.section_angle.sin() <= 0.0 {
            return Err(Error::SectionViolated {
                angle: self.section_angle,
            });
        }
        match &self.kind {
            ChannelKind::Wave { p, .. } => {
                crate::spectral::check_wave_degree(*p)?;
                let p = *p as f64;
                if self.c <= p * self.epsilon {
                    return Err(Error::invalid(format!(
                        "wave channel needs c > p epsilon (c = {}, p epsilon = {})",
                        self.c,
                        p * self.epsilon
                    )));
                }
            }
            ChannelKind::Nls { .. } => {
                if self.c <= 8.0 / 3.0 * self.epsilon {
                    return Err(Error::invalid(format!(
                        "NLS channel needs c > 8 epsilon / 3 (c = {}, epsilon = {})",
                        self.c, self.epsilon
                    )));
                }
            }
        }
        if self.epsilon > self.target() {
            return Err(Error::OutsideChannel {
                value: self.epsilon,
                lower: 0.0,
                upper: self.target(),
            });
        }
        Ok(())
    }

    pub fn modes(&self) -> Vec<i64> {
        self.kind.modes()
    }

    /// High-mode action at which the orbit stops: `c / p^2` or `c / 6`.
    pub fn target(&self) -> f64 {
        match &self.kind {
            ChannelKind::Wave { p, .. } => self.c / (*p as f64).powi(2),
            ChannelKind::Nls { .. } => self.c / 6.0,
        }
    }

    pub fn initial_actions(&self) -> Vec<f64> {
        match &self.kind {
            ChannelKind::Wave { p, .. } => vec![self.c - *p as f64 * self.epsilon, self.epsilon],
            ChannelKind::Nls { .. } => {
                let third = (self.c - self.epsilon) / 3.0;
                vec![third, third, third, self.epsilon]
            }
        }
    }

    /// Angles on the invariant section: all zero except the high mode.
    pub fn default_angles(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.kind.arity()];
        a[self.kind.high_index()] = self.section_angle;
        a
    }

    /// `(alpha, beta)` of the NLS channel.
    fn nls_shape(&self) -> (f64, f64) {
        let third = (self.c - self.epsilon) / 3.0;
        (third + self.epsilon, third - self.epsilon)
    }

    /// Actions as functions of the high action `j` along the channel.
    pub fn actions_on_channel(&self, j: f64) -> Vec<f64> {
        match &self.kind {
            ChannelKind::Wave { p, .. } => vec![self.c - *p as f64 * j, j],
            ChannelKind::Nls { .. } => {
                let (alpha, beta) = self.nls_shape();
                vec![alpha - j, beta + j, alpha - j, j]
            }
        }
    }
}

/// `G` of the resonant model at the given actions and angles.
pub fn reduced_hamiltonian(kind: &ChannelKind, actions: &[f64], angles: &[f64]) -> Result<f64> {
    check_point(kind, actions, angles)?;
    Ok(match kind {
        ChannelKind::Wave { p, .. } => {
            lambda(*p)
                * actions[0].powf(*p as f64 / 2.0)
                * actions[1].sqrt()
                * (*p as f64 * angles[0] - angles[1]).cos()
        }
        ChannelKind::Nls { .. } => {
            2.0 * actions.iter().product::<f64>().sqrt()
                * (angles[0] - angles[1] + angles[2] - angles[3]).cos()
        }
    })
}

fn check_point(kind: &ChannelKind, actions: &[f64], angles: &[f64]) -> Result<()> {
    let n = kind.arity();
    if actions.len() != n || angles.len() != n {
        return Err(Error::invalid(format!("expected {n} actions and {n} angles")));
    }
    if let Some(a) = actions.iter().find(|a| !(**a >= 0.0)) {
        return Err(Error::invalid(format!("actions must be nonnegative (got {a})")));
    }
    Ok(())
}

/// `(dG/dI, dG/dtheta)`; the equations of motion are `Idot = -dG/dtheta`,
/// `thetadot = dG/dI`. Actions must be positive.
pub fn reduced_gradient(
    kind: &ChannelKind,
    actions: &[f64],
    angles: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_point(kind, actions, angles)?;
    if actions.contains(&0.0) {
        return Err(Error::invalid("action gradient is singular at zero action"));
    }
    Ok(match kind {
        ChannelKind::Wave { p, .. } => {
            let pf = *p as f64;
            let phase = pf * angles[0] - angles[1];
            let amp = lambda(*p) * actions[0].powf(pf / 2.0) * actions[1].sqrt();
            let (s, c) = phase.sin_cos();
            (
                vec![amp * c * pf / (2.0 * actions[0]), amp * c / (2.0 * actions[1])],
                vec![-amp * s * pf, amp * s],
            )
        }
        ChannelKind::Nls { .. } => {
            let phase = angles[0] - angles[1] + angles[2] - angles[3];
            let amp = 2.0 * actions.iter().product::<f64>().sqrt();
            let (s, c) = phase.sin_cos();
            (
                actions.iter().map(|a| amp * c / (2.0 * a)).collect(),
                vec![-amp * s, amp * s, -amp * s, amp * s],
            )
        }
    })
}

/// Scalar field `Jdot = f(J)` of the high action on the section.
pub fn channel_field(spec: &ChannelSpec, j: f64) -> Result<f64> {
    match &spec.kind {
        ChannelKind::Wave { p, .. } => {
            let upper = spec.c / *p as f64;
            if !(0.0..=upper).contains(&j) {
                return Err(Error::OutsideChannel {
                    value: j,
                    lower: 0.0,
                    upper,
                });
            }
            let rest = (spec.c - *p as f64 * j).max(0.0);
            Ok(lambda(*p) * rest.powf(*p as f64 / 2.0) * j.sqrt())
        }
        ChannelKind::Nls { .. } => {
            let (alpha, beta) = spec.nls_shape();
            let lower = (-beta).max(0.0);
            if !(lower..=alpha).contains(&j) {
                return Err(Error::OutsideChannel {
                    value: j,
                    lower,
                    upper: alpha,
                });
            }
            Ok(2.0 * (alpha - j) * ((beta + j) * j).sqrt())
        }
    }
}

/// Analytic bracket for the diffusion time; `lower_slack` absorbs the
/// contribution of the interval `[0, epsilon]` left out of the integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_slack: f64,
}

impl TimeBounds {
    pub fn contains(&self, t0: f64) -> bool {
        t0 < self.upper && t0 >= self.lower - self.lower_slack
    }
}

pub fn diffusion_time_bounds(spec: &ChannelSpec) -> TimeBounds {
    match &spec.kind {
        ChannelKind::Wave { p, .. } => {
            let pf = *p as f64;
            let root2 = 2f64.sqrt();
            let lower = root2.powi(*p as i32 + 1) / (spec.c.powf((pf - 1.0) / 2.0) * pf);
            TimeBounds {
                lower,
                upper: lower / (1.0 - 1.0 / pf).powf(pf / 2.0),
                lower_slack: 2.0 * spec.epsilon.sqrt() * root2.powi(*p as i32 - 1)
                    / spec.c.powf(pf / 2.0),
            }
        }
        ChannelKind::Nls { .. } => TimeBounds {
            lower: 0.0,
            upper: 6.0 / spec.c,
            lower_slack: 0.0,
        },
    }
}

/// `int dJ / f(J)` from `epsilon` to the target after `J = w^2`.
pub fn diffusion_time_quadrature(spec: &ChannelSpec) -> Result<f64> {
    spec.validate()?;
    let (a, b) = (spec.epsilon.sqrt(), spec.target().sqrt());
    let value = match &spec.kind {
        ChannelKind::Wave { p, .. } => {
            let (c, pf) = (spec.c, *p as f64);
            let (v, _) = quadrature::integrate(|w| (c - pf * w * w).powf(-pf / 2.0), a, b, 1e-14);
            2.0 / lambda(*p) * v
        }
        ChannelKind::Nls { .. } => {
            let (alpha, beta) = spec.nls_shape();
            let (v, _) = quadrature::integrate(
                |w| 1.0 / ((alpha - w * w) * (beta + w * w).sqrt()),
                a,
                b,
                1e-14,
            );
            v
        }
    };
    Ok(value)
}

/// Right-hand side of the resonant model in complex variables, packed as
/// `(re, im)` pairs in the order of [`ChannelKind::modes`].
pub fn resonant_field(kind: &ChannelKind, y: &[f64], dy: &mut [f64]) {
    use num_complex::Complex64 as C;
    let z = |k: usize| C::new(y[2 * k], y[2 * k + 1]);
    let i = C::i();
    let out: Vec<C> = match kind {
        ChannelKind::Wave { p, .. } => {
            let kappa = 2f64.sqrt().powi(-(*p as i32 + 1));
            let (z1, zp) = (z(0), z(1));
            vec![
                i * kappa * *p as f64 * z1.conj().powu(p - 1) * zp,
                i * kappa * z1.powu(*p),
            ]
        }
        ChannelKind::Nls { .. } => {
            let (u1, u2, u3, u4) = (z(0), z(1), z(2), z(3));
            vec![
                i * u2 * u3.conj() * u4,
                i * u1 * u3 * u4.conj(),
                i * u1.conj() * u2 * u4,
                i * u1 * u2.conj() * u3,
            ]
        }
    };
    for (k, v) in out.into_iter().enumerate() {
        dy[2 * k] = v.re;
        dy[2 * k + 1] = v.im;
    }
}

pub(crate) fn pack(actions: &[f64], angles: &[f64]) -> Vec<f64> {
    actions
        .iter()
        .zip(angles)
        .flat_map(|(a, t)| {
            let r = a.sqrt();
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

fn unpack(y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    y.chunks(2)
        .map(|c| (c[0] * c[0] + c[1] * c[1], c[1].atan2(c[0])))
        .unzip()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelOptions {
    pub ode: Dopri5,
    /// Uniform samples stored on `[0, T0]`.
    pub samples: usize,
    /// Largest accepted relative gap between the ODE and quadrature times.
    pub mismatch_tolerance: f64,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        Self {
            ode: Dopri5::default(),
            samples: 4097,
            mismatch_tolerance: 1e-8,
        }
    }
}

/// Orbit of the resonant model from `J = epsilon` to the target action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelOrbit {
    pub spec: ChannelSpec,
    pub modes: Vec<i64>,
    pub times: Vec<f64>,
    /// `actions[k][n]` is the action of `modes[k]` at `times[n]`.
    pub actions: Vec<Vec<f64>>,
    pub t0: f64,
    pub t0_quadrature: f64,
    pub bounds: TimeBounds,
    pub frozen_angles: Vec<f64>,
    /// Largest deviation of any phase from its frozen value along the samples.
    pub angle_drift: f64,
}

pub fn integrate_channel(spec: &ChannelSpec) -> Result<ChannelOrbit> {
    integrate_channel_with(spec, &ChannelOptions::default())
}

pub fn integrate_channel_with(spec: &ChannelSpec, opts: &ChannelOptions) -> Result<ChannelOrbit> {
    spec.validate()?;
    let kind = spec.kind.clone();
    let angles = spec.default_angles();
    let y0 = pack(&spec.initial_actions(), &angles);
    let high = kind.high_index();
    let target = spec.target();
    let f = |_t: f64, y: &[f64], dy: &mut [f64]| resonant_field(&kind, y, dy);
    let event = |y: &[f64]| y[2 * high].powi(2) + y[2 * high + 1].powi(2) - target;

    // Any orbit on the channel arrives well before this horizon.
    let horizon = 1e3 * diffusion_time_bounds(spec).upper.max(1.0);
    let (sol, hit) = opts.ode.solve(f, 0.0, &y0, horizon, Some(event))?;
    if !hit {
        return Err(Error::Integration(format!(
            "high action did not reach {target} before t = {horizon}"
        )));
    }
    let (t0, y_end) = sol.last();
    let y_end = y_end.to_vec();
    let t0_quadrature = diffusion_time_quadrature(spec)?;
    let scale = t0.abs().max(t0_quadrature.abs());
    let relative = if scale == 0.0 { 0.0 } else { (t0 - t0_quadrature).abs() / scale };
    if relative > opts.mismatch_tolerance {
        return Err(Error::QuadratureMismatch {
            ode: t0,
            quadrature: t0_quadrature,
            relative,
        });
    }

    let n = opts.samples.max(2);
    let times: Vec<f64> = if t0 == 0.0 {
        vec![0.0]
    } else {
        (0..n).map(|k| t0 * k as f64 / (n - 1) as f64).collect()
    };
    let mut states = opts.ode.sample(f, 0.0, &y0, &times[..times.len() - 1])?;
    states.push(y_end);

    let modes = spec.modes();
    let mut actions = vec![Vec::with_capacity(times.len()); modes.len()];
    let mut angle_drift: f64 = 0.0;
    for y in &states {
        let (a, th) = unpack(y);
        for (k, v) in a.into_iter().enumerate() {
            actions[k].push(v);
        }
        for (t, t_ref) in th.iter().zip(&angles) {
            let d = (t - t_ref + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU)
                - std::f64::consts::PI;
            angle_drift = angle_drift.max(d.abs());
        }
    }
    Ok(ChannelOrbit {
        spec: spec.clone(),
        modes,
        times,
        actions,
        t0,
        t0_quadrature,
        bounds: diffusion_time_bounds(spec),
        frozen_angles: angles,
        angle_drift,
    })
}

/// JSON summary of a channel orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "T0_quadrature")]
    pub t0_quadrature: f64,
    pub bounds: TimeBounds,
    pub modes: Vec<i64>,
    pub endpoints: Endpoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Endpoints {
    pub initial: Vec<f64>,
    #[serde(rename = "final")]
    pub final_: Vec<f64>,
}

impl ChannelOrbit {
    pub fn initial_actions(&self) -> Vec<f64> {
        self.actions.iter().map(|a| a[0]).collect()
    }

    pub fn final_actions(&self) -> Vec<f64> {
        self.actions.iter().map(|a| *a.last().expect("non-empty")).collect()
    }

    /// Linear interpolation of the actions at `t` in `[0, T0]`.
    pub fn actions_at(&self, t: f64) -> Result<Vec<f64>> {
        let tol = 1e-12 * self.t0.max(1.0);
        if !(t >= -tol && t <= self.t0 + tol) {
            return Err(Error::OutsideReference { t, end: self.t0 });
        }
        if self.times.len() == 1 {
            return Ok(self.initial_actions());
        }
        let n = self.times.len() - 1;
        let x = (t / self.t0 * n as f64).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let w = x - k as f64;
        Ok(self
            .actions
            .iter()
            .map(|a| a[k] * (1.0 - w) + a[k + 1] * w)
            .collect())
    }

    /// Partial momentum `I_1 + p I_p` (wave) or total mass (NLS) per sample.
    pub fn conserved_series(&self) -> Vec<f64> {
        (0..self.times.len())
            .map(|n| match &self.spec.kind {
                ChannelKind::Wave { p, .. } => self.actions[0][n] + *p as f64 * self.actions[1][n],
                ChannelKind::Nls { .. } => self.actions.iter().map(|a| a[n]).sum(),
            })
            .collect()
    }

    pub fn hamiltonian_series(&self) -> Vec<f64> {
        (0..self.times.len())
            .map(|n| {
                let a: Vec<f64> = self.actions.iter().map(|s| s[n]).collect();
                reduced_hamiltonian(&self.spec.kind, &a, &self.frozen_angles).unwrap_or(f64::NAN)
            })
            .collect()
    }

    /// True when the high action increases strictly between samples.
    pub fn is_monotone(&self) -> bool {
        self.actions[self.spec.kind.high_index()]
            .windows(2)
            .all(|w| w[1] > w[0])
    }

    /// The wave orbit on the opposite branch: same actions on the negated modes.
    pub fn mirrored(&self) -> Result<Self> {
        let mut out = self.clone();
        match &mut out.spec.kind {
            ChannelKind::Wave { branch, .. } => {
                *branch = match branch {
                    Branch::Plus => Branch::Minus,
                    Branch::Minus => Branch::Plus,
                };
            }
            ChannelKind::Nls { .. } => {
                return Err(Error::invalid("only wave channels come in mirrored pairs"))
            }
        }
        out.modes = out.spec.modes();
        Ok(out)
    }

    pub fn summary(&self) -> ChannelSummary {
        ChannelSummary {
            t0: self.t0,
            t0_quadrature: self.t0_quadrature,
            bounds: self.bounds,
            modes: self.modes.clone(),
            endpoints: Endpoints {
                initial: self.initial_actions(),
                final_: self.final_actions(),
            },
        }
    }

    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["time".to_string()];
        match &self.spec.kind {
            ChannelKind::Wave { .. } => h.extend(self.modes.iter().map(|j| format!("I_{j}"))),
            ChannelKind::Nls { .. } => h.extend((1..=4).map(|k| format!("I_{k}"))),
        }
        h.push(
            match self.spec.kind {
                ChannelKind::Wave { .. } => "partial_momentum",
                ChannelKind::Nls { .. } => "mass",
            }
            .into(),
        );
        h.push("hamiltonian_value".into());
        h
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.csv_header().join(","))?;
        let conserved = self.conserved_series();
        let energy = self.hamiltonian_series();
        for n in 0..self.times.len() {
            let mut row = vec![format!("{:?}", self.times[n])];
            row.extend(self.actions.iter().map(|a| format!("{:?}", a[n])));
            row.push(format!("{:?}", conserved[n]));
            row.push(format!("{:?}", energy[n]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn reduced_hamiltonian_values() {
        let wave = ChannelKind::Wave {
            p: 2,
            branch: Branch::Plus,
        };
        let g = reduced_hamiltonian(&wave, &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert!((g - 1.0 / SQRT_2).abs() < 1e-15);
        let g = reduced_hamiltonian(&wave, &[0.3, 0.2], &[0.0, FRAC_PI_2]).unwrap();
        assert!(g.abs() < 1e-16);
        let nls = ChannelKind::Nls {
            tangential: [1, -1, 2, 12],
        };
        assert_eq!(reduced_hamiltonian(&nls, &[1.0; 4], &[0.0; 4]).unwrap(), 2.0);
        assert!(reduced_hamiltonian(&nls, &[1.0, -1.0, 1.0, 1.0], &[0.0; 4]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cases = [
            (
                ChannelKind::Wave {
                    p: 4,
                    branch: Branch::Plus,
                },
                vec![0.4, 0.3],
                vec![0.3, -1.1],
            ),
            (
                ChannelKind::Nls {
                    tangential: [1, -1, 2, 12],
                },
                vec![0.2, 0.5, 0.7, 0.1],
                vec![0.1, 0.9, -0.4, 2.0],
            ),
        ];
        let h = 1e-6;
        for (kind, a, t) in cases {
            let (da, dt) = reduced_gradient(&kind, &a, &t).unwrap();
            for k in 0..a.len() {
                let (mut ap, mut am) = (a.clone(), a.clone());
                ap[k] += h;
                am[k] -= h;
                let fd = (reduced_hamiltonian(&kind, &ap, &t).unwrap()
                    - reduced_hamiltonian(&kind, &am, &t).unwrap())
                    / (2.0 * h);
                assert!((fd - da[k]).abs() < 1e-8, "{kind:?} dI_{k}");
                let (mut tp, mut tm) = (t.clone(), t.clone());
                tp[k] += h;
                tm[k] -= h;
                let fd = (reduced_hamiltonian(&kind, &a, &tp).unwrap()
                    - reduced_hamiltonian(&kind, &a, &tm).unwrap())
                    / (2.0 * h);
                assert!((fd - dt[k]).abs() < 1e-8, "{kind:?} dtheta_{k}");
            }
        }
    }

    #[test]
    fn channel_field_values() {
        let spec = ChannelSpec::wave(2, 1.0, 0.01);
        assert_eq!(channel_field(&spec, 0.5).unwrap(), 0.0);
        let v = channel_field(&spec, 0.25).unwrap();
        assert!((v - 0.5 * 0.5 / SQRT_2).abs() < 1e-15);
        assert!(channel_field(&spec, 0.6).is_err());
        let nls = ChannelSpec::nls([1, -1, 2, 12], 1.0, 0.01);
        assert_eq!(channel_field(&nls, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn resonant_field_matches_action_angle_equations() {
        for (spec, j) in [
            (ChannelSpec::wave(2, 1.0, 0.01), 0.1),
            (ChannelSpec::wave(6, 2.0, 1e-3), 0.02),
            (ChannelSpec::nls([1, -1, 2, 12], 1.0, 0.01), 0.05),
        ] {
            let actions = spec.actions_on_channel(j);
            let angles = spec.default_angles();
            let y = pack(&actions, &angles);
            let mut dy = vec![0.0; y.len()];
            resonant_field(&spec.kind, &y, &mut dy);
            let (_, dtheta) = reduced_gradient(&spec.kind, &actions, &angles).unwrap();
            // d|z|^2/dt = 2 Re(zbar zdot) = -dG/dtheta.
            for k in 0..actions.len() {
                let rate = 2.0 * (y[2 * k] * dy[2 * k] + y[2 * k + 1] * dy[2 * k + 1]);
                assert!((rate + dtheta[k]).abs() < 1e-13, "{:?} mode {k}", spec.kind);
            }
            let h = spec.kind.high_index();
            let rate = 2.0 * (y[2 * h] * dy[2 * h] + y[2 * h + 1] * dy[2 * h + 1]);
            assert!((rate - channel_field(&spec, j).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn section_rejected_when_off() {
        let mut spec = ChannelSpec::wave(2, 1.0, 0.01);
        spec.section_angle = -FRAC_PI_2;
        assert!(matches!(spec.validate(), Err(Error::SectionViolated { .. })));
        assert!(ChannelSpec::wave(2, 0.01, 0.01).validate().is_err());
        assert!(ChannelSpec::nls([1, -1, 2, 12], 0.02, 0.01).validate().is_err());
    }

    #[test]
    fn degenerate_start_at_target() {
        let orbit = integrate_channel(&ChannelSpec::wave(2, 1.0, 0.25)).unwrap();
        assert_eq!(orbit.t0, 0.0);
        assert_eq!(orbit.times, vec![0.0]);
    }

    #[test]
    fn wave_orbit_matches_closed_form() {
        let orbit = integrate_channel(&ChannelSpec::wave(2, 1.0, 0.01)).unwrap();
        let exact = 2.0 * ((SQRT_2 / 2.0).atanh() - (2.0 * 0.01f64).sqrt().atanh());
        assert!((orbit.t0 - exact).abs() < 1e-9 * exact);
        assert!((orbit.t0_quadrature - exact).abs() < 1e-12 * exact);
        assert!(orbit.bounds.contains(orbit.t0));
        assert!(orbit.is_monotone());
        assert!(orbit.angle_drift < 1e-9);
        let m = orbit.conserved_series();
        assert!(m.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!((orbit.final_actions()[1] - 0.25).abs() < 1e-12);
        for (t, _) in orbit.times.iter().zip(0..) {
            let a = orbit.actions_at(*t).unwrap();
            let (d, _) = reduced_gradient(&orbit.spec.kind, &a, &orbit.frozen_angles).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-14));
        }
        assert!(orbit.actions_at(orbit.t0 * 1.01).is_err());
    }

    #[test]
    fn nls_orbit_endpoints() {
        let eps = 0.01;
        let orbit = integrate_channel(&ChannelSpec::nls([1, -1, 2, 12], 1.0, eps)).unwrap();
        let fin = orbit.final_actions();
        let expected = [
            1.0 / 6.0 + 2.0 * eps / 3.0,
            0.5 - 4.0 * eps / 3.0,
            1.0 / 6.0 + 2.0 * eps / 3.0,
            1.0 / 6.0,
        ];
        for (a, b) in fin.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        // Closed form of the w-integral.
        let (alpha, beta) = orbit.spec.nls_shape();
        let prim = |w: f64| {
            (w * (alpha + beta).sqrt() / (alpha.sqrt() * (beta + w * w).sqrt())).atanh()
                / (alpha * (alpha + beta)).sqrt()
        };
        let exact = prim((1.0f64 / 6.0).sqrt()) - prim(eps.sqrt());
        assert!((orbit.t0_quadrature - exact).abs() < 1e-12 * exact);
        assert!(orbit.t0 <= 6.0);
        let i = &orbit.actions;
        for n in 0..orbit.times.len() {
            assert!((i[0][n] - i[2][n]).abs() < 1e-9);
            assert!((i[0][n] + i[3][n] - i[0][0] - i[3][0]).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_and_summary() {
        let orbit = integrate_channel_with(
            &ChannelSpec::wave(4, 1.0, 1e-3),
            &ChannelOptions {
                samples: 11,
                ..ChannelOptions::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        orbit.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "time,I_1,I_4,partial_momentum,hamiltonian_value"
        );
        assert_eq!(text.lines().count(), 12);
        let json = serde_json::to_value(orbit.summary()).unwrap();
        assert!(json["T0"].as_f64().unwrap() > 0.0);
        assert_eq!(json["endpoints"]["final"].as_array().unwrap().len(), 2);
        let m = orbit.mirrored().unwrap();
        assert_eq!(m.modes, vec![-1, -4]);
    }
}
