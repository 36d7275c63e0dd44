use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FrequencyTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lab,
    Rotating,
}

impl Frame {
    pub fn name(self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::Rotating => "rotating",
        }
    }
}

/// Dense Fourier amplitudes on `[-j_max, j_max]`, stored at index `j + j_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    j_max: usize,
    amplitudes: Vec<Complex64>,
    pub frame: Frame,
    pub time: f64,
}

impl SpectralState {
    pub fn zeros(j_max: usize) -> Self {
        Self {
            j_max,
            amplitudes: vec![Complex64::new(0.0, 0.0); 2 * j_max + 1],
            frame: Frame::Lab,
            time: 0.0,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len().is_multiple_of(2) {
            return Err(Error::invalid("amplitude vector must have odd length 2 j_max + 1"));
        }
        Ok(Self {
            j_max: amplitudes.len() / 2,
            amplitudes,
            frame: Frame::Lab,
            time: 0.0,
        })
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    fn index(&self, j: i64) -> Option<usize> {
        (j.unsigned_abs() as usize <= self.j_max).then(|| (j + self.j_max as i64) as usize)
    }

    /// Amplitude of mode `j`; zero outside the support.
    pub fn get(&self, j: i64) -> Complex64 {
        self.index(j)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn set(&mut self, j: i64, value: Complex64) -> Result<()> {
        let i = self.index(j).ok_or(Error::MissingMode(j))?;
        self.amplitudes[i] = value;
        Ok(())
    }

    /// `(j, z_j)` pairs in increasing `j`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m = self.j_max as i64;
        (-m..=m).zip(self.amplitudes.iter().copied())
    }

    /// Copy onto another cutoff, dropping or zero-filling modes.
    pub fn resized(&self, j_max: usize) -> Self {
        let mut out = Self::zeros(j_max);
        for (j, z) in self.iter() {
            if let Some(i) = out.index(j) {
                out.amplitudes[i] = z;
            }
        }
        out.frame = self.frame;
        out.time = self.time;
        out
    }

    /// True when the coefficients describe a real field, `z_{-j} = conj(z_j)`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        self.iter()
            .all(|(j, z)| (z - self.get(-j).conj()).norm() <= tol)
    }
}

fn check_support(freq: &FrequencyTable, j_max: usize) -> Result<()> {
    if j_max > freq.j_max() {
        return Err(Error::MissingMode(freq.j_max() as i64 + 1));
    }
    Ok(())
}

/// `z_j = (omega_j^{1/2} u_j - i omega_j^{-1/2} v_j) / sqrt(2)`.
pub fn to_complex_coords(
    u: &SpectralState,
    v: &SpectralState,
    freq: &FrequencyTable,
) -> Result<SpectralState> {
    let j_max = u.j_max().max(v.j_max());
    check_support(freq, j_max)?;
    let mut z = SpectralState::zeros(j_max);
    z.time = u.time;
    z.frame = u.frame;
    for (j, slot) in (-(j_max as i64)..).zip(z.amplitudes.iter_mut()) {
        let w = freq.omega(j)?;
        if w <= 0.0 {
            return Err(Error::invalid(format!("omega({j}) = {w} is not positive")));
        }
        let r = w.sqrt();
        *slot = (u.get(j) * r - Complex64::i() * v.get(j) / r) * FRAC_1_SQRT_2;
    }
    Ok(z)
}

/// Inverse of [`to_complex_coords`] on real fields.
pub fn from_complex_coords(
    z: &SpectralState,
    freq: &FrequencyTable,
) -> Result<(SpectralState, SpectralState)> {
    check_support(freq, z.j_max())?;
    let mut u = SpectralState::zeros(z.j_max());
    let mut v = SpectralState::zeros(z.j_max());
    for (j, zj) in z.iter() {
        let r = freq.omega(j)?.sqrt();
        let mirror = z.get(-j).conj();
        u.set(j, (zj + mirror) * FRAC_1_SQRT_2 / r)?;
        v.set(j, Complex64::i() * (zj - mirror) * FRAC_1_SQRT_2 * r)?;
    }
    u.time = z.time;
    v.time = z.time;
    Ok((u, v))
}

fn bracket(j: i64) -> f64 {
    j.unsigned_abs().max(1) as f64
}

pub fn sobolev_norm(state: &SpectralState, s: f64) -> f64 {
    state
        .iter()
        .map(|(j, z)| z.norm_sqr() * bracket(j).powf(2.0 * s))
        .sum::<f64>()
        .sqrt()
}

pub fn ell1_norm(state: &SpectralState) -> f64 {
    state.amplitudes.iter().map(|z| z.norm()).sum()
}

/// Real momentum `sum j |z_j|^2`.
pub fn momentum(state: &SpectralState) -> f64 {
    state.iter().map(|(j, z)| j as f64 * z.norm_sqr()).sum()
}

pub fn mass(state: &SpectralState) -> f64 {
    state.amplitudes.iter().map(|z| z.norm_sqr()).sum()
}
