//! Fourier-side representation of fields on the circle: mode sets, convolution
//! potentials, linear frequencies, states and their norms.

mod frequency;
mod state;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use frequency::{
    frequencies_nls, frequencies_wave, FormalFrequency, FrequencyModel, FrequencyTable,
};
pub(crate) use frequency::DEFAULT_TAU;
pub use state::{
    ell1_norm, from_complex_coords, mass, momentum, sobolev_norm, to_complex_coords, Frame,
    SpectralState,
};

/// Galerkin cutoff together with the tangential (excited) modes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSet {
    j_max: usize,
    tangential: Vec<i64>,
}

impl ModeSet {
    pub fn new(j_max: usize, tangential: Vec<i64>) -> Result<Self> {
        if j_max == 0 {
            return Err(Error::invalid("j_max must be positive"));
        }
        for (i, &j) in tangential.iter().enumerate() {
            if j.unsigned_abs() as usize > j_max {
                return Err(Error::invalid(format!(
                    "tangential mode {j} lies outside [-{j_max}, {j_max}]"
                )));
            }
            if tangential[..i].contains(&j) {
                return Err(Error::invalid(format!("tangential mode {j} listed twice")));
            }
        }
        Ok(Self { j_max, tangential })
    }

    /// `S = {1, -1, p, -p}` with the default cutoff `4p` unless one is given.
    pub fn wave(p: u32, j_max: Option<usize>) -> Result<Self> {
        let p = p as i64;
        let j_max = j_max.unwrap_or(4 * p as usize);
        Self::new(j_max, vec![1, -1, p, -p])
    }

    /// `S = {k1, k2, k3, k4}` with `k4 = k1 - k2 + k3 + n`.
    pub fn nls(k: [i64; 3], n: i64, j_max: Option<usize>) -> Result<Self> {
        let k4 = k[0] - k[1] + k[2] + n;
        let largest = k.iter().chain(std::iter::once(&k4)).map(|j| j.unsigned_abs()).max();
        let j_max = j_max.unwrap_or(4 * largest.unwrap_or(1) as usize);
        Self::new(j_max, vec![k[0], k[1], k[2], k4])
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn tangential(&self) -> &[i64] {
        &self.tangential
    }

    pub fn is_tangential(&self, j: i64) -> bool {
        self.tangential.contains(&j)
    }

    /// Number of Galerkin modes, `2 j_max + 1`.
    pub fn len(&self) -> usize {
        2 * self.j_max + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let m = self.j_max as i64;
        -m..=m
    }

    /// Modes in range that are not tangential, in increasing order.
    pub fn normal_modes(&self) -> impl Iterator<Item = i64> + '_ {
        self.modes().filter(move |j| !self.is_tangential(*j))
    }

    /// Same tangential set with a different cutoff.
    pub fn with_j_max(&self, j_max: usize) -> Result<Self> {
        Self::new(j_max, self.tangential.clone())
    }
}

/// How the stored coefficients act on a Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialConvention {
    /// Coefficients of `V(x) = sum V_j e^{ijx}`; mode `j != 0` is shifted by the
    /// cosine amplitude `V_j + V_{-j}`, mode 0 by `V_0`.
    #[default]
    CosineSeries,
    /// Coefficients are the diagonal multipliers themselves.
    Multiplier,
}

/// Finitely supported real coefficients `V_j` of a convolution potential.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PotentialSpectrum {
    pub coefficients: BTreeMap<i64, f64>,
    pub convention: PotentialConvention,
}

impl PotentialSpectrum {
    pub fn get(&self, j: i64) -> f64 {
        self.coefficients.get(&j).copied().unwrap_or(0.0)
    }

    /// Diagonal value added to `j^2` (wave) or used as `j^2 + V` (NLS) on mode `j`.
    pub fn multiplier(&self, j: i64) -> f64 {
        match self.convention {
            PotentialConvention::Multiplier => self.get(j),
            PotentialConvention::CosineSeries if j == 0 => self.get(0),
            PotentialConvention::CosineSeries => self.get(j) + self.get(-j),
        }
    }
}

/// Potential `1 + cos(x) + p^2 cos(p x)`, split into exponentials.
pub fn potential_wave(p: u32) -> Result<PotentialSpectrum> {
    check_wave_degree(p)?;
    let p_i = p as i64;
    let half_p2 = (p as f64).powi(2) / 2.0;
    let coefficients = BTreeMap::from([
        (0, 1.0),
        (1, 0.5),
        (-1, 0.5),
        (p_i, half_p2),
        (-p_i, half_p2),
    ]);
    Ok(PotentialSpectrum {
        coefficients,
        convention: PotentialConvention::CosineSeries,
    })
}

pub(crate) fn check_wave_degree(p: u32) -> Result<()> {
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "the wave nonlinearity degree p must be even and at least 2 (got {p})"
        )));
    }
    Ok(())
}
