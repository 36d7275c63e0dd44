use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::{check_wave_degree, ModeSet, PotentialConvention, PotentialSpectrum};
use crate::error::{Error, Result};
use crate::resonance::{certify_q, compute_gamma_sqrt2};

/// Frequency as an exact integer combination of irrational generators plus an
/// integer part. For the wave table the single generator is `sqrt(2)`; for the
/// NLS table the generators are `q1, q2, q3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FormalFrequency {
    pub irrational: [i64; 3],
    pub integer: i64,
}

impl FormalFrequency {
    pub fn integer(m: i64) -> Self {
        Self {
            irrational: [0; 3],
            integer: m,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.integer == 0 && self.irrational == [0; 3]
    }

    pub fn scaled(self, k: i64) -> Self {
        Self {
            irrational: self.irrational.map(|a| a * k),
            integer: self.integer * k,
        }
    }
}

impl std::ops::Add for FormalFrequency {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let mut irrational = self.irrational;
        for (a, b) in irrational.iter_mut().zip(rhs.irrational) {
            *a += b;
        }
        Self {
            irrational,
            integer: self.integer + rhs.integer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "snake_case")]
pub enum FrequencyModel {
    Wave { p: u32 },
    Nls { n: i64, k: [i64; 4], q: [f64; 3] },
}

/// Linear frequencies on `[-j_max, j_max]` with the diophantine data that
/// controls their small divisors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    model: FrequencyModel,
    j_max: usize,
    omega: Vec<f64>,
    pub gamma: f64,
    pub tau: f64,
}

impl FrequencyTable {
    fn build(model: FrequencyModel, j_max: usize, gamma: f64, tau: f64) -> Self {
        let m = j_max as i64;
        let mut table = Self {
            model,
            j_max,
            omega: Vec::with_capacity(2 * j_max + 1),
            gamma,
            tau,
        };
        table.omega = (-m..=m).map(|j| table.evaluate(table.formal(j))).collect();
        table
    }

    pub fn model(&self) -> &FrequencyModel {
        &self.model
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn omega(&self, j: i64) -> Result<f64> {
        if j.unsigned_abs() as usize > self.j_max {
            return Err(Error::MissingMode(j));
        }
        Ok(self.omega[(j + self.j_max as i64) as usize])
    }

    /// Dense frequencies indexed by `j + j_max`.
    pub fn dense(&self) -> &[f64] {
        &self.omega
    }

    /// Exact decomposition of `omega(j)`; defined for every integer `j`.
    pub fn formal(&self, j: i64) -> FormalFrequency {
        match &self.model {
            FrequencyModel::Wave { p } => {
                let a = j.abs();
                if a == 1 || a == *p as i64 {
                    FormalFrequency {
                        irrational: [a, 0, 0],
                        integer: 0,
                    }
                } else if j == 0 {
                    FormalFrequency::integer(1)
                } else {
                    FormalFrequency::integer(a)
                }
            }
            FrequencyModel::Nls { k, .. } => match k.iter().position(|&kk| kk == j) {
                Some(i @ 0..=2) => {
                    let mut irrational = [0; 3];
                    irrational[i] = 1;
                    FormalFrequency {
                        irrational,
                        integer: 0,
                    }
                }
                Some(_) => FormalFrequency {
                    irrational: [1, -1, 1],
                    integer: 0,
                },
                None => FormalFrequency::integer(j * j),
            },
        }
    }

    /// Numerical value of a formal combination in this table's generators.
    pub fn evaluate(&self, f: FormalFrequency) -> f64 {
        let generators = match &self.model {
            FrequencyModel::Wave { .. } => [SQRT_2, 0.0, 0.0],
            FrequencyModel::Nls { q, .. } => *q,
        };
        f.irrational
            .iter()
            .zip(generators)
            .map(|(&a, g)| a as f64 * g)
            .sum::<f64>()
            + f.integer as f64
    }

    pub fn is_wave(&self) -> bool {
        matches!(self.model, FrequencyModel::Wave { .. })
    }

    pub fn tangential(&self) -> Vec<i64> {
        match &self.model {
            FrequencyModel::Wave { p } => {
                let p = *p as i64;
                vec![1, -1, p, -p]
            }
            FrequencyModel::Nls { k, .. } => k.to_vec(),
        }
    }

    /// Same model evaluated on a different cutoff.
    pub fn with_j_max(&self, j_max: usize) -> Self {
        Self::build(self.model.clone(), j_max, self.gamma, self.tau)
    }
}

/// Wave frequencies `omega(0) = 1`, `sqrt(2)|j|` on `{±1, ±p}`, `|j|` elsewhere.
pub fn frequencies_wave(p: u32, j_max: usize) -> Result<FrequencyTable> {
    check_wave_degree(p)?;
    if (p as usize) > j_max {
        return Err(Error::invalid(format!("j_max = {j_max} does not cover mode {p}")));
    }
    // Divisors on A_{p+1,<=1} have sqrt(2)-coefficient at most p^2.
    let gamma = compute_gamma_sqrt2((p * p) as u64).gamma;
    Ok(FrequencyTable::build(FrequencyModel::Wave { p }, j_max, gamma, 0.0))
}

/// NLS frequencies `q_i` on `k_1..k_3`, `q1 - q2 + q3` on `k_4` and `j^2`
/// elsewhere, with the potential that produces them.
///
/// The tangential list of `modes` must be `[k1, k2, k3, k4]` with `k1, k3 > 0`,
/// `k2 < 0` and `k4 - k1 + k2 - k3 = N >= 1`.
pub fn frequencies_nls(
    modes: &ModeSet,
    q: [f64; 3],
) -> Result<(FrequencyTable, PotentialSpectrum)> {
    let k: [i64; 4] = modes
        .tangential()
        .try_into()
        .map_err(|_| Error::invalid("NLS tangential set must have exactly four modes"))?;
    if k[0] <= 0 || k[2] <= 0 || k[1] >= 0 {
        return Err(Error::invalid(format!(
            "NLS tangential modes need k1, k3 > 0 and k2 < 0 (got {k:?})"
        )));
    }
    let n = k[3] - k[0] + k[1] - k[2];
    if n < 1 {
        return Err(Error::invalid(format!(
            "k4 = k1 - k2 + k3 + N requires N >= 1 (got N = {n})"
        )));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("q must be finite"));
    }
    let omega_k4 = q[0] - q[1] + q[2];
    if omega_k4 <= 0.0 {
        return Err(Error::invalid(format!(
            "q1 - q2 + q3 must be positive (got {omega_k4})"
        )));
    }
    let cert = certify_q(q, DEFAULT_TAU);
    let table = FrequencyTable::build(
        FrequencyModel::Nls { n, k, q },
        modes.j_max(),
        cert.gamma,
        DEFAULT_TAU,
    );
    let coefficients: BTreeMap<i64, f64> = k
        .iter()
        .zip([q[0], q[1], q[2], omega_k4])
        .map(|(&kk, w)| (kk, w - (kk * kk) as f64))
        .collect();
    let potential = PotentialSpectrum {
        coefficients,
        convention: PotentialConvention::Multiplier,
    };
    Ok((table, potential))
}

/// Exponent used when certifying an NLS frequency vector.
pub(crate) const DEFAULT_TAU: f64 = 2.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::potential_wave;

    #[test]
    fn wave_table_values() {
        let f = frequencies_wave(4, 16).unwrap();
        assert_eq!(f.omega(0).unwrap(), 1.0);
        assert!((f.omega(4).unwrap() - 5.656_854_249_492_381).abs() < 1e-15);
        assert_eq!(f.omega(-3).unwrap(), 3.0);
        assert!(matches!(f.omega(17), Err(Error::MissingMode(17))));
        assert!((f.gamma - 0.343_145_750_507_619_8).abs() < 1e-12);
        assert_eq!(f.tau, 0.0);
    }

    #[test]
    fn wave_table_matches_potential() {
        for p in [2u32, 4, 6, 8] {
            let f = frequencies_wave(p, 4 * p as usize).unwrap();
            let v = potential_wave(p).unwrap();
            for j in -(4 * p as i64)..=(4 * p as i64) {
                let from_potential = ((j * j) as f64 + v.multiplier(j)).sqrt();
                let w = f.omega(j).unwrap();
                assert!((w - from_potential).abs() <= 1e-14 * w, "p={p} j={j}");
                assert_eq!(w, f.omega(-j).unwrap());
                if f.tangential().contains(&j) {
                    assert_eq!(w / j.abs() as f64, SQRT_2);
                } else if j != 0 {
                    assert_eq!(w.fract(), 0.0);
                }
            }
        }
    }

    #[test]
    fn nls_table_values() {
        let modes = ModeSet::nls([1, -1, 2], 8, None).unwrap();
        let (f, v) = frequencies_nls(&modes, [1.2, 1.5, 1.9]).unwrap();
        assert_eq!(f.omega(-1).unwrap(), 1.5);
        assert_eq!(f.omega(3).unwrap(), 9.0);
        assert!((f.omega(12).unwrap() - 1.6).abs() < 1e-15);
        assert!((v.multiplier(12) - (1.6 - 144.0)).abs() < 1e-12);
        assert_eq!(v.multiplier(1), 1.2 - 1.0);

        let (f1, _) = frequencies_nls(&modes, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(f1.omega(12).unwrap(), 1.0);
        assert_eq!(f1.gamma, 0.0);
    }

    #[test]
    fn nls_rejects_bad_tangential_sets() {
        let bad_sign = ModeSet::new(64, vec![1, 3, 2, 10]).unwrap();
        assert!(frequencies_nls(&bad_sign, [1.1, 1.2, 1.3]).is_err());
        let bad_shift = ModeSet::new(64, vec![1, -1, 2, 4]).unwrap();
        assert!(frequencies_nls(&bad_shift, [1.1, 1.2, 1.3]).is_err());
        let three = ModeSet::new(64, vec![1, -1, 2]).unwrap();
        assert!(frequencies_nls(&three, [1.1, 1.2, 1.3]).is_err());
    }
}
