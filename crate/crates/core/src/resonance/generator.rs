use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::monomial::{enumerate_monomials, Filters, Monomial, MonomialClass, MomentumRule};
use crate::error::{Error, Result};
use crate::spectral::{FrequencyTable, ModeSet, SpectralState};

/// Largest degree accepted by [`normal_form_generator`].
pub const MAX_GENERATOR_P: u32 = 8;

/// Finite sum `sum c z^alpha zbar^beta` with `zbar` read as the conjugate of `z`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<(Monomial, Complex64)>,
}

fn power(z: Complex64, n: u32) -> Complex64 {
    z.powu(n)
}

impl Polynomial {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, z: &SpectralState) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let a: Complex64 = m.alpha.iter().map(|(&j, &n)| power(z.get(j), n)).product();
                let b: Complex64 = m
                    .beta
                    .iter()
                    .map(|(&j, &n)| power(z.get(j).conj(), n))
                    .product();
                c * a * b
            })
            .sum()
    }

    /// `zdot_j = i dP/dzbar_j` on the modes of `z`.
    pub fn hamiltonian_field(&self, z: &SpectralState) -> SpectralState {
        let mut out = SpectralState::zeros(z.j_max());
        out.frame = z.frame;
        out.time = z.time;
        for (m, c) in &self.terms {
            let a: Complex64 = m.alpha.iter().map(|(&j, &n)| power(z.get(j), n)).product();
            for (&j, &n) in &m.beta {
                if j.unsigned_abs() as usize > z.j_max() {
                    continue;
                }
                let rest: Complex64 = m
                    .beta
                    .iter()
                    .map(|(&k, &e)| power(z.get(k).conj(), if k == j { e - 1 } else { e }))
                    .product();
                let d = Complex64::i() * c * a * rest * n as f64;
                let slot = &mut out.amplitudes_mut()[(j + z.j_max() as i64) as usize];
                *slot += d;
            }
        }
        out
    }

    /// Time-`t` flow of the Hamiltonian field, classical RK4 with `steps` steps.
    pub fn flow(&self, z: &SpectralState, t: f64, steps: usize) -> SpectralState {
        let steps = steps.max(1);
        let h = t / steps as f64;
        let mut y = z.clone();
        let axpy = |y: &SpectralState, k: &SpectralState, a: f64| {
            let mut out = y.clone();
            for (o, d) in out.amplitudes_mut().iter_mut().zip(k.amplitudes()) {
                *o += d * a;
            }
            out
        };
        for _ in 0..steps {
            let k1 = self.hamiltonian_field(&y);
            let k2 = self.hamiltonian_field(&axpy(&y, &k1, h / 2.0));
            let k3 = self.hamiltonian_field(&axpy(&y, &k2, h / 2.0));
            let k4 = self.hamiltonian_field(&axpy(&y, &k3, h));
            let amps = y.amplitudes_mut();
            for i in 0..amps.len() {
                amps[i] += (k1.amplitudes()[i]
                    + k2.amplitudes()[i] * 2.0
                    + k3.amplitudes()[i] * 2.0
                    + k4.amplitudes()[i])
                    * (h / 6.0);
            }
        }
        y
    }
}

/// Generator of the one-step normal form together with the smallest divisor used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub p: u32,
    pub scale: f64,
    pub polynomial: Polynomial,
    pub min_divisor: f64,
}

impl Generator {
    /// Largest coefficient modulus.
    pub fn sup_norm(&self) -> f64 {
        self.polynomial
            .terms
            .iter()
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Degree `p + 1` part of the wave Hamiltonian restricted to at most one normal
/// factor, `scale * C / (sqrt(2)^{p+1} (p+1))` per monomial.
pub fn wave_cubic_part(
    p: u32,
    modes: &ModeSet,
    freq: &FrequencyTable,
    scale: f64,
    filters: &Filters,
) -> Result<Polynomial> {
    let norm = 2f64.sqrt().powi(p as i32 + 1) * (p + 1) as f64;
    let terms = enumerate_monomials(&MonomialClass::at_most(p + 1, 1), modes, freq, filters)?
        .into_iter()
        .map(|m| {
            let c = Complex64::new(scale * m.coefficient / norm, 0.0);
            (m, c)
        })
        .collect();
    Ok(Polynomial { terms })
}

/// Solves `{F, H2} + H^{(p+1, <=1)} = resonant part` monomial by monomial:
/// `F = -i scale C / (Omega sqrt(2)^{p+1} (p+1))`, zero on resonant monomials.
///
/// Errors if a divisor falls below `gamma / p^2`.
pub fn normal_form_generator(
    p: u32,
    modes: &ModeSet,
    freq: &FrequencyTable,
    scale: f64,
) -> Result<Generator> {
    if !freq.is_wave() {
        return Err(Error::invalid("the degree p + 1 generator is defined for the wave table"));
    }
    if p > MAX_GENERATOR_P {
        return Err(Error::invalid(format!(
            "generator construction is limited to p <= {MAX_GENERATOR_P} (got {p})"
        )));
    }
    let tolerance = freq.gamma / (p * p) as f64 * (1.0 - 1e-12);
    let h = wave_cubic_part(p, modes, freq, scale, &Filters::non_resonant(MomentumRule::Conserved))?;
    let mut min_divisor = f64::INFINITY;
    let mut terms = Vec::with_capacity(h.len());
    for (m, c) in h.terms {
        let omega = m.divisor_omega;
        if omega.abs() < tolerance {
            return Err(Error::SmallDivisor {
                value: omega.abs(),
                tolerance,
                monomial: m.to_string(),
            });
        }
        min_divisor = min_divisor.min(omega.abs());
        terms.push((m, -Complex64::i() * c / omega));
    }
    Ok(Generator {
        p,
        scale,
        polynomial: Polynomial { terms },
        min_divisor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::frequencies_wave;
    use num_complex::Complex64 as C;

    fn random_state(j_max: usize, amp: f64, seed: u64) -> SpectralState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut z = SpectralState::zeros(j_max);
        for a in z.amplitudes_mut() {
            *a = C::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp));
        }
        z
    }

    #[test]
    fn generator_excludes_resonances_and_respects_bound() {
        for p in [2u32, 4] {
            let modes = ModeSet::wave(p, Some(3 * p as usize)).unwrap();
            let freq = frequencies_wave(p, 3 * p as usize).unwrap();
            let g = normal_form_generator(p, &modes, &freq, 1.0).unwrap();
            assert!(g.polynomial.terms.iter().all(|(m, _)| !m.is_resonant()));
            let fact: f64 = (1..=p).map(f64::from).product();
            let bound = fact * (p * p) as f64 / (freq.gamma * 2f64.sqrt().powi(p as i32 + 1));
            assert!(g.sup_norm() <= bound, "p={p}: {} > {bound}", g.sup_norm());
            assert!(g.min_divisor >= freq.gamma / (p * p) as f64);
        }
        let resonant = crate::resonance::Monomial::new(
            [(1, 2)].into_iter().collect(),
            [(2, 1)].into_iter().collect(),
            &frequencies_wave(2, 6).unwrap(),
        );
        let modes = ModeSet::wave(2, Some(6)).unwrap();
        let g = normal_form_generator(2, &modes, &frequencies_wave(2, 6).unwrap(), 1.0).unwrap();
        assert!(!g.polynomial.terms.iter().any(|(m, _)| m.same_exponents(&resonant)));
    }

    #[test]
    fn homological_equation_holds_pointwise() {
        let p = 2;
        let modes = ModeSet::wave(p, Some(6)).unwrap();
        let freq = frequencies_wave(p, 6).unwrap();
        let scale = 1.7;
        let g = normal_form_generator(p, &modes, &freq, scale).unwrap();
        let h = wave_cubic_part(p, &modes, &freq, scale, &Filters::non_resonant(MomentumRule::Conserved))
            .unwrap();
        for seed in 0..5 {
            let z = random_state(6, 0.3, seed);
            let zdot = g.polynomial.hamiltonian_field(&z);
            // Derivative of H2 = sum omega |z|^2 along the generator field.
            let lie: f64 = z
                .iter()
                .zip(zdot.amplitudes())
                .map(|((j, zj), d)| 2.0 * freq.omega(j).unwrap() * (zj.conj() * d).re)
                .sum();
            let hv = h.value(&z);
            assert!(hv.im.abs() < 1e-12);
            assert!((lie + hv.re).abs() < 1e-12 * (1.0 + hv.re.abs()), "{lie} vs {}", hv.re);
            assert!(g.polynomial.value(&z).im.abs() < 1e-12);
        }
    }

    #[test]
    fn generator_refuses_large_degree() {
        let modes = ModeSet::wave(10, Some(20)).unwrap();
        let freq = frequencies_wave(10, 20).unwrap();
        assert!(normal_form_generator(10, &modes, &freq, 1.0).is_err());
    }

    #[test]
    fn flow_is_reversible() {
        let modes = ModeSet::wave(2, Some(6)).unwrap();
        let freq = frequencies_wave(2, 6).unwrap();
        let g = normal_form_generator(2, &modes, &freq, 1.0).unwrap();
        let z = random_state(6, 0.1, 3);
        let back = g.polynomial.flow(&g.polynomial.flow(&z, 1.0, 40), -1.0, 40);
        for (a, b) in z.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-9);
        }
        assert_eq!(g.polynomial.flow(&z, 0.0, 3), z);
    }
}
