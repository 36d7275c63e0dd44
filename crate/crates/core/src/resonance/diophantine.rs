use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `|l|_1` checked by [`certify_q`].
pub const LATTICE_RADIUS: i64 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Minimiser of `n |sqrt(2) n + m|`.
    SqrtTwo { n: i64, m: i64 },
    /// Minimiser of `|q.l + k| <l>^tau`.
    Lattice { ell: [i64; 3], k: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiophantineCertificate {
    pub gamma: f64,
    pub tau: f64,
    pub search_bound: i64,
    pub witness: Witness,
}

/// `gamma = min_{1 <= n <= n_bound} n |sqrt(2) n + m|` over the nearest integer `m`.
pub fn compute_gamma_sqrt2(n_bound: u64) -> DiophantineCertificate {
    let n_bound = n_bound.max(1) as i64;
    let (gamma, n, m) = (1..=n_bound)
        .map(|n| {
            let x = SQRT_2 * n as f64;
            let m = -x.round() as i64;
            (n as f64 * (x + m as f64).abs(), n, m)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty range");
    DiophantineCertificate {
        gamma,
        tau: 1.0,
        search_bound: n_bound,
        witness: Witness::SqrtTwo { n, m },
    }
}

/// `<l> = max(1, |l|_1)`.
pub fn bracket(ell: &[i64; 3]) -> f64 {
    ell.iter().map(|l| l.abs()).sum::<i64>().max(1) as f64
}

fn lattice() -> Vec<[i64; 3]> {
    let r = LATTICE_RADIUS;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let l = [a, b, c];
                if l != [0, 0, 0] && a.abs() + b.abs() + c.abs() <= r {
                    out.push(l);
                }
            }
        }
    }
    out
}

/// Exact certificate `min |q.l + k| <l>^tau` over `0 < |l|_1 <= 9` and every
/// integer `|k| <= ceil(|q.l|) + 1`.
pub fn certify_q(q: [f64; 3], tau: f64) -> DiophantineCertificate {
    let mut best = (f64::INFINITY, [0; 3], 0);
    for ell in lattice() {
        let dot: f64 = q.iter().zip(ell).map(|(qi, l)| qi * l as f64).sum();
        let weight = bracket(&ell).powf(tau);
        let reach = dot.abs().ceil() as i64 + 1;
        for k in -reach..=reach {
            let v = (dot + k as f64).abs() * weight;
            if v < best.0 {
                best = (v, ell, k);
            }
        }
    }
    DiophantineCertificate {
        gamma: best.0,
        tau,
        search_bound: LATTICE_RADIUS,
        witness: Witness::Lattice {
            ell: best.1,
            k: best.2,
        },
    }
}

/// Rejection-samples `q` uniformly in `[1, 2]^3` until its certificate reaches `gamma`.
pub fn find_q_vector(
    gamma: f64,
    tau: f64,
    trials: usize,
    seed: u64,
) -> Result<([f64; 3], DiophantineCertificate)> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1) (got {gamma})")));
    }
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be nonnegative (got {tau})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let q = [
            rng.random_range(1.0..=2.0),
            rng.random_range(1.0..=2.0),
            rng.random_range(1.0..=2.0),
        ];
        let cert = certify_q(q, tau);
        if cert.gamma >= gamma {
            return Ok((q, cert));
        }
    }
    Err(Error::NoDiophantineVector { trials, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_constants() {
        let one = compute_gamma_sqrt2(1);
        assert!((one.gamma - (SQRT_2 - 1.0)).abs() < 1e-15);
        assert_eq!(one.witness, Witness::SqrtTwo { n: 1, m: -1 });

        let c = compute_gamma_sqrt2(100);
        assert!((c.gamma - 2.0 * (3.0 - 2.0 * SQRT_2)).abs() < 1e-14);
        assert_eq!(c.witness, Witness::SqrtTwo { n: 2, m: -3 });
    }

    #[test]
    fn sqrt2_gamma_is_nonincreasing_and_bounded() {
        let mut last = f64::INFINITY;
        for bound in [1, 2, 5, 12, 29, 70, 169, 408, 985, 10_000] {
            let g = compute_gamma_sqrt2(bound).gamma;
            assert!(g <= last);
            assert!(g > 0.34);
            last = g;
        }
    }

    #[test]
    fn rational_q_fails() {
        let cert = certify_q([1.0, 1.0, 1.0], 2.0);
        assert_eq!(cert.gamma, 0.0);
        assert!(find_q_vector(0.0, 2.0, 10, 1).is_err());
    }

    #[test]
    fn found_vector_satisfies_bound_independently() {
        let (q, cert) = find_q_vector(1e-3, 2.0, 1000, 7).unwrap();
        assert!(cert.gamma >= 1e-3);
        assert!(q.iter().all(|x| (1.0..=2.0).contains(x)));
        // Brute force with a different loop nest and a wider k range.
        let mut worst = f64::INFINITY;
        for c in -9i64..=9 {
            for b in -9i64..=9 {
                for a in -9i64..=9 {
                    let norm = a.abs() + b.abs() + c.abs();
                    if norm == 0 || norm > 9 {
                        continue;
                    }
                    let dot = q[0] * a as f64 + q[1] * b as f64 + q[2] * c as f64;
                    for k in -60i64..=60 {
                        let v = (dot + k as f64).abs() * (norm as f64).powi(2);
                        worst = worst.min(v);
                    }
                }
            }
        }
        assert_eq!(worst, cert.gamma);
        assert_eq!(find_q_vector(1e-3, 2.0, 1000, 7).unwrap().0, q);
    }

    #[test]
    fn impossible_gamma_is_reported() {
        assert!(matches!(
            find_q_vector(0.9, 0.0, 50, 3),
            Err(Error::NoDiophantineVector { trials: 50, .. })
        ));
    }
}
