use std::f64::consts::LN_2;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::from(1u32), |acc, k| acc * k)
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return big_to_f64(x).ln();
    }
    let shift = bits - 64;
    big_to_f64(&(x >> shift)).ln() + shift as f64 * LN_2
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_string().parse().unwrap_or(f64::INFINITY)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Outcome of one inequality between log-space quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogCheck {
    pub name: String,
    /// `ln(rhs) - ln(lhs)` for `lhs <= rhs`; nonnegative when the check holds.
    pub margin: f64,
    pub holds: bool,
}

impl LogCheck {
    fn le(name: &str, ln_lhs: f64, ln_rhs: f64, tol: f64) -> Self {
        let margin = ln_rhs - ln_lhs;
        Self {
            name: name.to_string(),
            margin,
            holds: margin >= -tol,
        }
    }
}

/// Threshold constants of the growth construction for one `p`, with large
/// quantities stored as natural logarithms and integer ones exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConstants {
    pub p: u32,
    pub gamma: f64,
    /// `p p! 4^{p+1}`, decimal.
    pub a_exact: String,
    pub a: f64,
    /// `1 / (p/4 - 2)`; undefined at `p = 8`.
    pub b: Option<f64>,
    pub b_positive: bool,
    /// `ln(p^a gamma^{-b})`.
    pub log_mu0: Option<f64>,
    pub log_c0: f64,
    /// `2^{p-1} p^3 ((p+1)!)^2`, decimal.
    pub c1_exact: String,
    pub log_c1: f64,
    pub log_c1_tilde: f64,
    pub log_xi: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub log_r: f64,
    pub log_c_plus: f64,
    pub log_c_minus: f64,
    /// `ln F_gamma(p)`; undefined at `p = 8`.
    pub log_f_gamma: Option<f64>,
    pub checks: Vec<LogCheck>,
}

impl ThresholdConstants {
    pub fn log10_mu0(&self) -> Option<f64> {
        self.log_mu0.map(|v| v / std::f64::consts::LN_10)
    }

    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// `ln F_gamma(p) = -(7/8) p p! 4^p ln p + ln(gamma) / (p/2 - 4)`.
pub fn log_f_gamma(p: u32, gamma: f64) -> Option<f64> {
    if p == 8 {
        return None;
    }
    let pf = p as f64;
    let lead = 7.0 / 8.0 * pf * ln_factorial(p).exp() * 4f64.powi(p as i32);
    Some(-lead * pf.ln() + gamma.ln() / (pf / 2.0 - 4.0))
}

/// Evaluates the threshold constants for even `p >= 2` and `gamma` in `(0, 1]`.
/// `c_minus` defaults to `c_+ / r`.
pub fn evaluate_constants(p: u32, gamma: f64, c_minus: Option<f64>) -> Result<ThresholdConstants> {
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::invalid(format!("p must be even and at least 2 (got {p})")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1] (got {gamma})")));
    }
    if let Some(c) = c_minus {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("c_minus must be positive (got {c})")));
        }
    }
    let pf = p as f64;
    let ln_p = pf.ln();
    let fact_p = factorial(p);
    let fact_p1 = factorial(p + 1);

    let a_big = BigUint::from(p) * &fact_p * BigUint::from(4u32).pow(p + 1);
    let a = big_to_f64(&a_big);
    let c1_big = BigUint::from(2u32).pow(p - 1) * BigUint::from(p).pow(3) * fact_p1.pow(2);

    let b = (p != 8).then(|| 1.0 / (pf / 4.0 - 2.0));
    let log_mu0 = b.map(|b| a * ln_p - b * gamma.ln());

    let ln_fp = ln_big(&fact_p);
    let ln_fp1 = ln_big(&fact_p1);
    let half_ln2 = LN_2 / 2.0;

    let log_r = 2.0 / (pf - 1.0) * LN_2;
    let log_c_plus_default = a / 4.0 * ln_p;
    let (log_c_minus, log_c_plus) = match c_minus {
        Some(c) => (c.ln(), c.ln() + log_r),
        None => (log_c_plus_default - log_r, log_c_plus_default),
    };

    let log_c0 = (pf - 1.0) * half_ln2 + 2.0 * ln_p + ln_fp1;
    let log_c1_tilde = (3.0 * pf - 1.0).ln()
        + 5.0 * ln_p
        + (1.5 * pf - 2.5) * LN_2
        + 3.0 * ln_fp1;
    let log_xi = (3.0 * pf - 1.0) * half_ln2
        + 2.0 * ln_p
        + ln_fp
        + (pf - 1.0) / 2.0 * log_c_minus;
    let sigma1 = 0.75 * pf + 2.0;

    let upper = (2.0 - 1.0 / pf) * LN_2 + 2.0 / pf * ln_fp + (a / 2.0 - 14.0) * ln_p;
    let tol = 1e-12 * log_c_plus.abs().max(1.0);
    let r_defect = ((pf - 1.0) / 2.0 * log_r - LN_2).abs();
    let checks = vec![
        LogCheck::le("c_plus <= 2^{2-1/p} (p!)^{2/p} p^{a/2-14}", log_c_plus, upper, tol),
        LogCheck::le("c_minus >= 1", 0.0, log_c_minus, tol),
        LogCheck {
            name: "r^{(p-1)/2} = 2".into(),
            margin: -r_defect,
            holds: r_defect <= 1e-12,
        },
    ];

    Ok(ThresholdConstants {
        p,
        gamma,
        a_exact: a_big.to_string(),
        a,
        b,
        b_positive: b.is_some_and(|b| b > 0.0),
        log_mu0,
        log_c0,
        c1_exact: c1_big.to_string(),
        log_c1: ln_big(&c1_big),
        log_c1_tilde,
        log_xi,
        sigma1,
        sigma2: sigma1 - 0.5,
        log_r,
        log_c_plus,
        log_c_minus,
        log_f_gamma: log_f_gamma(p, gamma),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_integers_at_p4() {
        let k = evaluate_constants(4, 0.5, None).unwrap();
        assert_eq!(k.a_exact, "98304");
        assert_eq!(k.c1_exact, "7372800");
        assert!((k.log_c1 - 7372800f64.ln()).abs() < 1e-12);
        assert_eq!(k.sigma1, 5.0);
        assert_eq!(k.sigma2, 4.5);
        assert_eq!(k.b, Some(-1.0));
        assert!(!k.b_positive);
    }

    #[test]
    fn small_closed_forms() {
        let k = evaluate_constants(2, 0.3, Some(1.5)).unwrap();
        // C0 = sqrt2 * 4 * 6, Xi = sqrt2^5 * 4 * 2 * sqrt(1.5)
        assert!((k.log_c0.exp() - 2f64.sqrt() * 24.0).abs() < 1e-10);
        assert!((k.log_xi.exp() - 2f64.sqrt().powi(5) * 8.0 * 1.5f64.sqrt()).abs() < 1e-10);
        // C1~ = 5 * 32 * 2^{1/2} * 216
        assert!((k.log_c1_tilde.exp() - 5.0 * 32.0 * 2f64.sqrt() * 216.0).abs() < 1e-8);
        assert!((k.log_c_plus - (1.5f64 * 4.0).ln()).abs() < 1e-14);
        assert!(k.checks.iter().any(|c| c.name.starts_with("r^") && c.holds));
    }

    #[test]
    fn undefined_at_p8() {
        let k = evaluate_constants(8, 0.5, None).unwrap();
        assert!(k.b.is_none() && k.log_mu0.is_none() && k.log_f_gamma.is_none());
    }

    #[test]
    fn large_p_checks_hold() {
        for p in (12..=40).step_by(2) {
            let k = evaluate_constants(p, 0.1, None).unwrap();
            assert!(k.all_checks_hold(), "p = {p}: {:?}", k.checks);
            assert!(k.b_positive);
        }
    }

    #[test]
    fn rejects_odd_p() {
        assert!(evaluate_constants(3, 0.5, None).is_err());
        assert!(evaluate_constants(4, 0.0, None).is_err());
    }
}
