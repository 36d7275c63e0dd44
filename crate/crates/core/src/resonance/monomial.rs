use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{FormalFrequency, FrequencyTable, ModeSet};

/// Hard cap on the number of candidate multi-indices scanned by one enumeration.
pub const CANDIDATE_LIMIT: u128 = 10_000_000;

/// `z^alpha zbar^beta` with its bookkeeping data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub alpha: BTreeMap<i64, u32>,
    pub beta: BTreeMap<i64, u32>,
    pub degree: u32,
    pub momentum_pi: i64,
    pub divisor: FormalFrequency,
    pub divisor_omega: f64,
    pub coefficient: f64,
}

impl Monomial {
    /// Builds the monomial and fills in degree, momentum, divisor and the
    /// Hamiltonian coefficient for the given table.
    pub fn new(
        alpha: BTreeMap<i64, u32>,
        beta: BTreeMap<i64, u32>,
        freq: &FrequencyTable,
    ) -> Self {
        let alpha: BTreeMap<_, _> = alpha.into_iter().filter(|(_, n)| *n > 0).collect();
        let beta: BTreeMap<_, _> = beta.into_iter().filter(|(_, n)| *n > 0).collect();
        let degree = alpha.values().chain(beta.values()).sum();
        let momentum_pi = alpha.iter().map(|(j, n)| j * *n as i64).sum::<i64>()
            - beta.iter().map(|(j, n)| j * *n as i64).sum::<i64>();
        let divisor = alpha
            .iter()
            .map(|(&j, &n)| freq.formal(j).scaled(n as i64))
            .chain(beta.iter().map(|(&j, &n)| freq.formal(j).scaled(-(n as i64))))
            .fold(FormalFrequency::default(), |acc, f| acc + f);
        let mut m = Self {
            alpha,
            beta,
            degree,
            momentum_pi,
            divisor,
            divisor_omega: freq.evaluate(divisor),
            coefficient: 0.0,
        };
        m.coefficient = hamiltonian_coefficient(&m, freq);
        m
    }

    pub fn is_resonant(&self) -> bool {
        self.divisor.is_zero()
    }

    /// Swaps `alpha` and `beta`.
    pub fn conjugate(&self, freq: &FrequencyTable) -> Self {
        Self::new(self.beta.clone(), self.alpha.clone(), freq)
    }

    /// Number of factors on modes outside the tangential set.
    pub fn normal_count(&self, modes: &ModeSet) -> u32 {
        self.alpha
            .iter()
            .chain(&self.beta)
            .filter(|(j, _)| !modes.is_tangential(**j))
            .map(|(_, n)| n)
            .sum()
    }

    /// Recomputes the derived fields and compares them with the stored ones.
    pub fn is_consistent(&self, freq: &FrequencyTable) -> bool {
        let fresh = Self::new(self.alpha.clone(), self.beta.clone(), freq);
        fresh.degree == self.degree
            && fresh.momentum_pi == self.momentum_pi
            && fresh.divisor == self.divisor
            && fresh.divisor_omega == self.divisor_omega
    }

    /// Same exponents, i.e. same monomial regardless of the cached data.
    pub fn same_exponents(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.beta == other.beta
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, map) in [("z", &self.alpha), ("zbar", &self.beta)] {
            for (j, n) in map {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "{name}_{j}")?;
                if *n > 1 {
                    write!(f, "^{n}")?;
                }
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn multi_factorial(m: &BTreeMap<i64, u32>) -> f64 {
    m.values().map(|&n| factorial(n)).product()
}

/// Coefficient of the monomial in the quartic NLS term, or the expansion
/// coefficient `deg! / (alpha! beta!) prod omega^{-(alpha+beta)/2}` for the wave.
fn hamiltonian_coefficient(m: &Monomial, freq: &FrequencyTable) -> f64 {
    if freq.is_wave() {
        wave_coefficient(m, freq)
    } else {
        let a: u32 = m.alpha.values().sum();
        let b: u32 = m.beta.values().sum();
        if a == 2 && b == 2 {
            1.0 / (multi_factorial(&m.alpha) * multi_factorial(&m.beta))
        } else {
            0.0
        }
    }
}

fn wave_coefficient(m: &Monomial, freq: &FrequencyTable) -> f64 {
    let weights: f64 = m
        .alpha
        .iter()
        .chain(&m.beta)
        .map(|(&j, &n)| freq.evaluate(freq.formal(j)).powf(-(n as f64) / 2.0))
        .product();
    factorial(m.degree) / (multi_factorial(&m.alpha) * multi_factorial(&m.beta)) * weights
}

/// `C_{alpha,beta}` for a monomial of degree `p + 1`.
pub fn monomial_coefficient(m: &Monomial, p: u32, freq: &FrequencyTable) -> Result<f64> {
    if m.degree != p + 1 {
        return Err(Error::invalid(format!(
            "monomial {m} has degree {} but the coefficient formula needs degree {}",
            m.degree,
            p + 1
        )));
    }
    Ok(wave_coefficient(m, freq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    ExactlyK,
    AtMostK,
    AtLeastK,
}

/// Monomials of degree `degree` with a prescribed number of normal factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialClass {
    pub degree: u32,
    pub normal_count: u32,
    pub selector: Selector,
}

impl MonomialClass {
    pub fn new(degree: u32, normal_count: u32, selector: Selector) -> Result<Self> {
        if normal_count > degree {
            return Err(Error::invalid(format!(
                "normal count {normal_count} exceeds degree {degree}"
            )));
        }
        Ok(Self {
            degree,
            normal_count,
            selector,
        })
    }

    pub fn exactly(degree: u32, k: u32) -> Self {
        Self::new(degree, k, Selector::ExactlyK).expect("k <= degree")
    }

    pub fn at_most(degree: u32, k: u32) -> Self {
        Self::new(degree, k, Selector::AtMostK).expect("k <= degree")
    }

    fn admits(&self, normal: u32) -> bool {
        match self.selector {
            Selector::ExactlyK => normal == self.normal_count,
            Selector::AtMostK => normal <= self.normal_count,
            Selector::AtLeastK => normal >= self.normal_count,
        }
    }

    fn max_normal(&self) -> u32 {
        match self.selector {
            Selector::AtLeastK => self.degree,
            _ => self.normal_count,
        }
    }
}

impl fmt::Display for MonomialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.selector {
            Selector::ExactlyK => "==",
            Selector::AtMostK => "<=",
            Selector::AtLeastK => ">=",
        };
        write!(f, "degree {}, normal {rel} {}", self.degree, self.normal_count)
    }
}

/// Which momenta a monomial may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumRule {
    /// `pi(alpha, beta) = 0`.
    #[default]
    Conserved,
    /// `pi(alpha, beta) = +-n`, the selection rule of a `cos(n x)` coupling.
    ShiftedBy(i64),
    Unrestricted,
}

impl MomentumRule {
    pub fn admits(self, pi: i64) -> bool {
        match self {
            MomentumRule::Conserved => pi == 0,
            MomentumRule::ShiftedBy(n) => pi.abs() == n.abs(),
            MomentumRule::Unrestricted => true,
        }
    }

    /// Rule satisfied by the monomials of the model's Hamiltonian.
    pub fn for_table(freq: &FrequencyTable) -> Self {
        match freq.model() {
            crate::spectral::FrequencyModel::Wave { .. } => MomentumRule::Conserved,
            crate::spectral::FrequencyModel::Nls { n, .. } => MomentumRule::ShiftedBy(*n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceFilter {
    #[default]
    Any,
    Resonant,
    NonResonant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Filters {
    pub momentum: MomentumRule,
    pub resonance: ResonanceFilter,
    /// Divisors below this value are treated as numerically resonant when the
    /// exact bookkeeping says otherwise (reported as an error by callers that
    /// divide by them).
    pub divisor_tolerance: f64,
}

impl Default for Filters {
    fn default() -> Self {
        Self {
            momentum: MomentumRule::Conserved,
            resonance: ResonanceFilter::Any,
            divisor_tolerance: 1e-12,
        }
    }
}

impl Filters {
    pub fn resonant(momentum: MomentumRule) -> Self {
        Self {
            momentum,
            resonance: ResonanceFilter::Resonant,
            ..Self::default()
        }
    }

    pub fn non_resonant(momentum: MomentumRule) -> Self {
        Self {
            momentum,
            resonance: ResonanceFilter::NonResonant,
            ..Self::default()
        }
    }
}

fn multichoose(n: u128, k: u128) -> u128 {
    // C(n + k - 1, k), saturating.
    if k == 0 {
        return 1;
    }
    if n == 0 {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n + i) / (i + 1);
    }
    acc
}

/// Number of candidate multi-indices the enumeration of `class` would visit.
pub fn candidate_count(class: &MonomialClass, modes: &ModeSet) -> u128 {
    let tangential = 2 * modes.tangential().len() as u128;
    let normal = 2 * modes.normal_modes().count() as u128;
    (0..=class.max_normal())
        .filter(|&r| class.admits(r))
        .map(|r| {
            multichoose(normal, r as u128)
                .saturating_mul(multichoose(tangential, (class.degree - r) as u128))
        })
        .fold(0u128, u128::saturating_add)
}

struct Variable {
    mode: i64,
    conj: bool,
    normal: bool,
    formal: FormalFrequency,
}

struct Walk<'a> {
    vars: Vec<Variable>,
    class: &'a MonomialClass,
    filters: &'a Filters,
    freq: &'a FrequencyTable,
    counts: Vec<u32>,
    out: Vec<Monomial>,
}

impl Walk<'_> {
    fn visit(&mut self, start: usize, remaining: u32, normal: u32, pi: i64, omega: FormalFrequency) {
        if remaining == 0 {
            self.leaf(normal, pi, omega);
            return;
        }
        for i in start..self.vars.len() {
            let v = &self.vars[i];
            let next_normal = normal + v.normal as u32;
            if next_normal > self.class.max_normal() {
                continue;
            }
            let sign = if v.conj { -1 } else { 1 };
            let next_pi = pi + sign * v.mode;
            let next_omega = omega + v.formal.scaled(sign);
            self.counts[i] += 1;
            self.visit(i, remaining - 1, next_normal, next_pi, next_omega);
            self.counts[i] -= 1;
        }
    }

    fn leaf(&mut self, normal: u32, pi: i64, omega: FormalFrequency) {
        if !self.class.admits(normal) || !self.filters.momentum.admits(pi) {
            return;
        }
        let keep = match self.filters.resonance {
            ResonanceFilter::Any => true,
            ResonanceFilter::Resonant => omega.is_zero(),
            ResonanceFilter::NonResonant => !omega.is_zero(),
        };
        if !keep {
            return;
        }
        let mut alpha = BTreeMap::new();
        let mut beta = BTreeMap::new();
        for (v, &n) in self.vars.iter().zip(&self.counts) {
            if n > 0 {
                let side = if v.conj { &mut beta } else { &mut alpha };
                *side.entry(v.mode).or_insert(0) += n;
            }
        }
        self.out.push(Monomial::new(alpha, beta, self.freq));
    }
}

/// All monomials of `class` over the tangential modes and, when the class
/// allows normal factors, every other mode up to the cutoff.
///
/// Output order is lexicographic in the variable list `z_j < zbar_j < z_{j+1}`.
pub fn enumerate_monomials(
    class: &MonomialClass,
    modes: &ModeSet,
    freq: &FrequencyTable,
    filters: &Filters,
) -> Result<Vec<Monomial>> {
    if filters.divisor_tolerance <= 0.0 {
        return Err(Error::invalid("divisor tolerance must be positive"));
    }
    if modes.j_max() > freq.j_max() {
        return Err(Error::MissingMode(freq.j_max() as i64 + 1));
    }
    let count = candidate_count(class, modes);
    if count > CANDIDATE_LIMIT {
        return Err(Error::CombinatorialGuard {
            count,
            limit: CANDIDATE_LIMIT,
        });
    }
    let with_normal = class.max_normal() > 0;
    let mut vars = Vec::new();
    for j in modes.modes() {
        let normal = !modes.is_tangential(j);
        if normal && !with_normal {
            continue;
        }
        for conj in [false, true] {
            vars.push(Variable {
                mode: j,
                conj,
                normal,
                formal: freq.formal(j),
            });
        }
    }
    let mut walk = Walk {
        counts: vec![0; vars.len()],
        vars,
        class,
        filters,
        freq,
        out: Vec::new(),
    };
    walk.visit(0, class.degree, 0, 0, FormalFrequency::default());
    Ok(walk.out)
}

/// Smallest `|Omega|` over the non-resonant members of the class.
pub fn min_divisor(
    class: &MonomialClass,
    modes: &ModeSet,
    freq: &FrequencyTable,
    momentum: MomentumRule,
) -> Result<(f64, Monomial)> {
    enumerate_monomials(class, modes, freq, &Filters::non_resonant(momentum))?
        .into_iter()
        .map(|m| (m.divisor_omega.abs(), m))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::EmptyClass(class.to_string()))
}
