use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{FrequencyModel, FrequencyTable, ModeSet, SpectralState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    Wave,
    Nls,
}

/// Multiplier `nu` in front of `(1/(p+1)) int u^{p+1}` for the wave equation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum NonlinearityScale {
    /// `omega(1)^{p/2} omega(p)^{1/2}`, which makes the resonant part of the
    /// truncated Hamiltonian equal to `sqrt(2)^{-(p+1)} 2 Re(z_1^p zbar_p)`.
    #[default]
    Matched,
    Unit,
    Custom(f64),
}

/// Truncated Hamiltonian system together with its dealiasing grid.
#[derive(Clone)]
pub struct EvolutionProblem {
    kind: EquationKind,
    freq: FrequencyTable,
    modes: ModeSet,
    degree: u32,
    shift: i64,
    scale: f64,
    padding: usize,
    grid: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for EvolutionProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvolutionProblem")
            .field("kind", &self.kind)
            .field("j_max", &self.freq.j_max())
            .field("degree", &self.degree)
            .field("shift", &self.shift)
            .field("scale", &self.scale)
            .field("padding", &self.padding)
            .field("grid", &self.grid)
            .finish()
    }
}

/// Smallest padding factor `k` with `k (2 j_max + 1) >= (degree + 1) j_max + shift + 1`.
pub fn minimal_padding(degree: u32, shift: i64, j_max: usize) -> usize {
    let required = required_grid(degree, shift, j_max);
    required.div_ceil(2 * j_max + 1).max(1)
}

fn required_grid(degree: u32, shift: i64, j_max: usize) -> usize {
    (degree as usize + 1) * j_max + shift.unsigned_abs() as usize + 1
}

impl EvolutionProblem {
    /// Builds the problem described by a frequency table; `padding` defaults to
    /// the smallest alias-free factor.
    pub fn new(freq: FrequencyTable, padding: Option<usize>) -> Result<Self> {
        let j_max = freq.j_max();
        let (kind, degree, shift) = match freq.model() {
            FrequencyModel::Wave { p } => (EquationKind::Wave, *p, 0),
            FrequencyModel::Nls { n, .. } => (EquationKind::Nls, 3, *n),
        };
        let modes = ModeSet::new(j_max, freq.tangential())?;
        let padding = padding.unwrap_or_else(|| minimal_padding(degree, shift, j_max));
        let grid = padding * (2 * j_max + 1);
        let required = required_grid(degree, shift, j_max);
        if grid < required {
            return Err(Error::InsufficientPadding { grid, required });
        }
        let mut planner = FftPlanner::new();
        let mut problem = Self {
            kind,
            modes,
            degree,
            shift,
            scale: 1.0,
            padding,
            grid,
            forward: planner.plan_fft_forward(grid),
            inverse: planner.plan_fft_inverse(grid),
            freq,
        };
        if kind == EquationKind::Wave {
            problem.scale = problem.matched_scale();
        }
        Ok(problem)
    }

    fn matched_scale(&self) -> f64 {
        let p = self.degree as i64;
        let w1 = self.freq.evaluate(self.freq.formal(1));
        let wp = self.freq.evaluate(self.freq.formal(p));
        w1.powf(p as f64 / 2.0) * wp.sqrt()
    }

    pub fn with_scale(mut self, scale: NonlinearityScale) -> Self {
        if self.kind == EquationKind::Wave {
            self.scale = match scale {
                NonlinearityScale::Matched => self.matched_scale(),
                NonlinearityScale::Unit => 1.0,
                NonlinearityScale::Custom(v) => v,
            };
        }
        self
    }

    pub fn kind(&self) -> EquationKind {
        self.kind
    }

    pub fn freq(&self) -> &FrequencyTable {
        &self.freq
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn j_max(&self) -> usize {
        self.freq.j_max()
    }

    /// `p` for the wave equation, `3` for NLS.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `N` of the `cos(N x)` coupling (zero for the wave equation).
    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Components in the flat layout: `2 (2 j_max + 1)` for the wave pair
    /// `(z+, z-)`, `2 j_max + 1` for NLS.
    pub fn flat_len(&self) -> usize {
        let n = 2 * self.j_max() + 1;
        match self.kind {
            EquationKind::Wave => 2 * n,
            EquationKind::Nls => n,
        }
    }
}

/// Field state: `z+` with its independent companion `z-` (wave), or `u` (NLS).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeState {
    pub primary: SpectralState,
    pub companion: Option<SpectralState>,
}

impl PdeState {
    /// Wave state on the real subspace `z- = conj(z+)`.
    pub fn wave(primary: SpectralState) -> Self {
        let mut companion = primary.clone();
        for z in companion.amplitudes_mut() {
            *z = z.conj();
        }
        Self {
            primary,
            companion: Some(companion),
        }
    }

    pub fn nls(primary: SpectralState) -> Self {
        Self {
            primary,
            companion: None,
        }
    }

    pub fn for_problem(problem: &EvolutionProblem, primary: SpectralState) -> Result<Self> {
        if primary.j_max() != problem.j_max() {
            return Err(Error::invalid(format!(
                "state cutoff {} differs from the problem cutoff {}",
                primary.j_max(),
                problem.j_max()
            )));
        }
        Ok(match problem.kind() {
            EquationKind::Wave => Self::wave(primary),
            EquationKind::Nls => Self::nls(primary),
        })
    }

    pub fn time(&self) -> f64 {
        self.primary.time
    }

    /// `max_j |conj(z+_j) - z-_j|`; zero for NLS states.
    pub fn real_subspace_defect(&self) -> f64 {
        self.companion.as_ref().map_or(0.0, |m| {
            self.primary
                .amplitudes()
                .iter()
                .zip(m.amplitudes())
                .map(|(p, q)| (p.conj() - q).norm())
                .fold(0.0, f64::max)
        })
    }

    pub(crate) fn to_flat(&self) -> Vec<Complex64> {
        let mut v = self.primary.amplitudes().to_vec();
        if let Some(m) = &self.companion {
            v.extend_from_slice(m.amplitudes());
        }
        v
    }

    pub(crate) fn from_flat(&self, flat: &[Complex64], time: f64) -> Self {
        let n = self.primary.amplitudes().len();
        let mut out = self.clone();
        out.primary.amplitudes_mut().copy_from_slice(&flat[..n]);
        out.primary.time = time;
        if let Some(m) = &mut out.companion {
            m.amplitudes_mut().copy_from_slice(&flat[n..2 * n]);
            m.time = time;
        }
        out
    }
}

/// Scratch buffers for the pseudospectral products.
pub(crate) struct Workspace {
    grid: Vec<Complex64>,
    scratch: Vec<Complex64>,
    cos_shift: Vec<f64>,
    inv_sqrt_omega: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(problem: &EvolutionProblem) -> Self {
        let m = problem.grid;
        let scratch_len = problem
            .forward
            .get_inplace_scratch_len()
            .max(problem.inverse.get_inplace_scratch_len());
        let cos_shift = (0..m)
            .map(|n| (problem.shift as f64 * std::f64::consts::TAU * n as f64 / m as f64).cos())
            .collect();
        let inv_sqrt_omega = problem.freq.dense().iter().map(|w| 1.0 / w.sqrt()).collect();
        Self {
            grid: vec![Complex64::new(0.0, 0.0); m],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            cos_shift,
            inv_sqrt_omega,
        }
    }

    /// Loads the field `u` (wave) or `u` itself (NLS) onto the grid in physical space.
    fn load_field(&mut self, problem: &EvolutionProblem, y: &[Complex64]) {
        let j_max = problem.j_max() as i64;
        let n = (2 * j_max + 1) as usize;
        let m = problem.grid as i64;
        self.grid.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        for j in -j_max..=j_max {
            let idx = (j + j_max) as usize;
            let value = match problem.kind {
                EquationKind::Wave => {
                    let mirror = (-j + j_max) as usize;
                    (y[idx] + y[n + mirror]) * (FRAC_1_SQRT_2 * self.inv_sqrt_omega[idx])
                }
                EquationKind::Nls => y[idx],
            };
            self.grid[j.rem_euclid(m) as usize] = value;
        }
        problem
            .inverse
            .process_with_scratch(&mut self.grid, &mut self.scratch);
    }

    fn coefficient(&self, problem: &EvolutionProblem, j: i64) -> Complex64 {
        self.grid[j.rem_euclid(problem.grid as i64) as usize] / problem.grid as f64
    }

    /// Nonlinear part of the vector field written into `out`.
    pub(crate) fn nonlinear(&mut self, problem: &EvolutionProblem, y: &[Complex64], out: &mut [Complex64]) {
        self.load_field(problem, y);
        match problem.kind {
            EquationKind::Wave => {
                let p = problem.degree;
                self.grid.iter_mut().for_each(|u| *u = u.powu(p));
            }
            EquationKind::Nls => {
                for (u, c) in self.grid.iter_mut().zip(&self.cos_shift) {
                    *u *= u.norm_sqr() * c;
                }
            }
        }
        problem
            .forward
            .process_with_scratch(&mut self.grid, &mut self.scratch);
        let j_max = problem.j_max() as i64;
        let n = (2 * j_max + 1) as usize;
        let i = Complex64::i();
        for j in -j_max..=j_max {
            let idx = (j + j_max) as usize;
            match problem.kind {
                EquationKind::Wave => {
                    let c = problem.scale * FRAC_1_SQRT_2;
                    let g = self.coefficient(problem, j) * (c * self.inv_sqrt_omega[idx]);
                    let g_mirror = self.coefficient(problem, -j)
                        * (c * self.inv_sqrt_omega[(-j + j_max) as usize]);
                    out[idx] = i * g;
                    out[n + idx] = -i * g_mirror;
                }
                EquationKind::Nls => out[idx] = i * self.coefficient(problem, j),
            }
        }
    }

    /// Potential part of the Hamiltonian: `nu/(p+1) <u^{p+1}>` or `1/2 <cos(Nx)|u|^4>`.
    pub(crate) fn potential(&mut self, problem: &EvolutionProblem, y: &[Complex64]) -> Complex64 {
        self.load_field(problem, y);
        let m = problem.grid as f64;
        match problem.kind {
            EquationKind::Wave => {
                let p = problem.degree;
                let mean: Complex64 = self.grid.iter().map(|u| u.powu(p + 1)).sum::<Complex64>() / m;
                mean * (problem.scale / (p + 1) as f64)
            }
            EquationKind::Nls => {
                let mean: f64 = self
                    .grid
                    .iter()
                    .zip(&self.cos_shift)
                    .map(|(u, c)| u.norm_sqr().powi(2) * c)
                    .sum::<f64>()
                    / m;
                Complex64::new(0.5 * mean, 0.0)
            }
        }
    }
}

/// Linear part of the vector field: `i omega z+`, `-i omega z-`, `i omega u`.
pub(crate) fn linear(problem: &EvolutionProblem, y: &[Complex64], out: &mut [Complex64]) {
    let omega = problem.freq.dense();
    let n = omega.len();
    let i = Complex64::i();
    for k in 0..n {
        out[k] += i * omega[k] * y[k];
    }
    if problem.kind == EquationKind::Wave {
        for k in 0..n {
            out[n + k] -= i * omega[k] * y[n + k];
        }
    }
}

/// Full derivative `zdot = i dH/dzbar` of the truncated system.
pub fn vector_field(problem: &EvolutionProblem, state: &PdeState) -> Result<PdeState> {
    check_state(problem, state)?;
    let y = state.to_flat();
    let mut out = vec![Complex64::new(0.0, 0.0); y.len()];
    Workspace::new(problem).nonlinear(problem, &y, &mut out);
    linear(problem, &y, &mut out);
    Ok(state.from_flat(&out, state.time()))
}

/// Nonlinear part of [`vector_field`] alone.
pub fn nonlinear_field(problem: &EvolutionProblem, state: &PdeState) -> Result<PdeState> {
    check_state(problem, state)?;
    let y = state.to_flat();
    let mut out = vec![Complex64::new(0.0, 0.0); y.len()];
    Workspace::new(problem).nonlinear(problem, &y, &mut out);
    Ok(state.from_flat(&out, state.time()))
}

pub(crate) fn check_state(problem: &EvolutionProblem, state: &PdeState) -> Result<()> {
    let wave = problem.kind() == EquationKind::Wave;
    if state.primary.j_max() != problem.j_max() || state.companion.is_some() != wave {
        return Err(Error::invalid("state layout does not match the problem"));
    }
    Ok(())
}

/// Value of the truncated Hamiltonian; real on the real subspace.
pub fn hamiltonian(problem: &EvolutionProblem, state: &PdeState) -> Result<f64> {
    Ok(hamiltonian_complex(problem, state)?.re)
}

pub fn hamiltonian_complex(problem: &EvolutionProblem, state: &PdeState) -> Result<Complex64> {
    check_state(problem, state)?;
    let y = state.to_flat();
    let omega = problem.freq.dense();
    let n = omega.len();
    let quadratic: Complex64 = match problem.kind {
        EquationKind::Wave => (0..n).map(|k| y[k] * y[n + k] * omega[k]).sum(),
        EquationKind::Nls => (0..n).map(|k| Complex64::new(y[k].norm_sqr() * omega[k], 0.0)).sum(),
    };
    Ok(quadratic + Workspace::new(problem).potential(problem, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{frequencies_nls, frequencies_wave};
    use rand::{Rng, SeedableRng};

    fn random_state(j_max: usize, active: &[i64], amp: f64, seed: u64) -> SpectralState {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = SpectralState::zeros(j_max);
        for &j in active {
            s.set(j, Complex64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp)))
                .unwrap();
        }
        s
    }

    #[test]
    fn padding_rules() {
        assert_eq!(minimal_padding(2, 0, 32), 2);
        assert_eq!(minimal_padding(3, 8, 48), 3);
        assert_eq!(minimal_padding(3, 1, 48), 2);
        let modes = ModeSet::nls([1, -1, 2], 8, None).unwrap();
        let (freq, _) = frequencies_nls(&modes, [1.1, 1.3, 1.7]).unwrap();
        assert!(matches!(
            EvolutionProblem::new(freq.clone(), Some(2)),
            Err(Error::InsufficientPadding { .. })
        ));
        assert_eq!(EvolutionProblem::new(freq, None).unwrap().padding(), 3);
    }

    #[test]
    fn matched_scale_value() {
        let problem = EvolutionProblem::new(frequencies_wave(2, 8).unwrap(), None).unwrap();
        assert!((problem.scale() - 2f64.powf(1.25)).abs() < 1e-14);
        let unit = problem.with_scale(NonlinearityScale::Unit);
        assert_eq!(unit.scale(), 1.0);
    }

    fn direct_power(u: &[(i64, Complex64)], p: u32, k: i64) -> Complex64 {
        // Sum over ordered p-tuples with j_1 + ... + j_p = k.
        fn rec(u: &[(i64, Complex64)], left: u32, target: i64) -> Complex64 {
            if left == 0 {
                return if target == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            }
            u.iter().map(|&(j, v)| v * rec(u, left - 1, target - j)).sum()
        }
        rec(u, p, k)
    }

    #[test]
    fn wave_nonlinearity_matches_direct_convolution() {
        for p in [2u32, 4] {
            let j_max = 6;
            let freq = frequencies_wave(p, j_max).unwrap();
            let problem = EvolutionProblem::new(freq.clone(), None).unwrap();
            let active: Vec<i64> = (-6..=6).collect();
            let z = PdeState::wave(random_state(j_max, &active, 0.3, p as u64));
            let field = nonlinear_field(&problem, &z).unwrap();
            let zm = z.companion.as_ref().unwrap();
            let u: Vec<(i64, Complex64)> = (-6i64..=6)
                .map(|j| {
                    let w = freq.omega(j).unwrap();
                    (j, (z.primary.get(j) + zm.get(-j)) / (2f64.sqrt() * w.sqrt()))
                })
                .collect();
            let nu = problem.scale();
            for j in -6i64..=6 {
                let w = freq.omega(j).unwrap();
                let g = direct_power(&u, p, j) * nu / (2f64.sqrt() * w.sqrt());
                let got = field.primary.get(j);
                assert!((got - Complex64::i() * g).norm() < 1e-12, "p={p} j={j}");
            }
        }
    }

    #[test]
    fn single_mode_cubic_output_support() {
        let freq = frequencies_wave(2, 6).unwrap();
        let problem = EvolutionProblem::new(freq, None).unwrap();
        let mut s = SpectralState::zeros(6);
        s.set(1, Complex64::new(0.2, 0.1)).unwrap();
        let field = nonlinear_field(&problem, &PdeState::wave(s)).unwrap();
        // u lives on modes +-1, so u^2 lives on -2, 0, 2.
        for j in -6i64..=6 {
            let v = field.primary.get(j).norm();
            if [-2, 0, 2].contains(&j) {
                assert!(v > 1e-6, "mode {j}");
            } else {
                assert!(v < 1e-15, "mode {j}");
            }
        }
    }

    #[test]
    fn nls_nonlinearity_matches_shifted_convolution() {
        let modes = ModeSet::nls([1, -1, 2], 3, Some(8)).unwrap();
        let (freq, _) = frequencies_nls(&modes, [1.2, 1.5, 1.9]).unwrap();
        let problem = EvolutionProblem::new(freq, None).unwrap();
        let active = [-3, -1, 0, 1, 2, 5, 6, 8];
        let u = random_state(8, &active, 0.4, 11);
        let field = nonlinear_field(&problem, &PdeState::nls(u.clone())).unwrap();
        let cubic = |m: i64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for &a in &active {
                for &b in &active {
                    let c = m - a + b;
                    acc += u.get(a) * u.get(b).conj() * u.get(c);
                }
            }
            acc
        };
        for k in -8i64..=8 {
            let expected = (cubic(k - 3) + cubic(k + 3)) * 0.5;
            assert!((field.primary.get(k) - Complex64::i() * expected).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn nls_resonant_term_only_from_tangential_quadruple() {
        let modes = ModeSet::nls([1, -1, 2], 8, Some(16)).unwrap();
        let (freq, _) = frequencies_nls(&modes, [1.2, 1.5, 1.9]).unwrap();
        let problem = EvolutionProblem::new(freq, None).unwrap();
        let mut u = SpectralState::zeros(16);
        for (j, v) in [(1, 0.3), (-1, 0.2), (2, 0.25), (12, 0.1)] {
            u.set(j, Complex64::new(v, 0.0)).unwrap();
        }
        let field = nonlinear_field(&problem, &PdeState::nls(u.clone())).unwrap();
        // The contribution to mode 12 through j1 - j2 + j3 = 12 - 8 is exactly u1 ubar_{-1} u2 (twice).
        let tangential = [1i64, -1, 2, 12];
        let mut expected = Complex64::new(0.0, 0.0);
        for &a in &tangential {
            for &b in &tangential {
                for &c in &tangential {
                    if a - b + c == 12 - 8 || a - b + c == 12 + 8 {
                        expected += u.get(a) * u.get(b).conj() * u.get(c) * 0.5;
                    }
                }
            }
        }
        assert!((field.primary.get(12) - Complex64::i() * expected).norm() < 1e-14);
        assert!((expected - Complex64::new(0.3 * 0.2 * 0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hamiltonian_is_real_on_real_subspace() {
        let freq = frequencies_wave(4, 8).unwrap();
        let problem = EvolutionProblem::new(freq, None).unwrap();
        let active: Vec<i64> = (-8..=8).collect();
        let z = PdeState::wave(random_state(8, &active, 0.2, 5));
        let h = hamiltonian_complex(&problem, &z).unwrap();
        assert!(h.im.abs() < 1e-14 * h.re.abs());
        assert_eq!(z.real_subspace_defect(), 0.0);
    }
}
