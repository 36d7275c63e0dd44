//! Dormand–Prince 5(4) with step-size control and a terminal event.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// Accepted steps of one integration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Solution {
    pub fn last(&self) -> (f64, &[f64]) {
        (
            *self.times.last().expect("non-empty"),
            self.states.last().expect("non-empty"),
        )
    }
}

impl Dopri5 {
    /// One step of size `h`; returns the 5th-order solution and the scaled error norm.
    fn step<F>(&self, f: &F, t: f64, y: &[f64], h: f64) -> (Vec<f64>, f64)
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        let mut k = vec![vec![0.0; n]; 7];
        let mut tmp = vec![0.0; n];
        f(t, y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                tmp[i] = y[i] + h * (0..s).map(|r| A[s][r] * k[r][i]).sum::<f64>();
            }
            f(t + C[s] * h, &tmp, &mut k[s]);
        }
        // Stage 7 is evaluated at the new point, which equals `tmp` from the last stage.
        let y_new = tmp;
        let mut acc = 0.0;
        for i in 0..n {
            let err = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
            let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            acc += (err / scale).powi(2);
        }
        (y_new, (acc / n as f64).sqrt())
    }

    fn initial_step<F>(&self, f: &F, t: f64, y: &[f64], span: f64) -> f64
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let mut d = vec![0.0; y.len()];
        f(t, y, &mut d);
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dnorm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let guess = if dnorm > 0.0 && ynorm > 0.0 {
            0.01 * ynorm / dnorm
        } else {
            1e-6
        };
        guess.min(span.abs()).max(1e-12)
    }

    /// Integrates from `t0` to `t_end`, or until `event(y)` first becomes
    /// nonnegative, whichever comes first. The event time is located to
    /// roundoff by re-stepping from the last accepted point.
    pub fn solve<F, G>(
        &self,
        f: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        event: Option<G>,
    ) -> Result<(Solution, bool)>
    where
        F: Fn(f64, &[f64], &mut [f64]),
        G: Fn(&[f64]) -> f64,
    {
        let mut sol = Solution {
            times: vec![t0],
            states: vec![y0.to_vec()],
        };
        if let Some(g) = &event {
            if g(y0) >= 0.0 {
                return Ok((sol, true));
            }
        }
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut h = self.initial_step(&f, t0, y0, t_end - t0);
        for _ in 0..self.max_steps {
            if t >= t_end {
                return Ok((sol, false));
            }
            h = h.min(t_end - t);
            let (y_new, err) = self.step(&f, t, &y, h);
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite error estimate at t = {t}")));
            }
            if err <= 1.0 {
                let t_new = if h == t_end - t { t_end } else { t + h };
                if let Some(g) = &event {
                    if g(&y_new) >= 0.0 {
                        let (hs, ys) = self.locate(&f, g, t, &y, h, y_new);
                        sol.times.push(t + hs);
                        sol.states.push(ys);
                        return Ok((sol, true));
                    }
                }
                t = t_new;
                y = y_new;
                sol.times.push(t);
                sol.states.push(y.clone());
            }
            let factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
            h *= factor.clamp(0.2, 5.0);
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration(format!("step size underflow at t = {t}")));
            }
        }
        Err(Error::Integration(format!(
            "step limit {} reached at t = {t}",
            self.max_steps
        )))
    }

    /// Illinois iteration on the step length `s in (0, h]` for `event(step(s)) = 0`.
    fn locate<F, G>(&self, f: &F, g: &G, t: f64, y: &[f64], h: f64, y_h: Vec<f64>) -> (f64, Vec<f64>)
    where
        F: Fn(f64, &[f64], &mut [f64]),
        G: Fn(&[f64]) -> f64,
    {
        let (mut a, mut ga) = (0.0, g(y));
        let (mut b, mut gb, mut yb) = (h, g(&y_h), y_h);
        let mut side = 0i8;
        for _ in 0..200 {
            if gb == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * (t + b).abs().max(1e-300) {
                break;
            }
            let s = (a * gb - b * ga) / (gb - ga);
            let s = if s > a && s < b { s } else { 0.5 * (a + b) };
            let (ys, _) = self.step(f, t, y, s);
            let gs = g(&ys);
            if gs >= 0.0 {
                b = s;
                gb = gs;
                yb = ys;
                if side == 1 {
                    ga *= 0.5;
                }
                side = 1;
            } else {
                a = s;
                ga = gs;
                if side == -1 {
                    gb *= 0.5;
                }
                side = -1;
            }
        }
        (b, yb)
    }

    /// Values at the requested increasing `times`, with steps truncated to land on each.
    pub fn sample<F>(&self, f: F, t0: f64, y0: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(f64, &[f64], &mut [f64]),
    {
        let mut out = Vec::with_capacity(times.len());
        let mut t = t0;
        let mut y = y0.to_vec();
        for &target in times {
            if target > t {
                let (sol, _) = self.solve(&f, t, &y, target, None::<fn(&[f64]) -> f64>)?;
                let (_, last) = sol.last();
                y = last.to_vec();
                t = target;
            }
            out.push(y.clone());
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let f = |_t: f64, y: &[f64], d: &mut [f64]| {
            d[0] = y[1];
            d[1] = -y[0];
        };
        let (sol, hit) = Dopri5::default()
            .solve(f, 0.0, &[1.0, 0.0], 2.0 * std::f64::consts::PI, None::<fn(&[f64]) -> f64>)
            .unwrap();
        assert!(!hit);
        let (t, y) = sol.last();
        assert_eq!(t, 2.0 * std::f64::consts::PI);
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn event_located_to_roundoff() {
        // y' = y from 1: crosses 2 at ln 2.
        let f = |_t: f64, y: &[f64], d: &mut [f64]| d[0] = y[0];
        let (sol, hit) = Dopri5::default()
            .solve(f, 0.0, &[1.0], 10.0, Some(|y: &[f64]| y[0] - 2.0))
            .unwrap();
        assert!(hit);
        let (t, y) = sol.last();
        assert!((t - 2f64.ln()).abs() < 1e-10, "{t}");
        assert!((y[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn sampling_hits_requested_times() {
        let f = |_t: f64, y: &[f64], d: &mut [f64]| d[0] = -2.0 * y[0];
        let times = [0.0, 0.25, 0.5, 1.0];
        let ys = Dopri5::default().sample(f, 0.0, &[1.0], &times).unwrap();
        for (t, y) in times.iter().zip(ys) {
            assert!((y[0] - (-2.0 * t).exp()).abs() < 1e-10);
        }
    }
}
