//! Dormand-Prince 5(4) integrator with FSAL and continuous (dense) output.
//!
//! The dense interpolant is the standard order-4 polynomial of DOPRI5; event
//! times are located on it by sub-sampling each accepted step and bisecting
//! sign changes, so events never constrain step size.

use crate::error::{Error, Result};

// Butcher tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
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
// Dense-output auxiliary weights.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step's interpolation data.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Interpolated state at `t` (valid for t within the step, in either
    /// integration direction).
    #[allow(clippy::needless_range_loop)]
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let th1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + th1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
        y
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.h
    }
}

/// Continuous solution over the integrated span. Steps are stored in
/// integration order; `eval` works for any t inside the span.
#[derive(Debug, Clone)]
pub struct DenseOutput<const N: usize> {
    pub steps: Vec<Step<N>>,
    pub t_start: f64,
    pub t_end: f64,
}

impl<const N: usize> DenseOutput<N> {
    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.span();
        (lo..=hi).contains(&t)
    }

    pub fn span(&self) -> (f64, f64) {
        if self.t_start <= self.t_end {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        }
    }

    /// Interpolated state at `t`; clamps to the nearest endpoint when `t`
    /// falls marginally outside the span (root-polish overshoot).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let idx = self.step_index(t);
        self.steps[idx].eval(t)
    }

    fn step_index(&self, t: f64) -> usize {
        let forward = self.t_end >= self.t_start;
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let te = self.steps[mid].t_end();
            let past = if forward { t > te } else { t < te };
            if past {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Callback verdict after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    Stop,
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t_end` (either direction) with
/// adaptive Dormand-Prince 5(4). `on_step` sees every accepted step and may
/// stop the integration early.
pub fn integrate<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    rtol: f64,
    atol: f64,
    mut on_step: impl FnMut(&Step<N>, &[f64; N]) -> StepControl,
) -> Result<DenseOutput<N>> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok(DenseOutput {
            steps: vec![Step { t0, h: 0.0, rcont: [y0; 5] }],
            t_start: t0,
            t_end,
        });
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = dir * (span / 100.0).clamp(1e-10, 1e-2);
    let mut steps = Vec::new();
    let h_min = span * 1e-14;

    while (t_end - t) * dir > 0.0 {
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < h_min {
            return Err(Error::StepSizeUnderflow { t });
        }

        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for j in 0..s {
                for i in 0..N {
                    ys[i] += h * A[s][j] * k[j][i];
                }
            }
            k[s] = rhs(t + C[s] * h, &ys);
        }
        // stage 7 uses the b-row of A[6]; its state IS the 5th-order solution
        let mut y_next = y;
        for j in 0..6 {
            for i in 0..N {
                y_next[i] += h * A[6][j] * k[j][i];
            }
        }

        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            e *= h;
            let sc = atol + rtol * y[i].abs().max(y_next[i].abs());
            err = err.max((e / sc).abs());
        }

        if err <= 1.0 {
            // accept: build dense coefficients
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y_next[i] - y[i];
                let bspl = h * k[0][i] - dy;
                rcont[0][i] = y[i];
                rcont[1][i] = dy;
                rcont[2][i] = bspl;
                rcont[3][i] = dy - h * k[6][i] - bspl;
                let mut d = 0.0;
                for j in 0..7 {
                    d += D[j] * k[j][i];
                }
                rcont[4][i] = h * d;
            }
            let step = Step { t0: t, h, rcont };
            t += h;
            y = y_next;
            k1 = k[6]; // FSAL
            let verdict = on_step(&step, &y);
            steps.push(step);
            if verdict == StepControl::Stop {
                break;
            }
        }

        // non-finite error (domain blow-up in the RHS) is treated as a hard
        // reject so the step shrinks until the underflow guard fires
        let fac = if !err.is_finite() {
            0.2
        } else if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= fac;
    }

    let t_reached = t;
    Ok(DenseOutput { steps, t_start: t0, t_end: t_reached })
}

/// Times where `g(t, y(t))` crosses zero, scanned on `samples_per_step`
/// sub-samples of every dense step and bisected to ~1e-13 of the local step.
/// Returns at most `max_events` times, in integration order.
pub fn event_times<const N: usize>(
    dense: &DenseOutput<N>,
    g: impl Fn(f64, &[f64; N]) -> f64,
    max_events: usize,
    samples_per_step: usize,
) -> Vec<f64> {
    let mut events = Vec::new();
    'outer: for step in &dense.steps {
        if step.h == 0.0 {
            continue;
        }
        let mut t_prev = step.t0;
        let mut g_prev = g(t_prev, &step.eval(t_prev));
        for s in 1..=samples_per_step {
            let t = step.t0 + step.h * s as f64 / samples_per_step as f64;
            let gv = g(t, &step.eval(t));
            let crossed = if g_prev == 0.0 {
                // landing exactly on a zero counts once
                events.push(t_prev);
                false
            } else {
                gv != 0.0 && (gv < 0.0) != (g_prev < 0.0)
            };
            if crossed {
                let (mut a, mut b, mut ga) = (t_prev, t, g_prev);
                while (b - a).abs() > 1e-13 * (1.0 + a.abs()) {
                    let mid = 0.5 * (a + b);
                    if mid == a || mid == b {
                        break;
                    }
                    let gm = g(mid, &step.eval(mid));
                    if gm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if (gm < 0.0) == (ga < 0.0) {
                        a = mid;
                        ga = gm;
                    } else {
                        b = mid;
                    }
                }
                events.push(0.5 * (a + b));
            }
            if events.len() >= max_events {
                break 'outer;
            }
            t_prev = t;
            g_prev = gv;
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn harmonic(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let dense =
            integrate(harmonic, 0.0, [0.0, 1.0], 20.0, 1e-11, 1e-11, |_, _| StepControl::Continue)
                .unwrap();
        let y = dense.eval(20.0);
        assert_abs_diff_eq!(y[0], 20.0f64.sin(), epsilon = 1e-9);
        assert_abs_diff_eq!(y[1], 20.0f64.cos(), epsilon = 1e-9);
    }

    #[test]
    fn dense_output_mid_step() {
        let dense =
            integrate(harmonic, 0.0, [0.0, 1.0], 10.0, 1e-11, 1e-11, |_, _| StepControl::Continue)
                .unwrap();
        for i in 0..500 {
            let t = 10.0 * i as f64 / 500.0;
            let y = dense.eval(t);
            assert_abs_diff_eq!(y[0], t.sin(), epsilon = 1e-9);
        }
    }

    #[test]
    fn backward_integration() {
        let dense =
            integrate(harmonic, 0.0, [0.0, 1.0], -7.0, 1e-11, 1e-11, |_, _| StepControl::Continue)
                .unwrap();
        let y = dense.eval(-7.0);
        assert_abs_diff_eq!(y[0], (-7.0f64).sin(), epsilon = 1e-9);
        let y = dense.eval(-3.3);
        assert_abs_diff_eq!(y[0], (-3.3f64).sin(), epsilon = 1e-9);
    }

    #[test]
    fn events_locate_sine_zeros() {
        let dense =
            integrate(harmonic, 0.0, [0.0, 1.0], 10.0, 1e-11, 1e-11, |_, _| StepControl::Continue)
                .unwrap();
        let zeros = event_times(&dense, |_, y| y[0], 10, 8);
        // y(0)=0 counts as the first event
        let expected: Vec<f64> = (0..4).map(|k| k as f64 * std::f64::consts::PI).collect();
        assert_eq!(zeros.len(), expected.len());
        for (z, e) in zeros.iter().zip(&expected) {
            assert_abs_diff_eq!(*z, *e, epsilon = 1e-10);
        }
    }

    #[test]
    fn early_stop() {
        let dense = integrate(harmonic, 0.0, [0.0, 1.0], 100.0, 1e-11, 1e-11, |step, _| {
            if step.t_end() > 5.0 {
                StepControl::Stop
            } else {
                StepControl::Continue
            }
        })
        .unwrap();
        assert!(dense.t_end > 5.0 && dense.t_end < 100.0);
    }

    #[test]
    fn nonautonomous_quadrature() {
        // y' = cos(t) over [0, 3]
        let dense = integrate(
            |t: f64, _y: &[f64; 1]| [t.cos()],
            0.0,
            [0.0],
            3.0,
            1e-12,
            1e-12,
            |_, _| StepControl::Continue,
        )
        .unwrap();
        assert_abs_diff_eq!(dense.eval(3.0)[0], 3.0f64.sin(), epsilon = 1e-10);
    }
}
