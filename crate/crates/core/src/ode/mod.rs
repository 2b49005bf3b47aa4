//! Explicit adaptive Runge–Kutta integration (Dormand–Prince 8(5,3)).
//!
//! The integrator is generic over a fixed-size state and lands exactly on a
//! caller-supplied list of output abscissae, so callers can sample a solution
//! without an interpolant.

mod tableau;

use thiserror::Error;

use tableau::{A, B, C, E3, E5, STAGES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at x = {x:e} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at x = {x:e}")]
    TooManySteps { x: f64, max_steps: usize },
    #[error("non-finite state at x = {x:e}")]
    NonFinite { x: f64 },
    #[error("output abscissa {stop:e} is outside the integration range or out of order")]
    BadStop { stop: f64 },
}

/// Counters collected during one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Dormand–Prince 8(5,3) with Hairer's step-size controller.
///
/// The error of component `i` is measured against
/// `atol + rtol * peak_i`, where `peak_i` is the largest magnitude the
/// component has reached so far. For oscillatory solutions this measures the
/// error relative to the local amplitude instead of the (possibly vanishing)
/// instantaneous value.
#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dop853 {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-300,
            max_steps: 2_000_000,
        }
    }
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;

impl Dop853 {
    pub fn new(rtol: f64) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }

    /// Integrate `y' = f(x, y)` from `x0` to `x_end`.
    ///
    /// `stops` must be monotone in the direction of integration and lie in
    /// `(x0, x_end]`; `on_stop(i, x, y)` is called when the integrator lands on
    /// `stops[i]`. Returns the state at `x_end`.
    pub fn integrate<const N: usize, F, O>(
        &self,
        f: F,
        x0: f64,
        y0: [f64; N],
        x_end: f64,
        stops: &[f64],
        mut on_stop: O,
    ) -> Result<([f64; N], Stats), OdeError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        O: FnMut(usize, f64, &[f64; N]),
    {
        let dir = if x_end >= x0 { 1.0 } else { -1.0 };
        let mut prev = x0;
        for &s in stops {
            if !((s - prev) * dir >= 0.0 && (x_end - s) * dir >= 0.0) {
                return Err(OdeError::BadStop { stop: s });
            }
            prev = s;
        }

        let mut stats = Stats::default();
        let mut x = x0;
        let mut y = y0;
        let mut peak = [0.0f64; N];
        for i in 0..N {
            peak[i] = y[i].abs();
        }
        if x0 == x_end {
            for (i, _) in stops.iter().enumerate() {
                on_stop(i, x, &y);
            }
            return Ok((y, stats));
        }

        let mut k = [[0.0f64; N]; STAGES];
        k[0] = f(x, &y);
        stats.evaluations += 1;

        let mut h = self.initial_step(&f, x, &y, &k[0], dir, &peak, &mut stats);
        h = h.min((x_end - x).abs()) * dir;

        let mut next_stop = 0usize;
        // Stops that coincide with the starting point.
        while next_stop < stops.len() && stops[next_stop] == x0 {
            on_stop(next_stop, x, &y);
            next_stop += 1;
        }

        let mut last_rejected = false;
        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(OdeError::TooManySteps {
                    x,
                    max_steps: self.max_steps,
                });
            }
            let target = if next_stop < stops.len() {
                stops[next_stop]
            } else {
                x_end
            };
            let remaining = target - x;
            let mut h_step = h;
            let mut landing = false;
            if (h_step - remaining) * dir >= 0.0 || (remaining - h_step).abs() <= 1e-14 * x.abs() {
                h_step = remaining;
                landing = true;
            }
            if h_step.abs() <= 1e-15 * x.abs().max(1e-300) || h_step == 0.0 {
                if landing {
                    // Zero-length step onto a stop.
                    x = target;
                    if next_stop < stops.len() {
                        on_stop(next_stop, x, &y);
                        next_stop += 1;
                        continue;
                    }
                    break;
                }
                return Err(OdeError::StepUnderflow { x, h: h_step });
            }

            let (y_new, err) = self.step(&f, x, &y, h_step, &mut k, &peak);
            stats.evaluations += STAGES - 1;

            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                if h_step.abs() < 1e-12 * x.abs().max(1e-300) {
                    return Err(OdeError::NonFinite { x });
                }
                h = h_step * 0.25;
                stats.rejected += 1;
                last_rejected = true;
                continue;
            }

            if err <= 1.0 {
                stats.accepted += 1;
                x = if landing { target } else { x + h_step };
                y = y_new;
                for i in 0..N {
                    peak[i] = peak[i].max(y[i].abs());
                }
                k[0] = f(x, &y);
                stats.evaluations += 1;
                let mut fac = SAFETY * err.powf(-1.0 / 8.0);
                if !fac.is_finite() {
                    fac = FAC_MAX;
                }
                fac = fac.clamp(FAC_MIN, FAC_MAX);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                last_rejected = false;
                // A step shortened to land on a stop does not shrink the
                // controller's proposal.
                let base = if landing && h_step.abs() < h.abs() { h } else { h_step };
                h = base * fac;
                if landing {
                    if next_stop < stops.len() {
                        on_stop(next_stop, x, &y);
                        next_stop += 1;
                    } else {
                        break;
                    }
                }
                if x == x_end && next_stop >= stops.len() {
                    break;
                }
            } else {
                stats.rejected += 1;
                last_rejected = true;
                let fac = (SAFETY * err.powf(-1.0 / 8.0)).clamp(0.1, 1.0);
                h = h_step * fac;
            }
        }
        // Remaining stops equal to x_end.
        while next_stop < stops.len() {
            on_stop(next_stop, x, &y);
            next_stop += 1;
        }
        Ok((y, stats))
    }

    fn scale<const N: usize>(&self, peak: &[f64; N], y: &[f64; N], y_new: &[f64; N]) -> [f64; N] {
        let mut sc = [0.0; N];
        for i in 0..N {
            sc[i] = self.atol + self.rtol * peak[i].max(y[i].abs()).max(y_new[i].abs());
        }
        sc
    }

    fn step<const N: usize, F>(
        &self,
        f: &F,
        x: f64,
        y: &[f64; N],
        h: f64,
        k: &mut [[f64; N]; STAGES],
        peak: &[f64; N],
    ) -> ([f64; N], f64)
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        for s in 1..STAGES {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(x + C[s] * h, &ys);
        }
        let mut y_new = *y;
        let mut e5 = [0.0; N];
        let mut e3 = [0.0; N];
        for (s, ks) in k.iter().enumerate() {
            for i in 0..N {
                y_new[i] += h * B[s] * ks[i];
                e5[i] += E5[s] * ks[i];
                e3[i] += E3[s] * ks[i];
            }
        }
        let sc = self.scale(peak, y, &y_new);
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..N {
            err5 += (e5[i] / sc[i]).powi(2);
            err3 += (e3[i] / sc[i]).powi(2);
        }
        let err = if err5 == 0.0 && err3 == 0.0 {
            0.0
        } else {
            let deno = err5 + 0.01 * err3;
            h.abs() * err5 / (deno * N as f64).sqrt()
        };
        (y_new, err)
    }

    #[allow(clippy::too_many_arguments)]
    fn initial_step<const N: usize, F>(
        &self,
        f: &F,
        x: f64,
        y: &[f64; N],
        f0: &[f64; N],
        dir: f64,
        peak: &[f64; N],
        stats: &mut Stats,
    ) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let sc = self.scale(peak, y, y);
        let norm = |v: &[f64; N]| -> f64 {
            (v.iter().zip(sc.iter()).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / N as f64).sqrt()
        };
        let d0 = norm(y);
        let d1 = norm(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += dir * h0 * f0[i];
        }
        let f1 = f(x + dir * h0, &y1);
        stats.evaluations += 1;
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        let h = (100.0 * h0).min(h1);
        if h.is_finite() && h > 0.0 {
            h
        } else {
            1e-6 * x.abs().max(1e-3)
        }
    }
}
