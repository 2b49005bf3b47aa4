//! Eigenvalues and eigenfunctions by shooting from the singular end.
//!
//! The solution is written as `upsilon = x^alpha y(x)` with `x = zeta_plus - zeta`.
//! The regular factor `y` obeys
//!
//! ```text
//! y'' + (2 alpha / x) y' = (q - K / x^2 - Lambda) y
//! ```
//!
//! which is integrated in `t = sqrt(z_plus - z)` from a Frobenius seed at
//! `x = delta` to the ground, together with the Prüfer angle of `upsilon`.
//! The map `t -> x` is monotone with `dx/dt = rate(t)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::chebyshev::Chebyshev;
use crate::error::{invalid, Error, Result};
use crate::frobenius::{self, SingularSeed, SEED_TOLERANCE};
use crate::liouville::{LiouvilleChart, Q_SERIES_LEN};
use crate::ode::{Dop853, OdeError};
use crate::quadrature::CompositeRule;
use crate::roots;
use crate::series::Series;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Relative tolerance of the ODE integrator.
    pub rtol: f64,
    /// Truncation order of the seed series.
    pub order: usize,
    /// Initial seed offset as a fraction of `zeta_plus`.
    pub delta_fraction: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            order: frobenius::DEFAULT_ORDER,
            delta_fraction: 1e-4,
        }
    }
}

/// End state of one shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    /// Regular factor `y` and `dy/dx` at the ground.
    pub y: f64,
    pub y_x: f64,
    /// Prüfer angle of `upsilon` at the ground.
    pub theta: f64,
    /// Seed offset actually used.
    pub delta: f64,
}

fn integration_error(chart: &LiouvilleChart, e: OdeError) -> Error {
    let t = match e {
        OdeError::StepUnderflow { x, .. } | OdeError::TooManySteps { x, .. } | OdeError::NonFinite { x } => x,
        OdeError::BadStop { stop } => stop,
    };
    Error::Integration {
        x: chart.x_of_t(t.clamp(0.0, chart.t_max())),
        source: e,
    }
}

/// Integrate from the seed to the ground, reporting the state
/// `[y, dy/dx, theta]` at each of the ascending `stops` in `t` that lie
/// beyond the seed point.
fn integrate<O>(chart: &LiouvilleChart, lambda: f64, opts: &ShootingOptions, stops: &[f64], mut on_stop: O) -> Result<Shot>
where
    O: FnMut(f64, &[f64; 3]),
{
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("Lambda", format!("{lambda} must be positive")));
    }
    let seed = frobenius::build_seed(chart, lambda, opts.order)?;
    let delta = seed.certified_offset(opts.delta_fraction * chart.zeta_plus(), SEED_TOLERANCE);
    let (y0, yx0) = seed.regular(delta);
    let alpha = seed.alpha_plus;
    // upsilon / upsilon_x = x y / (x y_x + alpha y)
    let theta0 = (delta * y0).atan2(delta * yx0 + alpha * y0);
    let t0 = chart.t_of_x(delta)?;
    let t_end = chart.t_max();
    let k = chart.k();

    let rhs = |t: f64, s: &[f64; 3]| {
        let x = chart.x_of_t(t);
        let r = chart.rate(t);
        let qr = chart.q_regular(t, x);
        let q = qr + k / (x * x);
        let (sn, cs) = s[2].sin_cos();
        [
            r * s[1],
            r * (-(2.0 * alpha / x) * s[1] + (qr - lambda) * s[0]),
            r * (cs * cs - (q - lambda) * sn * sn),
        ]
    };
    let first = stops.partition_point(|&t| t <= t0);
    let stops = &stops[first..];
    let (end, _) = Dop853::new(opts.rtol)
        .integrate(rhs, t0, [y0, yx0, theta0], t_end, stops, |_, t, s| on_stop(t, s))
        .map_err(|e| integration_error(chart, e))?;
    Ok(Shot {
        y: end[0],
        y_x: end[1],
        theta: end[2],
        delta,
    })
}

pub fn shoot(chart: &LiouvilleChart, lambda: f64, opts: &ShootingOptions) -> Result<Shot> {
    integrate(chart, lambda, opts, &[], |_, _| {})
}

/// `upsilon` at the ground for the seed normalized to leading coefficient one.
pub fn shoot_miss(chart: &LiouvilleChart, lambda: f64) -> Result<f64> {
    let shot = shoot(chart, lambda, &ShootingOptions::default())?;
    Ok(miss_of(chart, &shot))
}

fn miss_of(chart: &LiouvilleChart, shot: &Shot) -> f64 {
    let alpha = frobenius::indicial_exponents(chart.k()).map(|e| e.0).unwrap_or(1.0);
    chart.zeta_plus().powf(alpha) * shot.y
}

fn count_of(theta: f64) -> usize {
    ((theta / PI).ceil() - 1.0).max(0.0) as usize
}

/// Number of interior zeros of the recessive solution at `lambda`.
pub fn oscillation_count(chart: &LiouvilleChart, lambda: f64) -> Result<usize> {
    Ok(count_of(shoot(chart, lambda, &ShootingOptions::default())?.theta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDiagnostics {
    pub n: usize,
    /// Final bracket `[lo, hi]` on `Lambda` with counts `n - 1` and `n`.
    pub bracket: (f64, f64),
    pub bisections: usize,
    pub refinement_evaluations: usize,
    pub seed_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// `Lambda_n = 1 / lambda_n`, strictly increasing.
    pub lambdas: Vec<f64>,
    pub cap: f64,
    pub diagnostics: Vec<ModeDiagnostics>,
}

impl Spectrum {
    /// Squared frequencies `lambda_n`, strictly decreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.lambdas.iter().map(|v| 1.0 / v).collect()
    }
}

/// Upper end of the search window: a generous Weyl-type bound shifted by
/// the largest value of the bounded part of the potential.
pub fn search_cap(chart: &LiouvilleChart, n_max: usize) -> f64 {
    let weyl = (4.0 * n_max as f64 * PI / chart.zeta_plus()).powi(2);
    let k = chart.k();
    let mut shift: f64 = 0.0;
    for i in 1..=256 {
        let t = chart.t_max() * i as f64 / 256.0;
        let x = chart.x_of_t(t);
        shift = shift.max(chart.q_regular(t, x) + k.min(0.0) / (x * x));
    }
    weyl + shift.max(0.0)
}

pub fn eigenvalues(chart: &LiouvilleChart, n_max: usize, rtol: f64) -> Result<Spectrum> {
    eigenvalues_with(chart, n_max, rtol, &ShootingOptions::default())
}

pub fn eigenvalues_with(chart: &LiouvilleChart, n_max: usize, rtol: f64, opts: &ShootingOptions) -> Result<Spectrum> {
    if n_max == 0 {
        return Err(invalid("n_max", "at least one mode is required"));
    }
    if !(rtol >= 1e-12) {
        return Err(invalid("rtol", format!("{rtol} is below 1e-12")));
    }
    let cap = search_cap(chart, n_max);
    let count = |lambda: f64| shoot(chart, lambda, opts).map(|s| count_of(s.theta));

    let samples = 8 * n_max;
    let grid: Vec<f64> = (1..=samples)
        .map(|j| cap * (j as f64 / samples as f64).powi(2))
        .collect();
    let counts: Vec<usize> = grid.par_iter().map(|&v| count(v)).collect::<Result<_>>()?;
    if counts[samples - 1] < n_max {
        return Err(Error::SearchWindow {
            n: counts[samples - 1] + 1,
            cap,
        });
    }

    let modes: Vec<(f64, ModeDiagnostics)> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            // Largest sample with count < n and smallest with count >= n.
            let (mut lo, mut c_lo) = (0.0, 0usize);
            let mut hi = cap;
            let mut c_hi = counts[samples - 1];
            for (&v, &c) in grid.iter().zip(&counts) {
                if c < n {
                    lo = v;
                    c_lo = c;
                } else {
                    hi = v;
                    c_hi = c;
                    break;
                }
            }
            let mut bisections = 0;
            while c_lo != n - 1 || c_hi != n {
                if bisections > 200 {
                    return Err(Error::SearchWindow { n, cap });
                }
                let mid = 0.5 * (lo + hi);
                let c = count(mid)?;
                if c < n {
                    lo = mid;
                    c_lo = c;
                } else {
                    hi = mid;
                    c_hi = c;
                }
                bisections += 1;
            }
            let miss = |v: f64| shoot(chart, v, opts).map(|s| miss_of(chart, &s));
            // Lambda = 0 itself is outside the admissible range.
            let lo_eval = if lo == 0.0 { hi * 1e-9 } else { lo };
            let f_lo = miss(lo_eval)?;
            let f_hi = miss(hi)?;
            let root = roots::brent(miss, lo_eval, hi, f_lo, f_hi, rtol * lo_eval.max(hi * 1e-3))??;
            let seed_offset = shoot(chart, root.x, opts)?.delta;
            Ok((
                root.x,
                ModeDiagnostics {
                    n,
                    bracket: (lo, hi),
                    bisections,
                    refinement_evaluations: root.evaluations,
                    seed_offset,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let (lambdas, diagnostics): (Vec<f64>, Vec<ModeDiagnostics>) = modes.into_iter().unzip();
    debug_assert!(lambdas.windows(2).all(|w| w[0] < w[1]));
    Ok(Spectrum {
        lambdas,
        cap,
        diagnostics,
    })
}

/// Physical profiles of one mode. Height-dependent quantities are Chebyshev
/// interpolants in `z` on `[0, z_plus]`.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub n: usize,
    /// Squared frequency.
    pub lambda_n: f64,
    pub l: f64,
    /// `w = kappa_used (rho mu)^(-1/4) upsilon` with `upsilon` monic at the
    /// singular end.
    pub kappa_used: f64,
    /// Closed-form normalization constant, kept for comparison.
    pub kappa_formula: f64,
    pub zero_count: usize,
    pub residual_norm: f64,
    chart: LiouvilleChart,
    alpha: f64,
    /// `1 / G(0)` where `w = scale * G(s) * y`.
    scale: f64,
    w: Chebyshev,
    dw: Chebyshev,
    d2w: Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSample {
    pub z: f64,
    pub zeta: f64,
    pub upsilon: f64,
    pub w: f64,
    pub u: f64,
    pub delta_p: f64,
}

const MIN_NODES: usize = 64;
const MAX_NODES: usize = 1024;

/// `G(s) = (P Q)^(-1/4) X^(alpha/2)`.
fn profile_factor(chart: &LiouvilleChart, alpha: f64, t: f64) -> f64 {
    let (p, q) = chart.equilibrium().p_q(t * t);
    let ratio = chart.ratio(t);
    (p * q).powf(-0.25) * ratio.powf(alpha)
}

pub fn eigenfunction(chart: &LiouvilleChart, n: usize, lambda_n: f64) -> Result<ModeSolution> {
    eigenfunction_with(chart, n, lambda_n, &ShootingOptions::default())
}

pub fn eigenfunction_with(chart: &LiouvilleChart, n: usize, lambda_n: f64, opts: &ShootingOptions) -> Result<ModeSolution> {
    if n == 0 {
        return Err(invalid("n", "modes are numbered from 1"));
    }
    if !(lambda_n > 0.0 && lambda_n.is_finite()) {
        return Err(invalid("lambda_n", format!("{lambda_n} must be positive")));
    }
    let big_lambda = 1.0 / lambda_n;
    let eq = chart.equilibrium().clone();
    let l = chart.l();
    let z_plus = eq.z_plus;

    // Near-vacuum representation w = scale * W(s) as a power series.
    let len = Q_SERIES_LEN;
    let seed_hi = frobenius::build_seed(chart, big_lambda, len - 1)?;
    let alpha = seed_hi.alpha_plus;
    let w_series = near_vacuum_series(chart, &seed_hi, len);
    let scale = 1.0 / w_series.coeff(0);
    let dw_series = w_series.derivative();
    let s_series = series_reach(&w_series, z_plus);

    let seed = frobenius::build_seed(chart, big_lambda, opts.order)?;

    let state_profile = |t: f64, y: f64, y_x: f64| -> (f64, f64) {
        let s = t * t;
        let ([p0, p1, _], [q0, q1, _]) = eq.p_q_derivs(s);
        let g = profile_factor(chart, alpha, t);
        let x_s_over_x = chart.ratio_dt(t) / (t * chart.ratio(t));
        let g_s = g * (-0.25 * (p1 / p0 + q1 / q0) + 0.5 * alpha * x_s_over_x);
        let dx_ds = chart.rate(t) / (2.0 * t);
        let w = scale * g * y;
        let dw_ds = scale * (g_s * y + g * y_x * dx_ds);
        (w, -dw_ds)
    };

    let mut nodes = MIN_NODES;
    let (w, dw, theta) = loop {
        let half_angle: Vec<f64> = (0..=nodes).map(|j| 0.5 * PI * j as f64 / nodes as f64).collect();
        // Lobatto index j: z_j = z_plus cos^2, s_j = z_plus sin^2 of the half angle.
        let t_nodes: Vec<f64> = half_angle.iter().map(|a| z_plus.sqrt() * a.sin()).collect();
        let mut w_vals = vec![f64::NAN; nodes + 1];
        let mut dw_vals = vec![f64::NAN; nodes + 1];
        let split = t_nodes.partition_point(|&t| t * t <= s_series);
        for j in 0..split {
            let s = t_nodes[j] * t_nodes[j];
            w_vals[j] = scale * w_series.eval(s);
            dw_vals[j] = -scale * dw_series.eval(s);
        }
        let mut idx = split;
        let mut stops = t_nodes[split..].to_vec();
        if let Some(last) = stops.last_mut() {
            *last = chart.t_max();
        }
        let shot = integrate(chart, big_lambda, opts, &stops, |t, state| {
            // Skip nodes the seed point has already passed.
            while idx < t_nodes.len() && t_nodes[idx] < t && (t - t_nodes[idx]) > 1e-15 * t {
                idx += 1;
            }
            let (wv, dwv) = state_profile(t, state[0], state[1]);
            w_vals[idx] = wv;
            dw_vals[idx] = dwv;
            idx += 1;
        })?;
        // Nodes inside the seed interval.
        for j in split..=nodes {
            if w_vals[j].is_nan() {
                let t = t_nodes[j];
                let x = chart.x_of_t(t);
                let (y, y_x) = seed.regular(x);
                let (wv, dwv) = state_profile(t, y, y_x);
                w_vals[j] = wv;
                dw_vals[j] = dwv;
            }
        }
        let w = Chebyshev::from_lobatto_values(0.0, z_plus, &w_vals);
        let dw = Chebyshev::from_lobatto_values(0.0, z_plus, &dw_vals);
        if (w.tail_ratio(4) < 1e-13 && dw.tail_ratio(4) < 1e-12) || nodes >= MAX_NODES {
            break (w, dw, shot.theta);
        }
        nodes *= 2;
    };
    let d2w = dw.derivative();

    let zero_count = ((theta / PI).round() - 1.0).max(0.0) as usize;
    let g = eq.g;
    let c = eq.c_rho;
    let nu = eq.nu;
    let kappa_used = scale * (g * l * l * c * c).powf(0.25);
    let kappa_formula = 2f64.powf((2.0 * nu - 1.0) / 2.0) * (nu * g * l * l).powf(-(nu - 1.0) / 2.0) * c.sqrt();

    let mut mode = ModeSolution {
        n,
        lambda_n,
        l,
        kappa_used,
        kappa_formula,
        zero_count,
        residual_norm: f64::NAN,
        chart: chart.clone(),
        alpha,
        scale,
        w,
        dw,
        d2w,
    };
    mode.residual_norm = tg_residual(&mode);
    if zero_count != n - 1 {
        return Err(Error::ModeIdentification { n, zero_count });
    }
    Ok(mode)
}

/// `W(s) = (P Q)^(-1/4) X^(alpha/2) S(s X)` with `S` the seed series in `x^2`.
fn near_vacuum_series(chart: &LiouvilleChart, seed: &SingularSeed, len: usize) -> Series {
    let eq = chart.equilibrium();
    let big_x = Series::new(chart.x_sq_over_s().coeffs(), len);
    let y_of_s = &big_x * &Series::variable(len);
    let s_series = Series::new(&seed.coeffs, len).compose(&y_of_s);
    let pq = &eq.p_series(len) * &eq.q_series(len);
    let g = &pq.powf(-0.25) * &big_x.powf(seed.alpha_plus / 2.0);
    &g * &s_series
}

/// Largest `s = z_plus 2^-k` at which the truncated series is accurate to
/// roughly machine precision.
fn series_reach(w: &Series, z_plus: f64) -> f64 {
    let mut s = 0.5 * z_plus;
    while s > 1e-10 * z_plus {
        let value = w.eval(s).abs();
        if w.tail_magnitude(s, 2) <= 1e-17 * value.max(1e-300) {
            return s;
        }
        s *= 0.5;
    }
    0.0
}

impl ModeSolution {
    pub fn chart(&self) -> &LiouvilleChart {
        &self.chart
    }

    /// `1 / lambda_n`.
    pub fn big_lambda(&self) -> f64 {
        1.0 / self.lambda_n
    }

    pub fn w(&self, z: f64) -> f64 {
        self.w.eval(z)
    }

    pub fn dw(&self, z: f64) -> f64 {
        self.dw.eval(z)
    }

    pub fn d2w(&self, z: f64) -> f64 {
        self.d2w.eval(z)
    }

    /// Third derivative, used by the stream-function residual.
    pub fn d3w(&self, z: f64) -> f64 {
        self.d2w.derivative().eval(z)
    }

    pub fn u(&self, z: f64) -> f64 {
        self.dw(z) / self.l
    }

    pub fn delta_p(&self, z: f64) -> f64 {
        self.lambda_n / (self.l * self.l) * self.chart.equilibrium().rho(z) * self.dw(z)
    }

    /// Number of Chebyshev coefficients in the `w` interpolant.
    pub fn resolution(&self) -> usize {
        self.w.coeffs().len()
    }

    /// Transformed eigenfunction, monic at the singular end.
    pub fn upsilon(&self, zeta: f64) -> Result<f64> {
        let z = self.chart.z_of_zeta(zeta)?;
        let x = self.chart.zeta_plus() - zeta;
        let t = (self.chart.equilibrium().z_plus - z).max(0.0).sqrt();
        let g = profile_factor(&self.chart, self.alpha, t);
        Ok(x.powf(self.alpha) * self.w(z) / (self.scale * g))
    }

    pub fn sample(&self, count: usize) -> Result<Vec<ModeSample>> {
        if count < 2 {
            return Err(invalid("samples", format!("{count}; at least 2 required")));
        }
        let z_plus = self.chart.equilibrium().z_plus;
        (0..count)
            .map(|i| {
                let z = if i + 1 == count { z_plus } else { z_plus * i as f64 / (count - 1) as f64 };
                let zeta = self.chart.zeta_of_z(z)?;
                Ok(ModeSample {
                    z,
                    zeta,
                    upsilon: self.upsilon(zeta)?,
                    w: self.w(z),
                    u: self.u(z),
                    delta_p: self.delta_p(z),
                })
            })
            .collect()
    }
}

/// Frequency `sqrt(lambda)` and horizontal phase speed `sqrt(lambda) / l`.
pub fn dispersion(mode: &ModeSolution) -> (f64, f64) {
    dispersion_of(mode.lambda_n, mode.l)
}

pub fn dispersion_of(lambda_n: f64, l: f64) -> (f64, f64) {
    let f = lambda_n.sqrt();
    (f, f / l)
}

/// Quadrature in `s = z_plus u^4` on `u in [0, 1]`; returns `(z, weight)` pairs
/// for integrals with respect to `z`.
pub fn height_rule(z_plus: f64) -> Vec<(f64, f64)> {
    let rule = CompositeRule::new(0.0, 1.0, 64, 16);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&u, &w)| {
            let u3 = u * u * u;
            (z_plus - z_plus * u3 * u, w * 4.0 * z_plus * u3)
        })
        .collect()
}

/// Normalized `mu^-1`-weighted residual of the Taylor–Goldstein equation
/// `(rho w')' + (l^2 / lambda)(-g rho' - lambda rho) w = 0`.
pub fn tg_residual(mode: &ModeSolution) -> f64 {
    tg_residual_at(mode, mode.lambda_n)
}

/// The same residual evaluated with a substitute eigenvalue.
pub fn tg_residual_at(mode: &ModeSolution, lambda: f64) -> f64 {
    let eq = mode.chart.equilibrium();
    let l2 = mode.l * mode.l;
    let mut res = 0.0;
    let mut norm = 0.0;
    for (z, wt) in height_rule(eq.z_plus) {
        let rho = eq.rho(z);
        let drho = eq.drho(z);
        let mu = -eq.g * l2 * drho;
        if !(mu > 0.0) {
            continue;
        }
        let t1 = drho * mode.dw(z);
        let t2 = rho * mode.d2w(z);
        let t3 = l2 / lambda * (-eq.g * drho - lambda * rho) * mode.w(z);
        let r = t1 + t2 + t3;
        res += wt * r * r / mu;
        norm += wt * (t1 * t1 + t2 * t2 + t3 * t3) / mu;
    }
    (res / norm).sqrt()
}

/// `int w_a w_b mu dz`.
pub fn weighted_inner(a: &ModeSolution, b: &ModeSolution) -> f64 {
    let eq = a.chart.equilibrium();
    let l2 = a.l * a.l;
    height_rule(eq.z_plus)
        .into_iter()
        .map(|(z, wt)| wt * a.w(z) * b.w(z) * (-eq.g * l2 * eq.drho(z)))
        .sum()
}

/// Normalized orthogonality defect `|<a, b>| / sqrt(<a, a> <b, b>)`.
pub fn orthogonality_defect(a: &ModeSolution, b: &ModeSolution) -> f64 {
    weighted_inner(a, b).abs() / (weighted_inner(a, a) * weighted_inner(b, b)).sqrt()
}

/// Central-difference slope of the miss function at `lambda`.
pub fn miss_slope(chart: &LiouvilleChart, lambda: f64, rel_step: f64) -> Result<f64> {
    let h = rel_step * lambda;
    Ok((shoot_miss(chart, lambda + h)? - shoot_miss(chart, lambda - h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::Equilibrium;

    fn e0_chart() -> LiouvilleChart {
        let eq = Equilibrium::from_nu(2.0, 1.0, 1.0, 1.0).unwrap();
        LiouvilleChart::new(&eq, 1.0).unwrap()
    }

    #[test]
    fn ground_state_of_power_law() {
        // E0 has lambda_1 = 1/2 exactly.
        let chart = e0_chart();
        let spec = eigenvalues(&chart, 3, 1e-12).unwrap();
        assert!((spec.lambdas[0] - 2.0).abs() < 1e-9, "{:?}", spec.lambdas);
        assert!((spec.lambdas[1] - 6.319_428_07).abs() < 1e-6);
        assert!((spec.lambdas[2] - 13.104_427_88).abs() < 1e-6);
    }

    #[test]
    fn counts_below_potential_minimum() {
        let chart = e0_chart();
        assert_eq!(oscillation_count(&chart, 0.1).unwrap(), 0);
        assert!(shoot_miss(&chart, 0.1).unwrap() > 0.0);
        assert!(shoot_miss(&chart, 0.0).is_err());
    }

    #[test]
    fn dispersion_arithmetic() {
        assert_eq!(dispersion_of(0.25, 1.0), (0.5, 0.5));
        assert_eq!(dispersion_of(0.25, 2.0), (0.5, 0.25));
    }
}
