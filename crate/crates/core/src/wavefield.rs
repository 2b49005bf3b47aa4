//! Linearized wave fields built from one vertical mode, and the motion of the
//! vacuum boundary they induce.
//!
//! Type 1 is a standing vibration with an unperturbed initial density. Type 2
//! is a progressive wave that starts from a displaced initial density.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::roots::{brent, Root, RootError};
use crate::spectrum::ModeSolution;

/// Largest amplitude accepted for either field.
pub const MAX_EPS: f64 = 0.1;
/// Largest `|eps| nu` accepted for the progressive wave.
pub const MAX_EPS_NU: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Type1,
    Type2,
}

impl WaveKind {
    pub fn label(self) -> &'static str {
        match self {
            WaveKind::Type1 => "1",
            WaveKind::Type2 => "2",
        }
    }
}

/// Amplitude functions of the reduced system at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profiles {
    pub z: f64,
    pub rho: f64,
    pub drho: f64,
    pub w: f64,
    pub dw: f64,
    pub d2w: f64,
    pub u: f64,
    pub delta_p: f64,
    pub d_delta_p: f64,
}

#[derive(Debug, Clone)]
pub struct WaveField<'a> {
    pub mode: &'a ModeSolution,
    pub kind: WaveKind,
    pub eps: f64,
    /// Squared frequency used for the time dependence and the pressure.
    /// Equals the mode's eigenvalue unless deliberately overridden.
    pub lambda: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps.abs() > MAX_EPS {
        return Err(Error::Amplitude(format!("|eps| = {:e} exceeds {MAX_EPS}", eps.abs())));
    }
    Ok(())
}

pub fn type1_field(mode: &ModeSolution, eps: f64) -> Result<WaveField<'_>> {
    check_eps(eps)?;
    Ok(WaveField {
        mode,
        kind: WaveKind::Type1,
        eps,
        lambda: mode.lambda_n,
    })
}

pub fn type2_field(mode: &ModeSolution, eps: f64) -> Result<WaveField<'_>> {
    check_eps(eps)?;
    let nu = mode.chart().equilibrium().nu;
    if eps.abs() * nu > MAX_EPS_NU {
        return Err(Error::Amplitude(format!(
            "|eps| nu = {:e} exceeds {MAX_EPS_NU}",
            eps.abs() * nu
        )));
    }
    Ok(WaveField {
        mode,
        kind: WaveKind::Type2,
        eps,
        lambda: mode.lambda_n,
    })
}

pub fn field(mode: &ModeSolution, kind: WaveKind, eps: f64) -> Result<WaveField<'_>> {
    match kind {
        WaveKind::Type1 => type1_field(mode, eps),
        WaveKind::Type2 => type2_field(mode, eps),
    }
}

impl<'a> WaveField<'a> {
    /// Same field with a substitute squared frequency.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    pub fn omega(&self) -> f64 {
        self.lambda.sqrt()
    }

    pub fn l(&self) -> f64 {
        self.mode.l
    }

    pub fn profiles(&self, z: f64) -> Profiles {
        let eq = self.mode.chart().equilibrium();
        let l2 = self.mode.l * self.mode.l;
        let rho = eq.rho(z);
        let drho = eq.drho(z);
        let w = self.mode.w(z);
        let dw = self.mode.dw(z);
        let d2w = self.mode.d2w(z);
        let c = self.lambda / l2;
        Profiles {
            z,
            rho,
            drho,
            w,
            dw,
            d2w,
            u: dw / self.mode.l,
            delta_p: c * rho * dw,
            d_delta_p: c * (drho * dw + rho * d2w),
        }
    }

    /// Horizontal and temporal factors `(cos part, sin part)` multiplying
    /// `u` and `w`.
    fn phases(&self, t: f64, x: f64) -> (f64, f64) {
        let lx = self.mode.l * x;
        let wt = self.omega() * t;
        match self.kind {
            WaveKind::Type1 => {
                let s = wt.sin();
                (lx.cos() * s, lx.sin() * s)
            }
            WaveKind::Type2 => ((lx - wt).cos() - lx.cos(), (lx - wt).sin() - lx.sin()),
        }
    }

    /// Factor multiplying the pressure and density amplitudes.
    fn pressure_phase(&self, t: f64, x: f64) -> f64 {
        let lx = self.mode.l * x;
        let wt = self.omega() * t;
        match self.kind {
            WaveKind::Type1 => lx.sin() * wt.sin(),
            WaveKind::Type2 => (lx - wt).sin(),
        }
    }

    pub fn xi1(&self, t: f64, x: f64, z: f64) -> f64 {
        self.eps * self.mode.u(z) * self.phases(t, x).0
    }

    pub fn xi3(&self, t: f64, x: f64, z: f64) -> f64 {
        self.eps * self.mode.w(z) * self.phases(t, x).1
    }

    pub fn delta_p(&self, t: f64, x: f64, z: f64) -> f64 {
        self.eps * self.profiles(z).delta_p * self.pressure_phase(t, x)
    }

    /// Density perturbation `-(rho' w)` times the travelling or standing phase.
    pub fn delta_rho(&self, t: f64, x: f64, z: f64) -> f64 {
        let eq = self.mode.chart().equilibrium();
        -self.eps * eq.drho(z) * self.mode.w(z) * self.pressure_phase(t, x)
    }

    /// Density perturbation written with the unreduced bracket
    /// `l rho u - (rho w)'`.
    pub fn delta_rho_bracket(&self, t: f64, x: f64, z: f64) -> f64 {
        let p = self.profiles(z);
        let bracket = self.mode.l * p.rho * p.u - (p.drho * p.w + p.rho * p.dw);
        self.eps * bracket * self.pressure_phase(t, x)
    }

    pub fn initial_delta_rho(&self, x: f64, z: f64) -> f64 {
        match self.kind {
            WaveKind::Type1 => 0.0,
            WaveKind::Type2 => self.delta_rho_bracket(0.0, x, z),
        }
    }

    /// Initial density `rho + delta rho|_{t=0}`.
    pub fn initial_density(&self, x: f64, z: f64) -> f64 {
        self.mode.chart().equilibrium().rho(z) + self.initial_delta_rho(x, z)
    }

    /// Stream function with `xi1 = d psi / dz` and `xi3 = -d psi / dx`.
    pub fn psi(&self, t: f64, x: f64, z: f64) -> f64 {
        self.eps / self.mode.l * self.mode.w(z) * self.stream_phase(t, x)
    }

    fn stream_phase(&self, t: f64, x: f64) -> f64 {
        self.phases(t, x).0
    }

    /// `d xi1 / dx + d xi3 / dz` from the analytic x-derivative.
    pub fn divergence(&self, t: f64, x: f64, z: f64) -> f64 {
        let lx = self.mode.l * x;
        let wt = self.omega() * t;
        let dcos_dx = match self.kind {
            WaveKind::Type1 => -self.mode.l * lx.sin() * wt.sin(),
            WaveKind::Type2 => -self.mode.l * ((lx - wt).sin() - lx.sin()),
        };
        self.eps * (self.mode.u(z) * dcos_dx + self.mode.dw(z) * self.phases(t, x).1)
    }

    /// Terms of the linearized stream-function equation
    /// `rho psi_tt,xx + rho psi_tt,zz + rho' psi_tt,z - g rho' psi_xx - g d_x(delta rho|_{t=0})`.
    fn stream_terms(&self, t: f64, x: f64, z: f64) -> [f64; 5] {
        let eq = self.mode.chart().equilibrium();
        let l = self.mode.l;
        let p = self.profiles(z);
        let lx = l * x;
        let wt = self.omega() * t;
        let c = self.stream_phase(t, x);
        let c_tt = match self.kind {
            WaveKind::Type1 => -self.lambda * lx.cos() * wt.sin(),
            WaveKind::Type2 => -self.lambda * (lx - wt).cos(),
        };
        let k = self.eps / l;
        let forcing = match self.kind {
            WaveKind::Type1 => 0.0,
            WaveKind::Type2 => {
                let bracket = l * p.rho * p.u - (p.drho * p.w + p.rho * p.dw);
                -eq.g * self.eps * bracket * l * lx.cos()
            }
        };
        [
            k * p.rho * (-l * l * p.w) * c_tt,
            k * p.rho * p.d2w * c_tt,
            k * p.drho * p.dw * c_tt,
            -eq.g * p.drho * k * (-l * l * p.w) * c,
            forcing,
        ]
    }

    pub fn stream_residual(&self, t: f64, x: f64, z: f64) -> (f64, f64) {
        let terms = self.stream_terms(t, x, z);
        (terms.iter().sum(), terms.iter().map(|v| v.abs()).sum())
    }
}

/// Largest scaled residual of each linearized equation over a sample set.
/// Every entry is `max |residual| / max (sum of |terms|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// `-l u + w' = 0`.
    pub continuity: f64,
    /// `-lambda rho u + l dP = 0`.
    pub horizontal: f64,
    /// `-lambda rho w - g rho' w + dP' = 0`.
    pub vertical: f64,
    pub stream: f64,
    /// Largest sampled `|div xi|`.
    pub divergence: f64,
    pub samples: usize,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.continuity.max(self.horizontal).max(self.vertical).max(self.stream)
    }
}

/// Low-discrepancy points in the unit cube (additive recurrence).
pub fn unit_samples(count: usize) -> Vec<[f64; 3]> {
    let phi: f64 = 1.220_744_084_605_759_5;
    let a = [1.0 / phi, 1.0 / (phi * phi), 1.0 / (phi * phi * phi)];
    (0..count)
        .map(|i| {
            let n = i as f64 + 0.5;
            [(n * a[0]).fract(), (n * a[1]).fract(), (n * a[2]).fract()]
        })
        .collect()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Samples cover one horizontal wavelength, one period and the whole column.
pub fn residual_linear(field: &WaveField, samples: usize) -> ResidualReport {
    let eq = field.mode.chart().equilibrium();
    let l = field.mode.l;
    let period = 2.0 * std::f64::consts::PI / field.omega();
    let wavelength = 2.0 * std::f64::consts::PI / l;
    let points = unit_samples(samples.max(1));
    let per_point: Vec<[f64; 9]> = points
        .par_iter()
        .map(|&[a, b, c]| {
            let z = eq.z_plus * (1.0 - c * c);
            let (t, x) = (a * period, b * wavelength);
            let p = field.profiles(z);
            let cont = [-l * p.u, p.dw];
            let horiz = [-field.lambda * p.rho * p.u, l * p.delta_p];
            let vert = [-field.lambda * p.rho * p.w, -eq.g * p.drho * p.w, p.d_delta_p];
            let (sr, ss) = field.stream_residual(t, x, z);
            let sum = |v: &[f64]| (v.iter().sum::<f64>().abs(), v.iter().map(|x| x.abs()).sum::<f64>());
            let (cr, cs) = sum(&cont);
            let (hr, hs) = sum(&horiz);
            let (vr, vs) = sum(&vert);
            [cr, cs, hr, hs, vr, vs, sr.abs(), ss, field.divergence(t, x, z).abs()]
        })
        .collect();
    let mut m = [0.0f64; 9];
    for row in &per_point {
        for (acc, v) in m.iter_mut().zip(row) {
            *acc = acc.max(*v);
        }
    }
    ResidualReport {
        continuity: ratio(m[0], m[1]),
        horizontal: ratio(m[2], m[3]),
        vertical: ratio(m[4], m[5]),
        stream: ratio(m[6], m[7]),
        divergence: m[8],
        samples: per_point.len(),
    }
}

/// Eulerian vacuum boundary on a `(t, x)` grid. Rows follow `t_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySurface {
    pub kind: WaveKind,
    pub eps: f64,
    pub z_plus: f64,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    /// First-order surface for comparison.
    pub approx: Vec<Vec<f64>>,
    /// Initial domain top at each `x_grid` point (progressive wave only).
    pub static_profile: Option<Vec<f64>>,
}

impl BoundarySurface {
    /// `sup |z - approx|` over the grid.
    pub fn max_deviation(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.approx)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()))
            .fold(0.0, f64::max)
    }

    /// Range of the surface height over the grid.
    pub fn extent(&self) -> (f64, f64) {
        self.z
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(crate::error::invalid(name, "must be a non-empty list of finite values"));
    }
    Ok(())
}

/// Solves `f(x) = target` for increasing `f` by Newton steps kept inside a
/// bracket, falling back to bisection.
fn monotone_newton<F>(f: F, target: f64, mut lo: f64, mut hi: f64) -> std::result::Result<f64, RootError>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo > target || fhi < target {
        return Err(RootError::NotBracketed { a: lo, b: hi });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, d) = f(x);
        let r = v - target;
        if r == 0.0 {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - r / d;
        let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(RootError::NoConvergence(200))
}

pub fn surface_type1(mode: &ModeSolution, eps: f64, t_grid: &[f64], x_grid: &[f64]) -> Result<BoundarySurface> {
    check_eps(eps)?;
    check_grid("t_grid", t_grid)?;
    check_grid("x_grid", x_grid)?;
    let z_plus = mode.chart().equilibrium().z_plus;
    let l = mode.l;
    let u_top = mode.u(z_plus);
    let w_top = mode.w(z_plus);
    if !(eps.abs() * l * u_top.abs() < 1.0) {
        return Err(Error::Amplitude(format!(
            "|eps| l |u(z+)| = {:e} >= 1; the horizontal map is not monotone",
            eps.abs() * l * u_top.abs()
        )));
    }
    let omega = mode.lambda_n.sqrt();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = t_grid
        .par_iter()
        .map(|&t| {
            let st = (omega * t).sin();
            let a = eps * u_top * st;
            let map = |x: f64| (x + a * (l * x).cos(), 1.0 - a * l * (l * x).sin());
            let mut zs = Vec::with_capacity(x_grid.len());
            let mut approx = Vec::with_capacity(x_grid.len());
            for &xe in x_grid {
                let pad = a.abs() * (1.0 + 1e-12) + 1e-300;
                let x = monotone_newton(map, xe, xe - pad, xe + pad)
                    .map_err(|source| Error::Threshold { x: xe, source })?;
                zs.push(z_plus + eps * w_top * (l * x).sin() * st);
                approx.push(z_plus + eps * (l * xe).sin() * st);
            }
            Ok((zs, approx))
        })
        .collect::<Result<_>>()?;
    let (z, approx) = rows.into_iter().unzip();
    Ok(BoundarySurface {
        kind: WaveKind::Type1,
        eps,
        z_plus,
        x_grid: x_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        z,
        approx,
        static_profile: None,
    })
}

/// Depth below `z_plus` of the initial domain top where `eps sin(lx) = e`.
///
/// Positivity of the initial density is `s + e w(z_plus - s) Q/P (s) > 0`
/// after multiplying through by `s`; the first sign change from the vacuum
/// end is located and refined.
pub fn threshold_depth(mode: &ModeSolution, e: f64) -> std::result::Result<f64, RootError> {
    if e >= 0.0 {
        return Ok(0.0);
    }
    let eq = mode.chart().equilibrium();
    let z_plus = eq.z_plus;
    let h = |s: f64| {
        let (p, q) = eq.p_q(s);
        s + e * mode.w(z_plus - s) * q / p
    };
    let step = 0.125 * e.abs() * eq.nu.max(1.0);
    let mut lo = 0.0;
    let mut flo = h(0.0);
    if flo >= 0.0 {
        return Ok(0.0);
    }
    let mut hi = step;
    loop {
        let hi_c = hi.min(z_plus);
        let fhi = h(hi_c);
        if fhi > 0.0 {
            let tol = 1e-15 * z_plus;
            let root: Root = brent(|s| Ok::<_, ()>(h(s)), lo, hi_c, flo, fhi, tol).unwrap()?;
            return Ok(root.x);
        }
        if hi_c >= z_plus {
            return Err(RootError::NotBracketed { a: 0.0, b: z_plus });
        }
        lo = hi_c;
        flo = fhi;
        hi += step;
    }
}

/// Initial domain top `Z(x)`.
pub fn domain_top(mode: &ModeSolution, eps: f64, x: f64) -> Result<f64> {
    let z_plus = mode.chart().equilibrium().z_plus;
    let e = eps * (mode.l * x).sin();
    let s = threshold_depth(mode, e).map_err(|source| Error::Threshold { x, source })?;
    Ok(z_plus - s)
}

pub fn surface_type2(mode: &ModeSolution, eps: f64, t_grid: &[f64], x_grid: &[f64]) -> Result<BoundarySurface> {
    let field = type2_field(mode, eps)?;
    check_grid("t_grid", t_grid)?;
    check_grid("x_grid", x_grid)?;
    let eq = mode.chart().equilibrium();
    let z_plus = eq.z_plus;
    let nu = eq.nu;
    let l = mode.l;
    let omega = field.omega();
    let static_profile = x_grid
        .par_iter()
        .map(|&x| domain_top(mode, eps, x))
        .collect::<Result<Vec<_>>>()?;
    // Bound on the horizontal shift over the disturbed layer.
    let depth = 2.0 * eps.abs() * nu + 1e-12 * z_plus;
    let u_bound = (0..=64)
        .map(|i| mode.u(z_plus - depth * i as f64 / 64.0).abs())
        .fold(0.0, f64::max);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = t_grid
        .par_iter()
        .map(|&t| {
            let wt = omega * t;
            let material = |x: f64| -> Result<(f64, f64)> {
                let top = domain_top(mode, eps, x)?;
                let lx = l * x;
                let xe = x + eps * mode.u(top) * ((lx - wt).cos() - lx.cos());
                let ze = top + eps * mode.w(top) * ((lx - wt).sin() - lx.sin());
                Ok((xe, ze))
            };
            let mut zs = Vec::with_capacity(x_grid.len());
            let mut approx = Vec::with_capacity(x_grid.len());
            for &xe in x_grid {
                let mut pad = 2.5 * eps.abs() * u_bound + 1e-12 * (1.0 + xe.abs());
                let f = |x: f64| material(x).map(|(a, _)| a - xe);
                let (a, b, fa, fb) = loop {
                    let (a, b) = (xe - pad, xe + pad);
                    let (fa, fb) = (f(a)?, f(b)?);
                    if fa <= 0.0 && fb >= 0.0 {
                        break (a, b, fa, fb);
                    }
                    pad *= 2.0;
                    if pad > 1e3 * (1.0 + xe.abs()) {
                        return Err(Error::Threshold {
                            x: xe,
                            source: RootError::NotBracketed { a, b },
                        });
                    }
                };
                let tol = 1e-15 * (1.0 + xe.abs());
                let root = brent(f, a, b, fa, fb, tol)?.map_err(|source| Error::Threshold { x: xe, source })?;
                zs.push(material(root.x)?.1);
                let lxe = l * xe;
                approx.push(z_plus + (eps * nu * lxe.sin()).min(0.0) + eps * ((lxe - wt).sin() - lxe.sin()));
            }
            Ok((zs, approx))
        })
        .collect::<Result<_>>()?;
    let (z, approx) = rows.into_iter().unzip();
    Ok(BoundarySurface {
        kind: WaveKind::Type2,
        eps,
        z_plus,
        x_grid: x_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        z,
        approx,
        static_profile: Some(static_profile),
    })
}

pub fn surface(mode: &ModeSolution, kind: WaveKind, eps: f64, t_grid: &[f64], x_grid: &[f64]) -> Result<BoundarySurface> {
    match kind {
        WaveKind::Type1 => surface_type1(mode, eps, t_grid, x_grid),
        WaveKind::Type2 => surface_type2(mode, eps, t_grid, x_grid),
    }
}

/// Evenly spaced grid of `n` points on `[0, max]`.
pub fn uniform_grid(n: usize, max: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect(),
    }
}
