//! Barotropic background state touching vacuum at `z = z_plus`.
//!
//! The density is `rho(z) = C s^nu P(s)` with `s = z_plus - z` and
//! `P(s) = 1 + c_1 s + c_2 s^2 + ...`. Everything downstream is written in
//! terms of `P` and `Q(s) = nu P(s) + s P'(s)`, for which
//! `drho/dz = -C s^(nu - 1) Q(s)`.

use crate::error::{invalid, Error, Result};
use crate::quadrature;
use crate::series::Series;

/// Largest number of correction coefficients accepted by [`Equilibrium::make_perturbed`].
pub const MAX_CORRECTION_TERMS: usize = 8;

/// Number of grid points used to validate perturbed profiles.
const PROFILE_GRID: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub gamma: f64,
    pub a: f64,
    pub g: f64,
    pub z_plus: f64,
    pub nu: f64,
    pub c_rho: f64,
    /// Coefficients `(c_1, c_2, ...)` of the correction `Lambda(s)`.
    pub lambda_series: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundSample {
    pub z: f64,
    pub rho: f64,
    pub drho: f64,
    pub pressure: f64,
    /// Squared buoyancy frequency; `None` outside `[0, z_plus)`.
    pub n_sq: Option<f64>,
    /// Density scale height; `None` outside `[0, z_plus)`.
    pub scale_height: Option<f64>,
}

impl Equilibrium {
    pub fn make_polytropic(gamma: f64, a: f64, g: f64, z_plus: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma < 2.0) {
            return Err(invalid("gamma", format!("{gamma} is not in (1, 2)")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid("A", format!("{a} must be positive")));
        }
        if !(g > 0.0 && g.is_finite()) {
            return Err(invalid("g", format!("{g} must be positive")));
        }
        if !(z_plus > 0.0 && z_plus.is_finite()) {
            return Err(invalid("z_plus", format!("{z_plus} must be positive and finite")));
        }
        let nu = 1.0 / (gamma - 1.0);
        let c_rho = ((gamma - 1.0) * g / (a * gamma)).powf(nu);
        Ok(Self {
            gamma,
            a,
            g,
            z_plus,
            nu,
            c_rho,
            lambda_series: Vec::new(),
        })
    }

    /// Pure power law with given `nu`, `g`, `C` and `z_plus`; `A` is derived.
    pub fn from_nu(nu: f64, g: f64, c_rho: f64, z_plus: f64) -> Result<Self> {
        if !(nu > 1.0 && nu.is_finite()) {
            return Err(invalid("nu", format!("{nu} must exceed 1")));
        }
        if !(c_rho > 0.0 && c_rho.is_finite()) {
            return Err(invalid("C", format!("{c_rho} must be positive")));
        }
        let gamma = 1.0 + 1.0 / nu;
        let a = (gamma - 1.0) * g / (gamma * c_rho.powf(1.0 / nu));
        let mut eq = Self::make_polytropic(gamma, a, g, z_plus)?;
        // Keep the requested values exactly rather than their round trip.
        eq.nu = nu;
        eq.c_rho = c_rho;
        Ok(eq)
    }

    /// Same density shape times `(1 + Lambda(s))`.
    pub fn make_perturbed(&self, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() > MAX_CORRECTION_TERMS {
            return Err(invalid(
                "lambda_series",
                format!("{} coefficients given, at most {MAX_CORRECTION_TERMS} supported", coeffs.len()),
            ));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(invalid("lambda_series", format!("non-finite coefficient {c}")));
        }
        let mut eq = self.clone();
        eq.lambda_series = coeffs.to_vec();
        while eq.lambda_series.last() == Some(&0.0) {
            eq.lambda_series.pop();
        }
        // Walk down from the vacuum end so the reported point is the first
        // place the profile goes wrong.
        for i in 1..=PROFILE_GRID {
            let s = eq.z_plus * i as f64 / PROFILE_GRID as f64;
            let (p, q) = eq.p_q(s);
            if p <= 0.0 {
                return Err(Error::InvalidProfile {
                    z: eq.z_plus - s,
                    reason: format!("density factor 1 + Lambda(s) = {p:e} is not positive"),
                });
            }
            if q <= 0.0 {
                return Err(Error::InvalidProfile {
                    z: eq.z_plus - s,
                    reason: "density is not strictly decreasing".into(),
                });
            }
        }
        Ok(eq)
    }

    pub fn is_pure(&self) -> bool {
        self.lambda_series.is_empty()
    }

    /// `P(s)` and `Q(s) = nu P + s P'`.
    pub fn p_q(&self, s: f64) -> (f64, f64) {
        let mut p = 1.0;
        let mut q = self.nu;
        let mut sk = 1.0;
        for (k, c) in self.lambda_series.iter().enumerate() {
            sk *= s;
            p += c * sk;
            q += (self.nu + (k + 1) as f64) * c * sk;
        }
        (p, q)
    }

    /// `P, P', P''` and `Q, Q', Q''` with respect to `s`.
    pub fn p_q_derivs(&self, s: f64) -> ([f64; 3], [f64; 3]) {
        let mut p = [1.0, 0.0, 0.0];
        let mut q = [self.nu, 0.0, 0.0];
        let mut prev1 = 0.0; // s^(k-1)
        let mut cur = 1.0; // s^k
        for (i, c) in self.lambda_series.iter().enumerate() {
            let k = (i + 1) as f64;
            let prev2 = prev1;
            prev1 = cur;
            cur *= s;
            let d1 = k * prev1;
            let d2 = if i == 0 { 0.0 } else { k * (k - 1.0) * prev2 };
            let qc = (self.nu + k) * c;
            p[0] += c * cur;
            p[1] += c * d1;
            p[2] += c * d2;
            q[0] += qc * cur;
            q[1] += qc * d1;
            q[2] += qc * d2;
        }
        (p, q)
    }

    /// `P` as a truncated series of length `len`.
    pub fn p_series(&self, len: usize) -> Series {
        let mut c = vec![1.0];
        c.extend_from_slice(&self.lambda_series);
        Series::new(&c, len)
    }

    pub fn q_series(&self, len: usize) -> Series {
        let mut c = vec![self.nu];
        for (k, ck) in self.lambda_series.iter().enumerate() {
            c.push((self.nu + (k + 1) as f64) * ck);
        }
        Series::new(&c, len)
    }

    pub fn rho(&self, z: f64) -> f64 {
        let s = self.z_plus - z;
        if s <= 0.0 {
            return 0.0;
        }
        self.c_rho * s.powf(self.nu) * self.p_q(s).0
    }

    pub fn drho(&self, z: f64) -> f64 {
        let s = self.z_plus - z;
        if s <= 0.0 {
            return 0.0;
        }
        -self.c_rho * s.powf(self.nu - 1.0) * self.p_q(s).1
    }

    /// Background pressure, zero at and above the vacuum height.
    pub fn pressure(&self, z: f64) -> f64 {
        let s = self.z_plus - z;
        if s <= 0.0 {
            return 0.0;
        }
        if self.is_pure() {
            return self.a * self.rho(z).powf(self.gamma);
        }
        // P(s) = g C ∫_0^s σ^ν P(σ) dσ; σ = τ² keeps the integrand smooth.
        let nu = self.nu;
        let q = quadrature::integrate(
            |tau: f64| {
                let sigma = tau * tau;
                2.0 * tau * sigma.powf(nu) * self.p_q(sigma).0
            },
            0.0,
            s.sqrt(),
            0.0,
            1e-14,
        );
        self.g * self.c_rho * q.value
    }

    /// `N^2 = -(g / rho) drho/dz` on `[0, z_plus)`.
    pub fn buoyancy_sq(&self, z: f64) -> Result<f64> {
        let s = self.support_offset(z)?;
        let (p, q) = self.p_q(s);
        Ok(self.g * q / (p * s))
    }

    /// `H = (-d log rho / dz)^-1` on `[0, z_plus)`.
    pub fn scale_height(&self, z: f64) -> Result<f64> {
        let s = self.support_offset(z)?;
        let (p, q) = self.p_q(s);
        Ok(s * p / q)
    }

    fn support_offset(&self, z: f64) -> Result<f64> {
        if !(z >= 0.0 && z < self.z_plus) {
            return Err(Error::OutOfSupport {
                z,
                z_plus: self.z_plus,
            });
        }
        Ok(self.z_plus - z)
    }

    pub fn eval_background(&self, z: f64) -> Result<BackgroundSample> {
        if !(z >= 0.0) {
            return Err(Error::Domain {
                what: "z",
                value: z,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(BackgroundSample {
            z,
            rho: self.rho(z),
            drho: self.drho(z),
            pressure: self.pressure(z),
            n_sq: self.buoyancy_sq(z).ok(),
            scale_height: self.scale_height(z).ok(),
        })
    }

    /// `mu(z) = -g l^2 drho/dz`.
    pub fn weight_mu(&self, l: f64, z: f64) -> Result<f64> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(invalid("l", format!("{l} must be positive")));
        }
        if !(0.0..=self.z_plus).contains(&z) {
            return Err(Error::Domain {
                what: "z",
                value: z,
                lo: 0.0,
                hi: self.z_plus,
            });
        }
        Ok(-self.g * l * l * self.drho(z))
    }

    /// Limit of `d(dP/drho)/dz` as `z -> z_plus`.
    ///
    /// `dP/drho = g s P / Q`, so the limit is `-g (d/ds)(s P/Q)` at `s = 0`,
    /// read off the series coefficient.
    pub fn vacuum_slope(&self) -> f64 {
        let len = 3;
        let ratio = self.p_series(len).div(&self.q_series(len));
        -self.g * ratio.coeff(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e0() -> Equilibrium {
        Equilibrium::make_polytropic(1.5, 1.0 / 3.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn polytropic_constants() {
        let eq = e0();
        assert!((eq.nu - 2.0).abs() < 1e-15);
        assert!((eq.c_rho - 1.0).abs() < 1e-15);
        assert_eq!(eq.rho(1.0), 0.0);
        let eq = Equilibrium::make_polytropic(4.0 / 3.0, 1.0, 1.0, 1.0).unwrap();
        assert!((eq.nu - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters_by_name() {
        let err = Equilibrium::make_polytropic(2.5, 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("gamma"));
        let err = Equilibrium::make_polytropic(1.5, 1.0, -1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("`g`"));
    }

    #[test]
    fn background_sample_values() {
        let b = e0().eval_background(0.5).unwrap();
        assert!((b.rho - 0.25).abs() < 1e-15);
        assert!((b.drho + 1.0).abs() < 1e-15);
        assert!((b.n_sq.unwrap() - 4.0).abs() < 1e-14);
        assert!((b.pressure - 0.25f64.powf(1.5) / 3.0).abs() < 1e-15);
        assert!((b.scale_height.unwrap() - 0.25).abs() < 1e-15);
        let top = e0().eval_background(1.0).unwrap();
        assert_eq!((top.rho, top.pressure, top.n_sq), (0.0, 0.0, None));
        assert!(matches!(e0().buoyancy_sq(1.0), Err(Error::OutOfSupport { .. })));
    }

    #[test]
    fn weight_values() {
        let eq = e0();
        assert!((eq.weight_mu(1.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(eq.weight_mu(1.0, 1.0).unwrap(), 0.0);
        assert!((eq.weight_mu(2.0, 0.0).unwrap() - 8.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_slope_values() {
        assert!((e0().vacuum_slope() + 0.5).abs() < 1e-15);
        let eq = Equilibrium::from_nu(3.0, 2.0, 1.0, 1.0).unwrap();
        assert!((eq.vacuum_slope() + 2.0 / 3.0).abs() < 1e-15);
        let p = e0().make_perturbed(&[0.4, -0.1]).unwrap();
        assert!((p.vacuum_slope() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn perturbed_profiles() {
        let eq = e0();
        assert_eq!(eq.make_perturbed(&[]).unwrap(), eq);
        let p = eq.make_perturbed(&[0.1]).unwrap();
        assert!((p.rho(0.5) - 0.25 * 1.05).abs() < 1e-15);
        match eq.make_perturbed(&[-3.0]) {
            // Q = 2 - 9s turns negative at s = 2/9, before P = 1 - 3s does at s = 1/3.
            Err(Error::InvalidProfile { z, .. }) => assert!((z - 7.0 / 9.0).abs() < 1e-3, "z = {z}"),
            other => panic!("expected invalid profile, got {other:?}"),
        }
    }

    #[test]
    fn derivatives_match_series() {
        let p = e0().make_perturbed(&[0.3, -0.2, 0.05]).unwrap();
        let s = 0.37;
        let (pd, qd) = p.p_q_derivs(s);
        let (p0, p1, p2) = p.p_series(5).eval_derivs(s);
        let (q0, q1, q2) = p.q_series(5).eval_derivs(s);
        for (a, b) in pd.iter().chain(&qd).zip([p0, p1, p2, q0, q1, q2]) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn perturbed_pressure_matches_closed_form() {
        // P(s) = 1 + 0.3 s: ∫ s^2 (1 + 0.3 s) = s^3/3 + 0.3 s^4/4
        let p = e0().make_perturbed(&[0.3]).unwrap();
        let s: f64 = 0.7;
        let exact = s.powi(3) / 3.0 + 0.3 * s.powi(4) / 4.0;
        assert!((p.pressure(1.0 - s) - exact).abs() < 1e-15);
    }
}
