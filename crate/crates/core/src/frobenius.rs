//! Recessive Frobenius solution at the singular end of
//! `-upsilon'' + (q - Lambda) upsilon = 0`.
//!
//! With `x = zeta_plus - zeta` and `x^2 q = sum_j c_j x^(2j)` (`c_0 = K`), the
//! recessive solution is `upsilon = x^alpha (1 + sum_k a_k x^(2k))` with
//! `alpha = (1 + sqrt(4K + 1)) / 2`.

use crate::error::{invalid, Error, Result};
use crate::liouville::LiouvilleChart;

/// Default truncation order of the seed series.
pub const DEFAULT_ORDER: usize = 12;

/// Relative remainder required before a seed value is trusted.
pub const SEED_TOLERANCE: f64 = 1e-13;

pub fn indicial_exponents(k: f64) -> Result<(f64, f64)> {
    let disc = 4.0 * k + 1.0;
    if !(disc > 0.0) {
        return Err(Error::OscillatorySingularity(disc));
    }
    let root = disc.sqrt();
    Ok((0.5 * (1.0 + root), 0.5 * (1.0 - root)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularSeed {
    pub k: f64,
    /// Step of the series in `x`; the potential only contains even powers.
    pub beta: usize,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub lambda: f64,
    /// `a_0 = 1, a_1, ..., a_M`.
    pub coeffs: Vec<f64>,
    pub order: usize,
}

/// Seed for the chart's potential at spectral parameter `lambda`.
pub fn build_seed(chart: &LiouvilleChart, lambda: f64, order: usize) -> Result<SingularSeed> {
    let series = chart.q_series();
    if order >= series.len() {
        return Err(invalid(
            "order",
            format!("{order} exceeds the {} available potential coefficients", series.len() - 1),
        ));
    }
    build_seed_from_series(series, lambda, order)
}

/// Seed for a potential given directly by `x^2 q = sum c_j x^(2j)`; missing
/// coefficients are zero.
pub fn build_seed_from_series(q_series: &[f64], lambda: f64, order: usize) -> Result<SingularSeed> {
    if order < 2 {
        return Err(invalid("order", format!("{order}; at least 2 required")));
    }
    let k = q_series.first().copied().unwrap_or(0.0);
    let (alpha_plus, alpha_minus) = indicial_exponents(k)?;
    let c = |j: usize| q_series.get(j).copied().unwrap_or(0.0);
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    for m in 1..=order {
        let mf = m as f64;
        let denom = 2.0 * mf * (2.0 * mf + 2.0 * alpha_plus - 1.0);
        if denom == 0.0 {
            return Err(Error::Resonance(m));
        }
        let mut rhs = -lambda * a[m - 1];
        for j in 1..=m {
            rhs += c(j) * a[m - j];
        }
        a[m] = rhs / denom;
    }
    Ok(SingularSeed {
        k,
        beta: 2,
        alpha_plus,
        alpha_minus,
        lambda,
        coeffs: a,
        order,
    })
}

impl SingularSeed {
    /// `y = upsilon / x^alpha` and `dy/dx`.
    pub fn regular(&self, x: f64) -> (f64, f64) {
        let y2 = x * x;
        let mut v = 0.0;
        let mut dv = 0.0;
        for (k, a) in self.coeffs.iter().enumerate().rev() {
            v = v * y2 + a;
            if k > 0 {
                dv = dv * y2 + 2.0 * k as f64 * a;
            }
        }
        (v, dv * x)
    }

    /// Estimated relative truncation error at `x`: ten times the larger of
    /// the last two retained terms.
    pub fn remainder(&self, x: f64) -> f64 {
        let m = self.order;
        let y2 = x * x;
        let last = (self.coeffs[m] * y2.powi(m as i32)).abs();
        let prev = (self.coeffs[m - 1] * y2.powi(m as i32 - 1)).abs();
        let (v, _) = self.regular(x);
        10.0 * last.max(prev) / v.abs().max(f64::MIN_POSITIVE)
    }

    /// Largest offset, found by halving from `start`, at which the remainder
    /// estimate meets `tol`.
    pub fn certified_offset(&self, start: f64, tol: f64) -> f64 {
        let mut delta = start;
        for _ in 0..200 {
            if self.remainder(delta) <= tol {
                return delta;
            }
            delta *= 0.5;
        }
        delta
    }

    /// `upsilon(delta)` and `d upsilon / d zeta` at `zeta = zeta_plus - delta`.
    pub fn seed_eval(&self, delta: f64) -> Result<(f64, f64)> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("{delta} must be positive")));
        }
        if self.remainder(delta) > SEED_TOLERANCE {
            return Err(Error::SeedStep {
                delta,
                suggested: self.certified_offset(delta, SEED_TOLERANCE),
            });
        }
        let (y, dy) = self.regular(delta);
        let xa = delta.powf(self.alpha_plus);
        let upsilon = xa * y;
        let d_dx = xa * (self.alpha_plus * y / delta + dy);
        Ok((upsilon, -d_dx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(indicial_exponents(0.75).unwrap(), (1.5, -0.5));
        assert_eq!(indicial_exponents(0.0).unwrap(), (1.0, 0.0));
        let (p, m) = indicial_exponents(-0.1875).unwrap();
        assert!((p - 0.75).abs() < 1e-15 && (m - 0.25).abs() < 1e-15);
        assert!(matches!(indicial_exponents(-0.3), Err(Error::OscillatorySingularity(_))));
    }

    #[test]
    fn euler_equation_seed_is_a_monomial() {
        let seed = build_seed_from_series(&[0.75], 0.0, 12).unwrap();
        assert!(seed.coeffs[1..].iter().all(|&a| a == 0.0));
        let (u, du) = seed.seed_eval(0.01).unwrap();
        assert!((u - 0.001).abs() < 1e-17);
        assert!((du + 0.15).abs() < 1e-15);
        assert!(seed.seed_eval(0.0).is_err());
    }

    #[test]
    fn first_coefficient_matches_hand_recurrence() {
        let lambda = 3.7;
        let seed = build_seed_from_series(&[0.75, 0.0, 1.0 / 16.0], lambda, 12).unwrap();
        assert!((seed.coeffs[1] + lambda / 8.0).abs() < 1e-15);
        assert!(build_seed_from_series(&[0.75], lambda, 0).is_err());
    }

    #[test]
    fn oversized_offset_reports_suggestion() {
        let seed = build_seed_from_series(&[0.75, 0.0, 1.0 / 16.0], 50.0, 4).unwrap();
        match seed.seed_eval(1.0) {
            Err(Error::SeedStep { suggested, .. }) => {
                assert!(suggested < 1.0);
                assert!(seed.seed_eval(suggested).is_ok());
            }
            other => panic!("expected a step error, got {other:?}"),
        }
    }
}
