//! Truncated Taylor series arithmetic in one variable.
//!
//! All operations keep a fixed number of coefficients; terms beyond the
//! truncation order are dropped. Used to expand the background profile,
//! the coordinate map and the transformed potential around the vacuum height.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    coeffs: Vec<f64>,
}

impl Series {
    pub fn zeros(len: usize) -> Self {
        Self {
            coeffs: vec![0.0; len],
        }
    }

    pub fn new(coeffs: &[f64], len: usize) -> Self {
        let mut c = vec![0.0; len];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        Self { coeffs: c }
    }

    pub fn constant(value: f64, len: usize) -> Self {
        Self::new(&[value], len)
    }

    /// The series of the identity map `s -> s`.
    pub fn variable(len: usize) -> Self {
        Self::new(&[0.0, 1.0], len)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Value and first two derivatives at `x`.
    pub fn eval_derivs(&self, x: f64) -> (f64, f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        let mut d2p = 0.0;
        for c in self.coeffs.iter().rev() {
            d2p = d2p * x + 2.0 * dp;
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp, d2p)
    }

    pub fn derivative(&self) -> Self {
        let n = self.len();
        let mut c = vec![0.0; n];
        for k in 1..n {
            c[k - 1] = k as f64 * self.coeffs[k];
        }
        Self { coeffs: c }
    }

    /// Antiderivative vanishing at zero (top coefficient truncated).
    pub fn integral(&self) -> Self {
        let n = self.len();
        let mut c = vec![0.0; n];
        for k in 1..n {
            c[k] = self.coeffs[k - 1] / k as f64;
        }
        Self { coeffs: c }
    }

    /// Multiply by `s^shift` (positive) or divide by it (negative; the dropped
    /// low-order coefficients must vanish).
    pub fn shift(&self, shift: isize) -> Self {
        let n = self.len() as isize;
        let mut c = vec![0.0; self.len()];
        for k in 0..n {
            let src = k - shift;
            if (0..n).contains(&src) {
                c[k as usize] = self.coeffs[src as usize];
            }
        }
        Self { coeffs: c }
    }

    pub fn recip(&self) -> Self {
        let a0 = self.coeffs[0];
        assert!(a0 != 0.0, "reciprocal of a series with zero constant term");
        let n = self.len();
        let mut b = vec![0.0; n];
        b[0] = 1.0 / a0;
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.coeffs[j] * b[k - j];
            }
            b[k] = -acc / a0;
        }
        Self { coeffs: b }
    }

    pub fn div(&self, other: &Series) -> Self {
        self * &other.recip()
    }

    /// `self^r` for a positive constant term (Miller's recurrence).
    pub fn powf(&self, r: f64) -> Self {
        let a0 = self.coeffs[0];
        assert!(a0 > 0.0, "real power of a series needs a positive constant term");
        let n = self.len();
        let mut b = vec![0.0; n];
        b[0] = a0.powf(r);
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += ((r + 1.0) * j as f64 - k as f64) * self.coeffs[j] * b[k - j];
            }
            b[k] = acc / (k as f64 * a0);
        }
        Self { coeffs: b }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// `self(inner(s))` for an inner series without constant term.
    pub fn compose(&self, inner: &Series) -> Self {
        assert!(inner.coeff(0) == 0.0, "composition needs inner(0) = 0");
        let n = self.len().max(inner.len());
        let inner = Series::new(inner.coeffs(), n);
        let mut acc = Series::zeros(n);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &inner) + &Series::constant(*c, n);
        }
        acc
    }

    /// Compositional inverse of a series with `g(0) = 0`, `g'(0) != 0`.
    pub fn revert(&self) -> Self {
        let n = self.len();
        let g1 = self.coeff(1);
        assert!(self.coeff(0) == 0.0 && g1 != 0.0, "series is not invertible at 0");
        let id = Series::variable(n);
        let mut nonlinear = self.clone();
        nonlinear.coeffs[1] = 0.0;
        // h = (s - N(h)) / g1, one order gained per sweep.
        let mut h = id.scale(1.0 / g1);
        for _ in 0..n {
            h = (&id - &nonlinear.compose(&h)).scale(1.0 / g1);
        }
        h
    }

    /// Magnitude of the last `count` retained terms evaluated at `x`.
    pub fn tail_magnitude(&self, x: f64, count: usize) -> f64 {
        let n = self.len();
        (n.saturating_sub(count)..n)
            .map(|k| (self.coeffs[k] * x.powi(k as i32)).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let n = self.len().max(rhs.len());
        Series {
            coeffs: (0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let n = self.len().max(rhs.len());
        Series {
            coeffs: (0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect(),
        }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.len().max(rhs.len());
        let mut c = vec![0.0; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n - i) {
                c[i + j] += a * b;
            }
        }
        Series { coeffs: c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).abs() <= tol * (1.0 + y.abs()), "coefficient {k}: {x} vs {y}");
        }
    }

    #[test]
    fn exp_via_powf_matches_factorials() {
        // (1 + s)^r binomial coefficients
        let s = Series::new(&[1.0, 1.0], 8);
        let p = s.powf(0.5);
        let mut expected = vec![1.0];
        for k in 1..8 {
            let prev: f64 = expected[k - 1];
            expected.push(prev * (0.5 - (k as f64 - 1.0)) / k as f64);
        }
        close(p.coeffs(), &expected, 1e-15);
    }

    #[test]
    fn reciprocal_and_division() {
        let a = Series::new(&[2.0, -1.0, 0.5], 10);
        let one = &a * &a.recip();
        close(one.coeffs(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-14);
        let b = Series::new(&[1.0, 3.0], 10);
        let q = b.div(&a);
        close((&q * &a).coeffs(), b.coeffs(), 1e-13);
    }

    #[test]
    fn reversion_of_sine_series_gives_arcsine() {
        let n = 10;
        let mut sin = vec![0.0; n];
        let mut fact = 1.0;
        for k in 1..n {
            fact *= k as f64;
            if k % 2 == 1 {
                let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sin[k] = sign / fact;
            }
        }
        let asin = Series::new(&sin, n).revert();
        close(&asin.coeffs()[..8], &[0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 / 40.0, 0.0, 5.0 / 112.0], 1e-13);
    }

    #[test]
    fn eval_derivs_matches_derivative_series() {
        let a = Series::new(&[0.3, -1.0, 2.0, 0.25, -0.125], 5);
        let (v, d, d2) = a.eval_derivs(0.7);
        assert!((v - a.eval(0.7)).abs() < 1e-15);
        assert!((d - a.derivative().eval(0.7)).abs() < 1e-14);
        assert!((d2 - a.derivative().derivative().eval(0.7)).abs() < 1e-14);
    }
}
