//! Chebyshev interpolants on an interval.

use std::f64::consts::PI;

/// Chebyshev–Lobatto points `x_j = cos(j π / n)` mapped to `[a, b]`, in
/// descending order for `j = 0..=n` (so `x_0 = b`).
pub fn lobatto_points(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..=n)
        .map(|j| {
            if j == 0 {
                b
            } else if j == n {
                a
            } else {
                mid + half * (PI * j as f64 / n as f64).cos()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    /// Interpolant through values at `lobatto_points(a, b, n)`.
    pub fn from_lobatto_values(a: f64, b: f64, values: &[f64]) -> Self {
        let n = values.len() - 1;
        let mut coeffs = vec![0.0; n + 1];
        if n == 0 {
            coeffs[0] = values[0];
            return Self { a, b, coeffs };
        }
        let nf = n as f64;
        let table: Vec<f64> = (0..2 * n).map(|m| (PI * m as f64 / nf).cos()).collect();
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, v) in values.iter().enumerate() {
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                // cos(π jk/n) with the product reduced modulo 2n
                let m = (j * k) % (2 * n);
                acc += w * v * table[m];
            }
            let scale = if k == 0 || k == n { 1.0 / nf } else { 2.0 / nf };
            *ck = acc * scale;
        }
        Self { a, b, coeffs }
    }

    /// Interpolate `f` on `n + 1` Lobatto points.
    pub fn fit<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> Self {
        let values: Vec<f64> = lobatto_points(a, b, n).into_iter().map(f).collect();
        Self::from_lobatto_values(a, b, &values)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Drop trailing coefficients below `tol * max |c_k|`.
    pub fn chop(mut self, tol: f64) -> Self {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.abs() <= tol * scale) {
            self.coeffs.pop();
        }
        self
    }

    /// Magnitude of the last few coefficients relative to the largest one;
    /// a cheap resolution indicator.
    pub fn tail_ratio(&self, count: usize) -> f64 {
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(count)..]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()))
            / scale
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + self.coeffs[0]
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self {
                a: self.a,
                b: self.b,
                coeffs: vec![0.0],
            };
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.b - self.a);
        for c in &mut d {
            *c *= scale;
        }
        Self {
            a: self.a,
            b: self.b,
            coeffs: d,
        }
    }
}
