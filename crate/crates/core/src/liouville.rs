//! Liouville transformation of the weighted vertical-structure equation
//! `-(rho w')' + l^2 rho w = Lambda mu w` to potential form
//! `-upsilon'' + q upsilon = Lambda upsilon`.
//!
//! Internally everything is expressed through `t = sqrt(z_plus - z)` and the
//! distance to the singular end `x = zeta_plus - zeta`, which keeps full
//! relative precision near the vacuum boundary.

use crate::chebyshev::{lobatto_points, Chebyshev};
use crate::equilibrium::Equilibrium;
use crate::error::{invalid, Error, Result};
use crate::quadrature;
use crate::series::Series;

/// Samples in the cached `t -> x` table.
pub const MAP_CACHE_SIZE: usize = 4096;

/// Number of coefficients kept in the series of `x^2 q` in powers of `x^2`.
pub const Q_SERIES_LEN: usize = 32;

/// Below this fraction of `z_plus` the regular part of `q` comes from its series.
const SERIES_SWITCH: f64 = 1e-4;

pub fn singular_coefficient(nu: f64) -> f64 {
    (2.0 * nu - 1.0) * (2.0 * nu - 3.0) / 4.0
}

#[derive(Debug, Clone)]
pub struct LiouvilleChart {
    eq: Equilibrium,
    l: f64,
    zeta_plus: f64,
    k: f64,
    t_max: f64,
    /// Ascending `t` nodes and the matching `x` values.
    table_t: Vec<f64>,
    table_x: Vec<f64>,
    /// `x(t) / t` and its derivative.
    ratio: Chebyshev,
    ratio_dt: Chebyshev,
    /// Coefficients `c_j` of `x^2 q = sum c_j x^(2j)`.
    q_series: Vec<f64>,
    /// `X(s) = x^2 / s` as a series in `s`.
    x_sq_over_s: Series,
}

/// Outcome of the lower-bound certificate `q >= K0 + K1 / x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub k0: f64,
    pub k1: f64,
    pub ok: bool,
}

impl LiouvilleChart {
    pub fn new(eq: &Equilibrium, l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return Err(invalid("l", format!("{l} must be positive")));
        }
        let eq = eq.clone();
        let t_max = eq.z_plus.sqrt();
        let scale = 2.0 * l * eq.g.sqrt();
        let rate = |t: f64| {
            let (p, q) = eq.p_q(t * t);
            scale * (q / p).sqrt()
        };

        let mut table_t = lobatto_points(0.0, t_max, MAP_CACHE_SIZE);
        table_t.reverse();
        table_t[0] = 0.0;
        table_t[MAP_CACHE_SIZE] = t_max;
        let mut table_x = vec![0.0; MAP_CACHE_SIZE + 1];
        let mut acc = 0.0;
        for i in 1..=MAP_CACHE_SIZE {
            let piece = quadrature::integrate(rate, table_t[i - 1], table_t[i], 0.0, 1e-15);
            acc += piece.value;
            table_x[i] = acc;
        }

        // Lobatto points of a coarser degree are a subset of the table.
        let ratio_at = |i: usize| {
            if i == 0 {
                rate(0.0)
            } else {
                table_x[i] / table_t[i]
            }
        };
        let mut degree = 16;
        let ratio = loop {
            let stride = MAP_CACHE_SIZE / degree;
            // Lobatto ordering is descending in t.
            let values: Vec<f64> = (0..=degree).map(|j| ratio_at(MAP_CACHE_SIZE - j * stride)).collect();
            let fit = Chebyshev::from_lobatto_values(0.0, t_max, &values);
            if fit.tail_ratio(3) < 1e-15 || degree == MAP_CACHE_SIZE {
                break fit.chop(1e-17);
            }
            degree *= 2;
        };
        let ratio_dt = ratio.derivative();
        let zeta_plus = t_max * ratio.eval(t_max);

        let k = singular_coefficient(eq.nu);
        let (q_series, x_sq_over_s) = potential_series(&eq, l, k, Q_SERIES_LEN);

        Ok(Self {
            eq,
            l,
            zeta_plus,
            k,
            t_max,
            table_t,
            table_x,
            ratio,
            ratio_dt,
            q_series,
            x_sq_over_s,
        })
    }

    pub fn equilibrium(&self) -> &Equilibrium {
        &self.eq
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn zeta_plus(&self) -> f64 {
        self.zeta_plus
    }

    /// Singular coefficient `K = (2 nu - 1)(2 nu - 3) / 4`.
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn q_series(&self) -> &[f64] {
        &self.q_series
    }

    /// `X(s) = x^2 / s` as a power series in `s`.
    pub fn x_sq_over_s(&self) -> &Series {
        &self.x_sq_over_s
    }

    /// Cached `(t, x)` samples, ascending.
    pub fn map_cache(&self) -> (&[f64], &[f64]) {
        (&self.table_t, &self.table_x)
    }

    /// `dx/dt`.
    pub fn rate(&self, t: f64) -> f64 {
        let (p, q) = self.eq.p_q(t * t);
        2.0 * self.l * self.eq.g.sqrt() * (q / p).sqrt()
    }

    /// `x(t) / t`, smooth up to `t = 0`.
    pub fn ratio(&self, t: f64) -> f64 {
        self.ratio.eval(t)
    }

    pub fn ratio_dt(&self, t: f64) -> f64 {
        self.ratio_dt.eval(t)
    }

    pub fn x_of_t(&self, t: f64) -> f64 {
        t * self.ratio.eval(t)
    }

    /// Inverse of [`x_of_t`](Self::x_of_t) for `0 <= x <= zeta_plus`.
    pub fn t_of_x(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.zeta_plus).contains(&x) {
            return Err(Error::Domain {
                what: "zeta_plus - zeta",
                value: x,
                lo: 0.0,
                hi: self.zeta_plus,
            });
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        if x == self.zeta_plus {
            return Ok(self.t_max);
        }
        let i = self.table_x.partition_point(|&v| v <= x).clamp(1, MAP_CACHE_SIZE);
        let (mut lo, mut hi) = (self.table_t[i - 1], self.table_t[i]);
        let mut t = lo + (hi - lo) * (x - self.table_x[i - 1]) / (self.table_x[i] - self.table_x[i - 1]);
        for _ in 0..50 {
            let f = self.x_of_t(t) - x;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - f / self.rate(t);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 2.0 * f64::EPSILON * t {
                return Ok(next);
            }
            t = next;
        }
        Ok(t)
    }

    pub fn zeta_of_z(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        if z == self.eq.z_plus {
            return Ok(self.zeta_plus);
        }
        Ok(self.zeta_plus - self.x_of_t((self.eq.z_plus - z).sqrt()))
    }

    /// The same map by direct adaptive quadrature of `sqrt(mu / rho)`.
    pub fn zeta_of_z_quadrature(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        let t0 = (self.eq.z_plus - z).sqrt();
        let q = quadrature::integrate(|t| self.rate(t), t0, self.t_max, 0.0, 1e-15);
        Ok(q.value)
    }

    pub fn z_of_zeta(&self, zeta: f64) -> Result<f64> {
        let zeta = self.check_zeta(zeta)?;
        let t = self.t_of_x(self.zeta_plus - zeta)?;
        Ok(self.eq.z_plus - t * t)
    }

    /// Potential at height `z_plus - s` for `s > 0`.
    pub fn q_of_s(&self, s: f64) -> f64 {
        let eq = &self.eq;
        let ([p0, p1, p2], [q0, q1, q2]) = eq.p_q_derivs(s);
        let b = p1 / p0;
        let qq = q1 / q0;
        let a = b + qq;
        let c = (p2 / p0 - b * b) + (q2 / q0 - qq * qq);
        let alpha = 2.0 * eq.nu - 1.0;
        let l2 = self.l * self.l;
        let bracket = l2
            + self.k / (4.0 * s * s)
            + ((eq.nu * a + alpha * b) / 4.0 - alpha * a / 8.0) / s
            + c / 4.0
            - a * a / 16.0
            + a * b / 4.0;
        s * p0 / (eq.g * l2 * q0) * bracket
    }

    pub fn q_of_x(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::SingularPoint);
        }
        let t = self.t_of_x(x)?;
        Ok(self.q_of_s(t * t))
    }

    pub fn q_of_zeta(&self, zeta: f64) -> Result<f64> {
        let zeta = self.check_zeta(zeta)?;
        self.q_of_x(self.zeta_plus - zeta)
    }

    /// `q - K / x^2` at `(t, x(t))`, bounded up to the singular end.
    pub fn q_regular(&self, t: f64, x: f64) -> f64 {
        if t * t < SERIES_SWITCH * self.eq.z_plus {
            let y = x * x;
            self.q_series[1..].iter().rev().fold(0.0, |acc, c| acc * y + c)
        } else {
            self.q_of_s(t * t) - self.k / (x * x)
        }
    }

    /// Certificate of `q >= K0 + K1 / x^2` on a uniform `zeta` grid.
    pub fn verify_lower_bound(&self, grid: usize) -> Result<LowerBound> {
        if grid < 1000 {
            return Err(invalid("grid", format!("{grid} points; at least 1000 required")));
        }
        let k1 = if self.k <= 0.0 { self.k - 1e-6 } else { 0.0 };
        let mut k0 = f64::INFINITY;
        for i in 0..grid {
            let x = self.zeta_plus * (1.0 - i as f64 / grid as f64);
            let t = self.t_of_x(x)?;
            let q = self.q_regular(t, x) + self.k / (x * x);
            k0 = k0.min(q - k1 / (x * x));
        }
        Ok(LowerBound {
            k0,
            k1,
            ok: k1 > -0.25 && k0.is_finite(),
        })
    }

    fn check_z(&self, z: f64) -> Result<()> {
        if !(0.0..=self.eq.z_plus).contains(&z) {
            return Err(Error::Domain {
                what: "z",
                value: z,
                lo: 0.0,
                hi: self.eq.z_plus,
            });
        }
        Ok(())
    }

    /// Accepts `zeta` up to rounding beyond `zeta_plus` and clamps it.
    fn check_zeta(&self, zeta: f64) -> Result<f64> {
        let slack = 1e-12 * self.zeta_plus;
        if !(0.0..=self.zeta_plus + slack).contains(&zeta) {
            return Err(Error::Domain {
                what: "zeta",
                value: zeta,
                lo: 0.0,
                hi: self.zeta_plus,
            });
        }
        Ok(zeta.min(self.zeta_plus))
    }
}

/// Series of `x^2 q` in powers of `x^2`, and of `X(s) = x^2 / s` in `s`.
fn potential_series(eq: &Equilibrium, l: f64, k: f64, len: usize) -> (Vec<f64>, Series) {
    let p = eq.p_series(len);
    let q = eq.q_series(len);
    let s = Series::variable(len);

    // x(s) = 2 l sqrt(g s) sum r_k s^k / (2k + 1) with r = sqrt(Q / P).
    let r = q.div(&p).sqrt();
    let mut mean = Series::zeros(len);
    for kk in 0..len {
        let c = r.coeff(kk) / (2 * kk + 1) as f64;
        mean = &mean + &Series::new(&[c], len).shift(kk as isize);
    }
    let x_sq_over_s = (&mean * &mean).scale(4.0 * eq.g * l * l);

    let b = p.derivative().div(&p);
    let a = &b + &q.derivative().div(&q);
    let c = a.derivative();
    let alpha = 2.0 * eq.nu - 1.0;
    let l2 = l * l;
    // s^2 times the bracket of the potential.
    let linear = &a.scale(eq.nu / 4.0 - alpha / 8.0) + &b.scale(alpha / 4.0);
    let quadratic = &(&c.scale(0.25) - &(&a * &a).scale(1.0 / 16.0)) + &(&a * &b).scale(0.25);
    let bracket = &(&Series::new(&[k / 4.0, 0.0, l2], len) + &(&linear * &s)) + &(&quadratic * &(&s * &s));
    let s_q = &p.div(&q).scale(1.0 / (eq.g * l2)) * &bracket;
    let x_sq_q = &x_sq_over_s * &s_q;

    let y_of_s = &x_sq_over_s * &s;
    let s_of_y = y_of_s.revert();
    let c_y = x_sq_q.compose(&s_of_y);
    (c_y.coeffs().to_vec(), x_sq_over_s)
}
