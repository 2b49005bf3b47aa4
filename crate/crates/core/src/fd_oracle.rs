//! Finite-volume discretization of `-(rho w')' + l^2 rho w = Lambda mu w`
//! on `[0, z_plus]`, solved as a symmetric tridiagonal pencil by
//! Sturm-sequence bisection.
//!
//! Cells are uniform in `t = sqrt(z_plus - z)`, which crowds them toward the
//! vacuum end. There the flux coefficient `rho` vanishes, so no boundary
//! condition is imposed at `z_plus`; `w = 0` holds at the ground.

use rayon::prelude::*;

use crate::equilibrium::Equilibrium;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Uniform in `t = sqrt(z_plus - z)`.
    Graded,
    /// Uniform in `z`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdProblem {
    /// Cell centres.
    pub z: Vec<f64>,
    /// Cell widths.
    pub width: Vec<f64>,
    pub diag: Vec<f64>,
    /// `offdiag[i]` couples cells `i` and `i + 1`.
    pub offdiag: Vec<f64>,
    pub weight: Vec<f64>,
}

pub const MIN_CELLS: usize = 4;

pub fn assemble(eq: &Equilibrium, l: f64, n: usize) -> Result<FdProblem> {
    assemble_on(eq, l, n, MeshKind::Graded)
}

pub fn assemble_on(eq: &Equilibrium, l: f64, n: usize, mesh: MeshKind) -> Result<FdProblem> {
    if n < MIN_CELLS {
        return Err(invalid("N", format!("{n} cells; at least {MIN_CELLS} required")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(invalid("l", format!("{l} must be positive")));
    }
    let zp = eq.z_plus;
    let tp = zp.sqrt();
    // Faces from the ground (f = 0) to the vacuum (f = n).
    let face = |f: usize| -> f64 {
        match mesh {
            MeshKind::Graded => {
                let t = tp * (1.0 - f as f64 / n as f64);
                zp - t * t
            }
            MeshKind::Uniform => zp * f as f64 / n as f64,
        }
    };
    let centre = |i: usize| -> f64 {
        match mesh {
            MeshKind::Graded => {
                let t = tp * (1.0 - (i as f64 + 0.5) / n as f64);
                zp - t * t
            }
            MeshKind::Uniform => zp * (i as f64 + 0.5) / n as f64,
        }
    };
    let faces: Vec<f64> = (0..=n).map(face).collect();
    let z: Vec<f64> = (0..n).map(centre).collect();
    let width: Vec<f64> = (0..n).map(|i| faces[i + 1] - faces[i]).collect();

    // Flux coefficient on face f; the ground face sees the Dirichlet value.
    let mut kappa = vec![0.0; n + 1];
    kappa[0] = eq.rho(0.0) / z[0];
    for f in 1..n {
        kappa[f] = eq.rho(faces[f]) / (z[f] - z[f - 1]);
    }
    let l2 = l * l;
    let diag: Vec<f64> = (0..n)
        .map(|i| kappa[i] + kappa[i + 1] + l2 * eq.rho(z[i]) * width[i])
        .collect();
    let offdiag: Vec<f64> = (1..n).map(|f| -kappa[f]).collect();
    let weight: Vec<f64> = (0..n)
        .map(|i| -eq.g * l2 * eq.drho(z[i]) * width[i])
        .collect();
    Ok(FdProblem {
        z,
        width,
        diag,
        offdiag,
        weight,
    })
}

impl FdProblem {
    /// Pencil from explicit arrays.
    pub fn from_arrays(diag: Vec<f64>, offdiag: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if offdiag.len() + 1 != n || weight.len() != n {
            return Err(invalid("offdiag", "array lengths do not match"));
        }
        Ok(Self {
            z: Vec::new(),
            width: Vec::new(),
            diag,
            offdiag,
            weight,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of pencil eigenvalues below `lambda` (inertia of `A - lambda M`).
    pub fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.diag.len() {
            let a = self.diag[i] - lambda * self.weight[i];
            d = if i == 0 {
                a
            } else {
                let b = self.offdiag[i - 1];
                a - b * b / d
            };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (1-based), bisected to absolute width
    /// `1e-12 (1 + Lambda)`.
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.count_below(hi) < k {
            lo = hi;
            hi *= 2.0;
        }
        while hi - lo > 1e-12 * (1.0 + lo) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) < k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an eigenvalue estimate by inverse iteration,
    /// normalized to `w^T M w = 1` with a positive last entry.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        // Shift slightly so the factorization is not exactly singular.
        let sigma = lambda * (1.0 + 1e-13) + 1e-300;
        let sub: Vec<f64> = self.offdiag.clone();
        let main: Vec<f64> = (0..n).map(|i| self.diag[i] - sigma * self.weight[i]).collect();
        let lu = TridiagonalLu::factor(&sub, &main, &sub);
        let mut v = vec![1.0; n];
        for _ in 0..3 {
            let rhs: Vec<f64> = v.iter().zip(&self.weight).map(|(a, m)| a * m).collect();
            v = lu.solve(&rhs);
            let norm = v.iter().zip(&self.weight).map(|(a, m)| a * a * m).sum::<f64>().sqrt();
            let sign = if v[n - 1] < 0.0 { -1.0 } else { 1.0 };
            for a in &mut v {
                *a *= sign / norm;
            }
        }
        v
    }

    /// `a^T M b`.
    pub fn weighted_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weight).map(|((x, y), m)| x * y * m).sum()
    }
}

/// Smallest `k` eigenvalues `Lambda = 1 / lambda` in ascending order.
pub fn eigenvalues_fd(problem: &FdProblem, k: usize) -> Result<Vec<f64>> {
    if k == 0 || k >= problem.len() {
        return Err(invalid("k", format!("{k} must lie in [1, {}]", problem.len() - 1)));
    }
    Ok((1..=k).into_par_iter().map(|j| problem.kth_eigenvalue(j)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

/// Two-level Richardson extrapolation for a second-order scheme.
pub fn richardson(coarse: &[f64], fine: &[f64]) -> Result<Extrapolated> {
    if coarse.len() != fine.len() {
        return Err(invalid(
            "values",
            format!("lengths {} and {} differ", coarse.len(), fine.len()),
        ));
    }
    let values = coarse.iter().zip(fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    let errors = coarse.iter().zip(fine).map(|(c, f)| (f - c).abs() / 3.0).collect();
    Ok(Extrapolated { values, errors })
}

/// Richardson-extrapolated oracle values from meshes of `n` and `2n` cells.
pub fn oracle(eq: &Equilibrium, l: f64, n: usize, k: usize) -> Result<Extrapolated> {
    let (coarse, fine) = rayon::join(
        || assemble(eq, l, n).and_then(|p| eigenvalues_fd(&p, k)),
        || assemble(eq, l, 2 * n).and_then(|p| eigenvalues_fd(&p, k)),
    );
    richardson(&coarse?, &fine?)
}

/// Gaussian elimination with partial pivoting for tridiagonal systems.
struct TridiagonalLu {
    n: usize,
    /// Upper factor: diagonal, first and second superdiagonals.
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    /// Multipliers and row swaps.
    mult: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(sub: &[f64], main: &[f64], sup: &[f64]) -> Self {
        let n = main.len();
        let mut d = main.to_vec();
        let mut du = sup.to_vec();
        du.push(0.0);
        let mut du2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swap = vec![false; n];
        let mut dl = sub.to_vec();
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let m = if d[i] != 0.0 { dl[i] / d[i] } else { 0.0 };
                mult[i] = m;
                d[i + 1] -= m * du[i];
                du2[i] = 0.0;
            } else {
                // Swap rows i and i + 1.
                let m = d[i] / dl[i];
                mult[i] = m;
                swap[i] = true;
                d[i] = dl[i];
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - m * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -m;
                }
            }
            dl[i] = 0.0;
        }
        for v in &mut d {
            if *v == 0.0 {
                *v = f64::MIN_POSITIVE.sqrt();
            }
        }
        Self {
            n,
            u0: d,
            u1: du,
            u2: du2,
            mult,
            swap,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = b[i];
            if i + 1 < n {
                v -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.u2[i] * x[i + 2];
            }
            x[i] = v / self.u0[i];
        }
        x
    }
}
