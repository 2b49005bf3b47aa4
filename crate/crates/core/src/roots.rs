//! Bracketed scalar root finding (Brent–Dekker).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("interval [{a:e}, {b:e}] does not bracket a sign change")]
    NotBracketed { a: f64, b: f64 },
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
}

/// Outcome of a bracketed solve: the root estimate, final bracket width and
/// number of function evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub width: f64,
    pub evaluations: usize,
}

/// Brent's method on `[a, b]` with known end values. Stops once the bracket
/// is narrower than `2 * (xtol + 2 eps |x|)`.
pub fn brent<F, E>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, xtol: f64) -> Result<Result<Root, RootError>, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if fa == 0.0 {
        return Ok(Ok(Root { x: a, width: 0.0, evaluations: 0 }));
    }
    if fb == 0.0 {
        return Ok(Ok(Root { x: b, width: 0.0, evaluations: 0 }));
    }
    if fa.signum() == fb.signum() {
        return Ok(Err(RootError::NotBracketed { a, b }));
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    let mut evaluations = 0;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(Ok(Root { x: b, width: (c - b).abs(), evaluations }));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
        evaluations += 1;
    }
    Ok(Err(RootError::NoConvergence(200)))
}

/// Convenience wrapper for infallible functions.
pub fn brent_simple<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<Root, RootError> {
    let fa = f(a);
    let fb = f(b);
    match brent::<_, std::convert::Infallible>(|x| Ok(f(x)), a, b, fa, fb, xtol) {
        Ok(r) => r,
        Err(never) => match never {},
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root_of_two() {
        let r = brent_simple(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_unbracketed_interval() {
        assert!(matches!(
            brent_simple(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(RootError::NotBracketed { .. })
        ));
    }
}
