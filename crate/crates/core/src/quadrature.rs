//! Numerical quadrature: adaptive Gauss–Kronrod (7/15) and Gauss–Legendre rules.

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quadrature {
    if a == b {
        return Quadrature { value: 0.0, error: 0.0 };
    }
    let (v, e) = gk15(&f, a, b);
    // Intervals kept as (a, b, value, error); bisect the worst one.
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    let mut iterations = 0;
    while err > abs_tol.max(rel_tol * total.abs()) && iterations < 2000 {
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty partition");
        let (pa, pb, pv, pe) = parts.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa.min(pb) || mid >= pa.max(pb) {
            parts.push((pa, pb, pv, pe));
            break;
        }
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((pa, mid, v1, e1));
        parts.push((mid, pb, v2, e2));
        iterations += 1;
    }
    // Re-sum to shed accumulated rounding in the running totals.
    let value = parts.iter().map(|p| p.2).sum();
    let error = parts.iter().map(|p| p.3).sum();
    Quadrature { value, error }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule: `panels` equal panels of `order` points.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * width * (xi + 1.0));
                weights.push(0.5 * width * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let q = integrate(|x: f64| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, 1e-13, 1e-13);
        assert!((q.value - 2.0).abs() < 1e-10, "{q:?}");
        let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14);
        assert!((q.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 8, 13] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            // ∫ x^{2n-2} over [-1, 1]
            let exact = 2.0 / (deg as f64);
            assert!((integral - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn composite_rule_integrates_smooth_function() {
        let rule = CompositeRule::new(0.0, 2.0, 8, 10);
        let v = rule.integrate(|x| (-x * x).exp());
        assert!((v - 0.882_081_390_762_421_4).abs() < 1e-14);
    }
}
