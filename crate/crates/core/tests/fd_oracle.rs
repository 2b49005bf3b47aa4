mod common;

use common::{e0, power_law, rel};
use gravmodes::liouville::LiouvilleChart;
use gravmodes::spectrum::eigenvalues;
use gravmodes::fd_oracle::{assemble, assemble_on, eigenvalues_fd, richardson, FdProblem, MeshKind};

#[test]
fn small_pencil_structure() {
    let p = assemble(&e0(), 1.0, 8).unwrap();
    assert_eq!(p.len(), 8);
    assert_eq!(p.offdiag.len(), 7);
    for i in 0..8 {
        let left = if i > 0 { p.offdiag[i - 1].abs() } else { 0.0 };
        let right = if i < 7 { p.offdiag[i].abs() } else { 0.0 };
        assert!(p.diag[i] - left - right > 0.0, "row {i}");
        assert!(p.weight[i] > 0.0);
    }
    assert!(p.offdiag.iter().all(|&b| b < 0.0));
    assert!(assemble(&e0(), 1.0, 3).is_err());
    assert!(assemble(&e0(), 0.0, 8).is_err());
}

#[test]
fn constant_coefficient_laplacian() {
    let n = 400;
    let h = 1.0 / n as f64;
    let m = n - 1;
    let p = FdProblem::from_arrays(vec![2.0 / (h * h); m], vec![-1.0 / (h * h); m - 1], vec![1.0; m]).unwrap();
    let vals = eigenvalues_fd(&p, 3).unwrap();
    for (k, v) in vals.iter().enumerate() {
        let exact = ((k + 1) as f64 * std::f64::consts::PI).powi(2);
        let bound = exact * exact * h * h / 10.0;
        assert!((v - exact).abs() <= bound, "{k} {v}");
    }
    assert!(FdProblem::from_arrays(vec![1.0; 3], vec![0.0; 3], vec![1.0; 3]).is_err());
}

fn det(a: &[[f64; 4]; 4]) -> f64 {
    let mut total = 0.0;
    let mut perm = [0usize, 1, 2, 3];
    // Heap's algorithm over all 24 permutations with running parity.
    let mut c = [0usize; 4];
    let mut sign = 1.0;
    let term = |p: &[usize; 4]| (0..4).map(|i| a[i][p[i]]).product::<f64>();
    total += sign * term(&perm);
    let mut i = 0;
    while i < 4 {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            total += sign * term(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

#[test]
fn four_cell_pencil_against_determinant_scan() {
    let p = assemble(&e0(), 1.0, 4).unwrap();
    let char_poly = |lam: f64| {
        let mut a = [[0.0; 4]; 4];
        for i in 0..4 {
            a[i][i] = p.diag[i] - lam * p.weight[i];
            if i < 3 {
                a[i][i + 1] = p.offdiag[i];
                a[i + 1][i] = p.offdiag[i];
            }
        }
        det(&a)
    };
    let upper = (0..4).map(|i| (p.diag[i] + 2.0 * p.offdiag.iter().map(|b| b.abs()).fold(0.0, f64::max)) / p.weight[i]).fold(0.0, f64::max);
    let mut roots = Vec::new();
    let steps = 200_000;
    let mut prev = char_poly(0.0);
    for k in 1..=steps {
        let b = upper * k as f64 / steps as f64;
        let fb = char_poly(b);
        if prev * fb < 0.0 {
            let (mut lo, mut hi) = (upper * (k - 1) as f64 / steps as f64, b);
            let flo_sign = prev.signum();
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if char_poly(mid).signum() == flo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = fb;
    }
    assert_eq!(roots.len(), 4);
    let mut ours = eigenvalues_fd(&p, 3).unwrap();
    ours.push(p.kth_eigenvalue(4));
    for (a, b) in ours.iter().zip(&roots) {
        assert!(rel(*a, *b) <= 1e-12, "{a} {b}");
    }
}

#[test]
fn self_convergence_and_extrapolation() {
    let eq = e0();
    let vals = |n| eigenvalues_fd(&assemble(&eq, 1.0, n).unwrap(), 4).unwrap();
    let (a, b, c) = (vals(1000), vals(2000), vals(4000));
    for k in 0..4 {
        let ratio = (a[k] - b[k]) / (b[k] - c[k]);
        assert!((3.5..4.5).contains(&ratio), "{k} {ratio}");
    }
    let ex = richardson(&a, &b).unwrap();
    for (v, e) in ex.values.iter().zip(&ex.errors) {
        assert!(*v > 0.0);
        assert!(e / v <= 1e-5, "{}", e / v);
    }
    let shooting = eigenvalues(&LiouvilleChart::new(&eq, 1.0).unwrap(), 4, 1e-12).unwrap();
    for (x, y) in ex.values.iter().zip(&shooting.lambdas) {
        assert!(rel(*x, *y) <= 1e-7, "{x} {y}");
    }
    let ex2 = richardson(&b, &c).unwrap();
    for (x, y) in ex.values.iter().zip(&ex2.values) {
        assert!(rel(*x, *y) <= 1e-7, "{x} {y}");
    }
}

#[test]
fn richardson_is_exact_on_a_quadratic_model() {
    let star = [1.5, 7.25];
    let coarse: Vec<f64> = star.iter().map(|v| v + 3.0 / 100f64.powi(2)).collect();
    let fine: Vec<f64> = star.iter().map(|v| v + 3.0 / 200f64.powi(2)).collect();
    let ex = richardson(&coarse, &fine).unwrap();
    for (v, s) in ex.values.iter().zip(&star) {
        assert!((v - s).abs() <= 1e-14);
    }
    assert!(richardson(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn inertia_and_arguments() {
    let p = assemble(&e0(), 1.0, 500).unwrap();
    let vals = eigenvalues_fd(&p, 8).unwrap();
    assert!(vals[0] > 0.0);
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
    for (k, v) in vals.iter().enumerate() {
        assert_eq!(p.count_below(v * (1.0 - 1e-9)), k);
        assert_eq!(p.count_below(v * (1.0 + 1e-9)), k + 1);
    }
    let mid = 0.5 * (vals[4] + vals[5]);
    assert_eq!(p.count_below(mid), vals.iter().filter(|&&v| v < mid).count());
    assert!(eigenvalues_fd(&p, 0).is_err());
    assert!(eigenvalues_fd(&p, 500).is_err());
}

#[test]
fn eigenvectors() {
    for eq in [e0(), power_law(1.25)] {
        let p = assemble(&eq, 1.0, 2000).unwrap();
        let vals = eigenvalues_fd(&p, 5).unwrap();
        let vecs: Vec<Vec<f64>> = vals.iter().map(|&v| p.eigenvector(v)).collect();
        for (n, v) in vecs.iter().enumerate() {
            let changes = v.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            assert_eq!(changes, n);
            assert!((p.weighted_dot(v, v) - 1.0).abs() <= 1e-12);
        }
        for i in 0..vecs.len() {
            for j in 0..i {
                let d = p.weighted_dot(&vecs[i], &vecs[j]).abs();
                assert!(d <= 1e-10, "{i} {j} {d}");
            }
        }
    }
}

fn measured_order(eq: &gravmodes::Equilibrium, mesh: MeshKind) -> f64 {
    let v = |n| eigenvalues_fd(&assemble_on(eq, 1.0, n, mesh).unwrap(), 1).unwrap()[0];
    let (a, b, c) = (v(500), v(1000), v(2000));
    ((a - b) / (b - c)).abs().log2()
}

#[test]
fn grading_is_needed_below_nu_two() {
    for nu in [1.25, 1.5, 1.75] {
        let eq = power_law(nu);
        let graded = measured_order(&eq, MeshKind::Graded);
        let uniform = measured_order(&eq, MeshKind::Uniform);
        println!("nu = {nu}: graded order {graded:.3}, uniform order {uniform:.3}");
        assert!(graded > uniform + 0.1, "{graded} {uniform}");
        assert!(graded > 1.8);
    }
}
