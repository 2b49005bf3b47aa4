use gravmodes::{Equilibrium, Error};
use proptest::prelude::*;

fn e0() -> Equilibrium {
    Equilibrium::make_polytropic(1.5, 1.0 / 3.0, 1.0, 1.0).unwrap()
}

fn profiles() -> Vec<Equilibrium> {
    let mut out = Vec::new();
    for nu in [1.25, 1.5, 2.0, 2.5, 3.0] {
        let eq = Equilibrium::from_nu(nu, 1.3, 0.7, 1.2).unwrap();
        out.push(eq.make_perturbed(&[0.3, -0.2]).unwrap());
        out.push(eq);
    }
    out.push(e0().make_perturbed(&[0.1]).unwrap());
    out
}

#[test]
fn polytropic_constants() {
    let eq = e0();
    assert!((eq.nu - 2.0).abs() < 1e-15);
    assert!((eq.c_rho - 1.0).abs() < 1e-15);
    assert_eq!(eq.rho(1.0), 0.0);
    let eq = Equilibrium::make_polytropic(4.0 / 3.0, 0.8, 9.81, 10.0).unwrap();
    assert!((eq.nu - 3.0).abs() < 1e-14);
    assert!(eq.lambda_series.is_empty());
}

#[test]
fn parameter_errors_name_the_field() {
    let field = |r: gravmodes::Result<Equilibrium>| match r {
        Err(Error::InvalidArgument { field, .. }) => field,
        other => panic!("expected an argument error, got {other:?}"),
    };
    assert_eq!(field(Equilibrium::make_polytropic(2.0, 1.0, 1.0, 1.0)), "gamma");
    assert_eq!(field(Equilibrium::make_polytropic(1.0, 1.0, 1.0, 1.0)), "gamma");
    assert_eq!(field(Equilibrium::make_polytropic(1.5, 0.0, 1.0, 1.0)), "A");
    assert_eq!(field(Equilibrium::make_polytropic(1.5, 1.0, -1.0, 1.0)), "g");
    assert_eq!(field(Equilibrium::make_polytropic(1.5, 1.0, 1.0, f64::INFINITY)), "z_plus");
}

#[test]
fn background_sample_of_the_reference_profile() {
    let eq = e0();
    let b = eq.eval_background(0.5).unwrap();
    assert!((b.rho - 0.25).abs() < 1e-15);
    assert!((b.drho + 1.0).abs() < 1e-15);
    assert!((b.n_sq.unwrap() - 4.0).abs() < 1e-14);
    assert!((b.pressure - 0.25f64.powf(1.5) / 3.0).abs() < 1e-15);
    assert!((b.scale_height.unwrap() - 0.25).abs() < 1e-15);
    let top = eq.eval_background(1.0).unwrap();
    assert_eq!((top.rho, top.pressure), (0.0, 0.0));
    assert!(top.n_sq.is_none());
    assert!(matches!(eq.buoyancy_sq(1.0), Err(Error::OutOfSupport { .. })));
    assert!(matches!(eq.scale_height(1.5), Err(Error::OutOfSupport { .. })));
}

#[test]
fn weight_values() {
    let eq = e0();
    assert!((eq.weight_mu(1.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
    assert_eq!(eq.weight_mu(1.0, 1.0).unwrap(), 0.0);
    assert!((eq.weight_mu(2.0, 0.0).unwrap() - 8.0).abs() < 1e-14);
    assert!(eq.weight_mu(0.0, 0.5).is_err());
    assert!(eq.weight_mu(1.0, 1.5).is_err());
}

#[test]
fn vacuum_slope_certifies_physical_vacuum() {
    assert!((e0().vacuum_slope() + 0.5).abs() < 1e-15);
    let eq = Equilibrium::from_nu(3.0, 2.0, 1.0, 1.0).unwrap();
    assert!((eq.vacuum_slope() + 2.0 / 3.0).abs() < 1e-15);
    for eq in profiles() {
        assert!((eq.vacuum_slope() + eq.g / eq.nu).abs() <= 1e-10, "{eq:?}");
    }
}

#[test]
fn vacuum_slope_matches_a_numerical_limit() {
    // d(dP/drho)/dz from the pressure and density themselves, near the top.
    for eq in profiles() {
        let s = 1e-6 * eq.z_plus;
        let z = eq.z_plus - s;
        let dp_drho = |z: f64| -eq.g * eq.rho(z) / eq.drho(z);
        let h = 0.25 * s;
        let slope = (dp_drho(z + h) - dp_drho(z - h)) / (2.0 * h);
        assert!((slope + eq.g / eq.nu).abs() < 1e-5, "{slope}");
    }
}

#[test]
fn perturbed_profiles() {
    let eq = e0();
    assert_eq!(eq.make_perturbed(&[]).unwrap(), eq);
    let p = eq.make_perturbed(&[0.1]).unwrap();
    assert!((p.rho(0.5) - 0.25 * 1.05).abs() < 1e-15);
    match eq.make_perturbed(&[-3.0]) {
        Err(Error::InvalidProfile { z, .. }) => assert!(z > 0.0 && z < 1.0),
        other => panic!("expected an invalid profile, got {other:?}"),
    }
    assert!(eq.make_perturbed(&[0.0; 9]).is_err());
}

/// Fourth-order central difference.
fn derivative<F: Fn(f64) -> f64>(f: F, z: f64, h: f64) -> f64 {
    (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h)
}

#[test]
fn hydrostatic_balance() {
    for eq in profiles() {
        let scale = eq.g * eq.rho(0.0);
        for i in 0..1000 {
            let z = eq.z_plus * i as f64 / 1000.0;
            let dp = if eq.is_pure() {
                // d/dz (A rho^gamma)
                eq.a * eq.gamma * eq.rho(z).powf(eq.gamma - 1.0) * eq.drho(z)
            } else if z > 0.99 * eq.z_plus || z < 0.003 {
                continue;
            } else {
                derivative(|z| eq.pressure(z), z, (1e-3 * eq.z_plus).min(0.02 * (eq.z_plus - z)))
            };
            assert!((dp + eq.g * eq.rho(z)).abs() <= 1e-10 * scale, "{eq:?} z={z}");
        }
        // The endpoints are covered by the integral form.
        let direct: f64 = simpson(|z| eq.g * eq.rho(z), 0.0, eq.z_plus, 20000);
        assert!((eq.pressure(0.0) - direct).abs() <= 1e-10 * scale);
    }
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn buoyancy_near_the_vacuum() {
    for nu in [1.25, 1.5, 2.0, 2.5, 3.0] {
        let eq = Equilibrium::from_nu(nu, 2.0, 1.0, 3.0).unwrap();
        let s = 1e-6 * eq.z_plus;
        let ratio = eq.buoyancy_sq(eq.z_plus - s).unwrap() * s / (nu * eq.g);
        assert!((ratio - 1.0).abs() <= 1e-6, "{ratio}");
    }
}

#[test]
fn density_and_slope_vanish_at_the_top() {
    for eq in profiles() {
        assert_eq!(eq.rho(eq.z_plus), 0.0);
        assert_eq!(eq.drho(eq.z_plus), 0.0);
        let z = eq.z_plus - 1e-9 * eq.z_plus;
        assert!(eq.rho(z) < 1e-9 && eq.drho(z).abs() < 1e-2);
    }
}

proptest! {
    #[test]
    fn profile_positivity(nu in 1.01f64..4.0, c1 in -0.5f64..0.5, frac in 0.0f64..0.999_999) {
        let eq = Equilibrium::from_nu(nu, 1.0, 1.0, 1.0).unwrap().make_perturbed(&[c1]).unwrap();
        let z = frac * eq.z_plus;
        prop_assert!(eq.rho(z) > 0.0);
        prop_assert!(eq.drho(z) < 0.0);
        prop_assert!(eq.buoyancy_sq(z).unwrap() > 0.0);
        prop_assert!(eq.weight_mu(1.0, z).unwrap() > 0.0);
    }
}
