#![allow(dead_code)]

use gravmodes::liouville::LiouvilleChart;
use gravmodes::spectrum::{eigenfunction, eigenvalues, ModeSolution};
use gravmodes::Equilibrium;

/// Pure power law with nu = 2, g = 1, z+ = 1, C = 1.
pub fn e0() -> Equilibrium {
    Equilibrium::from_nu(2.0, 1.0, 1.0, 1.0).unwrap()
}

pub fn power_law(nu: f64) -> Equilibrium {
    Equilibrium::from_nu(nu, 1.0, 1.0, 1.0).unwrap()
}

pub fn chart(eq: &Equilibrium, l: f64) -> LiouvilleChart {
    LiouvilleChart::new(eq, l).unwrap()
}

pub fn modes(eq: &Equilibrium, l: f64, n_max: usize) -> Vec<ModeSolution> {
    let ch = chart(eq, l);
    let spec = eigenvalues(&ch, n_max, 1e-12).unwrap();
    spec.eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &lam)| eigenfunction(&ch, i + 1, lam).unwrap())
        .collect()
}

pub fn mode(eq: &Equilibrium, l: f64, n: usize) -> ModeSolution {
    modes(eq, l, n).pop().unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
