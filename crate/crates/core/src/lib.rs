//! Incompressible gravity modes of a stratified atmosphere whose density
//! vanishes at a finite height.
//!
//! The vertical structure problem is a singular Sturm–Liouville problem. It
//! is brought to potential form by a Liouville transformation, solved by
//! shooting from the singular end with a Frobenius seed, and checked against
//! an independent finite-difference oracle.

pub mod chebyshev;
pub mod equilibrium;
pub mod error;
pub mod fd_oracle;
pub mod frobenius;
pub mod liouville;
pub mod ode;
pub mod quadrature;
pub mod roots;
pub mod series;
pub mod spectrum;
pub mod wavefield;

pub use equilibrium::{BackgroundSample, Equilibrium};
pub use error::{Error, Result};
