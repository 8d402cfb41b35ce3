//! Semiclassical transfer matrices at finite-order crossings of two
//! characteristic curves for 2x2 systems of h-differential operators.
//!
//! * [`oscquad`]: degenerate stationary phase and an adaptive oscillatory quadrature oracle.
//! * [`symbolcalc`]: exact polynomial symbol calculus and the general crossing formula.
//! * [`normalform`]: the reduced model `hD`, `hD - f(x)` with its Volterra/Neumann solver.
//! * [`schrodinger`]: matrix Schrödinger operators, predictors and an ODE-based extractor.
//! * [`sweep`]: h-sweeps, power-law fits and verdicts.

pub mod error;
pub mod func;
pub mod grid;
pub mod normalform;
pub mod ode;
pub mod oscquad;
pub mod quadrature;
pub mod schrodinger;
pub mod sweep;
pub mod symbolcalc;
pub mod transfer;

pub use error::{Error, Result};
pub use func::{Bump, Poly1};
pub use grid::GridFunction;
pub use num_complex::Complex64;
pub use transfer::{TransferKind, TransferMatrix};
