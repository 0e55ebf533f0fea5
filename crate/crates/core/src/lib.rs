//! Relativistic bound states of the Klein-Gordon equation.
//!
//! Writing the energy without rest energy as `E'` and the system mass as
//! `m = m0 + E'/c^2`, the stationary Klein-Gordon equation with a vector
//! potential `U` takes a Schrodinger-like form
//!
//! ```text
//! E' psi = -hbar^2/(m0+m) lap psi + 2m/(m0+m) U psi - U^2/((m0+m) c^2) psi
//! ```
//!
//! This crate provides the closed-form Coulomb spectrum ([`coulomb`]), the
//! relativistic Laguerre polynomials ([`special`]), normalized wavefunctions
//! and probability currents ([`wavefunction`]), a finite-difference radial
//! eigensolver with a fixed-point loop on the system mass ([`solver`]), and
//! Lorentz transforms of `(E, p, U)` characters ([`lorentz`]).

pub mod coulomb;
pub mod error;
pub mod lorentz;
pub mod model;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod wavefunction;

pub use error::{ErrorClass, KgError, Result};
pub use model::{
    binding_energy, validate_params, BoundState, PhysicalParams, PotentialKind, PotentialSpec,
    QuantumNumbers, RadialGrid, Spacing,
};
