//! Fourier–Galerkin solver and verification harness for an incompressible
//! viscoelastic fluid: Navier–Stokes momentum driven by `div(F Fᵀ)` coupled to
//! a transported, column-divergence-free deformation gradient `F`.
//!
//! Module map:
//! - [`spectral`]: periodic grids, dual-representation fields, Leray projection, dealiasing.
//! - [`dynamics`]: right-hand sides of the ε-regularized system.
//! - [`integrator`]: RK4 time stepping with per-stage projection.
//! - [`diagnostics`]: energy ledger, energy inequality, ε-sweep defect study, weak-form residuals.
//! - [`relative_energy`]: relative energy and the Gronwall-envelope uniqueness check.
//! - [`neumann_basis`]: divergence-free matrix eigenbasis on a rectangle.
//! - [`io`]: scenarios, snapshot files, CSV output.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod io;
pub mod neumann_basis;
pub mod par;
pub mod quadrature;
pub mod relative_energy;
pub mod spectral;

pub use dynamics::{AdvectionForm, RhsEval, SimState};
pub use error::{Error, Result};
pub use integrator::{IntegratorConfig, Trajectory};
pub use spectral::{Grid, ScalarField, TensorField, VectorField};
