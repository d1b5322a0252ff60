//! Structure-preserving simulation of boundary damped Timoshenko beams and
//! related first-order evolutionary systems.
//!
//! The state is trace-augmented: interior fields on a staggered grid plus
//! scalar boundary unknowns. The spatial operator is assembled so that it is
//! skew-adjoint in the discrete weighted inner product, the material law is
//! affine (`M0 + ∂₀⁻¹ M1`), and time stepping uses a θ-scheme whose midpoint
//! variant satisfies an exact discrete energy balance.
//!
//! Module map:
//! - [`space`]: grids, state layouts, weights, sources and recorded series.
//! - [`linalg`]: sparse matrices, banded LU and a Jacobi eigensolver.
//! - [`discretize`]: difference operators, trace operators, skew assembly.
//! - [`wellposed`]: coercivity constants, `rho0` scans, symbol and
//!   Nevanlinna checks.
//! - [`integrate`]: θ-scheme stepping, energy accounting and probes.
//! - [`scenarios`]: the concrete beam and Sturm–Liouville models.
//! - [`cli`]: configuration files and the `evobeam` commands.

pub mod cli;
pub mod discretize;
pub mod error;
pub mod exec;
pub mod integrate;
pub mod linalg;
pub mod scenarios;
pub mod space;
pub mod wellposed;

pub use error::{Error, Result};
pub use exec::Execution;
