//! Linear algebra kernels: CSR matrices, banded LU and symmetric eigenvalues.

mod banded;
mod jacobi;
mod sparse;

pub use banded::BandedLu;
pub use jacobi::{min_symmetric_eigenvalue, symmetric_eigenvalues};
pub use sparse::{SparseMatrix, TripletBuilder};
