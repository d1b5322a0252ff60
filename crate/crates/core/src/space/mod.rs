//! Shared vocabulary: grids, layouts, weighted inner products, energies and
//! the exponentially weighted time norm.

mod grid;
mod layout;
mod profile;
mod series;
mod signal;

pub use grid::{build_grid, Grid, LEFT_END, RIGHT_END};
pub use layout::{Block, Side, SpaceTag, StateLayout, StateVector, WeightMatrix};
pub use profile::{CoefficientField, Profile};
pub use series::{scalar_layout, TimeSeries};
pub use signal::{Combination, FnSource, SeparableSource, Signal, Source, ZeroSource};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

pub fn weighted_inner(u: &StateVector, v: &StateVector, w: &WeightMatrix) -> Result<f64> {
    if u.layout() != v.layout() {
        return Err(Error::dim(u.layout().dim(), v.layout().dim()));
    }
    w.inner(u.values(), v.values())
}

/// `½ ⟨u, M0 u⟩_W`.
pub fn energy(u: &StateVector, m0: &SparseMatrix, w: &WeightMatrix) -> Result<f64> {
    energy_of(u.values(), m0, w)
}

pub(crate) fn energy_of(u: &[f64], m0: &SparseMatrix, w: &WeightMatrix) -> Result<f64> {
    if m0.ncols() != u.len() || m0.nrows() != u.len() {
        return Err(Error::dim(u.len(), m0.ncols()));
    }
    Ok(0.5 * w.inner(u, &m0.mul_vec(u))?)
}

/// Square root of the trapezoidal quadrature of `‖u(t)‖²_W e^{-2ρt}` over
/// the recorded window.
pub fn exp_weighted_norm(ts: &TimeSeries, rho: f64, w: &WeightMatrix) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Parameter(format!("rho must be positive, got {rho}")));
    }
    let snaps = ts.snapshots()?;
    if snaps.len() < 2 {
        return Err(Error::InsufficientData("need at least two snapshots".into()));
    }
    let integrand = snaps
        .iter()
        .zip(ts.times())
        .map(|(u, t)| Ok(w.norm_sq(u)? * (-2.0 * rho * t).exp()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(trapezoid(ts.times(), &integrand).sqrt())
}

pub(crate) fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}
