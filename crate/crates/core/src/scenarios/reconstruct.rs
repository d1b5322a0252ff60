use std::sync::Arc;

use crate::discretize::{ETA, S};
use crate::error::{Error, Result};
use crate::space::{Grid, StateLayout, TimeSeries};

pub const PHI: &str = "phi";
pub const U: &str = "u";

/// Boundary value of a center-sampled field by one-sided quadratic
/// extrapolation from the three nearest centers.
pub fn extrapolate_center_to_boundary(values: &[f64], right: bool) -> Result<f64> {
    if values.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "extrapolation needs 3 centers, got {}",
            values.len()
        )));
    }
    let n = values.len();
    let (a, b, c) = if right {
        (values[n - 1], values[n - 2], values[n - 3])
    } else {
        (values[0], values[1], values[2])
    };
    Ok((15.0 * a - 10.0 * b + 3.0 * c) / 8.0)
}

/// Integrates the velocities `eta` and `s` of recorded snapshots with the
/// trapezoidal rule, giving `phi` and `u` on the same points. Initial
/// displacements default to zero.
pub fn reconstruct_displacements(ts: &TimeSeries, initial: Option<(&[f64], &[f64])>) -> Result<TimeSeries> {
    let snaps = ts.snapshots()?;
    let layout = ts.layout();
    let eta = layout.require(ETA)?;
    let s = layout.require(S)?;
    let out = Arc::new(StateLayout::new(layout.grid(), &[(PHI, eta.tag), (U, s.tag)])?);
    let mut state = vec![0.0; out.dim()];
    if let Some((phi0, u0)) = initial {
        if phi0.len() != eta.len {
            return Err(Error::dim(eta.len, phi0.len()));
        }
        if u0.len() != s.len {
            return Err(Error::dim(s.len, u0.len()));
        }
        state[..eta.len].copy_from_slice(phi0);
        state[eta.len..].copy_from_slice(u0);
    }
    let mut series = TimeSeries::new(&out, true);
    let times = ts.times();
    if times.is_empty() {
        return Err(Error::InsufficientData("series has no records".into()));
    }
    series.push(times[0], 0.0, &state)?;
    for k in 1..times.len() {
        let half = 0.5 * (times[k] - times[k - 1]);
        let (prev, next) = (&snaps[k - 1], &snaps[k]);
        for (i, j) in eta.range().chain(s.range()).enumerate() {
            state[i] += half * (prev[j] + next[j]);
        }
        series.push(times[k], 0.0, &state)?;
    }
    Ok(series)
}

/// Residuals of the constitutive relations on the beam layout:
/// `κ1 V1 - ∂ₓφ` at the free nodes and `κ2 V2 - (∂ₓu + φ)` at the centers,
/// in the discrete L² norms. `u` is extended by zero to the clamped ends.
pub fn constitutive_residuals(
    grid: &Grid,
    kappa1_v1: &[f64],
    kappa2_v2: &[f64],
    phi: &[f64],
    u: &[f64],
) -> Result<(f64, f64)> {
    let n = grid.n_cells();
    let h = grid.h();
    if phi.len() != n || kappa2_v2.len() != n {
        return Err(Error::dim(n, phi.len().min(kappa2_v2.len())));
    }
    if kappa1_v1.len() != n || u.len() != n - 1 {
        return Err(Error::dim(n, kappa1_v1.len()));
    }
    let mut r1 = 0.0;
    for (k, v) in kappa1_v1.iter().enumerate() {
        let node = k + 1;
        let (dphi, w) = if node == n {
            let edge = extrapolate_center_to_boundary(phi, true)?;
            ((edge - phi[n - 1]) / (0.5 * h), 0.5 * h)
        } else {
            ((phi[node] - phi[node - 1]) / h, h)
        };
        r1 += w * (v - dphi).powi(2);
    }
    let node_u = |i: usize| if i == 0 || i == n { 0.0 } else { u[i - 1] };
    let mut r2 = 0.0;
    for i in 0..n {
        let du = (node_u(i + 1) - node_u(i)) / h;
        r2 += h * (kappa2_v2[i] - du - phi[i]).powi(2);
    }
    Ok((r1.sqrt(), r2.sqrt()))
}
