//! θ-scheme time stepping for `M0 ∂ₜu + (M1 + A) u = f`, discrete energy
//! accounting, and the causality and solution-bound probes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{BandedLu, SparseMatrix};
use crate::space::{
    energy_of, exp_weighted_norm, Source, StateLayout, StateVector, TimeSeries, WeightMatrix,
};
use crate::wellposed::symmetric_part;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub dt: f64,
    pub theta: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// Exponential weight of the time norm used by probes.
    pub rho: f64,
    pub record_snapshots: bool,
}

impl SchemeParams {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SchemeParams {
            dt,
            theta: 0.5,
            t_end,
            record_every: 1,
            rho: 1.0,
            record_snapshots: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::Parameter(format!("theta must lie in [0.5, 1], got {}", self.theta)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Parameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be positive".into()));
        }
        if !(self.rho > 0.0) {
            return Err(Error::Parameter(format!("rho must be positive, got {}", self.rho)));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize
    }

    /// Number of recorded rows, including `t = 0`.
    pub fn n_records(&self) -> usize {
        self.n_steps() / self.record_every + 1
    }
}

/// The operators of one evolution system on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSystem {
    pub layout: Arc<StateLayout>,
    pub weights: WeightMatrix,
    pub m0: SparseMatrix,
    pub m1: SparseMatrix,
    pub a: SparseMatrix,
}

impl EvolutionSystem {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        energy_of(u, &self.m0, &self.weights)
    }

    fn check(&self) -> Result<()> {
        let n = self.dim();
        if self.weights.len() != n {
            return Err(Error::dim(n, self.weights.len()));
        }
        for m in [&self.m0, &self.m1, &self.a] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::dim(n, m.nrows()));
            }
        }
        Ok(())
    }
}

/// Factored θ-scheme: `L u_{n+1} = R u_n + dt f`, with
/// `L = M0 + θ dt (M1 + A)` and `R = M0 - (1-θ) dt (M1 + A)`.
#[derive(Debug, Clone)]
pub struct SteppingSystem {
    system: EvolutionSystem,
    dt: f64,
    theta: f64,
    lhs: SparseMatrix,
    rhs: SparseMatrix,
    sym_m1: SparseMatrix,
    lu: BandedLu,
}

/// Orders unknowns by position along the beam so that `L` is banded.
fn spatial_order(layout: &StateLayout) -> Vec<usize> {
    let pos = layout.positions();
    let blocks = layout.block_of_entries();
    let mut order: Vec<usize> = (0..layout.dim()).collect();
    order.sort_by(|&i, &j| pos[i].total_cmp(&pos[j]).then(blocks[i].cmp(&blocks[j])).then(i.cmp(&j)));
    order
}

pub fn factor(system: &EvolutionSystem, scheme: &SchemeParams) -> Result<SteppingSystem> {
    scheme.validate()?;
    system.check()?;
    let (dt, theta) = (scheme.dt, scheme.theta);
    let generator = system.m1.add_scaled(&system.a, 1.0);
    let lhs = system.m0.add_scaled(&generator, theta * dt);
    let rhs = system.m0.add_scaled(&generator, -(1.0 - theta) * dt);
    let lu = BandedLu::factor(&lhs, Some(&spatial_order(&system.layout))).map_err(|e| match e {
        Error::IllPosed(msg) => Error::IllPosed(format!("stepping matrix is singular ({msg})")),
        other => other,
    })?;
    Ok(SteppingSystem {
        sym_m1: symmetric_part(&system.m1, &system.weights),
        system: system.clone(),
        dt,
        theta,
        lhs,
        rhs,
        lu,
    })
}

impl SteppingSystem {
    pub fn system(&self) -> &EvolutionSystem {
        &self.system
    }

    pub fn layout(&self) -> &Arc<StateLayout> {
        &self.system.layout
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lhs(&self) -> &SparseMatrix {
        &self.lhs
    }

    pub fn rhs(&self) -> &SparseMatrix {
        &self.rhs
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        self.lu.bandwidths()
    }

    fn step_into(&self, u: &[f64], f_mid: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        self.rhs.mul_vec_into(u, scratch);
        for (s, f) in scratch.iter_mut().zip(f_mid) {
            *s += self.dt * f;
        }
        self.lu.solve_into(scratch, out);
    }

    fn check_scheme(&self, scheme: &SchemeParams) -> Result<()> {
        scheme.validate()?;
        if scheme.dt != self.dt || scheme.theta != self.theta {
            return Err(Error::UnsupportedScheme(format!(
                "system factored for dt = {}, theta = {}; run requested dt = {}, theta = {}",
                self.dt, self.theta, scheme.dt, scheme.theta
            )));
        }
        Ok(())
    }
}

/// One step: `M0 (u_{n+1} - u_n)/dt + (M1 + A)(θ u_{n+1} + (1-θ) u_n) = f_mid`.
pub fn step(sys: &SteppingSystem, u_n: &StateVector, f_mid: &StateVector) -> Result<StateVector> {
    let n = sys.system.dim();
    if u_n.values().len() != n || f_mid.values().len() != n {
        return Err(Error::dim(n, u_n.values().len().min(f_mid.values().len())));
    }
    let mut scratch = vec![0.0; n];
    let mut out = vec![0.0; n];
    sys.step_into(u_n.values(), f_mid.values(), &mut scratch, &mut out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Blowup { step: 0 });
    }
    StateVector::from_values(sys.layout(), out)
}

/// Integrates from `u0` at `t = 0` to `t_end`, sampling the source at
/// `t_n + θ dt`.
pub fn run(sys: &SteppingSystem, u0: &StateVector, source: &dyn Source, scheme: &SchemeParams) -> Result<TimeSeries> {
    sys.check_scheme(scheme)?;
    let n = sys.system.dim();
    if u0.values().len() != n {
        return Err(Error::dim(n, u0.values().len()));
    }
    if source.dim() != n {
        return Err(Error::dim(n, source.dim()));
    }
    let mut ts = TimeSeries::new(sys.layout(), scheme.record_snapshots);
    let mut u = u0.values().to_vec();
    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut f = vec![0.0; n];
    ts.push(0.0, sys.system.energy(&u)?, &u)?;
    for k in 0..scheme.n_steps() {
        let t = k as f64 * sys.dt;
        source.eval_into(t + sys.theta * sys.dt, &mut f);
        sys.step_into(&u, &f, &mut scratch, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { step: k + 1 });
        }
        std::mem::swap(&mut u, &mut next);
        if (k + 1) % scheme.record_every == 0 {
            ts.push((k + 1) as f64 * sys.dt, sys.system.energy(&u)?, &u)?;
        }
    }
    Ok(ts)
}

/// Runs several sources from the same initial state.
pub fn run_batch(
    exec: Execution,
    sys: &SteppingSystem,
    u0: &StateVector,
    sources: &[&dyn Source],
    scheme: &SchemeParams,
) -> Result<Vec<TimeSeries>> {
    exec.try_map(sources, |s| run(sys, u0, *s, scheme))
}

/// `E_{n+1} - E_n + dt ⟨u_mid, sym(M1) u_mid⟩_W - dt ⟨u_mid, f_mid⟩_W`,
/// which vanishes up to roundoff for the midpoint scheme.
pub fn energy_balance_residual(
    sys: &SteppingSystem,
    u_n: &StateVector,
    u_np1: &StateVector,
    f_mid: &StateVector,
) -> Result<f64> {
    if sys.theta != 0.5 {
        return Err(Error::UnsupportedScheme(format!(
            "energy balance holds for theta = 1/2, system uses {}",
            sys.theta
        )));
    }
    let w = &sys.system.weights;
    let mid: Vec<f64> = u_n
        .values()
        .iter()
        .zip(u_np1.values())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    let e0 = sys.system.energy(u_n.values())?;
    let e1 = sys.system.energy(u_np1.values())?;
    let dissipation = w.inner(&mid, &sys.sym_m1.mul_vec(&mid))?;
    let work = w.inner(&mid, f_mid.values())?;
    Ok(e1 - e0 + sys.dt * dissipation - sys.dt * work)
}

/// Runs `f` and `g` from `u0` and returns the largest weighted deviation of
/// recorded states with `t ≤ a`. The sources must agree at every sampling
/// time that influences those states.
pub fn causality_probe(
    sys: &SteppingSystem,
    u0: &StateVector,
    f: &dyn Source,
    g: &dyn Source,
    a: f64,
    scheme: &SchemeParams,
) -> Result<f64> {
    sys.check_scheme(scheme)?;
    if !(a >= 0.0) || a > scheme.t_end {
        return Err(Error::InvalidProbe(format!(
            "split time {a} outside [0, {}]",
            scheme.t_end
        )));
    }
    for k in 0..scheme.n_steps() {
        let t = (k as f64 + sys.theta) * sys.dt;
        if (k + 1) as f64 * sys.dt > a {
            break;
        }
        if f.eval(t) != g.eval(t) {
            return Err(Error::InvalidProbe(format!(
                "sources differ at t = {t} before the split time {a}"
            )));
        }
    }
    let scheme = SchemeParams {
        record_snapshots: true,
        ..*scheme
    };
    let uf = run(sys, u0, f, &scheme)?;
    let ug = run(sys, u0, g, &scheme)?;
    let w = &sys.system.weights;
    let mut worst: f64 = 0.0;
    for ((t, a_snap), b_snap) in uf.times().iter().zip(uf.snapshots()?).zip(ug.snapshots()?) {
        if *t > a {
            break;
        }
        let d: Vec<f64> = a_snap.iter().zip(b_snap).map(|(x, y)| x - y).collect();
        worst = worst.max(w.norm_sq(&d)?.sqrt());
    }
    Ok(worst)
}

/// `‖u‖_ρ / ‖f‖_ρ` for the solution started from rest.
pub fn bound_probe(sys: &SteppingSystem, source: &dyn Source, scheme: &SchemeParams, rho: f64) -> Result<f64> {
    let scheme = SchemeParams {
        record_snapshots: true,
        ..*scheme
    };
    let u0 = StateVector::zeros(sys.layout());
    let u = run(sys, &u0, source, &scheme)?;
    let mut fs = TimeSeries::new(sys.layout(), true);
    for t in u.times() {
        fs.push(*t, 0.0, &source.eval(*t))?;
    }
    let w = &sys.system.weights;
    let f_norm = exp_weighted_norm(&fs, rho, w)?;
    if f_norm == 0.0 {
        return Err(Error::UndefinedRatio("source has zero norm".into()));
    }
    Ok(exp_weighted_norm(&u, rho, w)? / f_norm)
}
