use std::f64::consts::PI;
use std::sync::Arc;

use super::{AssembledModel, Coupling, CouplingKind, TraceLink};
use crate::discretize::{ETA, S, V1, V2};
use crate::error::Result;
use crate::linalg::SparseMatrix;
use crate::space::{Profile, Source, StateLayout, StateVector};

/// Value and first partial derivatives of a field at `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub dt: f64,
    pub dx: f64,
}

/// Closed-form fields, addressed by block name. Trace blocks are derived
/// from their partner fields and never queried.
pub trait ExactSolution: Sync {
    fn jet(&self, block: &str, x: f64, t: f64) -> Jet;
}

fn sample(
    layout: &Arc<StateLayout>,
    traces: &[TraceLink],
    exact: &dyn ExactSolution,
    t: f64,
    pick: fn(Jet) -> f64,
) -> Result<StateVector> {
    StateVector::from_fn(layout, |block, x| {
        match traces.iter().find(|l| l.trace == block.name) {
            Some(link) => link.sign * pick(exact.jet(&link.partner, link.side.position(), t)),
            None => pick(exact.jet(&block.name, x, t)),
        }
    })
}

/// Grid samples of the exact fields, with trace unknowns set to
/// `sign · partner(endpoint)`.
pub fn exact_state(model: &AssembledModel, exact: &dyn ExactSolution, t: f64) -> Result<StateVector> {
    sample(model.layout(), &model.traces, exact, t, |j| j.value)
}

/// Time derivative of [`exact_state`].
pub fn exact_rate(model: &AssembledModel, exact: &dyn ExactSolution, t: f64) -> Result<StateVector> {
    sample(model.layout(), &model.traces, exact, t, |j| j.dt)
}

/// `F(t) = M0 ∂ₜu*(t) + M1 u*(t) + A u*(t)`, with the spatial operator
/// applied to the continuum fields.
pub struct ManufacturedSource<'a> {
    layout: Arc<StateLayout>,
    traces: Vec<TraceLink>,
    couplings: Vec<Coupling>,
    m0: SparseMatrix,
    m1: SparseMatrix,
    exact: &'a dyn ExactSolution,
}

pub fn manufactured_source<'a>(model: &AssembledModel, exact: &'a dyn ExactSolution) -> ManufacturedSource<'a> {
    ManufacturedSource {
        layout: model.layout().clone(),
        traces: model.traces.clone(),
        couplings: model.couplings.clone(),
        m0: model.system.m0.clone(),
        m1: model.system.m1.clone(),
        exact,
    }
}

impl Source for ManufacturedSource<'_> {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let u = sample(&self.layout, &self.traces, self.exact, t, |j| j.value).expect("finite exact fields");
        let du = sample(&self.layout, &self.traces, self.exact, t, |j| j.dt).expect("finite exact fields");
        self.m0.mul_vec_into(du.values(), out);
        for (o, v) in out.iter_mut().zip(self.m1.mul_vec(u.values())) {
            *o += v;
        }
        let grid = self.layout.grid();
        for c in &self.couplings {
            let row = self.layout.block(&c.row).expect("coupling rows are layout blocks");
            let points = row.tag.points(grid);
            for (o, x) in out[row.range()].iter_mut().zip(points) {
                *o += c.sign
                    * match c.kind {
                        CouplingKind::Derivative => self.exact.jet(&c.col, x, t).dx,
                        CouplingKind::Trace(side) => self.exact.jet(&c.col, side.position(), t).value,
                    };
            }
        }
    }
}

/// Beam fields built from `φ* = cos(π(x+½)/2) cos t` and `u* = cos(πx) sin t`:
/// `η = ∂ₜφ`, `s = ∂ₜu`, `V1 = ∂ₓφ / κ1`, `V2 = (∂ₓu + φ) / κ2`.
/// These vanish where the beam layout pins `V1` and `s`, and make the
/// interior rows of the unit-σ₀ beam exact.
#[derive(Debug, Clone, PartialEq)]
pub struct TimoshenkoMms {
    pub kappa1: Profile,
    pub kappa2: Profile,
}

impl Default for TimoshenkoMms {
    fn default() -> Self {
        TimoshenkoMms {
            kappa1: Profile::Constant(1.0),
            kappa2: Profile::Constant(1.0),
        }
    }
}

impl TimoshenkoMms {
    /// Spatial factor of φ and its first two derivatives.
    fn phi(x: f64) -> (f64, f64, f64) {
        let k = PI / 2.0;
        let a = k * (x + 0.5);
        (a.cos(), -k * a.sin(), -k * k * a.cos())
    }

    fn u(x: f64) -> (f64, f64, f64) {
        let a = PI * x;
        (a.cos(), -PI * a.sin(), -PI * PI * a.cos())
    }

    pub fn phi_exact(&self, x: f64, t: f64) -> f64 {
        Self::phi(x).0 * t.cos()
    }

    pub fn u_exact(&self, x: f64, t: f64) -> f64 {
        Self::u(x).0 * t.sin()
    }
}

fn quotient(g: f64, gx: f64, gt: f64, k: &Profile, x: f64) -> Jet {
    let kv = k.eval(x);
    let kx = k.derivative(x);
    Jet {
        value: g / kv,
        dt: gt / kv,
        dx: gx / kv - g * kx / (kv * kv),
    }
}

impl ExactSolution for TimoshenkoMms {
    fn jet(&self, block: &str, x: f64, t: f64) -> Jet {
        let (p, px, pxx) = Self::phi(x);
        let (u, ux, uxx) = Self::u(x);
        let (c, s) = (t.cos(), t.sin());
        match block {
            ETA => Jet {
                value: -p * s,
                dt: -p * c,
                dx: -px * s,
            },
            S => Jet {
                value: u * c,
                dt: -u * s,
                dx: ux * c,
            },
            V1 => quotient(px * c, pxx * c, -px * s, &self.kappa1, x),
            V2 => quotient(ux * s + p * c, uxx * s + px * c, ux * c - p * s, &self.kappa2, x),
            _ => Jet::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{make_timoshenko_damped, TimoshenkoParams};
    use crate::space::build_grid;

    #[test]
    fn jets_match_finite_differences() {
        let e = TimoshenkoMms {
            kappa1: Profile::Linear { left: 1.0, right: 2.0 },
            kappa2: Profile::Constant(0.5),
        };
        let d = 1e-6;
        for block in [ETA, S, V1, V2] {
            for &(x, t) in &[(-0.3, 0.2), (0.1, 0.7), (0.45, 1.3)] {
                let j = e.jet(block, x, t);
                let fx = (e.jet(block, x + d, t).value - e.jet(block, x - d, t).value) / (2.0 * d);
                let ft = (e.jet(block, x, t + d).value - e.jet(block, x, t - d).value) / (2.0 * d);
                assert!((j.dx - fx).abs() < 1e-7, "{block} dx");
                assert!((j.dt - ft).abs() < 1e-7, "{block} dt");
            }
        }
        assert_eq!(e.jet(V1, -0.5, 0.3).value, 0.0);
        assert!(e.jet(S, 0.5, 0.3).value.abs() < 1e-15);
    }

    #[test]
    fn beam_interior_rows_are_exact() {
        // κ1 ∂ₜV1 - ∂ₓη = 0 and κ2 ∂ₜV2 - σ₀η - ∂ₓs = 0 hold for these fields.
        let g = build_grid(16).unwrap();
        let m = make_timoshenko_damped(&g, &TimoshenkoParams::unit(0.5, 0.0)).unwrap();
        let e = TimoshenkoMms::default();
        let f = manufactured_source(&m, &e).eval(0.4);
        let l = m.layout();
        for name in [V1, V2] {
            let r = l.require(name).unwrap().range();
            assert!(f[r].iter().all(|v| v.abs() < 1e-12), "{name}");
        }
    }

    struct Zero;
    impl ExactSolution for Zero {
        fn jet(&self, _: &str, _: f64, _: f64) -> Jet {
            Jet::default()
        }
    }

    struct Equilibrium;
    impl ExactSolution for Equilibrium {
        fn jet(&self, block: &str, _: f64, _: f64) -> Jet {
            // Constant η with V1 = 0 is stationary for the undamped system.
            Jet {
                value: if block == ETA { 1.0 } else { 0.0 },
                ..Jet::default()
            }
        }
    }

    #[test]
    fn trivial_sources_vanish() {
        use crate::scenarios::{make_sturm_liouville, SturmLiouvilleParams};
        use crate::wellposed::NevanlinnaSpec;
        let g = build_grid(8).unwrap();
        let m = make_timoshenko_damped(&g, &TimoshenkoParams::unit(0.5, 0.0)).unwrap();
        assert!(manufactured_source(&m, &Zero).eval(0.3).iter().all(|v| *v == 0.0));
        let mut p = SturmLiouvilleParams::hyperbolic(1.0, NevanlinnaSpec::new(1.0, 0.0).unwrap());
        p.q = Profile::Constant(0.0);
        let sl = make_sturm_liouville(&g, &p).unwrap();
        let f = manufactured_source(&sl, &Equilibrium).eval(0.3);
        assert!(f.iter().all(|v| v.abs() < 1e-15), "{f:?}");
    }
}
