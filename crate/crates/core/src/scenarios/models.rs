use super::{AssembledModel, Coupling, CouplingKind, TraceLink, Variant};
use crate::discretize::{
    assemble_a_tilde, assemble_a_timoshenko, assemble_a_two_trace, ETA, S, TAU0_MINUS, TAU0_PLUS, TAU1_MINUS,
    TAU1_PLUS, TAU_MINUS, TAU_PLUS, V1, V2,
};
use crate::error::{Error, Result};
use crate::integrate::EvolutionSystem;
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::space::{Grid, Profile, Side, StateLayout};
use crate::wellposed::NevanlinnaSpec;

/// Beam coefficients. `c` and `i_tilde` are the damping and inertia of the
/// right boundary; `sigma0` scales the rotation–shear coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct TimoshenkoParams {
    pub kappa1: Profile,
    pub nu1: Profile,
    pub nu2: Profile,
    pub kappa2: Profile,
    pub d: Profile,
    pub c: f64,
    pub i_tilde: f64,
    pub sigma0: f64,
}

impl TimoshenkoParams {
    /// Unit coefficients, no interior damping.
    pub fn unit(c: f64, i_tilde: f64) -> Self {
        TimoshenkoParams {
            kappa1: Profile::Constant(1.0),
            nu1: Profile::Constant(1.0),
            nu2: Profile::Constant(1.0),
            kappa2: Profile::Constant(1.0),
            d: Profile::Constant(0.0),
            c,
            i_tilde,
            sigma0: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kappa1.require_positive("kappa1")?;
        self.nu1.require_positive("nu1")?;
        self.nu2.require_positive("nu2")?;
        self.kappa2.require_positive("kappa2")?;
        self.d.require_nonnegative("d")?;
        NevanlinnaSpec::new(self.i_tilde, self.c)
            .map_err(|_| Error::Parameter("c and I_tilde must be non-negative reals with not both zero".into()))?;
        if self.sigma0 == 0.0 || !self.sigma0.is_finite() {
            return Err(Error::Parameter("sigma0 must be a nonzero real".into()));
        }
        Ok(())
    }
}

/// First block system with two dynamic boundary conditions:
/// `r + ∂₀⁻¹q` on the node field, `s0 + ∂₀⁻¹s1` on its conjugate and
/// `μ∓` on the traces.
#[derive(Debug, Clone, PartialEq)]
pub struct SturmLiouvilleParams {
    pub r: Profile,
    pub q: Profile,
    pub s0: f64,
    pub s1: f64,
    pub mu_minus: NevanlinnaSpec,
    pub mu_plus: NevanlinnaSpec,
}

impl SturmLiouvilleParams {
    /// `s0 = 1/p, s1 = 0`.
    pub fn hyperbolic(p: f64, mu: NevanlinnaSpec) -> Self {
        SturmLiouvilleParams {
            r: Profile::Constant(1.0),
            q: Profile::Constant(0.0),
            s0: 1.0 / p,
            s1: 0.0,
            mu_minus: mu,
            mu_plus: mu,
        }
    }

    /// `s0 = 0, s1 = 1/p`.
    pub fn parabolic(p: f64, mu: NevanlinnaSpec) -> Self {
        SturmLiouvilleParams {
            s0: 0.0,
            s1: 1.0 / p,
            ..Self::hyperbolic(p, mu)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.r.require_positive("r")?;
        self.q.require_nonnegative("q")?;
        if !(self.s0 >= 0.0 && self.s1 >= 0.0) || !(self.s0 + self.s1 > 0.0) || !(self.s0 + self.s1).is_finite() {
            return Err(Error::Parameter("s0, s1 must be nonnegative with s0 + s1 > 0".into()));
        }
        self.mu_minus.validate()?;
        self.mu_plus.validate()
    }
}

/// Block-diagonal beam law with a trace law at each end of each group.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDynamicParams {
    pub kappa1: Profile,
    pub nu1: Profile,
    pub nu2: Profile,
    pub kappa2: Profile,
    pub d: Profile,
    pub tau0_minus: NevanlinnaSpec,
    pub tau0_plus: NevanlinnaSpec,
    pub tau1_minus: NevanlinnaSpec,
    pub tau1_plus: NevanlinnaSpec,
}

impl FullDynamicParams {
    pub fn unit(mu: NevanlinnaSpec) -> Self {
        FullDynamicParams {
            kappa1: Profile::Constant(1.0),
            nu1: Profile::Constant(1.0),
            nu2: Profile::Constant(1.0),
            kappa2: Profile::Constant(1.0),
            d: Profile::Constant(0.0),
            tau0_minus: mu,
            tau0_plus: mu,
            tau1_minus: mu,
            tau1_plus: mu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kappa1.require_positive("kappa1")?;
        self.nu1.require_positive("nu1")?;
        self.nu2.require_positive("nu2")?;
        self.kappa2.require_positive("kappa2")?;
        self.d.require_nonnegative("d")?;
        for mu in [self.tau0_minus, self.tau0_plus, self.tau1_minus, self.tau1_plus] {
            mu.validate()?;
        }
        Ok(())
    }
}

enum Diag<'a> {
    Field(&'a Profile),
    Scalar(f64),
}

/// Diagonal operator with one entry per block, sampled at the block points.
fn block_diagonal(layout: &StateLayout, entries: &[(&str, Diag)]) -> Result<SparseMatrix> {
    let mut d = vec![0.0; layout.dim()];
    for (name, entry) in entries {
        let b = layout.require(name)?;
        let points = b.tag.points(layout.grid());
        for (slot, x) in d[b.range()].iter_mut().zip(points) {
            *slot = match entry {
                Diag::Field(p) => p.eval(x),
                Diag::Scalar(v) => *v,
            };
        }
    }
    Ok(SparseMatrix::diagonal(&d))
}

fn trace_link(trace: &str, side: Side, partner: &str, law: NevanlinnaSpec) -> TraceLink {
    TraceLink {
        trace: trace.into(),
        side,
        partner: partner.into(),
        // Integration by parts: trace(+1/2) = -partner, trace(-1/2) = +partner.
        sign: match side {
            Side::Left => 1.0,
            Side::Right => -1.0,
        },
        law,
    }
}

fn timoshenko(grid: &Grid, params: &TimoshenkoParams, variant: Variant) -> Result<AssembledModel> {
    params.validate()?;
    let (layout, a) = assemble_a_timoshenko(grid);
    let m0 = block_diagonal(
        &layout,
        &[
            (V1, Diag::Field(&params.kappa1)),
            (ETA, Diag::Field(&params.nu1)),
            (TAU_PLUS, Diag::Scalar(params.i_tilde)),
            (S, Diag::Field(&params.nu2)),
            (V2, Diag::Field(&params.kappa2)),
        ],
    )?;
    let damping = block_diagonal(&layout, &[(TAU_PLUS, Diag::Scalar(params.c)), (S, Diag::Field(&params.d))])?;
    let n = layout.dim();
    let mut m1 = TripletBuilder::new(n, n);
    m1.add_block(0, 0, &damping, 1.0);
    let eta = layout.require(ETA)?;
    let v2 = layout.require(V2)?;
    for (i, j) in eta.range().zip(v2.range()) {
        m1.push(i, j, params.sigma0);
        m1.push(j, i, -params.sigma0);
    }
    let law = NevanlinnaSpec {
        mu0: params.i_tilde,
        mu1: params.c,
    };
    Ok(AssembledModel {
        system: EvolutionSystem {
            weights: a.weights,
            layout,
            m0,
            m1: m1.build(),
            a: a.matrix,
        },
        variant,
        flipped: false,
        traces: vec![trace_link(TAU_PLUS, Side::Right, ETA, law)],
        couplings: vec![
            Coupling::new(V1, ETA, CouplingKind::Derivative),
            Coupling::new(ETA, V1, CouplingKind::Derivative),
            Coupling::new(TAU_PLUS, V1, CouplingKind::Trace(Side::Right)),
            Coupling::new(S, V2, CouplingKind::Derivative),
            Coupling::new(V2, S, CouplingKind::Derivative),
        ],
    })
}

/// Beam with `V1(-1/2) = 0`, `V1(1/2) + c η(1/2) = 0` (through the trace
/// unknown `tau_plus`) and `s(±1/2) = 0`. A positive `i_tilde` adds
/// boundary inertia to the right end.
pub fn make_timoshenko_damped(grid: &Grid, params: &TimoshenkoParams) -> Result<AssembledModel> {
    timoshenko(grid, params, Variant::TimoshenkoDamped)
}

/// `∂₀ Ĩ η(1/2) + V1(1/2) + c η(1/2) = -g₂` at the right end.
pub fn make_dynamic_inertia(grid: &Grid, params: &TimoshenkoParams) -> Result<AssembledModel> {
    timoshenko(grid, params, Variant::DynamicInertia)
}

/// Congruence by `U = diag(1, -1, 1, 1, 1)`, negating the rotational
/// velocity.
pub fn apply_sign_flip(model: &AssembledModel) -> Result<AssembledModel> {
    if !model.variant.is_timoshenko() {
        return Err(Error::Parameter(format!(
            "sign flip applies to beam variants, not {}",
            model.variant.name()
        )));
    }
    let layout = model.layout();
    let eta = layout.require(ETA)?.range();
    let u: Vec<f64> = (0..layout.dim()).map(|i| if eta.contains(&i) { -1.0 } else { 1.0 }).collect();
    let congruent = |m: &SparseMatrix| m.scale(&u, &u);
    let flip = |name: &str| if name == ETA { -1.0 } else { 1.0 };
    let mut out = model.clone();
    out.system.m0 = congruent(&model.system.m0);
    out.system.m1 = congruent(&model.system.m1);
    out.system.a = congruent(&model.system.a);
    out.flipped = !model.flipped;
    for c in &mut out.couplings {
        c.sign *= flip(&c.row) * flip(&c.col);
    }
    for t in &mut out.traces {
        t.sign *= flip(&t.partner);
    }
    Ok(out)
}

/// Dynamic boundary conditions in all unknowns at both ends.
pub fn make_full_dynamic(grid: &Grid, params: &FullDynamicParams) -> Result<AssembledModel> {
    params.validate()?;
    let (layout, a) = assemble_a_tilde(grid);
    let traces = [
        (TAU0_MINUS, Side::Left, ETA, params.tau0_minus),
        (TAU0_PLUS, Side::Right, ETA, params.tau0_plus),
        (TAU1_MINUS, Side::Left, V2, params.tau1_minus),
        (TAU1_PLUS, Side::Right, V2, params.tau1_plus),
    ];
    let mut m0_entries = vec![
        (V1, Diag::Field(&params.kappa1)),
        (ETA, Diag::Field(&params.nu1)),
        (S, Diag::Field(&params.nu2)),
        (V2, Diag::Field(&params.kappa2)),
    ];
    let mut m1_entries = vec![(S, Diag::Field(&params.d))];
    for (name, _, _, mu) in &traces {
        m0_entries.push((name, Diag::Scalar(mu.mu0)));
        m1_entries.push((name, Diag::Scalar(mu.mu1)));
    }
    let m0 = block_diagonal(&layout, &m0_entries)?;
    let m1 = block_diagonal(&layout, &m1_entries)?;
    let mut couplings = vec![
        Coupling::new(V1, ETA, CouplingKind::Derivative),
        Coupling::new(ETA, V1, CouplingKind::Derivative),
        Coupling::new(S, V2, CouplingKind::Derivative),
        Coupling::new(V2, S, CouplingKind::Derivative),
    ];
    for (name, side, partner, _) in &traces {
        let driver = if *partner == ETA { V1 } else { S };
        couplings.push(Coupling::new(name, driver, CouplingKind::Trace(*side)));
    }
    Ok(AssembledModel {
        system: EvolutionSystem {
            weights: a.weights,
            layout,
            m0,
            m1,
            a: a.matrix,
        },
        variant: Variant::FullDynamic,
        flipped: false,
        traces: traces
            .iter()
            .map(|(name, side, partner, mu)| trace_link(name, *side, partner, *mu))
            .collect(),
        couplings,
    })
}

/// `(∂₀ M̃(∂₀⁻¹) + [[0, B̃*], [-B̃, 0]])` on `(v1, (eta, tau_minus, tau_plus))`.
pub fn make_sturm_liouville(grid: &Grid, params: &SturmLiouvilleParams) -> Result<AssembledModel> {
    params.validate()?;
    let (layout, a) = assemble_a_two_trace(grid);
    let m0 = block_diagonal(
        &layout,
        &[
            (V1, Diag::Field(&params.r)),
            (ETA, Diag::Scalar(params.s0)),
            (TAU_MINUS, Diag::Scalar(params.mu_minus.mu0)),
            (TAU_PLUS, Diag::Scalar(params.mu_plus.mu0)),
        ],
    )?;
    let m1 = block_diagonal(
        &layout,
        &[
            (V1, Diag::Field(&params.q)),
            (ETA, Diag::Scalar(params.s1)),
            (TAU_MINUS, Diag::Scalar(params.mu_minus.mu1)),
            (TAU_PLUS, Diag::Scalar(params.mu_plus.mu1)),
        ],
    )?;
    Ok(AssembledModel {
        system: EvolutionSystem {
            weights: a.weights,
            layout,
            m0,
            m1,
            a: a.matrix,
        },
        variant: Variant::SturmLiouville,
        flipped: false,
        traces: vec![
            trace_link(TAU_MINUS, Side::Left, ETA, params.mu_minus),
            trace_link(TAU_PLUS, Side::Right, ETA, params.mu_plus),
        ],
        couplings: vec![
            Coupling::new(V1, ETA, CouplingKind::Derivative),
            Coupling::new(ETA, V1, CouplingKind::Derivative),
            Coupling::new(TAU_MINUS, V1, CouplingKind::Trace(Side::Left)),
            Coupling::new(TAU_PLUS, V1, CouplingKind::Trace(Side::Right)),
        ],
    })
}
