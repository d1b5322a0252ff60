//! Concrete model variants: the boundary damped beam, its dynamic-inertia
//! and sign-flipped forms, the Sturm–Liouville system with dynamic boundary
//! conditions and the beam with dynamic conditions in all unknowns. Also
//! manufactured solutions, convergence studies and displacement
//! reconstruction.

mod convergence;
mod initial;
mod mms;
mod models;
mod reconstruct;

pub use convergence::{
    fit_slope, mms_convergence, restrict_to, self_convergence, ConvergenceLevel, ConvergenceReport,
};
pub use initial::smooth_initial_state;
pub use mms::{exact_rate, exact_state, manufactured_source, ExactSolution, Jet, ManufacturedSource, TimoshenkoMms};
pub use models::{
    apply_sign_flip, make_dynamic_inertia, make_full_dynamic, make_sturm_liouville, make_timoshenko_damped,
    FullDynamicParams, SturmLiouvilleParams, TimoshenkoParams,
};
pub use reconstruct::{constitutive_residuals, extrapolate_center_to_boundary, reconstruct_displacements, PHI, U};

use std::sync::Arc;

use crate::discretize::{skew_defect, SkewOperator};
use crate::error::{Error, Result};
use crate::integrate::{factor, EvolutionSystem, SchemeParams, SteppingSystem};
use crate::space::{Grid, Side, StateLayout};
use crate::wellposed::{coercivity, CoercivityReport, NevanlinnaSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    TimoshenkoDamped,
    DynamicInertia,
    FullDynamic,
    SturmLiouville,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::TimoshenkoDamped => "timoshenko_damped",
            Variant::DynamicInertia => "dynamic_inertia",
            Variant::FullDynamic => "full_dynamic",
            Variant::SturmLiouville => "sturm_liouville",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Variant::TimoshenkoDamped,
            Variant::DynamicInertia,
            Variant::FullDynamic,
            Variant::SturmLiouville,
        ]
        .into_iter()
        .find(|v| v.name() == name)
    }

    pub fn is_timoshenko(self) -> bool {
        matches!(self, Variant::TimoshenkoDamped | Variant::DynamicInertia)
    }
}

/// How a continuum spatial operator entry acts on a field, used to evaluate
/// manufactured sources with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingKind {
    /// `sign · ∂ₓ(col)` sampled at the row block's points.
    Derivative,
    /// `sign · col(endpoint)`.
    Trace(Side),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub row: String,
    pub col: String,
    pub kind: CouplingKind,
    pub sign: f64,
}

impl Coupling {
    pub(crate) fn new(row: &str, col: &str, kind: CouplingKind) -> Self {
        Coupling {
            row: row.into(),
            col: col.into(),
            kind,
            sign: -1.0,
        }
    }
}

/// A trace unknown and the continuum value it tracks: `trace = sign · partner(side)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLink {
    pub trace: String,
    pub side: Side,
    pub partner: String,
    pub sign: f64,
    /// Material law of the trace slot.
    pub law: NevanlinnaSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledModel {
    pub system: EvolutionSystem,
    pub variant: Variant,
    /// Set once the η sign congruence has been applied.
    pub flipped: bool,
    pub traces: Vec<TraceLink>,
    pub couplings: Vec<Coupling>,
}

impl AssembledModel {
    pub fn layout(&self) -> &Arc<StateLayout> {
        &self.system.layout
    }

    pub fn grid(&self) -> &Grid {
        self.system.layout.grid()
    }

    pub fn skew_operator(&self) -> SkewOperator {
        SkewOperator {
            matrix: self.system.a.clone(),
            weights: self.system.weights.clone(),
        }
    }

    pub fn skew_defect(&self) -> f64 {
        skew_defect(&self.skew_operator())
    }

    pub fn coercivity(&self, rho: f64) -> Result<CoercivityReport> {
        coercivity(&self.system.m0, &self.system.m1, rho, &self.system.weights)
    }

    pub fn factor(&self, scheme: &SchemeParams) -> Result<SteppingSystem> {
        factor(&self.system, scheme)
    }

    pub fn nevanlinna_specs(&self) -> Vec<(String, NevanlinnaSpec)> {
        self.traces.iter().map(|t| (t.trace.clone(), t.law)).collect()
    }

    /// Restriction to a set of blocks that no operator couples to the rest.
    pub fn subsystem(&self, blocks: &[&str]) -> Result<EvolutionSystem> {
        let layout = self.layout();
        let mut spec = Vec::new();
        let mut keep = Vec::new();
        for b in layout.blocks() {
            if blocks.contains(&b.name.as_str()) {
                spec.push((b.name.as_str(), b.tag));
                keep.extend(b.range());
            }
        }
        if spec.len() != blocks.len() {
            return Err(Error::Parameter(format!("unknown blocks in {blocks:?}")));
        }
        let rest: Vec<usize> = (0..layout.dim()).filter(|i| !keep.contains(i)).collect();
        for m in [&self.system.m0, &self.system.m1, &self.system.a] {
            if m.select(&keep, &rest).nnz() + m.select(&rest, &keep).nnz() > 0 {
                return Err(Error::Parameter(format!("blocks {blocks:?} are coupled to the rest")));
            }
        }
        let sub_layout = Arc::new(StateLayout::new(layout.grid(), &spec)?);
        let w = crate::space::WeightMatrix::from_diag(keep.iter().map(|&i| self.system.weights.diag()[i]).collect())?;
        Ok(EvolutionSystem {
            layout: sub_layout,
            weights: w,
            m0: self.system.m0.select(&keep, &keep),
            m1: self.system.m1.select(&keep, &keep),
            a: self.system.a.select(&keep, &keep),
        })
    }
}
