use std::f64::consts::PI;

use super::reconstruct::extrapolate_center_to_boundary;
use super::AssembledModel;
use crate::discretize::{S, V1, V2};
use crate::error::{Error, Result};
use crate::space::{Side, SpaceTag, StateVector};

fn base_profile(name: &str, tag: SpaceTag, x: f64) -> f64 {
    match (name, tag) {
        (V1, SpaceTag::NodeFreeLeft) => (0.5 * PI * (x + 0.5)).sin(),
        (V1, _) => (PI * x).cos(),
        (S, SpaceTag::NodeInterior) => (PI * x).cos(),
        (S, _) => 0.3 + 0.5 * (PI * x).sin(),
        (V2, _) => (PI * x).sin(),
        _ => 0.0,
    }
}

/// Smooth data compatible with every algebraic row of the model: blocks
/// without inertia are solved from their constraint, trace unknowns match
/// their partner's endpoint value, and algebraic traces fix that endpoint
/// value. Dynamic boundaries see a nonzero endpoint value so damping acts
/// from the first step.
pub fn smooth_initial_state(model: &AssembledModel) -> Result<StateVector> {
    let layout = model.layout();
    let sys = &model.system;
    let is_algebraic = |name: &str| -> Result<bool> {
        Ok(layout.require(name)?.range().all(|i| sys.m0.get(i, i) == 0.0))
    };
    let solve_rows = |u: &mut StateVector, name: &str| -> Result<()> {
        let au = sys.a.mul_vec(u.values());
        for i in layout.require(name)?.range() {
            let m1 = sys.m1.get(i, i);
            if m1 == 0.0 {
                return Err(Error::NotCoercive(format!("block {name} has no inertia and no damping")));
            }
            u.values_mut()[i] = -au[i] / m1;
        }
        Ok(())
    };

    let partners: Vec<&str> = model.traces.iter().map(|l| l.partner.as_str()).collect();
    let mut u = StateVector::from_fn(layout, |b, x| {
        if partners.contains(&b.name.as_str()) {
            0.5 * (PI * (x + 0.5)).sin()
        } else {
            base_profile(&b.name, b.tag, x)
        }
    })?;

    // Fields without inertia: ∑ (M1 u + A u) = 0 on the block.
    for block in layout.blocks() {
        if !matches!(block.tag, SpaceTag::Trace(_)) && is_algebraic(&block.name)? {
            solve_rows(&mut u, &block.name)?;
        }
    }

    let grid = layout.grid().clone();
    let mut partner_ends: Vec<(String, f64, f64)> = Vec::new();
    for link in &model.traces {
        if is_algebraic(&link.partner)? {
            let p = u.block(&link.partner)?;
            let e = extrapolate_center_to_boundary(p, link.side == Side::Right)?;
            u.block_mut(&link.trace)?[0] = link.sign * e;
            if is_algebraic(&link.trace)? {
                solve_rows(&mut u, &link.trace)?;
            }
            continue;
        }
        let e = if is_algebraic(&link.trace)? {
            solve_rows(&mut u, &link.trace)?;
            u.block(&link.trace)?[0] / link.sign
        } else {
            1.0
        };
        u.block_mut(&link.trace)?[0] = link.sign * e;
        let entry = match partner_ends.iter_mut().find(|(n, _, _)| *n == link.partner) {
            Some(entry) => entry,
            None => {
                partner_ends.push((link.partner.clone(), 0.0, 0.0));
                partner_ends.last_mut().expect("just pushed")
            }
        };
        match link.side {
            Side::Left => entry.1 = e,
            Side::Right => entry.2 = e,
        }
    }
    for (name, left, right) in partner_ends {
        let tag = layout.require(&name)?.tag;
        let points = tag.points(&grid);
        for (v, x) in u.block_mut(&name)?.iter_mut().zip(points) {
            *v += left * (0.5 - x) + right * (x + 0.5);
        }
    }
    Ok(u)
}
