use super::mms::{exact_state, manufactured_source, ExactSolution};
use super::AssembledModel;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::integrate::{run, SchemeParams};
use crate::space::{Grid, SpaceTag, StateVector, ZeroSource};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceLevel {
    pub n_cells: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares slope of `log error` against `log h`.
    pub slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::dim(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("slope fit needs two points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Numeric("slope fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("slope fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}

/// Transfers a fine-grid state onto a coarser layout with the same blocks.
/// Nodes are injected; a coarse center takes the fine center at the same
/// point, or the mean of the two fine centers straddling it when the
/// refinement ratio is even.
pub fn restrict_to(fine: &StateVector, coarse: &std::sync::Arc<crate::space::StateLayout>) -> Result<StateVector> {
    let nf = fine.layout().grid().n_cells();
    let nc = coarse.grid().n_cells();
    if nc == 0 || nf % nc != 0 {
        return Err(Error::InvalidGrid(format!("{nf} cells do not refine {nc}")));
    }
    let r = nf / nc;
    let mut out = StateVector::zeros(coarse);
    for block in coarse.blocks() {
        let src = fine.block(&block.name)?;
        let fine_tag = fine.layout().require(&block.name)?.tag;
        if fine_tag != block.tag {
            return Err(Error::Parameter(format!("block {} changes placement", block.name)));
        }
        let dst = out.block_mut(&block.name)?;
        match block.tag {
            SpaceTag::Center => {
                for (j, d) in dst.iter_mut().enumerate() {
                    let mid = j * r + r / 2;
                    *d = if r % 2 == 0 { 0.5 * (src[mid - 1] + src[mid]) } else { src[mid] };
                }
            }
            SpaceTag::Trace(_) => dst.copy_from_slice(src),
            tag => {
                let first = tag.first_node();
                for (k, d) in dst.iter_mut().enumerate() {
                    *d = src[(k + first) * r - first];
                }
            }
        }
    }
    Ok(out)
}

fn level_scheme(grid: &Grid, t_end: f64) -> SchemeParams {
    let dt = grid.h();
    let mut scheme = SchemeParams::new(dt, t_end);
    scheme.record_every = scheme.n_steps().max(1);
    scheme
}

fn final_state(model: &AssembledModel, u0: &StateVector, source: &dyn crate::space::Source, t_end: f64) -> Result<StateVector> {
    let scheme = level_scheme(model.grid(), t_end);
    let sys = model.factor(&scheme)?;
    run(&sys, u0, source, &scheme)?.last_snapshot()
}

fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 2 {
        return Err(Error::InsufficientData("convergence needs at least two levels".into()));
    }
    Ok(())
}

fn report(levels: Vec<ConvergenceLevel>) -> Result<ConvergenceReport> {
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let e: Vec<f64> = levels.iter().map(|l| l.error).collect();
    let slope = fit_slope(&h, &e)?;
    Ok(ConvergenceReport { levels, slope })
}

/// Runs the manufactured problem to `t_end` at `dt = h` on each level and
/// measures the weighted error against the exact fields.
pub fn mms_convergence(
    exec: Execution,
    build: &(dyn Fn(&Grid) -> Result<AssembledModel> + Sync),
    exact: &dyn ExactSolution,
    levels: &[usize],
    t_end: f64,
) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    let results = exec.try_map(levels, |&n| -> Result<ConvergenceLevel> {
        let grid = Grid::new(n)?;
        let model = build(&grid)?;
        let u0 = exact_state(&model, exact, 0.0)?;
        let source = manufactured_source(&model, exact);
        let u = final_state(&model, &u0, &source, t_end)?;
        let t = level_scheme(&grid, t_end).n_steps() as f64 * grid.h();
        let reference = exact_state(&model, exact, t)?;
        let diff: Vec<f64> = u.values().iter().zip(reference.values()).map(|(a, b)| a - b).collect();
        Ok(ConvergenceLevel {
            n_cells: n,
            h: grid.h(),
            error: model.system.weights.norm_sq(&diff)?.sqrt(),
        })
    })?;
    report(results)
}

/// Unforced runs from `initial` compared with a run on `reference_n` cells,
/// restricted to each level.
pub fn self_convergence(
    exec: Execution,
    build: &(dyn Fn(&Grid) -> Result<AssembledModel> + Sync),
    initial: &(dyn Fn(&AssembledModel) -> Result<StateVector> + Sync),
    levels: &[usize],
    reference_n: usize,
    t_end: f64,
) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    if let Some(bad) = levels.iter().find(|&&n| n == 0 || reference_n % n != 0 || n >= reference_n) {
        return Err(Error::InvalidGrid(format!("reference {reference_n} does not refine level {bad}")));
    }
    let solve = |n: usize| -> Result<(AssembledModel, StateVector)> {
        let model = build(&Grid::new(n)?)?;
        let u0 = initial(&model)?;
        let u = final_state(&model, &u0, &ZeroSource(model.system.dim()), t_end)?;
        Ok((model, u))
    };
    let (_, fine) = solve(reference_n)?;
    let results = exec.try_map(levels, |&n| -> Result<ConvergenceLevel> {
        let (model, u) = solve(n)?;
        let r = restrict_to(&fine, model.layout())?;
        let diff: Vec<f64> = u.values().iter().zip(r.values()).map(|(a, b)| a - b).collect();
        Ok(ConvergenceLevel {
            n_cells: n,
            h: model.grid().h(),
            error: model.system.weights.norm_sq(&diff)?.sqrt(),
        })
    })?;
    report(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{timoshenko_layout, V1};
    use crate::space::build_grid;

    #[test]
    fn slope_of_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((fit_slope(&h, &e).unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_slope(&h[..1], &e[..1]).is_err());
        assert!(fit_slope(&[0.1, 0.1], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn restriction_samples_smooth_fields() {
        let f = |x: f64| 1.0 + x;
        let fine = timoshenko_layout(&build_grid(16).unwrap());
        let coarse = timoshenko_layout(&build_grid(4).unwrap());
        let uf = StateVector::from_fn(&fine, |_, x| f(x)).unwrap();
        let uc = restrict_to(&uf, &coarse).unwrap();
        let expected = StateVector::from_fn(&coarse, |_, x| f(x)).unwrap();
        for (a, b) in uc.values().iter().zip(expected.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(uc.block(V1).unwrap().len(), 4);
        let odd = timoshenko_layout(&build_grid(12).unwrap());
        let uo = restrict_to(&StateVector::from_fn(&odd, |_, x| f(x)).unwrap(), &coarse).unwrap();
        for (a, b) in uo.values().iter().zip(expected.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(restrict_to(&uf, &timoshenko_layout(&build_grid(5).unwrap())).is_err());
    }
}
