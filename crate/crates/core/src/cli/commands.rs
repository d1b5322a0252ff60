use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::config::{InitialKind, RunConfig, ScenarioConfig, TraceSelection};
use crate::error::{Error, Result};
use crate::integrate::{bound_probe, causality_probe, run, SchemeParams};
use crate::scenarios::{
    mms_convergence, self_convergence, smooth_initial_state, AssembledModel, ConvergenceReport, TimoshenkoMms,
};
use crate::space::{Combination, SeparableSource, Signal, StateVector, TimeSeries};
use crate::wellposed::{find_rho0, nevanlinna_check};
use crate::Execution;

pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ILL_POSED: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

pub const SEED_VAR: &str = "EVOBEAM_SEED";

const CAUSALITY_TOL: f64 = 1e-13;
const BOUND_SLACK: f64 = 1.05;
const SLOPE_MIN: f64 = 1.9;
const SKEW_TOL: f64 = 1e-13;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Config { .. }
        | Error::Usage(_)
        | Error::Parameter(_)
        | Error::InvalidProbe(_)
        | Error::UndefinedRatio(_)
        | Error::InvalidSample(_)
        | Error::InvalidGrid(_) => EXIT_USAGE,
        Error::NotCoercive(_) | Error::IllPosed(_) => EXIT_ILL_POSED,
        _ => EXIT_FAIL,
    }
}

fn line(out: &mut dyn Write, key: &str, value: f64) -> Result<()> {
    writeln!(out, "{key}={value:.16e}")?;
    Ok(())
}

fn status(out: &mut dyn Write, pass: bool) -> Result<i32> {
    writeln!(out, "status={}", if pass { "pass" } else { "fail" })?;
    Ok(if pass { 0 } else { EXIT_FAIL })
}

/// Seed for randomized initial states, from `EVOBEAM_SEED` (default 0).
pub fn seed() -> Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{SEED_VAR}={v} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn initial_state(cfg: &RunConfig, model: &AssembledModel) -> Result<StateVector> {
    match cfg.source.initial {
        InitialKind::Zero => Ok(StateVector::zeros(model.layout())),
        InitialKind::Smooth => smooth_initial_state(model),
        InitialKind::Random => {
            let mut rng = StdRng::seed_from_u64(seed()?);
            let values = (0..model.system.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
            StateVector::from_values(model.layout(), values)
        }
    }
}

pub fn build_source(cfg: &RunConfig, model: &AssembledModel) -> Result<SeparableSource> {
    let source = SeparableSource::new(model.system.dim());
    match &cfg.source.block {
        Some(block) => source.with_block_term(model.layout(), block, cfg.source.signal.clone(), |_| 1.0),
        None => Ok(source),
    }
}

pub fn scheme_params(cfg: &RunConfig, snapshots: bool) -> SchemeParams {
    let s = &cfg.scheme;
    SchemeParams {
        dt: s.dt,
        theta: s.theta,
        t_end: s.t_end,
        record_every: s.record_every,
        rho: s.rho,
        record_snapshots: snapshots,
    }
}

/// Sample grid on rays of the open upper half-plane.
fn half_plane_samples() -> Vec<Complex64> {
    let mut z = Vec::new();
    for i in 0..13 {
        let r = 10f64.powf(-3.0 + 0.5 * i as f64);
        for k in 1..12 {
            z.push(Complex64::from_polar(r, std::f64::consts::PI * k as f64 / 12.0));
        }
    }
    z
}

pub fn cmd_check(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let grid = cfg.grid()?;
    let model = cfg.scenario.build(&grid)?;
    let sys = &model.system;
    let report = model.coercivity(cfg.scheme.rho)?;
    line(out, "c0", report.c0)?;
    if !report.satisfied {
        writeln!(out, "c0<=0")?;
        return Ok(EXIT_ILL_POSED);
    }
    let mut code = 0;
    match find_rho0(&sys.m0, &sys.m1, cfg.scheme.c_target, &sys.weights) {
        Ok(rho0) => line(out, "rho0", rho0)?,
        Err(Error::NotCoercive(_)) => {
            writeln!(out, "rho0=none")?;
            code = EXIT_ILL_POSED;
        }
        Err(e) => return Err(e),
    }
    line(out, "bound", report.bound)?;
    let defect = model.skew_defect();
    line(out, "skew_defect", defect)?;
    if defect > SKEW_TOL / grid.h() {
        code = EXIT_ILL_POSED;
    }
    let samples = half_plane_samples();
    let mut nevanlinna = true;
    for (_, spec) in model.nevanlinna_specs() {
        nevanlinna &= nevanlinna_check(&spec, &samples)?;
    }
    writeln!(out, "nevanlinna={}", if nevanlinna { "pass" } else { "fail" })?;
    if !nevanlinna {
        code = EXIT_ILL_POSED;
    }
    Ok(code)
}

/// `t,energy[,trace:<name>...]`, one row per record.
pub fn write_csv(series: &TimeSeries, traces: &TraceSelection, w: &mut dyn Write) -> Result<()> {
    let selected: Vec<&(String, Vec<f64>)> = series
        .traces()
        .iter()
        .filter(|(name, _)| match traces {
            TraceSelection::All => true,
            TraceSelection::Named(names) => names.contains(name),
        })
        .collect();
    write!(w, "t,energy")?;
    for (name, _) in &selected {
        write!(w, ",trace:{name}")?;
    }
    w.write_all(b"\n")?;
    for (k, (t, e)) in series.times().iter().zip(series.energy()).enumerate() {
        write!(w, "{t},{e}")?;
        for (_, values) in &selected {
            write!(w, ",{}", values[k])?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// `t,block,index,value`, for every `every`-th record.
pub fn write_snapshots(series: &TimeSeries, every: usize, w: &mut dyn Write) -> Result<()> {
    let layout = series.layout();
    writeln!(w, "t,block,index,value")?;
    for (k, (t, snap)) in series.times().iter().zip(series.snapshots()?).enumerate() {
        if k % every != 0 {
            continue;
        }
        for b in layout.blocks() {
            for (i, v) in snap[b.range()].iter().enumerate() {
                writeln!(w, "{t},{},{i},{v}", b.name)?;
            }
        }
    }
    Ok(())
}

fn write_file(path: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let Some(path) = &cfg.output.path else {
        return Err(Error::Usage("run needs [output] path".into()));
    };
    let model = cfg.scenario.build(&cfg.grid()?)?;
    let scheme = scheme_params(cfg, cfg.output.snapshots.is_some());
    scheme.validate()?;
    let sys = model.factor(&scheme)?;
    let u0 = initial_state(cfg, &model)?;
    let source = build_source(cfg, &model)?;
    let series = run(&sys, &u0, &source, &scheme)?;
    write_file(path, |w| write_csv(&series, &cfg.output.traces, w))?;
    if let Some(snap) = &cfg.output.snapshots {
        write_file(snap, |w| write_snapshots(&series, cfg.output.snapshot_every, w))?;
    }
    writeln!(out, "rows={}", series.len())?;
    line(out, "energy_initial", series.energy()[0])?;
    line(out, "energy_final", *series.energy().last().expect("t = 0 is recorded"))?;
    Ok(0)
}

pub fn check_levels(levels: &[usize]) -> Result<()> {
    if levels.len() < 3 {
        return Err(Error::Usage("converge needs at least 3 levels".into()));
    }
    if levels.iter().collect::<BTreeSet<_>>().len() != levels.len() {
        return Err(Error::Usage("levels must be distinct".into()));
    }
    if levels.iter().any(|&n| n < 4) {
        return Err(Error::Usage("levels need at least 4 cells".into()));
    }
    Ok(())
}

/// Manufactured-solution study for the beam scenarios, self-convergence
/// against a four times finer run for Sturm–Liouville.
pub fn convergence_study(cfg: &RunConfig, levels: &[usize]) -> Result<ConvergenceReport> {
    check_levels(levels)?;
    let exec = Execution::default();
    let t_end = cfg.scheme.t_end;
    let build = |g: &crate::space::Grid| cfg.scenario.build(g);
    match &cfg.scenario {
        ScenarioConfig::SturmLiouville(_) => {
            let finest = *levels.iter().max().expect("nonempty levels");
            self_convergence(exec, &build, &smooth_initial_state, levels, 4 * finest, t_end)
        }
        ScenarioConfig::Timoshenko { params, .. } => {
            let exact = TimoshenkoMms {
                kappa1: params.kappa1,
                kappa2: params.kappa2,
            };
            mms_convergence(exec, &build, &exact, levels, t_end)
        }
        ScenarioConfig::FullDynamic(p) => {
            let exact = TimoshenkoMms {
                kappa1: p.kappa1,
                kappa2: p.kappa2,
            };
            mms_convergence(exec, &build, &exact, levels, t_end)
        }
    }
}

pub fn cmd_converge(cfg: &RunConfig, levels: &[usize], out: &mut dyn Write) -> Result<i32> {
    let report = convergence_study(cfg, levels)?;
    for l in &report.levels {
        line(out, &format!("error_{}", l.n_cells), l.error)?;
    }
    line(out, "slope", report.slope)?;
    status(out, report.slope >= SLOPE_MIN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProbeKind {
    Causality,
    Bound,
}

pub fn cmd_probe(cfg: &RunConfig, kind: ProbeKind, a: Option<f64>, out: &mut dyn Write) -> Result<i32> {
    let model = cfg.scenario.build(&cfg.grid()?)?;
    let scheme = scheme_params(cfg, true);
    scheme.validate()?;
    let sys = model.factor(&scheme)?;
    let f = build_source(cfg, &model)?;
    match kind {
        ProbeKind::Causality => {
            let a = a.ok_or_else(|| Error::Usage("causality probe needs --a".into()))?;
            if !(0.0..=scheme.t_end).contains(&a) {
                return Err(Error::Usage(format!("--a {a} outside [0, {}]", scheme.t_end)));
            }
            let block = match &cfg.source.block {
                Some(b) => b.clone(),
                None => model
                    .layout()
                    .trace_blocks()
                    .next()
                    .map(|b| b.name.clone())
                    .ok_or_else(|| Error::Usage("no block to perturb".into()))?,
            };
            let half_width = (0.5 * (scheme.t_end - a)).max(scheme.dt);
            let pulse = SeparableSource::new(model.system.dim()).with_block_term(
                model.layout(),
                &block,
                Signal::Bump {
                    center: a + half_width,
                    half_width,
                    amplitude: 1.0,
                },
                |_| 1.0,
            )?;
            let g = Combination::new(vec![(1.0, &f), (1.0, &pulse)])?;
            let u0 = initial_state(cfg, &model)?;
            let dev = causality_probe(&sys, &u0, &f, &g, a, &scheme)?;
            line(out, "max_dev_before_a", dev)?;
            status(out, dev <= CAUSALITY_TOL)
        }
        ProbeKind::Bound => {
            let report = model.coercivity(cfg.scheme.rho)?;
            if !report.satisfied {
                line(out, "c0", report.c0)?;
                writeln!(out, "c0<=0")?;
                return Ok(EXIT_ILL_POSED);
            }
            let ratio = bound_probe(&sys, &f, &scheme, cfg.scheme.rho)?;
            line(out, "ratio", ratio)?;
            line(out, "limit", report.bound)?;
            status(out, ratio <= BOUND_SLACK * report.bound)
        }
    }
}
