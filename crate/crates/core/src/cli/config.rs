use std::fmt::Write as _;

use crate::discretize::{full_dynamic_layout, timoshenko_layout, two_trace_layout};
use crate::error::{Error, Result};
use crate::scenarios::{
    apply_sign_flip, make_dynamic_inertia, make_full_dynamic, make_sturm_liouville, make_timoshenko_damped,
    AssembledModel, FullDynamicParams, SturmLiouvilleParams, TimoshenkoParams, Variant,
};
use crate::space::{Grid, Profile, Signal, StateLayout};
use crate::wellposed::NevanlinnaSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioConfig {
    Timoshenko {
        variant: Variant,
        params: TimoshenkoParams,
        flip: bool,
    },
    FullDynamic(FullDynamicParams),
    SturmLiouville(SturmLiouvilleParams),
}

impl ScenarioConfig {
    pub fn variant(&self) -> Variant {
        match self {
            ScenarioConfig::Timoshenko { variant, .. } => *variant,
            ScenarioConfig::FullDynamic(_) => Variant::FullDynamic,
            ScenarioConfig::SturmLiouville(_) => Variant::SturmLiouville,
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<AssembledModel> {
        match self {
            ScenarioConfig::Timoshenko { variant, params, flip } => {
                let model = match variant {
                    Variant::DynamicInertia => make_dynamic_inertia(grid, params)?,
                    _ => make_timoshenko_damped(grid, params)?,
                };
                if *flip {
                    apply_sign_flip(&model)
                } else {
                    Ok(model)
                }
            }
            ScenarioConfig::FullDynamic(p) => make_full_dynamic(grid, p),
            ScenarioConfig::SturmLiouville(p) => make_sturm_liouville(grid, p),
        }
    }

    /// Block names of the scenario's layout.
    pub fn layout(&self, grid: &Grid) -> std::sync::Arc<StateLayout> {
        match self {
            ScenarioConfig::Timoshenko { .. } => timoshenko_layout(grid),
            ScenarioConfig::FullDynamic(_) => full_dynamic_layout(grid),
            ScenarioConfig::SturmLiouville(_) => two_trace_layout(grid),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub theta: f64,
    pub record_every: usize,
    pub rho: f64,
    pub c_target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Zero,
    Smooth,
    /// Uniform entries in [-1, 1] from a seeded generator.
    Random,
}

impl InitialKind {
    fn name(self) -> &'static str {
        match self {
            InitialKind::Zero => "zero",
            InitialKind::Smooth => "smooth",
            InitialKind::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub signal: Signal,
    /// Block the signal drives, uniformly in space. `None` iff the signal is zero.
    pub block: Option<String>,
    pub initial: InitialKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceSelection {
    All,
    Named(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub traces: TraceSelection,
    pub snapshots: Option<String>,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_cells: usize,
    pub scenario: ScenarioConfig,
    pub scheme: SchemeConfig,
    pub source: SourceConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_cells)
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    used: bool,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn error(&self, key: &str, line: usize, message: impl Into<String>) -> Error {
        Error::Config {
            section: self.name.clone(),
            key: key.into(),
            line,
            message: message.into(),
        }
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        let e = self.entries.iter_mut().find(|e| e.key == key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn get<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => parse(&v).map(Some).map_err(|m| self.error(key, line, m)),
        }
    }

    fn or<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> Result<T> {
        Ok(self.get(key, parse)?.unwrap_or(default))
    }

    fn require<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<T> {
        let line = self.line;
        self.get(key, parse)?
            .ok_or_else(|| self.error(key, line, "missing required key"))
    }

    /// Line of `key`, or of the section header.
    fn line_of(&self, key: &str) -> usize {
        self.entries.iter().find(|e| e.key == key).map_or(self.line, |e| e.line)
    }

    fn finish(&self) -> Result<()> {
        match self.entries.iter().find(|e| !e.used) {
            Some(e) => Err(self.error(&e.key, e.line, "unknown key")),
            None => Ok(()),
        }
    }
}

fn float(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn count(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("'{s}' is not a nonnegative integer"))
}

fn boolean(s: &str) -> Result<bool, String> {
    s.parse().map_err(|_| format!("'{s}' is not true or false"))
}

fn text(s: &str) -> Result<String, String> {
    Ok(s.to_string())
}

fn profile(s: &str) -> Result<Profile, String> {
    if let Some(inner) = s.strip_prefix("linear(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(format!("'{s}' should be linear(left, right)"));
        }
        return Ok(Profile::Linear {
            left: float(parts[0])?,
            right: float(parts[1])?,
        });
    }
    float(s).map(Profile::Constant)
}

fn law(s: &str) -> Result<NevanlinnaSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("'{s}' should be 'mu0, mu1'"));
    }
    NevanlinnaSpec::new(float(parts[0])?, float(parts[1])?).map_err(|e| e.to_string())
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.iter().any(|s| s.name == name) {
                return Err(Error::Config {
                    section: name,
                    key: String::new(),
                    line,
                    message: "duplicate section".into(),
                });
            }
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(section) = sections.last_mut() else {
            return Err(Error::Config {
                section: String::new(),
                key: String::new(),
                line,
                message: "entry before the first section".into(),
            });
        };
        let Some((key, value)) = content.split_once('=') else {
            return Err(section.error("", line, format!("expected 'key = value', got '{content}'")));
        };
        let key = key.trim().to_string();
        if section.entries.iter().any(|e| e.key == key) {
            return Err(section.error(&key, line, "duplicate key"));
        }
        section.entries.push(Entry {
            key,
            value: value.trim().to_string(),
            line,
            used: false,
        });
    }
    const KNOWN: [&str; 5] = ["grid", "scenario", "scheme", "source", "output"];
    if let Some(s) = sections.iter().find(|s| !KNOWN.contains(&s.name.as_str())) {
        return Err(s.error("", s.line, "unknown section"));
    }
    Ok(sections)
}

fn take(sections: &mut Vec<Section>, name: &str, required: bool) -> Result<Section> {
    match sections.iter().position(|s| s.name == name) {
        Some(i) => Ok(sections.remove(i)),
        None if required => Err(Error::Config {
            section: name.into(),
            key: String::new(),
            line: 0,
            message: "missing section".into(),
        }),
        None => Ok(Section {
            name: name.into(),
            line: 0,
            entries: Vec::new(),
        }),
    }
}

struct BeamCoefficients {
    kappa1: Profile,
    nu1: Profile,
    nu2: Profile,
    kappa2: Profile,
    d: Profile,
}

fn beam_coefficients(s: &mut Section) -> Result<BeamCoefficients> {
    let one = Profile::Constant(1.0);
    Ok(BeamCoefficients {
        kappa1: s.or("kappa1", one, profile)?,
        nu1: s.or("nu1", one, profile)?,
        nu2: s.or("nu2", one, profile)?,
        kappa2: s.or("kappa2", one, profile)?,
        d: s.or("d", Profile::Constant(0.0), profile)?,
    })
}

fn parse_scenario(s: &mut Section) -> Result<ScenarioConfig> {
    let name = s.require("name", text)?;
    let Some(variant) = Variant::from_name(&name) else {
        return Err(s.error("name", s.line_of("name"), format!("unknown scenario '{name}'")));
    };
    let scenario = match variant {
        Variant::TimoshenkoDamped | Variant::DynamicInertia => {
            let b = beam_coefficients(s)?;
            ScenarioConfig::Timoshenko {
                variant,
                params: TimoshenkoParams {
                    kappa1: b.kappa1,
                    nu1: b.nu1,
                    nu2: b.nu2,
                    kappa2: b.kappa2,
                    d: b.d,
                    c: s.or("c", 0.0, float)?,
                    i_tilde: s.or("i_tilde", 0.0, float)?,
                    sigma0: s.or("sigma0", 1.0, float)?,
                },
                flip: s.or("flip", false, boolean)?,
            }
        }
        Variant::FullDynamic => {
            let b = beam_coefficients(s)?;
            let unit = NevanlinnaSpec { mu0: 1.0, mu1: 0.0 };
            ScenarioConfig::FullDynamic(FullDynamicParams {
                kappa1: b.kappa1,
                nu1: b.nu1,
                nu2: b.nu2,
                kappa2: b.kappa2,
                d: b.d,
                tau0_minus: s.or("tau0_minus", unit, law)?,
                tau0_plus: s.or("tau0_plus", unit, law)?,
                tau1_minus: s.or("tau1_minus", unit, law)?,
                tau1_plus: s.or("tau1_plus", unit, law)?,
            })
        }
        Variant::SturmLiouville => {
            let unit = NevanlinnaSpec { mu0: 1.0, mu1: 0.0 };
            ScenarioConfig::SturmLiouville(SturmLiouvilleParams {
                r: s.or("r", Profile::Constant(1.0), profile)?,
                q: s.or("q", Profile::Constant(0.0), profile)?,
                s0: s.require("s0", float)?,
                s1: s.require("s1", float)?,
                mu_minus: s.or("mu_minus", unit, law)?,
                mu_plus: s.or("mu_plus", unit, law)?,
            })
        }
    };
    s.finish()?;
    let validated = match &scenario {
        ScenarioConfig::Timoshenko { params, .. } => params.validate(),
        ScenarioConfig::FullDynamic(p) => p.validate(),
        ScenarioConfig::SturmLiouville(p) => p.validate(),
    };
    validated.map_err(|e| s.error("", s.line, e.to_string()))?;
    Ok(scenario)
}

fn parse_scheme(s: &mut Section) -> Result<SchemeConfig> {
    let scheme = SchemeConfig {
        dt: s.require("dt", float)?,
        t_end: s.require("t_end", float)?,
        theta: s.or("theta", 0.5, float)?,
        record_every: s.or("record_every", 1, count)?,
        rho: s.or("rho", 1.0, float)?,
        c_target: s.or("c_target", 0.1, float)?,
    };
    s.finish()?;
    let checks = [
        ("dt", scheme.dt > 0.0, "must be positive"),
        ("t_end", scheme.t_end > 0.0, "must be positive"),
        ("theta", (0.5..=1.0).contains(&scheme.theta), "must lie in [0.5, 1]"),
        ("record_every", scheme.record_every > 0, "must be positive"),
        ("rho", scheme.rho > 0.0, "must be positive"),
        ("c_target", scheme.c_target > 0.0, "must be positive"),
    ];
    for (key, ok, message) in checks {
        if !ok {
            return Err(s.error(key, s.line_of(key), message));
        }
    }
    Ok(scheme)
}

fn parse_source(s: &mut Section, layout: &StateLayout) -> Result<SourceConfig> {
    let kind = s.or("kind", "zero".to_string(), text)?;
    let signal = match kind.as_str() {
        "zero" => Signal::Zero,
        "gaussian" => Signal::Gaussian {
            center: s.require("center", float)?,
            width: s.require("width", float)?,
            amplitude: s.or("amplitude", 1.0, float)?,
        },
        "bump" => Signal::Bump {
            center: s.require("center", float)?,
            half_width: s.require("half_width", float)?,
            amplitude: s.or("amplitude", 1.0, float)?,
        },
        "sinusoid" => Signal::Sinusoid {
            frequency: s.require("frequency", float)?,
            phase: s.or("phase", 0.0, float)?,
            amplitude: s.or("amplitude", 1.0, float)?,
        },
        other => return Err(s.error("kind", s.line_of("kind"), format!("unknown source kind '{other}'"))),
    };
    let block = match signal {
        Signal::Zero => None,
        _ => {
            let b = s.require("block", text)?;
            if layout.block(&b).is_none() {
                return Err(s.error("block", s.line_of("block"), format!("no block named '{b}'")));
            }
            Some(b)
        }
    };
    let widths = match signal {
        Signal::Gaussian { width, .. } => Some(("width", width)),
        Signal::Bump { half_width, .. } => Some(("half_width", half_width)),
        _ => None,
    };
    if let Some((key, w)) = widths {
        if !(w > 0.0) {
            return Err(s.error(key, s.line_of(key), "must be positive"));
        }
    }
    let initial = match s.or("initial", "zero".to_string(), text)?.as_str() {
        "zero" => InitialKind::Zero,
        "smooth" => InitialKind::Smooth,
        "random" => InitialKind::Random,
        other => return Err(s.error("initial", s.line_of("initial"), format!("unknown initial state '{other}'"))),
    };
    s.finish()?;
    Ok(SourceConfig { signal, block, initial })
}

fn parse_output(s: &mut Section, layout: &StateLayout) -> Result<OutputConfig> {
    let traces = match s.get("traces", text)? {
        None => TraceSelection::All,
        Some(v) if v == "all" => TraceSelection::All,
        Some(v) if v == "none" || v.is_empty() => TraceSelection::Named(Vec::new()),
        Some(v) => {
            let names: Vec<String> = v.split(',').map(|n| n.trim().to_string()).collect();
            if let Some(bad) = names.iter().find(|n| layout.trace_blocks().all(|b| &b.name != *n)) {
                return Err(s.error("traces", s.line_of("traces"), format!("no trace block named '{bad}'")));
            }
            TraceSelection::Named(names)
        }
    };
    let out = OutputConfig {
        path: s.get("path", text)?,
        traces,
        snapshots: s.get("snapshots", text)?,
        snapshot_every: s.or("snapshot_every", 1, count)?,
    };
    if out.snapshot_every == 0 {
        return Err(s.error("snapshot_every", s.line_of("snapshot_every"), "must be positive"));
    }
    s.finish()?;
    Ok(out)
}

/// Parses and validates a configuration in the INI dialect read by the CLI.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut sections = split_sections(text)?;
    let mut grid = take(&mut sections, "grid", true)?;
    let mut scenario = take(&mut sections, "scenario", true)?;
    let mut scheme = take(&mut sections, "scheme", true)?;
    let mut source = take(&mut sections, "source", false)?;
    let mut output = take(&mut sections, "output", false)?;

    let n_cells = grid.require("n_cells", count)?;
    grid.finish()?;
    if n_cells < 4 {
        return Err(grid.error("n_cells", grid.line_of("n_cells"), "need at least 4 cells"));
    }
    let scenario = parse_scenario(&mut scenario)?;
    let layout = scenario.layout(&Grid::new(n_cells)?);
    let scheme = parse_scheme(&mut scheme)?;
    let source = parse_source(&mut source, &layout)?;
    let output = parse_output(&mut output, &layout)?;
    Ok(RunConfig {
        n_cells,
        scenario,
        scheme,
        source,
        output,
    })
}

fn fmt_profile(p: &Profile) -> String {
    match p {
        Profile::Constant(c) => format!("{c}"),
        Profile::Linear { left, right } => format!("linear({left}, {right})"),
    }
}

fn fmt_law(l: &NevanlinnaSpec) -> String {
    format!("{}, {}", l.mu0, l.mu1)
}

/// Canonical text of a configuration, with every default written out.
pub fn emit_config(c: &RunConfig) -> String {
    let mut o = String::new();
    let mut kv = |k: &str, v: String| {
        if let Some(section) = k.strip_prefix('[') {
            let (name, key) = section.split_once(']').expect("section marker");
            if !o.is_empty() {
                o.push('\n');
            }
            let _ = writeln!(o, "[{name}]");
            let _ = writeln!(o, "{key} = {v}");
        } else {
            let _ = writeln!(o, "{k} = {v}");
        }
    };
    kv("[grid]n_cells", c.n_cells.to_string());
    kv("[scenario]name", c.scenario.variant().name().into());
    match &c.scenario {
        ScenarioConfig::Timoshenko { params: p, flip, .. } => {
            kv("kappa1", fmt_profile(&p.kappa1));
            kv("nu1", fmt_profile(&p.nu1));
            kv("nu2", fmt_profile(&p.nu2));
            kv("kappa2", fmt_profile(&p.kappa2));
            kv("d", fmt_profile(&p.d));
            kv("c", p.c.to_string());
            kv("i_tilde", p.i_tilde.to_string());
            kv("sigma0", p.sigma0.to_string());
            kv("flip", flip.to_string());
        }
        ScenarioConfig::FullDynamic(p) => {
            kv("kappa1", fmt_profile(&p.kappa1));
            kv("nu1", fmt_profile(&p.nu1));
            kv("nu2", fmt_profile(&p.nu2));
            kv("kappa2", fmt_profile(&p.kappa2));
            kv("d", fmt_profile(&p.d));
            kv("tau0_minus", fmt_law(&p.tau0_minus));
            kv("tau0_plus", fmt_law(&p.tau0_plus));
            kv("tau1_minus", fmt_law(&p.tau1_minus));
            kv("tau1_plus", fmt_law(&p.tau1_plus));
        }
        ScenarioConfig::SturmLiouville(p) => {
            kv("r", fmt_profile(&p.r));
            kv("q", fmt_profile(&p.q));
            kv("s0", p.s0.to_string());
            kv("s1", p.s1.to_string());
            kv("mu_minus", fmt_law(&p.mu_minus));
            kv("mu_plus", fmt_law(&p.mu_plus));
        }
    }
    let s = &c.scheme;
    kv("[scheme]dt", s.dt.to_string());
    kv("t_end", s.t_end.to_string());
    kv("theta", s.theta.to_string());
    kv("record_every", s.record_every.to_string());
    kv("rho", s.rho.to_string());
    kv("c_target", s.c_target.to_string());
    let src = &c.source;
    match &src.signal {
        Signal::Gaussian {
            center,
            width,
            amplitude,
        } => {
            kv("[source]kind", "gaussian".into());
            kv("center", center.to_string());
            kv("width", width.to_string());
            kv("amplitude", amplitude.to_string());
        }
        Signal::Bump {
            center,
            half_width,
            amplitude,
        } => {
            kv("[source]kind", "bump".into());
            kv("center", center.to_string());
            kv("half_width", half_width.to_string());
            kv("amplitude", amplitude.to_string());
        }
        Signal::Sinusoid {
            frequency,
            phase,
            amplitude,
        } => {
            kv("[source]kind", "sinusoid".into());
            kv("frequency", frequency.to_string());
            kv("phase", phase.to_string());
            kv("amplitude", amplitude.to_string());
        }
        Signal::Zero | Signal::Tabulated { .. } => kv("[source]kind", "zero".into()),
    }
    if let Some(b) = &src.block {
        kv("block", b.clone());
    }
    kv("initial", src.initial.name().into());
    let out = &c.output;
    kv(
        "[output]traces",
        match &out.traces {
            TraceSelection::All => "all".into(),
            TraceSelection::Named(n) if n.is_empty() => "none".into(),
            TraceSelection::Named(n) => n.join(", "),
        },
    );
    if let Some(p) = &out.path {
        kv("path", p.clone());
    }
    if let Some(p) = &out.snapshots {
        kv("snapshots", p.clone());
    }
    kv("snapshot_every", out.snapshot_every.to_string());
    o
}
