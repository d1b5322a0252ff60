use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;

use evobeam::cli::{
    emit_config, parse_config, InitialKind, OutputConfig, RunConfig, ScenarioConfig, SchemeConfig, SourceConfig,
    TraceSelection,
};
use evobeam::scenarios::{FullDynamicParams, SturmLiouvilleParams, TimoshenkoParams, Variant};
use evobeam::space::{Profile, Signal};
use evobeam::wellposed::NevanlinnaSpec;

const DAMPED: &str = "[grid]
n_cells = 16

[scenario]
name = timoshenko_damped
c = 0.5
i_tilde = 0

[scheme]
dt = 0.0625
t_end = 2
rho = 2
c_target = 0.25

[source]
kind = gaussian
block = tau_plus
center = 0.5
width = 0.2
initial = smooth
";

fn evobeam(dir: &Path, args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_evobeam"));
    cmd.current_dir(dir).args(args).env_remove("EVOBEAM_SEED");
    if let Some(s) = seed {
        cmd.env("EVOBEAM_SEED", s);
    }
    cmd.output().unwrap()
}

fn with_config(text: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.ini"), text).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_report_is_golden() {
    let dir = with_config(DAMPED);
    let o = evobeam(dir.path(), &["check", "cfg.ini"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "c0=5.0000000000000000e-1\nrho0=2.5000000000000000e-1\nbound=2.0000000000000000e0\n\
         skew_defect=0.0000000000000000e0\nnevanlinna=pass\n"
    );
}

#[test]
fn unreachable_coercivity_target_is_ill_posed() {
    let dir = with_config(&DAMPED.replace("c_target = 0.25", "c_target = 1e30"));
    let o = evobeam(dir.path(), &["check", "cfg.ini"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("rho0=none"));
}

#[test]
fn run_writes_csv_and_snapshots() {
    let text = format!("{DAMPED}\n[output]\npath = out.csv\nsnapshots = snap.csv\nsnapshot_every = 8\n");
    let dir = with_config(&text.replace("t_end = 2", "t_end = 2\nrecord_every = 3"));
    let o = evobeam(dir.path(), &["run", "cfg.ini"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,energy,trace:tau_plus");
    // floor(2 / 0.0625 / 3) + 1 rows.
    assert_eq!(lines.len() - 1, 11);
    assert!(lines[2].starts_with("0.1875,"));
    let snap = fs::read_to_string(dir.path().join("snap.csv")).unwrap();
    let mut rows = snap.lines();
    assert_eq!(rows.next(), Some("t,block,index,value"));
    let dim = 16 + 16 + 1 + 15 + 16;
    assert_eq!(rows.count(), 2 * dim);
}

#[test]
fn csv_floats_round_trip() {
    use evobeam::cli::{build_source, initial_state, scheme_params};
    let text = format!("{DAMPED}\n[output]\npath = out.csv\n");
    let dir = with_config(&text);
    evobeam(dir.path(), &["run", "cfg.ini"], None);
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let cfg = parse_config(&text).unwrap();
    let model = cfg.scenario.build(&cfg.grid().unwrap()).unwrap();
    let scheme = scheme_params(&cfg, false);
    let ts = evobeam::integrate::run(
        &model.factor(&scheme).unwrap(),
        &initial_state(&cfg, &model).unwrap(),
        &build_source(&cfg, &model).unwrap(),
        &scheme,
    )
    .unwrap();
    for (line, e) in csv.lines().skip(1).zip(ts.energy()) {
        let parsed: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed.to_bits(), e.to_bits());
    }
}

#[test]
fn zero_data_gives_zero_energy() {
    let text = "[grid]\nn_cells = 8\n[scenario]\nname = sturm_liouville\ns0 = 1\ns1 = 0\n[scheme]\ndt = 0.1\nt_end = 1\n[output]\npath = z.csv\ntraces = none\n";
    let dir = with_config(text);
    assert_eq!(evobeam(dir.path(), &["run", "cfg.ini"], None).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("z.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,energy"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.ends_with(",0")));
}

#[test]
fn runs_are_deterministic() {
    let text = format!("{DAMPED}\n[output]\npath = out.csv\n").replace("initial = smooth", "initial = random");
    let dir = with_config(&text);
    let read = |seed| {
        assert_eq!(evobeam(dir.path(), &["run", "cfg.ini"], seed).status.code(), Some(0));
        fs::read(dir.path().join("out.csv")).unwrap()
    };
    let a = read(Some("7"));
    assert_eq!(a, read(Some("7")));
    assert_ne!(a, read(Some("8")));
    assert_eq!(read(None), read(Some("0")));
    assert_eq!(evobeam(dir.path(), &["run", "cfg.ini"], Some("x")).status.code(), Some(4));
}

#[test]
fn probes() {
    let dir = with_config(DAMPED);
    let o = evobeam(dir.path(), &["probe", "cfg.ini", "--kind", "causality", "--a", "0.5"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "max_dev_before_a=0.0000000000000000e0\nstatus=pass\n");
    let o = evobeam(dir.path(), &["probe", "cfg.ini", "--kind", "bound"], None);
    assert_eq!(o.status.code(), Some(0));
    let ratio: f64 = stdout(&o).lines().next().unwrap().strip_prefix("ratio=").unwrap().parse().unwrap();
    assert!(ratio <= 2.1);
    let o = evobeam(dir.path(), &["probe", "cfg.ini", "--kind", "causality", "--a", "3"], None);
    assert_eq!(o.status.code(), Some(4));
    let zero = with_config(&DAMPED.replace("kind = gaussian", "kind = zero").replace("block = tau_plus\ncenter = 0.5\nwidth = 0.2\n", ""));
    assert_eq!(evobeam(zero.path(), &["probe", "cfg.ini", "--kind", "bound"], None).status.code(), Some(4));
}

#[test]
fn converge_command() {
    let dir = with_config(&DAMPED.replace("t_end = 2", "t_end = 1"));
    let o = evobeam(dir.path(), &["converge", "cfg.ini", "--levels", "8,16,32,64"], None);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().next().unwrap().starts_with("error_8="));
    assert!(out.ends_with("status=pass\n"));
    for bad in ["8,8,16", "8,16"] {
        let o = evobeam(dir.path(), &["converge", "cfg.ini", "--levels", bad], None);
        assert_eq!(o.status.code(), Some(4), "{bad}");
    }
    let heat = with_config(
        "[grid]\nn_cells = 16\n[scenario]\nname = sturm_liouville\ns0 = 0\ns1 = 1\nmu_minus = 1, 0.5\nmu_plus = 1, 0.5\n[scheme]\ndt = 0.01\nt_end = 0.5\n[source]\ninitial = smooth\n",
    );
    let o = evobeam(heat.path(), &["converge", "cfg.ini", "--levels", "16,32,64,128"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn error_statuses() {
    let dir = with_config(DAMPED);
    assert_eq!(evobeam(dir.path(), &["check", "missing.ini"], None).status.code(), Some(3));
    let bad = with_config(&format!("{DAMPED}\n[output]\npath = no/such/dir/out.csv\n"));
    assert_eq!(evobeam(bad.path(), &["run", "cfg.ini"], None).status.code(), Some(3));
    assert_eq!(evobeam(dir.path(), &["run", "cfg.ini"], None).status.code(), Some(4));
    assert_eq!(evobeam(dir.path(), &["frobnicate"], None).status.code(), Some(4));
    let invalid = with_config(&DAMPED.replace("c = 0.5", "c = 0"));
    let o = evobeam(invalid.path(), &["check", "cfg.ini"], None);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not both zero"));
    assert_eq!(evobeam(dir.path(), &["--help"], None).status.code(), Some(0));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![(-1e6..1e6f64), (0i32..100).prop_map(f64::from), Just(1e-300), Just(0.1)]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![(1e-3..1e3f64), Just(1.0), Just(2.5e-7)]
}

fn profile() -> impl Strategy<Value = Profile> {
    prop_oneof![
        positive().prop_map(Profile::Constant),
        (positive(), positive()).prop_map(|(left, right)| Profile::Linear { left, right }),
    ]
}

fn law() -> impl Strategy<Value = NevanlinnaSpec> {
    (0.0..10f64, 0.0..10f64, any::<bool>()).prop_map(|(a, b, zero_a)| {
        if zero_a {
            NevanlinnaSpec { mu0: 0.0, mu1: b + 0.5 }
        } else {
            NevanlinnaSpec { mu0: a + 0.5, mu1: b }
        }
    })
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    let beam = || (profile(), profile(), profile(), profile(), (0.0..5f64).prop_map(Profile::Constant));
    prop_oneof![
        (beam(), 0.0..5f64, 0.0..5f64, positive(), any::<bool>(), any::<bool>()).prop_map(
            |((k1, n1, n2, k2, d), c, i, s, flip, inertia)| ScenarioConfig::Timoshenko {
                variant: if inertia { Variant::DynamicInertia } else { Variant::TimoshenkoDamped },
                params: TimoshenkoParams { kappa1: k1, nu1: n1, nu2: n2, kappa2: k2, d, c: c + 0.1, i_tilde: i, sigma0: -s },
                flip,
            }
        ),
        (beam(), law(), law(), law(), law()).prop_map(|((k1, n1, n2, k2, d), a, b, c, e)| {
            ScenarioConfig::FullDynamic(FullDynamicParams {
                kappa1: k1,
                nu1: n1,
                nu2: n2,
                kappa2: k2,
                d,
                tau0_minus: a,
                tau0_plus: b,
                tau1_minus: c,
                tau1_plus: e,
            })
        }),
        (profile(), 0.0..3f64, 0.0..3f64, law(), law()).prop_map(|(r, s0, s1, m, p)| {
            ScenarioConfig::SturmLiouville(SturmLiouvilleParams {
                r,
                q: Profile::Constant(0.5),
                s0,
                s1: s1 + 0.01,
                mu_minus: m,
                mu_plus: p,
            })
        }),
    ]
}

fn signal() -> impl Strategy<Value = (Signal, Option<String>)> {
    prop_oneof![
        Just((Signal::Zero, None)),
        (finite(), positive(), finite()).prop_map(|(center, width, amplitude)| {
            (Signal::Gaussian { center, width, amplitude }, Some("v1".to_string()))
        }),
        (finite(), positive(), finite()).prop_map(|(center, half_width, amplitude)| {
            (Signal::Bump { center, half_width, amplitude }, Some("eta".to_string()))
        }),
        (finite(), finite(), finite()).prop_map(|(frequency, phase, amplitude)| {
            (Signal::Sinusoid { frequency, phase, amplitude }, Some("v1".to_string()))
        }),
    ]
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        4usize..300,
        scenario(),
        (positive(), positive(), 0.5..=1.0f64, 1usize..50, positive(), positive()),
        signal(),
        prop_oneof![Just(InitialKind::Zero), Just(InitialKind::Smooth), Just(InitialKind::Random)],
        (proptest::option::of("[a-z]{1,8}\\.csv"), proptest::option::of("[a-z]{1,8}\\.csv"), 1usize..10, any::<bool>()),
    )
        .prop_map(|(n_cells, scenario, (dt, t_end, theta, record_every, rho, c_target), (signal, block), initial, (path, snapshots, snapshot_every, all))| {
            RunConfig {
                n_cells,
                scenario,
                scheme: SchemeConfig { dt, t_end, theta, record_every, rho, c_target },
                source: SourceConfig { signal, block, initial },
                output: OutputConfig {
                    path,
                    traces: if all { TraceSelection::All } else { TraceSelection::Named(Vec::new()) },
                    snapshots,
                    snapshot_every,
                },
            }
        })
}

fn proptest_config() -> ProptestConfig {
    let mut cfg = ProptestConfig::default();
    if let Some(seed) = std::env::var("EVOBEAM_SEED").ok().and_then(|s| s.parse().ok()) {
        cfg.rng_seed = proptest::test_runner::RngSeed::Fixed(seed);
    }
    cfg
}

proptest! {
    #![proptest_config(proptest_config())]

    #[test]
    fn emitted_configs_parse_back(cfg in config()) {
        let text = emit_config(&cfg);
        let parsed = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(parsed, cfg);
    }
}
