use proptest::prelude::*;

use evobeam::discretize::{adjoint_wrt, build_b, build_b_tilde, TraceAugmentedOp};
use evobeam::integrate::{energy_balance_residual, run, step, SchemeParams};
use evobeam::scenarios::{
    apply_sign_flip, make_dynamic_inertia, make_full_dynamic, make_sturm_liouville, make_timoshenko_damped,
    AssembledModel, FullDynamicParams, SturmLiouvilleParams, TimoshenkoParams,
};
use evobeam::space::{build_grid, Grid, SeparableSource, Signal, Source, StateVector, WeightMatrix};
use evobeam::wellposed::{nevanlinna_check, NevanlinnaSpec};
use num_complex::Complex64;

fn model(kind: usize, grid: &Grid, a: f64, b: f64) -> AssembledModel {
    let mu = NevanlinnaSpec::new(a, b).unwrap();
    match kind {
        0 => make_timoshenko_damped(grid, &TimoshenkoParams::unit(b, 0.0)).unwrap(),
        1 => {
            let mut p = TimoshenkoParams::unit(b, a);
            p.sigma0 = -a - 0.1;
            p.d = b.into();
            apply_sign_flip(&make_dynamic_inertia(grid, &p).unwrap()).unwrap()
        }
        2 => make_full_dynamic(grid, &FullDynamicParams::unit(mu)).unwrap(),
        _ => make_sturm_liouville(grid, &SturmLiouvilleParams::parabolic(1.0 + a, mu)).unwrap(),
    }
}

fn case() -> impl Strategy<Value = (usize, usize, f64, f64, u64)> {
    (0usize..4, 4usize..40, 0.1..3.0f64, 0.1..3.0f64, any::<u64>())
}

fn vector(len: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn range_weights(op: &TraceAugmentedOp, grid: &Grid) -> WeightMatrix {
    WeightMatrix::from_diag(op.range.iter().flat_map(|t| t.weights(grid)).collect()).unwrap()
}

/// `EVOBEAM_SEED` pins the generator; otherwise proptest's default applies.
fn config() -> ProptestConfig {
    let mut cfg = ProptestConfig::default();
    if let Some(seed) = std::env::var("EVOBEAM_SEED").ok().and_then(|s| s.parse().ok()) {
        cfg.rng_seed = proptest::test_runner::RngSeed::Fixed(seed);
    }
    cfg
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn inner_product_is_symmetric_bilinear_positive(n in 2usize..30, s in any::<u64>(), alpha in -3.0..3.0f64) {
        let g = build_grid(n).unwrap();
        let layout = evobeam::discretize::timoshenko_layout(&g);
        let w = layout.weights();
        let (u, v, z) = (vector(w.len(), s), vector(w.len(), s ^ 1), vector(w.len(), s ^ 2));
        let uv = w.inner(&u, &v).unwrap();
        prop_assert!((uv - w.inner(&v, &u).unwrap()).abs() <= 1e-14);
        let lin: Vec<f64> = u.iter().zip(&z).map(|(a, b)| alpha * a + b).collect();
        let lhs = w.inner(&lin, &v).unwrap();
        let rhs = alpha * uv + w.inner(&z, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
        prop_assert!(w.norm_sq(&u).unwrap() > 0.0);
    }

    #[test]
    fn spatial_operator_is_skew((kind, n, a, b, s) in case()) {
        let g = build_grid(n).unwrap();
        let m = model(kind, &g, a, b);
        let u = vector(m.system.dim(), s);
        let au = m.system.a.mul_vec(&u);
        let form = m.system.weights.inner(&u, &au).unwrap();
        let scale = m.system.weights.norm_sq(&u).unwrap() / g.h();
        prop_assert!(form.abs() <= 1e-13 * scale, "{form}");
    }

    #[test]
    fn trace_operators_pair_with_their_adjoints(n in 2usize..40, s in any::<u64>(), tilde in any::<bool>()) {
        let g = build_grid(n).unwrap();
        let op = if tilde { build_b_tilde(&g) } else { build_b(&g) };
        let w_dom = WeightMatrix::from_diag(op.domain.weights(&g)).unwrap();
        let w_ran = range_weights(&op, &g);
        let adj = adjoint_wrt(&op.matrix, &w_dom, &w_ran).unwrap();
        let u = vector(op.matrix.ncols(), s);
        let v = vector(op.matrix.nrows(), s ^ 7);
        let lhs = w_ran.inner(&op.matrix.mul_vec(&u), &v).unwrap();
        let rhs = w_dom.inner(&u, &adj.mul_vec(&v)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn coercivity_grows_with_rho((kind, n, a, b, _s) in case(), rho in 0.01..10.0f64, factor in 1.0..4.0f64) {
        let g = build_grid(n.min(16)).unwrap();
        let m = model(kind, &g, a, b);
        let lo = m.coercivity(rho).unwrap().c0;
        let hi = m.coercivity(rho * factor).unwrap().c0;
        prop_assert!(hi >= lo - 1e-12, "{lo} > {hi}");
    }

    #[test]
    fn midpoint_steps_balance_energy((kind, n, a, b, s) in case(), dt in 0.001..0.5f64) {
        let g = build_grid(n).unwrap();
        let m = model(kind, &g, a, b);
        let sys = m.factor(&SchemeParams::new(dt, dt)).unwrap();
        let u = StateVector::from_values(m.layout(), vector(m.system.dim(), s)).unwrap();
        let f = StateVector::from_values(m.layout(), vector(m.system.dim(), s ^ 3)).unwrap();
        let next = step(&sys, &u, &f).unwrap();
        let r = energy_balance_residual(&sys, &u, &next, &f).unwrap();
        let e = m.system.energy(u.values()).unwrap();
        prop_assert!(r.abs() <= 1e-12 * e.max(1.0), "{r}");
    }

    #[test]
    fn solutions_are_linear_in_data((kind, n, a, b, s) in case(), alpha in -2.0..2.0f64) {
        let g = build_grid(n.min(24)).unwrap();
        let m = model(kind, &g, a, b);
        let dim = m.system.dim();
        let mut scheme = SchemeParams::new(0.05, 1.0);
        scheme.theta = 0.5 + 0.5 * (a / 3.0);
        let sys = m.factor(&scheme).unwrap();
        let src = |seed| SeparableSource::new(dim).with_term(Signal::Sinusoid { frequency: 1.0, phase: 0.3, amplitude: 1.0 }, vector(dim, seed)).unwrap();
        let (f1, f2) = (src(s), src(s ^ 5));
        let (u1, u2) = (vector(dim, s ^ 9), vector(dim, s ^ 11));
        let sv = |v: Vec<f64>| StateVector::from_values(m.layout(), v).unwrap();
        let combo: Vec<f64> = u1.iter().zip(&u2).map(|(x, y)| alpha * x + y).collect();
        let f_combo = evobeam::space::Combination::new(vec![(alpha, &f1 as &dyn Source), (1.0, &f2)]).unwrap();
        let r1 = run(&sys, &sv(u1), &f1, &scheme).unwrap().last_snapshot().unwrap();
        let r2 = run(&sys, &sv(u2), &f2, &scheme).unwrap().last_snapshot().unwrap();
        let rc = run(&sys, &sv(combo), &f_combo, &scheme).unwrap().last_snapshot().unwrap();
        for ((x, y), z) in r1.values().iter().zip(r2.values()).zip(rc.values()) {
            prop_assert!((alpha * x + y - z).abs() <= 1e-10 * (1.0 + z.abs()));
        }
    }

    #[test]
    fn admissible_trace_laws_are_nevanlinna(mu0 in 0.0..100.0f64, mu1 in 0.0..100.0f64, re in -1e3..1e3f64, im in 1e-9..1e3f64) {
        prop_assume!(mu0 + mu1 > 0.0);
        let spec = NevanlinnaSpec::new(mu0, mu1).unwrap();
        prop_assert!(nevanlinna_check(&spec, &[Complex64::new(re, im)]).unwrap());
        let bad = NevanlinnaSpec { mu0: -mu0 - 1e-3, mu1 };
        prop_assert!(!nevanlinna_check(&bad, &[Complex64::new(re, im)]).unwrap());
    }
}
