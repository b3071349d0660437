use lorden_core::hazard::{cdf_from_intensity, families, GeneralizedIntensity};
use lorden_core::simulator::{
    estimate, estimate_with, generate_interval, simulate_path, stream, verify_bound, MuRule,
    ScenarioConfig, VerifyOptions,
};
use lorden_core::stats::ks_distance;
use lorden_core::{Error, Execution};

fn exp(rate: f64) -> GeneralizedIntensity {
    families::exponential(rate).unwrap()
}

fn generalized() -> ScenarioConfig {
    ScenarioConfig::new(
        exp(1.0),
        MuRule::Cycle(vec![exp(0.0), exp(1.0), exp(2.0)]),
        exp(3.0),
    )
}

#[test]
fn deterministic_path_counts() {
    let one = families::deterministic(1.0).unwrap();
    let s = ScenarioConfig::new(one.clone(), MuRule::none(), one).with_queries(vec![0.25, 2.5]);
    let path = simulate_path(&s, 0).unwrap();
    let early = path.queries[0];
    assert_eq!((early.count, early.backward), (0, 0.25));
    assert_eq!(early.forward, 0.75);
    let q = path.queries[1];
    assert_eq!(q.count, 2);
    assert_eq!(q.backward, 0.5);
    assert_eq!(q.forward, 0.5);
    assert_eq!(path.jump_times, vec![1.0, 2.0, 3.0]);
}

#[test]
fn path_identity_holds() {
    let s = generalized().with_queries(vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0]);
    for r in 0..200 {
        let path = simulate_path(&s, r).unwrap();
        for q in &path.queries {
            assert!((q.backward + q.forward - q.straddling).abs() <= 1e-12);
            assert!(q.backward >= 0.0 && q.backward <= q.t);
            assert!(q.forward >= 0.0);
            let k = q.count as usize;
            assert!(k == 0 || path.jump_times[k - 1] <= q.t);
            assert!(path.jump_times[k] > q.t);
        }
        let mut acc = 0.0;
        for (t, xi) in path.jump_times.iter().zip(&path.intervals) {
            acc += xi;
            assert_eq!(*t, acc);
        }
    }
}

#[test]
fn exponential_backward_mean() {
    let s = ScenarioConfig::new(exp(1.0), MuRule::none(), exp(1.0))
        .with_queries(vec![10.0])
        .with_reps(100_000)
        .with_seed(7);
    let table = estimate(&s).unwrap();
    let row = &table.rows[0];
    let oracle = 1.0 - (-10f64).exp();
    assert!(
        (row.mean_backward - oracle).abs() <= 3.0 * row.se_backward(),
        "{row:?}"
    );
    assert!((row.half_width_backward - 1.96 * row.se_backward()).abs() < 1e-15);
}

#[test]
fn single_replication_has_zero_variance() {
    let s = generalized()
        .with_queries(vec![1.0, 3.0])
        .with_reps(1)
        .with_seed(11);
    let table = estimate(&s).unwrap();
    let path = simulate_path(&s, 0).unwrap();
    for (row, q) in table.rows.iter().zip(&path.queries) {
        assert_eq!(row.mean_backward, q.backward);
        assert_eq!(row.mean_forward, q.forward);
        assert_eq!((row.var_backward, row.var_forward), (0.0, 0.0));
        assert_eq!(row.reps, 1);
    }
}

#[test]
fn estimates_do_not_depend_on_schedule() {
    let s = generalized()
        .with_queries(vec![0.5, 5.0, 20.0])
        .with_reps(5000)
        .with_seed(3);
    let a = estimate_with(&s, Execution::Sequential).unwrap();
    let b = estimate_with(&s, Execution::Parallel).unwrap();
    let c = estimate_with(&s, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(b, c);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x.mean_backward.to_bits(), y.mean_backward.to_bits());
        assert_eq!(x.var_forward.to_bits(), y.var_forward.to_bits());
    }
    let other = estimate(&s.clone().with_seed(4)).unwrap();
    assert_ne!(a, other);
}

#[test]
fn streams_are_pure_functions_of_seed_and_replication() {
    use rand::Rng;
    let draw = |seed, r| stream(seed, r).random::<u64>();
    assert_eq!(draw(5, 9), draw(5, 9));
    assert_ne!(draw(5, 9), draw(5, 10));
    assert_ne!(draw(5, 9), draw(6, 9));
}

#[test]
fn intervals_follow_the_summed_intensity() {
    let s = ScenarioConfig::new(exp(1.0), MuRule::Constant(exp(2.0)), exp(3.0));
    let mut rng = stream(17, 0);
    let draws: Vec<f64> = (1..=100_000)
        .map(|j| generate_interval(j, &s, &mut rng))
        .collect();
    let oracle = families::exponential_cdf(3.0).unwrap();
    assert!(ks_distance(&draws, &oracle) < 2.0 / 1e5f64.sqrt());
}

#[test]
fn zero_competing_hazard_never_fires() {
    let s = ScenarioConfig::new(exp(1.0), MuRule::none(), exp(1.0));
    let mut a = stream(1, 0);
    let mut b = stream(1, 0);
    let phi = cdf_from_intensity(&exp(1.0)).unwrap();
    for j in 1..1000 {
        use rand::distr::Open01;
        use rand::Rng;
        let u: f64 = b.sample(Open01);
        let _: f64 = b.sample(Open01);
        let zeta = -(-u).ln_1p();
        let xi = generate_interval(j, &s, &mut a);
        assert!((xi - zeta).abs() <= 1e-15 * zeta.max(1.0), "{xi} vs {zeta}");
        assert!(phi.eval(xi) > 0.0);
    }
}

#[test]
fn verify_generalized_scenario() {
    let s = generalized()
        .with_queries(vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0])
        .with_reps(20_000)
        .with_seed(1);
    let report = verify_bound(&s, VerifyOptions::default()).unwrap();
    assert!(report.assumptions.passed());
    assert!((report.generalized.unwrap().value - 4.0).abs() < 1e-10);
    assert!(report.classical_bound.is_none());
    assert!(report.all_pass(), "{:?}", report.verdicts);
}

#[test]
fn verify_deterministic_classical() {
    let one = families::deterministic(1.0).unwrap();
    let s = ScenarioConfig::new(one.clone(), MuRule::none(), one)
        .with_queries(vec![0.3, 2.7, 9.99])
        .with_reps(50);
    let report = verify_bound(&s, VerifyOptions::default()).unwrap();
    assert!((report.classical_bound.unwrap() - 1.0).abs() < 1e-12);
    assert!(report.estimates.rows.iter().all(|r| r.mean_backward < 1.0));
    assert!(report.all_pass(), "{report:#?}");
}

#[test]
fn failed_assumptions_are_flagged_when_overridden() {
    let s = ScenarioConfig::new(exp(2.0), MuRule::none(), exp(1.0)).with_reps(100);
    let plain = verify_bound(&s, VerifyOptions::default()).unwrap();
    assert!(!plain.all_pass());
    assert!(!plain.assumptions_overridden);
    let forced = verify_bound(
        &s,
        VerifyOptions {
            allow_failed_assumptions: true,
            execution: None,
        },
    )
    .unwrap();
    assert!(forced.assumptions_overridden);
    assert!(!forced.notes.is_empty());
}

#[test]
fn invalid_scenarios_are_rejected() {
    assert!(matches!(
        estimate(&generalized().with_reps(0)),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        estimate(&generalized().with_queries(vec![2.0, 1.0])),
        Err(Error::InvalidArgument(_))
    ));
    assert!(estimate(
        &generalized()
            .with_queries(vec![5.0])
            .with_grid(None, Some(1.0))
    )
    .is_err());
}
