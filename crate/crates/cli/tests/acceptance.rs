//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};

use lorden_core::hazard::{
    cdf_from_intensity, check_assumptions, families, intensity_from_cdf, sample, Atom,
    GeneralizedIntensity, HazardJump, Jump, MixedCdf,
};
use lorden_core::renewal::{convolution_power, discretize, renewal_function, DEFAULT_TOL};
use lorden_core::simulator::{
    partial_sum_samples, stream, tail_curves, verify_bound, MuRule, ScenarioConfig, VerifyOptions,
};
use lorden_core::stats::{binomial_se, empirical_cdf, ks_distance};
use lorden_core::Execution;
use rand::distr::Open01;
use rand::Rng;

const SEED: u64 = 42;
const REPS: u64 = 100_000;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn exp(rate: f64) -> GeneralizedIntensity {
    families::exponential(rate).unwrap()
}

fn generalized_scenario() -> ScenarioConfig {
    ScenarioConfig::new(
        exp(1.0),
        MuRule::Cycle(vec![exp(0.0), exp(1.0), exp(2.0)]),
        exp(3.0),
    )
    .with_reps(REPS)
    .with_seed(SEED)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exponential_oracle() -> Outcome {
    let s = ScenarioConfig::new(exp(1.0), MuRule::none(), exp(1.0))
        .with_queries(vec![1.0, 5.0, 10.0])
        .with_reps(REPS)
        .with_seed(SEED);
    let report = verify_bound(&s, VerifyOptions::default()).map_err(|e| e.to_string())?;
    let classical = report.classical_bound.ok_or("classical bound missing")?;
    let generalized = report.generalized.ok_or("generalized bound missing")?.value;
    let mut worst_z: f64 = 0.0;
    let mut dominated = true;
    for row in &report.estimates.rows {
        let z = (row.mean_backward - (1.0 - (-row.t).exp())) / row.se_backward();
        worst_z = worst_z.max(z.abs());
        dominated &= classical >= row.mean_backward - 3.0 * row.se_backward();
        dominated &= classical >= row.mean_forward - 3.0 * row.se_forward();
    }
    let agree = (generalized - classical).abs();
    ensure(
        worst_z <= 3.0 && (classical - 2.0).abs() <= 1e-10 && agree <= 1e-10 && dominated,
        format!("max |z| = {worst_z:.3}, classical = {classical}, |generalized - classical| = {agree:.1e}"),
    )
}

fn uniform_oracle() -> Outcome {
    let u = families::uniform(0.0, 1.0).unwrap();
    let s = ScenarioConfig::new(u.clone(), MuRule::none(), u)
        .with_queries(vec![50.0])
        .with_reps(REPS)
        .with_seed(SEED);
    let report = verify_bound(&s, VerifyOptions::default()).map_err(|e| e.to_string())?;
    let row = &report.estimates.rows[0];
    let z = (row.mean_backward - 1.0 / 3.0) / row.se_backward();
    let classical = report.classical_bound.ok_or("classical bound missing")?;
    let dominated = classical >= row.mean_backward - 3.0 * row.se_backward();
    ensure(
        z.abs() <= 3.0 && (classical - 2.0 / 3.0).abs() <= 1e-10 && dominated,
        format!(
            "E B_50 = {:.5} (z = {z:.3}), classical = {classical:.12}",
            row.mean_backward
        ),
    )
}

fn generalized_dominance() -> Outcome {
    let s = generalized_scenario().with_queries(vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0]);
    let assumptions = check_assumptions(&s);
    let report = verify_bound(&s, VerifyOptions::default()).map_err(|e| e.to_string())?;
    let bound = report.generalized.ok_or("generalized bound missing")?.value;
    let dominated = report.verdicts.iter().all(|v| v.backward && v.forward);
    let worst = report
        .estimates
        .rows
        .iter()
        .map(|r| r.mean_backward.max(r.mean_forward))
        .fold(0.0, f64::max);
    ensure(
        assumptions.passed()
            && assumptions.moment_order == Some(4)
            && (bound - 4.0).abs() <= 1e-10
            && dominated,
        format!(
            "assumptions pass = {}, k = {:?}, bound = {bound}, largest estimate = {worst:.4}",
            assumptions.passed(),
            assumptions.moment_order
        ),
    )
}

fn round_trip() -> Outcome {
    let jump = 1.0 - 0.5f64;
    let survival = |x: f64| (-x).exp() * if x >= 1.0 { 0.5 } else { 1.0 };
    let mixed = MixedCdf::from_survival(
        survival,
        vec![Jump {
            at: 1.0,
            mass: (-1f64).exp() * jump,
        }],
        vec![],
        f64::INFINITY,
    )
    .unwrap()
    .with_exponential_tail(1.0, 1.0);
    let cases = [
        ("Exp(1)", families::exponential_cdf(1.0).unwrap()),
        ("Uniform(0,1)", families::uniform_cdf(0.0, 1.0).unwrap()),
        ("Weibull(2)", families::weibull_cdf(2.0, 1.0).unwrap()),
        ("Det(2)", families::deterministic_cdf(2.0).unwrap()),
        ("Exp(1)+atom", mixed),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, f) in &cases {
        let back = intensity_from_cdf(f)
            .and_then(|phi| cdf_from_intensity(&phi))
            .map_err(|e| format!("{name}: {e}"))?;
        let mut xs: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.005).collect();
        for j in f.jumps() {
            xs.extend([j.at, j.at.next_down(), j.at.next_up()]);
        }
        let err = xs
            .iter()
            .map(|&x| (back.eval(x) - f.eval(x)).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        detail.push(format!("{name} {err:.1e}"));
    }
    ensure(worst <= 1e-8, detail.join(", "))
}

fn min_draws() -> Outcome {
    let n = 100_000usize;
    let threshold = 2.0 / (n as f64).sqrt();
    let atom = |phi: GeneralizedIntensity, at: f64, d: f64| {
        phi.with_atoms(&[Atom::new(at, HazardJump::Finite(d))])
            .unwrap()
    };
    let pairs = [
        ("Exp(1) & Exp(2)", exp(1.0), exp(2.0)),
        (
            "Weibull(2) & Uniform(0,2)",
            families::weibull(2.0, 1.0).unwrap(),
            families::uniform(0.0, 2.0).unwrap(),
        ),
        (
            "atom-bearing",
            atom(exp(1.0), 1.0, 2f64.ln()),
            atom(families::weibull(3.0, 1.5).unwrap(), 0.5, 0.3),
        ),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (name, a, b)) in pairs.iter().enumerate() {
        let (fa, fb) = (
            cdf_from_intensity(a).unwrap(),
            cdf_from_intensity(b).unwrap(),
        );
        let summed = cdf_from_intensity(&a.add(b).unwrap()).unwrap();
        let mut rng = stream(SEED, 1000 + i as u64);
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let (u, v): (f64, f64) = (rng.sample(Open01), rng.sample(Open01));
                sample(&fa, u).min(sample(&fb, v))
            })
            .collect();
        let d = ks_distance(&draws, &summed);
        ok &= d < threshold;
        detail.push(format!("{name} D = {d:.5}"));
    }
    ensure(
        ok,
        format!("{} (threshold {threshold:.5})", detail.join(", ")),
    )
}

fn ordering() -> Outcome {
    let s = generalized_scenario();
    let grid = s.grid().map_err(|e| e.to_string())?;
    let phi = discretize(
        &cdf_from_intensity(&s.phi).unwrap(),
        grid.step,
        grid.horizon,
    )
    .map_err(|e| e.to_string())?;
    let g = discretize(&cdf_from_intensity(&s.q).unwrap(), grid.step, grid.horizon)
        .map_err(|e| e.to_string())?;
    let sums = partial_sum_samples(&s, 5, Execution::default());
    let mut worst_lower = (f64::NEG_INFINITY, 0, 0.0);
    let mut worst_upper = (f64::NEG_INFINITY, 0, 0.0);
    for (k, mut column) in sums.into_iter().enumerate() {
        let n = k as u32 + 1;
        column.sort_by(f64::total_cmp);
        let phi_n = convolution_power(&phi, n).map_err(|e| e.to_string())?;
        let g_n = convolution_power(&g, n).map_err(|e| e.to_string())?;
        for (i, (lo, hi)) in phi_n.values().iter().zip(g_n.values()).enumerate() {
            let emp = empirical_cdf(&column, phi_n.node(i));
            let sigma = binomial_se(emp, column.len());
            let l = lo - emp - 3.0 * sigma - 1e-6;
            let u = emp - hi - 3.0 * sigma - 1e-6;
            if l > worst_lower.0 {
                worst_lower = (l, n, phi_n.node(i));
            }
            if u > worst_upper.0 {
                worst_upper = (u, n, phi_n.node(i));
            }
        }
    }
    ensure(
        worst_lower.0 <= 0.0 && worst_upper.0 <= 0.0,
        format!(
            "{} nodes, worst lower excess {:.2e} (n = {}, s = {:.4}), worst upper excess {:.2e} (n = {}, s = {:.4})",
            phi.nodes(),
            worst_lower.0,
            worst_lower.1,
            worst_lower.2,
            worst_upper.0,
            worst_upper.1,
            worst_upper.2
        ),
    )
}

fn renewal() -> Outcome {
    let h = 0.005;
    let g =
        discretize(&families::exponential_cdf(1.0).unwrap(), h, 40.0).map_err(|e| e.to_string())?;
    let hf = renewal_function(&g, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let poisson = hf.values()[..=2000]
        .iter()
        .enumerate()
        .map(|(k, v)| (v - k as f64 * h).abs())
        .fold(0.0, f64::max);
    let det = discretize(&families::deterministic_cdf(1.0).unwrap(), 0.01, 12.0)
        .map_err(|e| e.to_string())?;
    let hd = renewal_function(&det, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let exact = hd
        .values()
        .iter()
        .enumerate()
        .filter(|(k, _)| k % 100 != 0)
        .all(|(k, v)| *v == (k / 100) as f64);
    ensure(
        poisson <= 1e-3 && exact,
        format!("Poisson sup error {poisson:.2e}, deterministic floor exact = {exact}"),
    )
}

fn tail_dominance() -> Outcome {
    let s = generalized_scenario().with_queries(vec![5.0, 10.0]);
    let curves = tail_curves(&s, 0.0, Execution::default()).map_err(|e| e.to_string())?;
    let detail: Vec<String> = curves
        .iter()
        .map(|c| format!("t = {} worst excess {:.2e}", c.t, c.worst_excess))
        .collect();
    ensure(curves.iter().all(|c| c.pass), detail.join(", "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/generalized.toml");
    let run = |threads: &str, out: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_lorden"))
            .args(["verify", "--threads", threads, "--seed", "42", "--out"])
            .arg(&out)
            .arg(&scenario)
            .status()
            .map_err(|e| e.to_string())?;
        if status.code() != Some(0) {
            return Err(format!(
                "verify with {threads} threads exited with {status}"
            ));
        }
        std::fs::read(out.join("estimates.csv")).map_err(|e| e.to_string())
    };
    let one = run("1", "one")?;
    let many = run("8", "many")?;
    let again = run("8", "again")?;
    ensure(
        one == many && many == again,
        format!(
            "{} bytes, 1 vs 8 threads identical = {}",
            one.len(),
            one == many
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("exponential oracle", exponential_oracle),
        ("uniform oracle", uniform_oracle),
        ("generalized scenario", generalized_dominance),
        ("round trip", round_trip),
        ("min of independent draws", min_draws),
        ("convolution ordering", ordering),
        ("renewal function", renewal),
        ("tail-bound dominance", tail_dominance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {tag}: {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
