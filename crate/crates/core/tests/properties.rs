use lorden_core::hazard::{
    cdf_from_intensity, families, intensity_from_cdf, sample, Atom, GeneralizedIntensity,
    HazardJump, Jump, MixedCdf, Segment,
};
use lorden_core::renewal::{
    convolve, discretize_allowing_truncation, renewal_function, DEFAULT_TOL,
};
use lorden_core::stats::Welford;
use proptest::prelude::*;

/// Piecewise-linear nonnegative hazard on up to four pieces, with up to two atoms.
fn intensity() -> impl Strategy<Value = GeneralizedIntensity> {
    (
        prop::collection::vec((0.1f64..2.0, 0.0f64..3.0, 0.0f64..1.0), 1..4),
        prop::collection::vec((0.05f64..6.0, 0.01f64..2.0), 0..3),
        0.05f64..2.0,
    )
        .prop_map(|(pieces, atoms, tail)| {
            let mut start = 0.0;
            let mut segments = Vec::new();
            for (len, level, slope) in pieces {
                segments.push(Segment::new(start, [level, slope, 0.0, 0.0]));
                start += len;
            }
            segments.push(Segment::constant(start, tail));
            let mut atoms: Vec<Atom> = atoms
                .into_iter()
                .map(|(at, d)| Atom::new(at, HazardJump::Finite(d)))
                .collect();
            atoms.sort_by(|a, b| a.at.total_cmp(&b.at));
            atoms.dedup_by(|a, b| (a.at - b.at).abs() < 1e-3);
            GeneralizedIntensity::new(segments, atoms).unwrap()
        })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cumulative_hazards_add(a in intensity(), b in intensity(), x in 0.0f64..12.0) {
        let s = a.add(&b).unwrap();
        prop_assert!(close(s.cumulative(x), a.cumulative(x) + b.cumulative(x), 1e-12));
        prop_assert!(close(s.cumulative_left(x), a.cumulative_left(x) + b.cumulative_left(x), 1e-12));
        prop_assert!(close(s.survival(x), a.survival(x) * b.survival(x), 1e-12));
    }

    #[test]
    fn survival_is_nonincreasing(phi in intensity(), x in 0.0f64..10.0, dx in 0.0f64..2.0) {
        prop_assert!(phi.survival(x + dx) <= phi.survival(x) + 1e-15);
        prop_assert!(phi.survival(x) <= phi.survival(x.next_down().max(0.0)) + 1e-15);
    }

    #[test]
    fn inverse_cumulative_inverts(phi in intensity(), target in 0.0f64..8.0) {
        let x = phi.inverse_cumulative(target);
        prop_assert!(x.is_finite());
        prop_assert!(phi.cumulative(x) >= target - 1e-10 * (1.0 + target));
        if x > 0.0 {
            prop_assert!(phi.cumulative_left(x) <= target + 1e-10 * (1.0 + target));
        }
    }

    #[test]
    fn sampling_is_monotone_in_u(phi in intensity(), u in 0.001f64..0.999, du in 0.0f64..0.5) {
        let cdf = cdf_from_intensity(&phi).unwrap();
        let v = (u + du).min(0.9999);
        let (x, y) = (sample(&cdf, u), sample(&cdf, v));
        prop_assert!(x <= y);
        prop_assert!(cdf.eval(x) >= u);
        prop_assert!(x == 0.0 || cdf.eval_left(x) <= u + 1e-12);
    }

    #[test]
    fn intensities_survive_a_round_trip(rate in 0.2f64..3.0, at in 0.1f64..4.0, delta in 0.05f64..3.0) {
        let jump_mass = (-rate * at).exp() * (1.0 - (-delta).exp());
        let survival = move |x: f64| (-rate * x - if x >= at { delta } else { 0.0 }).exp();
        let f = MixedCdf::from_survival(survival, vec![Jump { at, mass: jump_mass }], vec![], f64::INFINITY)
            .unwrap()
            .with_exponential_tail(at, rate);
        let back = cdf_from_intensity(&intensity_from_cdf(&f).unwrap()).unwrap();
        let mut xs: Vec<f64> = (0..=400).map(|k| k as f64 * 0.025).collect();
        xs.extend([at, at.next_down()]);
        for x in xs {
            prop_assert!((back.eval(x) - f.eval(x)).abs() <= 1e-8, "x = {}", x);
        }
    }

    #[test]
    fn coupling_orders_draws(
        phi_rate in 0.1f64..2.0,
        mu_rate in 0.0f64..2.0,
        slack in 0.0f64..2.0,
        shape in 1u32..4,
        target in 0.0f64..10.0,
    ) {
        let phi = families::weibull(shape as f64, 1.0).unwrap().add(&families::exponential(phi_rate).unwrap()).unwrap();
        let lambda = phi.add(&families::exponential(mu_rate).unwrap()).unwrap();
        let q = lambda.add(&families::exponential(slack).unwrap()).unwrap();
        let eta = phi.inverse_cumulative(target);
        let xi = lambda.inverse_cumulative(target);
        let zeta = q.inverse_cumulative(target);
        prop_assert!(zeta <= xi * (1.0 + 1e-12) + 1e-15);
        prop_assert!(xi <= eta * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn welford_merge_matches_single_pass(xs in prop::collection::vec(-100.0f64..100.0, 1..200), split in 0usize..200) {
        let split = split.min(xs.len());
        let mut whole = Welford::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Welford::default(), Welford::default());
        xs[..split].iter().for_each(|&x| a.push(x));
        xs[split..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        prop_assert_eq!(a.count, whole.count);
        prop_assert!(close(a.mean, whole.mean, 1e-10));
        prop_assert!(close(a.variance(), whole.variance(), 1e-9));
    }

    #[test]
    fn grid_operations_preserve_distribution_shape(a in intensity(), b in intensity()) {
        let h = 0.05;
        let ga = discretize_allowing_truncation(&cdf_from_intensity(&a).unwrap(), h, 20.0).unwrap();
        let gb = discretize_allowing_truncation(&cdf_from_intensity(&b).unwrap(), h, 20.0).unwrap();
        let c = convolve(&ga, &gb).unwrap();
        prop_assert!(c.values().windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(c.values().iter().zip(ga.values()).all(|(x, y)| *x <= y + 1e-12));
        let hf = renewal_function(&ga, DEFAULT_TOL);
        if let Ok(hf) = hf {
            prop_assert!(hf.values().windows(2).all(|w| w[1] >= w[0] - 1e-12));
            prop_assert!(hf.equation_residual() <= 10.0 * DEFAULT_TOL);
        }
    }
}
