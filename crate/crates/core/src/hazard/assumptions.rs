use serde::{Deserialize, Serialize};

use super::cdf::{cdf_from_intensity, moment};
use super::intensity::{GeneralizedIntensity, HazardJump};
use crate::error::Error;
use crate::poly;
use crate::simulator::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotDecidable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Intervals are `min(ζ_j, θ_j)` with independent components.
    MinCoupling,
    /// `φ + μ_j ≤ Q` everywhere, atoms included.
    HazardEnvelope,
    /// `∫ φ = ∞` and a finite `k`-th moment for some `k ≥ 2`.
    TailAndMoments,
    /// `Q` bounded near zero.
    LocalBoundedness,
    /// `φ > 0` almost everywhere beyond some `T`.
    EventualPositivity,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::MinCoupling,
        Condition::HazardEnvelope,
        Condition::TailAndMoments,
        Condition::LocalBoundedness,
        Condition::EventualPositivity,
    ];

    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub number: u8,
    pub verdict: Verdict,
    pub detail: String,
}

/// Verdicts on the five structural conditions plus their diagnostic values.
/// Infinite diagnostics serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub conditions: Vec<ConditionResult>,
    /// `sup_s (φ + μ_j − Q)(s)` over all declared `μ_j`, atoms included.
    pub envelope_violation: f64,
    pub envelope_violation_at: Option<f64>,
    /// Largest `k ≤ 4` with `E η^k < ∞`.
    pub moment_order: Option<u32>,
    pub epsilon: f64,
    pub q_sup_near_zero: f64,
    /// Smallest `T` with `φ_ac > 0` a.e. on `(T, ∞)`.
    pub positivity_from: f64,
    /// Lebesgue measure of `{φ_ac = 0}` beyond the configured (or found) `T`.
    pub zero_measure_beyond: f64,
}

impl AssumptionReport {
    pub fn verdict(&self, c: Condition) -> Verdict {
        self.conditions
            .iter()
            .find(|r| r.condition == c)
            .map_or(Verdict::NotDecidable, |r| r.verdict)
    }

    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|r| r.verdict == Verdict::Pass)
    }
}

const ENVELOPE_TOL: f64 = 1e-9;
const POLE_SAMPLES: usize = 2048;

/// Evaluates conditions 1–5 for a scenario. Failures are verdicts, never errors.
pub fn check_assumptions(scenario: &ScenarioConfig) -> AssumptionReport {
    let mut conditions = Vec::with_capacity(5);
    conditions.push(ConditionResult {
        condition: Condition::MinCoupling,
        number: 1,
        verdict: Verdict::Pass,
        detail: "intervals are min(zeta_j, theta_j) with zeta_j ~ phi and theta_j ~ mu_j drawn independently".into(),
    });

    // condition 2
    let mut worst = (f64::NEG_INFINITY, None);
    let mut envelope_error = None;
    for (idx, mu) in scenario.mu.distinct().iter().enumerate() {
        match scenario.phi.add(mu) {
            Ok(lambda) => {
                let (v, at) = envelope_violation(&lambda, &scenario.q);
                if v > worst.0 {
                    worst = (v, at);
                }
            }
            Err(e) => envelope_error = Some(format!("phi + mu[{idx}] is invalid: {e}")),
        }
    }
    let scale = 1.0 + scenario.q.hazard_ac(0.0).abs();
    let envelope_violation = worst.0.max(0.0);
    let (verdict, detail) = match envelope_error {
        Some(e) => (Verdict::NotDecidable, e),
        None if worst.0 > ENVELOPE_TOL * scale => (
            Verdict::Fail,
            format!(
                "phi + mu_j exceeds Q by {} at s = {}",
                worst.0,
                fmt_opt(worst.1)
            ),
        ),
        None => (Verdict::Pass, format!("max(phi + mu_j - Q) = {}", worst.0)),
    };
    conditions.push(ConditionResult {
        condition: Condition::HazardEnvelope,
        number: 2,
        verdict,
        detail,
    });

    // condition 3
    let mut moment_order = None;
    let (verdict, detail) = if !scenario.phi.is_proper() {
        (
            Verdict::Fail,
            format!(
                "cumulative hazard of phi is bounded (total {})",
                scenario.phi.total()
            ),
        )
    } else {
        match cdf_from_intensity(&scenario.phi) {
            Ok(cdf) => {
                let mut undecided = None;
                for k in 2..=4u32 {
                    match moment(&cdf, k) {
                        Ok(m) if m.is_finite() => moment_order = Some(k),
                        Ok(_) | Err(Error::Divergent(_)) => break,
                        Err(e) => {
                            undecided = Some(e.to_string());
                            break;
                        }
                    }
                }
                match (moment_order, undecided) {
                    (Some(k), _) => (Verdict::Pass, format!("int phi = inf and E eta^{k} < inf")),
                    (None, Some(e)) => (Verdict::NotDecidable, e),
                    (None, None) => (Verdict::Fail, "E eta^2 diverges".into()),
                }
            }
            Err(e) => (Verdict::NotDecidable, e.to_string()),
        }
    };
    conditions.push(ConditionResult {
        condition: Condition::TailAndMoments,
        number: 3,
        verdict,
        detail,
    });

    // condition 4
    let epsilon = scenario.checks.epsilon;
    let q_sup_near_zero = sup_near_zero(&scenario.q, epsilon);
    let near_atoms = scenario
        .q
        .atoms()
        .iter()
        .filter(|a| a.at <= epsilon)
        .count();
    let (verdict, detail) = if !q_sup_near_zero.is_finite() {
        (Verdict::Fail, format!("Q is unbounded on [0, {epsilon}]"))
    } else if near_atoms > 0 {
        (
            Verdict::Fail,
            format!("Q has {near_atoms} atom(s) in [0, {epsilon}]"),
        )
    } else {
        (
            Verdict::Pass,
            format!("sup Q on [0, {epsilon}] <= {q_sup_near_zero}"),
        )
    };
    conditions.push(ConditionResult {
        condition: Condition::LocalBoundedness,
        number: 4,
        verdict,
        detail,
    });

    // condition 5
    let positivity_from = positivity_start(&scenario.phi);
    let threshold = scenario.checks.delay.unwrap_or(positivity_from);
    let zero_measure_beyond = zero_measure(&scenario.phi, threshold);
    let (verdict, detail) = if !positivity_from.is_finite() {
        (Verdict::Fail, "phi_ac vanishes on an unbounded set".into())
    } else if zero_measure_beyond > 0.0 {
        (
            Verdict::Fail,
            format!("phi_ac = 0 on a set of measure {zero_measure_beyond} beyond T = {threshold}"),
        )
    } else {
        (
            Verdict::Pass,
            format!("phi_ac > 0 a.e. beyond T = {positivity_from}"),
        )
    };
    conditions.push(ConditionResult {
        condition: Condition::EventualPositivity,
        number: 5,
        verdict,
        detail,
    });

    AssumptionReport {
        conditions,
        envelope_violation,
        envelope_violation_at: worst.1,
        moment_order,
        epsilon,
        q_sup_near_zero,
        positivity_from,
        zero_measure_beyond,
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "?".into(), |v| v.to_string())
}

/// `sup (λ - Q)` over the common support, with the location attaining it.
fn envelope_violation(
    lambda: &GeneralizedIntensity,
    q: &GeneralizedIntensity,
) -> (f64, Option<f64>) {
    let end = lambda.support_end().min(q.support_end());
    let mut starts: Vec<f64> = lambda
        .segments()
        .iter()
        .chain(q.segments().iter())
        .map(|s| s.start)
        .filter(|&s| s < end)
        .collect();
    starts.sort_by(f64::total_cmp);
    starts.dedup();

    let mut best = (f64::NEG_INFINITY, None);
    let mut consider = |v: f64, at: f64| {
        if v > best.0 {
            best = (v, Some(at));
        }
    };
    for (i, &s) in starts.iter().enumerate() {
        let next = starts.get(i + 1).copied().unwrap_or(end).min(end);
        let len = next - s;
        let ls = segment_at(lambda, s);
        let qs = segment_at(q, s);
        let diff = poly::sub(
            &poly::shift(&ls.coeffs, s - ls.start),
            &poly::shift(&qs.coeffs, s - qs.start),
        );
        if ls.poles.is_empty() && qs.poles.is_empty() {
            let (v, u) = poly::max_on(&diff, len);
            consider(v, s + u);
            continue;
        }
        // net pole weight at a pole closing this piece decides the limit
        let net: f64 = ls
            .poles
            .iter()
            .filter(|p| p.at <= next)
            .map(|p| p.weight)
            .sum::<f64>()
            - qs.poles
                .iter()
                .filter(|p| p.at <= next)
                .map(|p| p.weight)
                .sum::<f64>();
        if net > 0.0 {
            consider(f64::INFINITY, next);
            continue;
        }
        let span = if len.is_finite() { len } else { 1.0 + s.abs() };
        for k in 0..POLE_SAMPLES {
            let x = s + span * k as f64 / POLE_SAMPLES as f64;
            consider(ls.hazard(x) - qs.hazard(x), x);
        }
    }
    for a in lambda.atoms() {
        if a.at > end {
            continue;
        }
        let qa = q.atoms().iter().find(|b| b.at == a.at).map(|b| b.jump);
        let v = match (a.jump, qa) {
            (_, Some(HazardJump::Full)) => 0.0,
            (HazardJump::Full, _) => f64::INFINITY,
            (HazardJump::Finite(d), Some(HazardJump::Finite(e))) => d - e,
            (HazardJump::Finite(d), None) => d,
        };
        consider(v, a.at);
    }
    best
}

fn segment_at(phi: &GeneralizedIntensity, s: f64) -> &super::intensity::Segment {
    let segs = phi.segments();
    &segs[segs.partition_point(|seg| seg.start <= s).saturating_sub(1)]
}

fn sup_near_zero(q: &GeneralizedIntensity, epsilon: f64) -> f64 {
    let segs = q.segments();
    let mut sup: f64 = 0.0;
    for (i, seg) in segs.iter().enumerate() {
        if seg.start > epsilon || seg.start >= q.support_end() {
            break;
        }
        let right = segs
            .get(i + 1)
            .map_or(epsilon, |n| n.start.min(epsilon))
            .min(q.support_end());
        let (poly_max, _) = poly::max_on(&seg.coeffs, right - seg.start);
        let mut v = poly_max;
        for p in &seg.poles {
            if p.at <= right {
                return f64::INFINITY;
            }
            v += p.weight / (p.at - right);
        }
        sup = sup.max(v);
    }
    sup
}

fn vanishing_pieces(phi: &GeneralizedIntensity) -> Vec<(f64, f64)> {
    let segs = phi.segments();
    let end = phi.support_end();
    segs.iter()
        .enumerate()
        .filter(|(_, s)| poly::is_zero(&s.coeffs) && s.poles.is_empty())
        .map(|(i, s)| (s.start, segs.get(i + 1).map_or(end, |n| n.start).min(end)))
        .collect()
}

fn positivity_start(phi: &GeneralizedIntensity) -> f64 {
    vanishing_pieces(phi)
        .into_iter()
        .map(|(_, r)| r)
        .fold(0.0, f64::max)
}

fn zero_measure(phi: &GeneralizedIntensity, t: f64) -> f64 {
    vanishing_pieces(phi)
        .into_iter()
        .map(|(l, r)| (r - l.max(t)).max(0.0))
        .fold(0.0, |a, b| a + b)
}
