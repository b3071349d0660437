use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::intensity::{Atom, GeneralizedIntensity, HazardJump, Segment};
use crate::error::{Error, Result};
use crate::poly;
use crate::quadrature;

/// Probability mass sitting at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub at: f64,
    pub mass: f64,
}

/// Constant hazard `rate` on `[start, ∞)`, used for analytic tail integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTail {
    pub start: f64,
    pub rate: f64,
}

type SurvivalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Hazard(GeneralizedIntensity),
    Survival(SurvivalFn),
}

/// An evaluable mixed distribution function on `[0, ∞)`: continuous part
/// smooth between `breaks`, plus point masses listed in `jumps`.
#[derive(Clone)]
pub struct MixedCdf {
    repr: Repr,
    jumps: Vec<Jump>,
    breaks: Vec<f64>,
    support_end: f64,
    exp_tail: Option<ExpTail>,
}

impl fmt::Debug for MixedCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = match &self.repr {
            Repr::Hazard(_) => "hazard",
            Repr::Survival(_) => "survival-fn",
        };
        f.debug_struct("MixedCdf")
            .field("repr", &repr)
            .field("jumps", &self.jumps)
            .field("breaks", &self.breaks)
            .field("support_end", &self.support_end)
            .field("exp_tail", &self.exp_tail)
            .finish()
    }
}

impl MixedCdf {
    /// Builds a distribution from a right-continuous survival function
    /// `S(x) = 1 - F(x)`.
    ///
    /// `breaks` are points where the continuous part may fail to be smooth;
    /// `support_end` is `inf{x : F(x) = 1}` (or `∞`).
    pub fn from_survival<S>(
        survival: S,
        jumps: Vec<Jump>,
        mut breaks: Vec<f64>,
        support_end: f64,
    ) -> Result<Self>
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        let mut total = 0.0;
        for (i, j) in jumps.iter().enumerate() {
            if !(j.at >= 0.0 && j.at.is_finite() && j.mass > 0.0 && j.mass <= 1.0) {
                return bad(format!(
                    "jump {i} at {} with mass {} is invalid",
                    j.at, j.mass
                ));
            }
            if i > 0 && !(j.at > jumps[i - 1].at) {
                return bad("jump locations must increase strictly".into());
            }
            total += j.mass;
        }
        if total > 1.0 + 1e-12 {
            return bad(format!("jump masses sum to {total} > 1"));
        }
        if !(support_end > 0.0
            || (support_end == 0.0 && jumps.first().is_some_and(|j| j.at == 0.0)))
        {
            return bad(format!("support end {support_end} is invalid"));
        }
        breaks.retain(|&b| b > 0.0 && b < support_end);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        // probe monotonicity and the limit at infinity
        let mut probes: Vec<f64> = breaks
            .iter()
            .copied()
            .chain(jumps.iter().map(|j| j.at))
            .collect();
        probes.push(0.0);
        let upper = if support_end.is_finite() {
            support_end
        } else {
            64.0
        };
        probes.extend((1..=256).map(|i| upper * i as f64 / 256.0));
        probes.sort_by(f64::total_cmp);
        let mut prev = 1.0;
        for &x in &probes {
            let s = survival(x);
            if !(0.0..=1.0).contains(&s) {
                return bad(format!("survival {s} at x = {x} lies outside [0, 1]"));
            }
            if s > prev + 1e-12 {
                return bad(format!("distribution function decreases near x = {x}"));
            }
            prev = s;
        }
        if support_end.is_finite() {
            if survival(support_end) > 1e-12 {
                return bad(format!("F({support_end}) < 1 at the declared support end"));
            }
        } else {
            let reaches_one = (0..1024).map(|k| 2f64.powi(k)).any(|x| survival(x) < 1e-12);
            if !reaches_one {
                return bad("F(x) does not tend to 1".into());
            }
        }
        Ok(MixedCdf {
            repr: Repr::Survival(Arc::new(survival)),
            jumps,
            breaks,
            support_end,
            exp_tail: None,
        })
    }

    /// Declares a constant hazard `rate` beyond `start`, enabling analytic tail moments.
    pub fn with_exponential_tail(mut self, start: f64, rate: f64) -> Self {
        self.exp_tail = Some(ExpTail { start, rate });
        self
    }

    /// `F(x)`, right-continuous, zero for negative `x`.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.repr {
            Repr::Hazard(phi) => -(-phi.cumulative(x)).exp_m1(),
            Repr::Survival(s) => 1.0 - s(x),
        }
    }

    /// `1 - F(x)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match &self.repr {
            Repr::Hazard(phi) => phi.survival(x),
            Repr::Survival(s) => s(x),
        }
    }

    /// `1 - F(x - 0)`.
    pub fn survival_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match &self.repr {
            Repr::Hazard(phi) => (-phi.cumulative_left(x)).exp(),
            Repr::Survival(s) => s(x) + self.jump_at(x),
        }
    }

    /// `F(x - 0)`.
    pub fn eval_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.repr {
            Repr::Hazard(phi) => -(-phi.cumulative_left(x)).exp_m1(),
            Repr::Survival(_) => self.eval(x) - self.jump_at(x),
        }
    }

    pub fn jump_at(&self, x: f64) -> f64 {
        self.jumps
            .iter()
            .find(|j| j.at == x)
            .map_or(0.0, |j| j.mass)
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn exponential_tail(&self) -> Option<ExpTail> {
        self.exp_tail
    }

    /// The intensity this distribution was compiled from, if any.
    pub fn intensity(&self) -> Option<&GeneralizedIntensity> {
        match &self.repr {
            Repr::Hazard(phi) => Some(phi),
            Repr::Survival(_) => None,
        }
    }

    /// Sorted piece boundaries: `0`, breaks, jump locations, and a finite support end.
    pub fn knots(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = std::iter::once(0.0)
            .chain(self.breaks.iter().copied())
            .chain(self.jumps.iter().map(|j| j.at))
            .chain(self.support_end.is_finite().then_some(self.support_end))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// `F(x) = 1 - exp(-Λ(x))` for a proper generalized intensity.
pub fn cdf_from_intensity(phi: &GeneralizedIntensity) -> Result<MixedCdf> {
    if !phi.is_proper() {
        return Err(Error::Defective(format!("Λ(∞) = {}", phi.total())));
    }
    let mut jumps = Vec::new();
    for a in phi.atoms() {
        let left = (-phi.cumulative_left(a.at)).exp();
        let mass = match a.jump {
            HazardJump::Full => left,
            HazardJump::Finite(d) => left * -(-d).exp_m1(),
        };
        if mass > 0.0 {
            jumps.push(Jump { at: a.at, mass });
        }
    }
    let end = phi.support_end();
    let breaks: Vec<f64> = phi
        .segments()
        .iter()
        .skip(1)
        .map(|s| s.start)
        .filter(|&s| s < end)
        .collect();
    let exp_tail = match phi.segments().last() {
        Some(last)
            if end.is_infinite()
                && last.poles.is_empty()
                && poly::degree(&last.coeffs) == Some(0) =>
        {
            let start = phi
                .atoms()
                .last()
                .map_or(last.start, |a| a.at.max(last.start));
            Some(ExpTail {
                start,
                rate: last.coeffs[0],
            })
        }
        _ => None,
    };
    Ok(MixedCdf {
        repr: Repr::Hazard(phi.clone()),
        jumps,
        breaks,
        support_end: end,
        exp_tail,
    })
}

const FIT_NODES: usize = 24;
const CHECK_POINTS: usize = 64;
const FIT_SURVIVAL_TOL: f64 = 1e-11;

/// Recovers the generalized intensity of `cdf`: per smooth piece the
/// cumulative hazard is fitted by a quartic (optionally plus a logarithmic
/// pole term at a finite support end), and each jump becomes an atom with
/// `Δ = -ln(S(a+0) / S(a-0))`.
pub fn intensity_from_cdf(cdf: &MixedCdf) -> Result<GeneralizedIntensity> {
    let knots = cdf.knots();
    let end = cdf.support_end();
    let mut segments: Vec<Segment> = Vec::new();
    let mut atoms: Vec<Atom> = Vec::new();
    for j in cdf.jumps().iter().filter(|j| j.at > 0.0) {
        if cdf.survival(j.at - 1e-9 * j.at.max(1.0)) <= 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "F equals 1 before the mass {} at {}: hazard undefined",
                j.mass, j.at
            )));
        }
    }

    for (idx, &l) in knots.iter().enumerate() {
        let s_left = cdf.survival_left(l);
        let s_l = cdf.survival(l);
        let jump = cdf.jump_at(l);
        if jump > 0.0 {
            if s_left <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "mass {jump} at {l} after F reached 1"
                )));
            }
            let jump = if s_l <= 0.0 {
                HazardJump::Full
            } else {
                HazardJump::Finite((s_left / s_l).ln())
            };
            let full = jump.is_full();
            atoms.push(Atom::new(l, jump));
            if full {
                break;
            }
        }
        if l >= end {
            break;
        }
        if s_l <= 0.0 {
            if cdf.jumps().iter().any(|j| j.at > l) {
                return Err(Error::InvalidDistribution(format!(
                    "F reaches 1 at {l} but further mass follows"
                )));
            }
            break;
        }
        let r = knots.get(idx + 1).copied().unwrap_or(f64::INFINITY);
        let seg = fit_piece(cdf, l, r, s_l, r >= end && end.is_finite())?;
        match segments.last() {
            Some(prev) if can_merge(prev, &seg) => {}
            _ => segments.push(seg),
        }
    }
    if segments.is_empty() {
        segments.push(Segment::constant(0.0, 0.0));
    }
    GeneralizedIntensity::new(segments, atoms)
}

fn can_merge(prev: &Segment, next: &Segment) -> bool {
    if !prev.poles.is_empty() || !next.poles.is_empty() {
        return false;
    }
    let shifted = poly::shift(&prev.coeffs, next.start - prev.start);
    shifted
        .iter()
        .zip(next.coeffs.iter())
        .all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs()))
}

fn fit_piece(cdf: &MixedCdf, l: f64, r: f64, s_l: f64, terminal: bool) -> Result<Segment> {
    let not_rep = || Error::NotRepresentable { start: l, end: r };
    let width = if r.is_finite() {
        r - l
    } else {
        let mut w = 1.0f64;
        while cdf.survival(l + w) / s_l > 1e-6 && w < 1e12 {
            w *= 2.0;
        }
        while cdf.survival(l + w) / s_l < 1e-9 && w > 1e-9 {
            w *= 0.5;
        }
        w
    };
    let nodes: Vec<f64> = (0..FIT_NODES)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * (j as f64 + 0.5) / FIT_NODES as f64).cos()))
        .collect();
    let target = |t: f64| -(cdf.survival(l + width * t) / s_l).ln();
    let ys: Vec<f64> = nodes.iter().map(|&t| target(t)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(not_rep());
    }

    let attempt = |with_pole: bool| -> Option<(Vec<f64>, f64)> {
        let cols = if with_pole { 5 } else { 4 };
        let a = DMatrix::from_fn(FIT_NODES, cols, |i, k| {
            let t = nodes[i];
            if k < 4 {
                t.powi(k as i32 + 1)
            } else {
                -(1.0 - t).ln()
            }
        });
        let b = DVector::from_column_slice(&ys);
        let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
        let quartic: Vec<f64> = sol.iter().take(4).copied().collect();
        let w = if with_pole { sol[4] } else { 0.0 };
        let model = |t: f64| {
            let p: f64 = quartic
                .iter()
                .enumerate()
                .map(|(k, c)| c * t.powi(k as i32 + 1))
                .sum();
            if with_pole {
                p - w * (1.0 - t).ln()
            } else {
                p
            }
        };
        let ok = (1..CHECK_POINTS).all(|i| {
            let t = i as f64 / CHECK_POINTS as f64;
            let exact = cdf.survival(l + width * t);
            (s_l * (-model(t)).exp() - exact).abs() <= FIT_SURVIVAL_TOL
        });
        ok.then_some((quartic, w))
    };

    let (quartic, w) = match attempt(false) {
        Some(fit) => fit,
        None if terminal => attempt(true)
            .filter(|(_, w)| *w > 0.0)
            .ok_or_else(not_rep)?,
        None => return Err(not_rep()),
    };

    // hazard coefficient of u^(k-1) is k a_k / width^k
    let mut coeffs = [0.0; 4];
    let contrib: Vec<f64> = quartic.iter().map(|a| a.abs()).collect();
    let scale = contrib.iter().copied().fold(w.abs(), f64::max).max(1e-300);
    for k in 0..4 {
        if contrib[k] > 1e-11 * scale {
            coeffs[k] = (k as f64 + 1.0) * quartic[k] / width.powi(k as i32 + 1);
        }
    }
    let mut seg = Segment::new(l, coeffs);
    if w > 0.0 && terminal {
        seg = seg.with_pole(l + width, w);
    }
    Ok(seg)
}

/// `E X^k = ∫_0^∞ k x^{k-1} (1 - F(x)) dx`.
pub fn moment(cdf: &MixedCdf, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "moment order must be positive".into(),
        ));
    }
    let kf = k as f64;
    let integrand = |x: f64| kf * x.powi(k as i32 - 1) * cdf.survival(x);
    let knots = cdf.knots();
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += quadrature::integrate(&integrand, w[0], w[1], 1e-13);
    }
    if cdf.support_end().is_finite() {
        return Ok(total);
    }
    let l = *knots.last().expect("knots contain 0");
    if let Some(tail) = cdf
        .exponential_tail()
        .filter(|t| t.start <= l && t.rate > 0.0)
    {
        // ∫_l^∞ k x^{k-1} S(l) e^{-c (x - l)} dx
        let (c, s_l) = (tail.rate, cdf.survival(l));
        let mut acc = 0.0;
        let mut falling = 1.0;
        for j in 0..k {
            if j > 0 {
                falling *= (k - j) as f64;
            }
            acc += falling * l.powi((k - 1 - j) as i32) / c.powi(j as i32 + 1);
        }
        return Ok(total + kf * s_l * acc);
    }
    let width = l.max(1.0);
    let mut prev = f64::INFINITY;
    let mut lo = l;
    for m in 0..128 {
        let hi = l + width * (2f64.powi(m + 1) - 1.0);
        let part = quadrature::integrate(&integrand, lo, hi, 1e-13);
        if !part.is_finite() {
            break;
        }
        total += part;
        if part <= 1e-16 * total.abs() && part <= prev {
            return Ok(total);
        }
        prev = part;
        lo = hi;
    }
    Err(Error::Divergent(format!(
        "tail of the order-{k} moment integral does not contract"
    )))
}

/// Generalized inverse `inf{x : F(x) ≥ u}` for `u ∈ (0, 1)`.
pub fn sample(cdf: &MixedCdf, u: f64) -> f64 {
    match &cdf.repr {
        Repr::Hazard(phi) => {
            let mut x = phi.inverse_cumulative(-(-u).ln_1p());
            for _ in 0..8 {
                if !x.is_finite() || cdf.eval(x) >= u {
                    break;
                }
                x = x.next_up();
            }
            x
        }
        Repr::Survival(_) => {
            let mut hi = 1.0f64;
            while cdf.eval(hi) < u {
                hi *= 2.0;
                if hi > 1e300 {
                    return f64::INFINITY;
                }
            }
            if cdf.eval(0.0) >= u {
                return 0.0;
            }
            let mut lo = 0.0;
            // invariant: F(lo) < u ≤ F(hi)
            for _ in 0..2000 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if cdf.eval(mid) >= u {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    }
}
