use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{self, Cubic};

/// Cumulative-hazard jump carried by an atom.
///
/// `Full` is an exact sentinel for an atom that absorbs all remaining survival
/// (`S(a+0) = 0`); it is never approximated by a large float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HazardJump {
    Finite(f64),
    Full,
}

impl HazardJump {
    /// `f64::INFINITY` maps onto `Full`.
    pub fn from_value(delta: f64) -> Self {
        if delta.is_infinite() && delta > 0.0 {
            HazardJump::Full
        } else {
            HazardJump::Finite(delta)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            HazardJump::Finite(d) => d,
            HazardJump::Full => f64::INFINITY,
        }
    }

    /// `S(a+0) / S(a-0)`.
    pub fn survival_ratio(self) -> f64 {
        match self {
            HazardJump::Finite(d) => (-d).exp(),
            HazardJump::Full => 0.0,
        }
    }

    pub fn combine(self, other: HazardJump) -> HazardJump {
        match (self, other) {
            (HazardJump::Finite(a), HazardJump::Finite(b)) => HazardJump::Finite(a + b),
            _ => HazardJump::Full,
        }
    }

    pub fn is_full(self) -> bool {
        matches!(self, HazardJump::Full)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub at: f64,
    pub jump: HazardJump,
}

impl Atom {
    pub fn new(at: f64, jump: HazardJump) -> Self {
        Atom { at, jump }
    }
}

/// A hazard term `weight / (at - s)`. When `at` closes the segment the
/// cumulative hazard diverges there and survival reaches zero continuously
/// (the uniform-distribution shape).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub at: f64,
    pub weight: f64,
}

/// Absolutely continuous hazard on `[start, next start)`: a cubic in
/// `u = s - start` plus optional pole terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub coeffs: Cubic,
    #[serde(default)]
    pub poles: Vec<Pole>,
}

impl Segment {
    pub fn new(start: f64, coeffs: Cubic) -> Self {
        Segment {
            start,
            coeffs,
            poles: Vec::new(),
        }
    }

    pub fn constant(start: f64, rate: f64) -> Self {
        Segment::new(start, [rate, 0.0, 0.0, 0.0])
    }

    pub fn with_pole(mut self, at: f64, weight: f64) -> Self {
        self.poles.push(Pole { at, weight });
        self
    }

    pub fn hazard(&self, s: f64) -> f64 {
        let mut h = poly::eval(&self.coeffs, s - self.start);
        for p in &self.poles {
            h += p.weight / (p.at - s);
        }
        h
    }

    /// `∫_start^x` of the hazard. Infinite at or beyond a pole.
    pub fn cumulative(&self, x: f64) -> f64 {
        let mut c = poly::integral(&self.coeffs, x - self.start);
        for p in &self.poles {
            if x >= p.at {
                return f64::INFINITY;
            }
            c += p.weight * ((p.at - self.start) / (p.at - x)).ln();
        }
        c
    }

    fn is_identically_zero(&self) -> bool {
        poly::is_zero(&self.coeffs) && self.poles.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Knot {
    at: f64,
    seg: usize,
    /// Λ(at-0) and Λ(at+0).
    before: f64,
    after: f64,
}

/// A generalized intensity: a piecewise cubic hazard (with optional pole
/// terms) plus Dirac atoms carrying cumulative-hazard jumps.
///
/// Defective intensities (bounded cumulative hazard) are representable so the
/// zero intensity and compactly supported hazards can be described and
/// diagnosed; [`GeneralizedIntensity::is_proper`] tells them apart and
/// distribution constructors reject them.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedIntensity {
    segments: Vec<Segment>,
    atoms: Vec<Atom>,
    end: f64,
    end_is_pole: bool,
    seg_cum: Vec<f64>,
    atom_cum: Vec<f64>,
    knots: Vec<Knot>,
}

const NONNEG_TOL: f64 = 1e-9;

impl GeneralizedIntensity {
    pub fn new(segments: Vec<Segment>, atoms: Vec<Atom>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidIntensity(m));
        if segments.is_empty() {
            return bad("at least one hazard segment is required".into());
        }
        if segments[0].start != 0.0 {
            return bad(format!(
                "first segment must start at 0, got {}",
                segments[0].start
            ));
        }
        for (i, seg) in segments.iter().enumerate() {
            if !seg.start.is_finite() || seg.coeffs.iter().any(|c| !c.is_finite()) {
                return bad(format!("segment {i} has non-finite data"));
            }
            let next = segments.get(i + 1).map(|s| s.start);
            if let Some(n) = next {
                if !(n > seg.start) {
                    return bad(format!(
                        "segment starts must increase strictly ({} then {n})",
                        seg.start
                    ));
                }
            }
            for p in &seg.poles {
                if !(p.weight > 0.0 && p.weight.is_finite()) {
                    return bad(format!(
                        "segment {i}: pole weight must be positive, got {}",
                        p.weight
                    ));
                }
                if !(p.at > seg.start && p.at.is_finite()) {
                    return bad(format!(
                        "segment {i}: pole at {} must lie beyond the segment start",
                        p.at
                    ));
                }
                if let Some(n) = next {
                    if p.at < n {
                        return bad(format!(
                            "segment {i}: pole at {} lies inside the segment",
                            p.at
                        ));
                    }
                }
            }
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.at >= 0.0 && a.at.is_finite()) {
                return bad(format!(
                    "atom {i}: location {} must be finite and nonnegative",
                    a.at
                ));
            }
            if let HazardJump::Finite(d) = a.jump {
                if !(d > 0.0 && d.is_finite()) {
                    return bad(format!("atom {i}: hazard jump must be positive, got {d}"));
                }
            }
            if i > 0 && !(a.at > atoms[i - 1].at) {
                return bad(format!(
                    "atom locations must increase strictly ({} then {})",
                    atoms[i - 1].at,
                    a.at
                ));
            }
        }

        // survival vanishes from `end` on: first terminal pole or full atom
        let mut end = f64::INFINITY;
        let mut end_is_pole = false;
        for (i, seg) in segments.iter().enumerate() {
            let seg_end = segments.get(i + 1).map_or(f64::INFINITY, |s| s.start);
            let terminal = seg
                .poles
                .iter()
                .map(|p| p.at)
                .filter(|&a| a <= seg_end)
                .fold(f64::INFINITY, f64::min);
            if terminal < end {
                end = terminal;
                end_is_pole = true;
                break;
            }
        }
        if let Some(a) = atoms.iter().find(|a| a.jump.is_full()) {
            if a.at < end {
                end = a.at;
                end_is_pole = false;
            }
        }
        let segments: Vec<Segment> = segments.into_iter().filter(|s| s.start < end).collect();
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .filter(|a| a.at < end || (a.at == end && !end_is_pole))
            .collect();

        let n = segments.len();
        for i in 0..n {
            let len = if i + 1 < n {
                segments[i + 1].start - segments[i].start
            } else {
                (end - segments[i].start).max(0.0)
            };
            let c = &segments[i].coeffs;
            let scale = 1.0 + c.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let (min, at) = poly::min_on(c, len);
            if min < -NONNEG_TOL * scale {
                return bad(format!(
                    "hazard is negative ({min}) at s = {} in segment {i}",
                    segments[i].start + at
                ));
            }
        }

        let mut seg_cum = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            seg_cum.push(acc);
            if i + 1 < n {
                acc += segments[i].cumulative(segments[i + 1].start);
            }
        }
        let mut atom_cum = Vec::with_capacity(atoms.len());
        let mut acc = 0.0;
        for a in &atoms {
            acc += a.jump.value();
            atom_cum.push(acc);
        }

        let mut out = GeneralizedIntensity {
            segments,
            atoms,
            end,
            end_is_pole,
            seg_cum,
            atom_cum,
            knots: Vec::new(),
        };
        out.knots = out.build_knots();
        Ok(out)
    }

    pub fn zero() -> Self {
        GeneralizedIntensity::new(vec![Segment::constant(0.0, 0.0)], Vec::new())
            .expect("zero intensity is valid")
    }

    /// Constant hazard `rate ≥ 0` on `[0, ∞)`.
    pub fn constant(rate: f64) -> Result<Self> {
        GeneralizedIntensity::new(vec![Segment::constant(0.0, rate)], Vec::new())
    }

    pub fn with_atoms(&self, extra: &[Atom]) -> Result<Self> {
        let atoms = GeneralizedIntensity::new(vec![Segment::constant(0.0, 0.0)], extra.to_vec())?;
        self.add(&atoms)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Point from which survival is zero (terminal pole or full atom); `∞` otherwise.
    pub fn support_end(&self) -> f64 {
        self.end
    }

    pub fn end_is_pole(&self) -> bool {
        self.end_is_pole && self.end.is_finite()
    }

    fn segment_index(&self, x: f64) -> usize {
        self.segments
            .partition_point(|s| s.start <= x)
            .saturating_sub(1)
    }

    fn segment_end(&self, i: usize) -> f64 {
        self.segments.get(i + 1).map_or(self.end, |s| s.start)
    }

    /// Absolutely continuous hazard value `φ_ac(s)`.
    pub fn hazard_ac(&self, s: f64) -> f64 {
        if s < 0.0 || s >= self.end {
            return 0.0;
        }
        self.segments[self.segment_index(s)].hazard(s)
    }

    /// `∫_0^x φ_ac`.
    pub fn cumulative_ac(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= self.end && self.end_is_pole {
            return f64::INFINITY;
        }
        let x = x.min(self.end);
        let i = self.segment_index(x);
        self.seg_cum[i] + self.segments[i].cumulative(x)
    }

    fn atoms_upto(&self, x: f64, inclusive: bool) -> f64 {
        let k = if inclusive {
            self.atoms.partition_point(|a| a.at <= x)
        } else {
            self.atoms.partition_point(|a| a.at < x)
        };
        if k == 0 {
            0.0
        } else {
            self.atom_cum[k - 1]
        }
    }

    /// Right-continuous cumulative hazard `Λ(x) = ∫_0^x φ_ac + Σ_{a_i ≤ x} Δ_i`.
    pub fn cumulative(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x >= self.end {
            return f64::INFINITY;
        }
        self.cumulative_ac(x) + self.atoms_upto(x, true)
    }

    /// `Λ(x - 0)`.
    pub fn cumulative_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x > self.end || (x == self.end && self.end_is_pole) {
            return f64::INFINITY;
        }
        self.cumulative_ac(x) + self.atoms_upto(x, false)
    }

    pub fn survival(&self, x: f64) -> f64 {
        (-self.cumulative(x)).exp()
    }

    /// `Λ(∞)`; finite exactly when the intensity is defective.
    pub fn total(&self) -> f64 {
        if self.end.is_finite() {
            return f64::INFINITY;
        }
        let last = self.segments.last().expect("segments are non-empty");
        if !last.is_identically_zero() {
            return f64::INFINITY;
        }
        self.seg_cum[self.segments.len() - 1] + self.atom_cum.last().copied().unwrap_or(0.0)
    }

    /// Whether the cumulative hazard diverges, i.e. the intensity defines a proper lifetime.
    pub fn is_proper(&self) -> bool {
        self.total().is_infinite()
    }

    /// Sum of intensities: the intensity of `min(X, Y)` for independent `X`, `Y`.
    pub fn add(&self, other: &GeneralizedIntensity) -> Result<GeneralizedIntensity> {
        let end = self.end.min(other.end);
        let mut starts: Vec<f64> = self
            .segments
            .iter()
            .chain(other.segments.iter())
            .map(|s| s.start)
            .filter(|&s| s < end)
            .collect();
        starts.sort_by(f64::total_cmp);
        starts.dedup();
        let mut segments = Vec::with_capacity(starts.len());
        for &s in &starts {
            let a = &self.segments[self.segment_index(s)];
            let b = &other.segments[other.segment_index(s)];
            let coeffs = poly::add(
                &poly::shift(&a.coeffs, s - a.start),
                &poly::shift(&b.coeffs, s - b.start),
            );
            let mut poles: Vec<Pole> = Vec::new();
            for p in a.poles.iter().chain(b.poles.iter()) {
                match poles.iter_mut().find(|q| q.at == p.at) {
                    Some(q) => q.weight += p.weight,
                    None => poles.push(*p),
                }
            }
            poles.sort_by(|x, y| x.at.total_cmp(&y.at));
            segments.push(Segment {
                start: s,
                coeffs,
                poles,
            });
        }
        let mut atoms: Vec<Atom> = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() || j < other.atoms.len() {
            let next = match (self.atoms.get(i), other.atoms.get(j)) {
                (Some(a), Some(b)) if a.at == b.at => {
                    i += 1;
                    j += 1;
                    Atom::new(a.at, a.jump.combine(b.jump))
                }
                (Some(a), Some(b)) if a.at < b.at => {
                    i += 1;
                    *a
                }
                (Some(_), Some(b)) => {
                    j += 1;
                    *b
                }
                (Some(a), None) => {
                    i += 1;
                    *a
                }
                (None, Some(b)) => {
                    j += 1;
                    *b
                }
                (None, None) => unreachable!(),
            };
            atoms.push(next);
        }
        GeneralizedIntensity::new(segments, atoms)
    }

    fn build_knots(&self) -> Vec<Knot> {
        let mut pts: Vec<f64> = self
            .segments
            .iter()
            .map(|s| s.start)
            .chain(self.atoms.iter().map(|a| a.at))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.into_iter()
            .map(|at| {
                let before = self.cumulative_left(at);
                let after = self.cumulative(at);
                Knot {
                    at,
                    seg: self.segment_index(at),
                    before,
                    after,
                }
            })
            .collect()
    }

    /// Generalized inverse of the cumulative hazard: `inf{x : Λ(x) ≥ target}`.
    /// Returns `∞` when a defective intensity never reaches `target`.
    pub fn inverse_cumulative(&self, target: f64) -> f64 {
        if !(target > 0.0) {
            return 0.0;
        }
        let k = self.knots.partition_point(|kn| kn.after < target);
        if k < self.knots.len() {
            let kn = &self.knots[k];
            if kn.before >= target && k > 0 {
                let prev = &self.knots[k - 1];
                return self.solve_piece(prev.seg, prev.at, kn.at, target - prev.after);
            }
            return kn.at;
        }
        let last = self.knots.last().expect("knot at 0 always exists");
        let seg = &self.segments[last.seg];
        if seg.is_identically_zero() || !last.after.is_finite() {
            return f64::INFINITY;
        }
        self.solve_piece(
            last.seg,
            last.at,
            self.segment_end(last.seg),
            target - last.after,
        )
    }

    /// Solves `∫_l^x φ_ac = d` inside one segment piece `[l, r)`.
    fn solve_piece(&self, i: usize, l: f64, r: f64, d: f64) -> f64 {
        let seg = &self.segments[i];
        let c = &seg.coeffs;
        if seg.poles.is_empty() && c[2] == 0.0 && c[3] == 0.0 {
            let ul = l - seg.start;
            if c[1] == 0.0 {
                if c[0] > 0.0 {
                    return l + d / c[0];
                }
            } else {
                let big = d + c[0] * ul + 0.5 * c[1] * ul * ul;
                let disc = (c[0] * c[0] + 2.0 * c[1] * big).max(0.0);
                let u = 2.0 * big / (c[0] + disc.sqrt());
                return seg.start + u;
            }
        }
        if let [p] = seg.poles[..] {
            if poly::is_zero(c) {
                // w ln((a - l) / (a - x)) = d
                return p.at - (p.at - l) * (-d / p.weight).exp();
            }
        }
        let base = seg.cumulative(l);
        let f = |x: f64| seg.cumulative(x) - base - d;
        let mut lo = l;
        let mut hi = if r.is_finite() {
            r
        } else {
            let mut step = 1.0f64.max(l.abs());
            let mut h = l + step;
            while f(h) < 0.0 {
                step *= 2.0;
                h = l + step;
                if !h.is_finite() {
                    return f64::INFINITY;
                }
            }
            h
        };
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let fx = f(x);
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = seg.hazard(x);
            let mut next = if slope > 0.0 && fx.is_finite() {
                x - fx / slope
            } else {
                f64::NAN
            };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.abs().max(1.0) || hi - lo <= 1e-15 * hi.abs().max(1.0)
            {
                return hi.min(next.max(lo));
            }
            x = next;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(rate: f64) -> GeneralizedIntensity {
        GeneralizedIntensity::constant(rate).unwrap()
    }

    #[test]
    fn rejects_negative_hazard_and_disordered_atoms() {
        assert!(
            GeneralizedIntensity::new(vec![Segment::new(0.0, [1.0, -1.0, 0.0, 0.0])], vec![])
                .is_err()
        );
        let atoms = vec![
            Atom::new(2.0, HazardJump::Finite(1.0)),
            Atom::new(1.0, HazardJump::Finite(1.0)),
        ];
        assert!(GeneralizedIntensity::new(vec![Segment::constant(0.0, 1.0)], atoms).is_err());
        assert!(GeneralizedIntensity::new(vec![Segment::constant(1.0, 1.0)], vec![]).is_err());
        let zero_jump = vec![Atom::new(1.0, HazardJump::Finite(0.0))];
        assert!(GeneralizedIntensity::new(vec![Segment::constant(0.0, 1.0)], zero_jump).is_err());
    }

    #[test]
    fn cumulative_with_atoms_is_right_continuous() {
        let phi = exp(1.0)
            .with_atoms(&[Atom::new(1.0, HazardJump::Finite(2f64.ln()))])
            .unwrap();
        assert!((phi.cumulative(1.0) - (1.0 + 2f64.ln())).abs() < 1e-15);
        assert!((phi.cumulative_left(1.0) - 1.0).abs() < 1e-15);
        assert!(phi.is_proper());
    }

    #[test]
    fn full_atom_terminates_support() {
        let det = GeneralizedIntensity::zero()
            .with_atoms(&[Atom::new(2.0, HazardJump::Full)])
            .unwrap();
        assert_eq!(det.support_end(), 2.0);
        assert_eq!(det.cumulative(2.0), f64::INFINITY);
        assert_eq!(det.cumulative_left(2.0), 0.0);
        assert!(det.is_proper());
        assert_eq!(det.inverse_cumulative(0.3), 2.0);
        assert_eq!(det.inverse_cumulative(50.0), 2.0);
    }

    #[test]
    fn defective_intensities_are_detected() {
        assert!(!GeneralizedIntensity::zero().is_proper());
        let compact = GeneralizedIntensity::new(
            vec![Segment::constant(0.0, 1.0), Segment::constant(2.0, 0.0)],
            vec![],
        )
        .unwrap();
        assert!((compact.total() - 2.0).abs() < 1e-15);
        assert_eq!(compact.inverse_cumulative(2.5), f64::INFINITY);
        assert!((compact.inverse_cumulative(1.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sum_merges_breakpoints_and_atoms() {
        let a = GeneralizedIntensity::new(
            vec![
                Segment::new(0.0, [0.0, 1.0, 0.0, 0.0]),
                Segment::constant(2.0, 2.0),
            ],
            vec![Atom::new(1.0, HazardJump::Finite(2f64.ln()))],
        )
        .unwrap();
        let b = exp(0.5)
            .with_atoms(&[Atom::new(1.0, HazardJump::Finite(3f64.ln()))])
            .unwrap();
        let s = a.add(&b).unwrap();
        for x in [0.3, 1.0, 1.7, 2.0, 3.5] {
            assert!(
                (s.cumulative(x) - a.cumulative(x) - b.cumulative(x)).abs() < 1e-12,
                "x = {x}"
            );
        }
        assert_eq!(s.atoms().len(), 1);
        assert!((s.atoms()[0].jump.value() - 6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn pole_segment_behaves_like_uniform() {
        // hazard 1/(1 - s) on [0, 1): Uniform(0, 1)
        let u = GeneralizedIntensity::new(
            vec![Segment::constant(0.0, 0.0).with_pole(1.0, 1.0)],
            vec![],
        )
        .unwrap();
        assert_eq!(u.support_end(), 1.0);
        assert!((u.survival(0.25) - 0.75).abs() < 1e-15);
        assert!((u.inverse_cumulative(-(0.4f64).ln()) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn inverse_of_linear_hazard_is_closed_form() {
        // hazard 2s: Λ = s^2
        let w = GeneralizedIntensity::new(vec![Segment::new(0.0, [0.0, 2.0, 0.0, 0.0])], vec![])
            .unwrap();
        assert!((w.inverse_cumulative(4.0) - 2.0).abs() < 1e-14);
        let cubic =
            GeneralizedIntensity::new(vec![Segment::new(0.0, [0.0, 0.0, 0.0, 4.0])], vec![])
                .unwrap();
        assert!((cubic.inverse_cumulative(16.0) - 2.0).abs() < 1e-12);
    }
}
