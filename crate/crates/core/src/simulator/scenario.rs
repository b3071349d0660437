use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::{cdf_from_intensity, moment, GeneralizedIntensity};

/// Rule producing the competing intensity `μ_j` for interval `j ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum MuRule {
    /// The same `μ` for every interval.
    Constant(GeneralizedIntensity),
    /// `μ_j = items[(j - 1) mod len]`.
    Cycle(Vec<GeneralizedIntensity>),
    /// `μ_j = items[min(j, len) - 1]`: explicit prefix, last entry repeats.
    /// A distinct first entry describes a delayed process.
    Sequence(Vec<GeneralizedIntensity>),
    /// Constant hazard with rate `min(base + slope (j - 1), cap)`.
    LinearCapped { base: f64, slope: f64, cap: f64 },
}

/// Borrowed view of one `μ_j`.
#[derive(Debug, Clone, Copy)]
pub enum Mu<'a> {
    Intensity(&'a GeneralizedIntensity),
    Rate(f64),
}

impl Mu<'_> {
    /// `inf{x : M(x) ≥ target}` for the cumulative hazard `M` of this `μ_j`.
    pub fn inverse_cumulative(&self, target: f64) -> f64 {
        match *self {
            Mu::Intensity(m) => m.inverse_cumulative(target),
            Mu::Rate(r) if r > 0.0 => target / r,
            Mu::Rate(_) => f64::INFINITY,
        }
    }

    pub fn to_intensity(&self) -> GeneralizedIntensity {
        match *self {
            Mu::Intensity(m) => m.clone(),
            Mu::Rate(r) => GeneralizedIntensity::constant(r).expect("validated rate"),
        }
    }
}

impl MuRule {
    pub fn none() -> Self {
        MuRule::Constant(GeneralizedIntensity::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        match self {
            MuRule::Cycle(v) | MuRule::Sequence(v) if v.is_empty() => {
                bad("mu rule needs at least one intensity")
            }
            MuRule::LinearCapped { base, slope, cap } => {
                if !(base.is_finite() && slope.is_finite() && cap.is_finite()) {
                    bad("linear_capped parameters must be finite")
                } else if *base < 0.0 || *slope < 0.0 || cap < base {
                    bad("linear_capped needs base >= 0, slope >= 0 and cap >= base")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `μ_j` for `j ≥ 1`.
    pub fn get(&self, j: u64) -> Mu<'_> {
        let j = j.max(1);
        match self {
            MuRule::Constant(m) => Mu::Intensity(m),
            MuRule::Cycle(v) => Mu::Intensity(&v[((j - 1) % v.len() as u64) as usize]),
            MuRule::Sequence(v) => Mu::Intensity(&v[(j.min(v.len() as u64) - 1) as usize]),
            MuRule::LinearCapped { base, slope, cap } => {
                Mu::Rate((base + slope * (j - 1) as f64).min(*cap))
            }
        }
    }

    /// Finite set of intensities whose envelope check covers every `μ_j`.
    /// For the capped linear rule the extremes suffice since the hazard is
    /// monotone in the rate.
    pub fn distinct(&self) -> Vec<GeneralizedIntensity> {
        match self {
            MuRule::Constant(m) => vec![m.clone()],
            MuRule::Cycle(v) | MuRule::Sequence(v) => {
                let mut out: Vec<GeneralizedIntensity> = Vec::new();
                for m in v {
                    if !out.contains(m) {
                        out.push(m.clone());
                    }
                }
                out
            }
            MuRule::LinearCapped { base, cap, .. } => {
                let mut out = vec![GeneralizedIntensity::constant(*base).expect("validated rate")];
                if cap > base {
                    out.push(GeneralizedIntensity::constant(*cap).expect("validated rate"));
                }
                out
            }
        }
    }

    /// Whether every interval shares one distribution.
    pub fn is_iid(&self) -> bool {
        match self {
            MuRule::Constant(_) => true,
            MuRule::Cycle(v) | MuRule::Sequence(v) => v.windows(2).all(|w| w[0] == w[1]),
            MuRule::LinearCapped { base, slope, cap } => *slope == 0.0 || cap == base,
        }
    }
}

/// Tunables of the assumption checker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Width of the neighbourhood of zero on which `Q` must be bounded.
    pub epsilon: f64,
    /// Delay `T` beyond which `φ_ac` must be positive almost everywhere;
    /// `None` accepts any finite `T`.
    pub delay: Option<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            epsilon: 1e-3,
            delay: None,
        }
    }
}

/// Full description of one generalized renewal experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub phi: GeneralizedIntensity,
    pub mu: MuRule,
    pub q: GeneralizedIntensity,
    pub t_queries: Vec<f64>,
    pub reps: u64,
    pub seed: u64,
    /// Grid horizon; defaults to `max(40 E η, max t)`.
    pub horizon: Option<f64>,
    /// Grid step; defaults to `E ζ / 200`.
    pub step: Option<f64>,
    pub checks: CheckOptions,
}

/// Resolved grid parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub step: f64,
    pub horizon: f64,
}

impl ScenarioConfig {
    pub fn new(phi: GeneralizedIntensity, mu: MuRule, q: GeneralizedIntensity) -> Self {
        ScenarioConfig {
            phi,
            mu,
            q,
            t_queries: vec![1.0],
            reps: 1000,
            seed: 0,
            horizon: None,
            step: None,
            checks: CheckOptions::default(),
        }
    }

    pub fn with_queries(mut self, t: Vec<f64>) -> Self {
        self.t_queries = t;
        self
    }

    pub fn with_reps(mut self, reps: u64) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_grid(mut self, step: Option<f64>, horizon: Option<f64>) -> Self {
        self.step = step;
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.t_queries.is_empty() {
            return bad("at least one query time is required".into());
        }
        for w in self.t_queries.windows(2) {
            if !(w[1] >= w[0]) {
                return bad("query times must be sorted".into());
            }
        }
        if self.t_queries.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("query times must be finite and nonnegative".into());
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("horizon must be positive, got {h}"));
            }
            if self.max_query() > h {
                return bad(format!(
                    "query time {} exceeds horizon {h}",
                    self.max_query()
                ));
            }
        }
        if let Some(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("step must be positive, got {s}"));
            }
        }
        self.mu.validate()
    }

    pub fn max_query(&self) -> f64 {
        self.t_queries.iter().copied().fold(0.0, f64::max)
    }

    /// Step and horizon, filling defaults from the moments of `Φ` and `G`.
    pub fn grid(&self) -> Result<GridSpec> {
        let step = match self.step {
            Some(s) => s,
            None => moment(&cdf_from_intensity(&self.q)?, 1)? / 200.0,
        };
        let horizon = match self.horizon {
            Some(h) => h,
            None => (40.0 * moment(&cdf_from_intensity(&self.phi)?, 1)?).max(self.max_query()),
        };
        if !(step > 0.0 && horizon >= step) {
            return Err(Error::InvalidArgument(format!(
                "degenerate grid: step {step}, horizon {horizon}"
            )));
        }
        Ok(GridSpec { step, horizon })
    }
}
