use serde::{Deserialize, Serialize};

use super::function::RenewalFunction;
use crate::error::{Error, Result};
use crate::hazard::{moment, MixedCdf};

/// `E ξ² / E ξ`.
pub fn lorden_classical_bound(cdf: &MixedCdf) -> Result<f64> {
    let m1 = moment(cdf, 1)?;
    let m2 = moment(cdf, 2)?;
    if !(m1 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean must be positive, got {m1}"
        )));
    }
    if !m2.is_finite() {
        return Err(Error::Divergent("second moment".into()));
    }
    Ok(m2 / m1)
}

/// Moment inputs of the generalized bound and its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedBound {
    pub eta_mean: f64,
    pub eta_second: f64,
    pub zeta_mean: f64,
    pub value: f64,
}

impl GeneralizedBound {
    pub fn from_moments(eta_mean: f64, eta_second: f64, zeta_mean: f64) -> Result<Self> {
        if !(zeta_mean > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "E zeta must be positive, got {zeta_mean}"
            )));
        }
        if !eta_second.is_finite() {
            return Err(Error::Divergent("E eta^2".into()));
        }
        Ok(GeneralizedBound {
            eta_mean,
            eta_second,
            zeta_mean,
            value: eta_mean + eta_second / (2.0 * zeta_mean),
        })
    }

    /// `η ~ Φ`, `ζ ~ G`.
    pub fn compute(phi: &MixedCdf, g: &MixedCdf) -> Result<Self> {
        GeneralizedBound::from_moments(moment(phi, 1)?, moment(phi, 2)?, moment(g, 1)?)
    }
}

/// `E η + E η² / (2 E ζ)`, which bounds both `E B_t` and `E W_t`.
pub fn generalized_bound(phi: &MixedCdf, g: &MixedCdf) -> Result<f64> {
    GeneralizedBound::compute(phi, g).map(|b| b.value)
}

/// Upper bound on `P(B_t > x)`:
/// `(1 − Φ(t)) + ∫_{[0, t−x)} (1 − Φ(t − s)) dH(s)`, zero for `x > t`.
pub fn backward_tail_bound(phi: &MixedCdf, h: &RenewalFunction, t: f64, x: f64) -> Result<f64> {
    if !(t >= 0.0 && x >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} and x = {x} must be nonnegative"
        )));
    }
    if t > h.horizon() * (1.0 + 1e-12) {
        return Err(Error::HorizonExceeded {
            requested: t,
            horizon: h.horizon(),
        });
    }
    if x > t {
        return Ok(0.0);
    }
    let c = t - x;
    let step = h.step();
    let g = |s: f64| phi.survival(t - s);
    let mut sum = phi.survival(t);
    for (k, &m) in h.atom_masses().iter().enumerate() {
        let s = k as f64 * step;
        if s >= c {
            break;
        }
        if m != 0.0 {
            sum += m * g(s);
        }
    }
    for (k, &m) in h.continuous_masses().iter().enumerate().skip(1) {
        let lo = (k - 1) as f64 * step;
        if lo >= c {
            break;
        }
        let hi = (k as f64 * step).min(c);
        let frac = (hi - lo) / step;
        sum += m * frac * g(0.5 * (lo + hi));
    }
    Ok(sum)
}
