//! Named lifetime families, both as generalized intensities and as
//! closed-form distribution functions.

use super::cdf::{Jump, MixedCdf};
use super::intensity::{Atom, GeneralizedIntensity, HazardJump, Segment};
use crate::error::{Error, Result};

fn arg(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

/// Constant hazard `rate ≥ 0`. `rate = 0` gives the (defective) zero intensity.
pub fn exponential(rate: f64) -> Result<GeneralizedIntensity> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(arg(format!(
            "exponential rate must be finite and nonnegative, got {rate}"
        )));
    }
    GeneralizedIntensity::constant(rate)
}

/// Uniform on `[a, b)`: zero hazard before `a`, then `1 / (b - s)`.
pub fn uniform(a: f64, b: f64) -> Result<GeneralizedIntensity> {
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(arg(format!(
            "uniform bounds need 0 <= a < b, got a = {a}, b = {b}"
        )));
    }
    let seg = Segment::constant(a, 0.0).with_pole(b, 1.0);
    let segments = if a > 0.0 {
        vec![Segment::constant(0.0, 0.0), seg]
    } else {
        vec![seg]
    };
    GeneralizedIntensity::new(segments, Vec::new())
}

/// Weibull with integer shape `k ∈ {1, 2, 3, 4}`: hazard `k s^{k-1} / scale^k`.
pub fn weibull(shape: f64, scale: f64) -> Result<GeneralizedIntensity> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(arg(format!("weibull scale must be positive, got {scale}")));
    }
    if shape.fract() != 0.0 || !(1.0..=4.0).contains(&shape) {
        return Err(arg(format!(
            "weibull shape must be an integer in 1..=4 to have a cubic hazard, got {shape}"
        )));
    }
    let k = shape as usize;
    let mut coeffs = [0.0; 4];
    coeffs[k - 1] = shape / scale.powi(k as i32);
    GeneralizedIntensity::new(vec![Segment::new(0.0, coeffs)], Vec::new())
}

/// Point mass at `c ≥ 0`.
pub fn deterministic(c: f64) -> Result<GeneralizedIntensity> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(arg(format!(
            "deterministic value must be finite and nonnegative, got {c}"
        )));
    }
    GeneralizedIntensity::new(
        vec![Segment::constant(0.0, 0.0)],
        vec![Atom::new(c, HazardJump::Full)],
    )
}

/// Closed-form `Exp(rate)` distribution function.
pub fn exponential_cdf(rate: f64) -> Result<MixedCdf> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(arg(format!(
            "exponential rate must be positive, got {rate}"
        )));
    }
    Ok(MixedCdf::from_survival(
        move |x| (-rate * x.max(0.0)).exp(),
        vec![],
        vec![],
        f64::INFINITY,
    )?
    .with_exponential_tail(0.0, rate))
}

pub fn uniform_cdf(a: f64, b: f64) -> Result<MixedCdf> {
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(arg(format!(
            "uniform bounds need 0 <= a < b, got a = {a}, b = {b}"
        )));
    }
    MixedCdf::from_survival(
        move |x| ((b - x) / (b - a)).clamp(0.0, 1.0),
        vec![],
        vec![a],
        b,
    )
}

pub fn weibull_cdf(shape: f64, scale: f64) -> Result<MixedCdf> {
    if !(shape > 0.0 && scale > 0.0) {
        return Err(arg(format!(
            "weibull parameters must be positive, got {shape}, {scale}"
        )));
    }
    MixedCdf::from_survival(
        move |x| (-(x.max(0.0) / scale).powf(shape)).exp(),
        vec![],
        vec![],
        f64::INFINITY,
    )
}

pub fn deterministic_cdf(c: f64) -> Result<MixedCdf> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(arg(format!(
            "deterministic value must be finite and nonnegative, got {c}"
        )));
    }
    MixedCdf::from_survival(
        move |x| if x >= c { 0.0 } else { 1.0 },
        vec![Jump { at: c, mass: 1.0 }],
        vec![],
        c,
    )
}
