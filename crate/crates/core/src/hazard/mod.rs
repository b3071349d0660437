//! Generalized intensities (hazards with atoms) and the mixed distribution
//! functions they define.

mod assumptions;
mod cdf;
pub mod families;
mod intensity;

pub use assumptions::{check_assumptions, AssumptionReport, Condition, ConditionResult, Verdict};
pub use cdf::{cdf_from_intensity, intensity_from_cdf, moment, sample, ExpTail, Jump, MixedCdf};
pub use intensity::{Atom, GeneralizedIntensity, HazardJump, Pole, Segment};

/// `Intensity_{min(X,Y)} = Intensity_X + Intensity_Y` for independent `X`, `Y`.
pub fn add_intensities(
    a: &GeneralizedIntensity,
    b: &GeneralizedIntensity,
) -> crate::Result<GeneralizedIntensity> {
    a.add(b)
}
