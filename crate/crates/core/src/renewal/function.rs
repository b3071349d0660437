use serde::{Deserialize, Serialize};

use super::grid::{GridDistribution, GridMeasure};
use crate::error::{Error, Result};

/// Default stopping tolerance for `sup G^{*n}` at the horizon.
pub const DEFAULT_TOL: f64 = 1e-8;

const MAX_POWERS: u32 = 1_000_000;

/// `H(s) = Σ_{n≥1} G^{*n}(s)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalFunction {
    pub(crate) measure: GridMeasure,
    values: Vec<f64>,
    n_max: u32,
    truncation_bound: f64,
    equation_residual: f64,
}

/// Summary numbers of a renewal-function computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenewalDiagnostics {
    pub n_max: u32,
    pub truncation_bound: f64,
    pub equation_residual: f64,
}

impl RenewalFunction {
    pub fn step(&self) -> f64 {
        self.measure.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step()
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.step()
    }

    /// Number of convolution powers retained.
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Upper bound on the omitted terms `Σ_{n > n_max} G^{*n}(s_max)`.
    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }

    /// `sup_k |H − G − G∗H|` at the nodes.
    pub fn equation_residual(&self) -> f64 {
        self.equation_residual
    }

    pub fn diagnostics(&self) -> RenewalDiagnostics {
        RenewalDiagnostics {
            n_max: self.n_max,
            truncation_bound: self.truncation_bound,
            equation_residual: self.equation_residual,
        }
    }

    pub fn atom_masses(&self) -> &[f64] {
        &self.measure.atoms
    }

    pub fn continuous_masses(&self) -> &[f64] {
        &self.measure.cont
    }
}

/// Sums convolution powers of `G` until `sup G^{*n}` on the horizon drops
/// below `tol`, then validates the result against `H = G + G ∗ H`.
pub fn renewal_function(g: &GridDistribution, tol: f64) -> Result<RenewalFunction> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    if g.values()[0] >= 1.0 - 1e-15 {
        return Err(Error::NonConvergent(
            "G carries all of its mass at 0".into(),
        ));
    }
    let base = &g.measure;
    let mut power = base.clone();
    let mut h = base.clone();
    let mut n = 1u32;
    let mut sup = *g.values().last().expect("grid is non-empty");
    while sup >= tol {
        if n >= MAX_POWERS {
            return Err(Error::NonConvergent(format!(
                "sup G^*n still {sup} after {n} powers"
            )));
        }
        power = power.convolve(base);
        h.add_assign(&power);
        n += 1;
        sup = power.cumulative().last().copied().unwrap_or(0.0);
    }
    let nf = n as f64;
    let truncation_bound = if sup < 1.0 {
        (nf - 1.0) * sup + nf * sup * sup / (1.0 - sup)
    } else {
        f64::INFINITY
    };

    let values = h.cumulative();
    let gh = base.convolve(&h).cumulative();
    // against the snapped measure, so an off-node atom does not count as residual
    let g_snapped = base.cumulative();
    let equation_residual = values
        .iter()
        .zip(&g_snapped)
        .zip(&gh)
        .map(|((hv, gv), ghv)| (hv - gv - ghv).abs())
        .fold(0.0, f64::max);
    Ok(RenewalFunction {
        measure: h,
        values,
        n_max: n,
        truncation_bound,
        equation_residual,
    })
}
