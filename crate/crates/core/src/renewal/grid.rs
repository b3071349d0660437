use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::MixedCdf;

/// Largest tail mass `discretize` drops silently.
pub const MAX_TAIL_MASS: f64 = 1e-6;

/// An atom moved onto the nearest grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSnap {
    pub location: f64,
    pub node: usize,
    pub mass: f64,
    pub error: f64,
}

/// Mass bookkeeping on a uniform grid of step `h`:
/// `cont[k]` is continuous mass in `((k-1)h, kh]`, represented at the cell
/// midpoint; `atoms[k]` is point mass at node `kh`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GridMeasure {
    pub step: f64,
    pub cont: Vec<f64>,
    pub atoms: Vec<f64>,
}

impl GridMeasure {
    pub fn len(&self) -> usize {
        self.cont.len()
    }

    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.cont
            .iter()
            .zip(&self.atoms)
            .map(|(c, a)| {
                acc += c + a;
                acc
            })
            .collect()
    }

    pub fn add_assign(&mut self, other: &GridMeasure) {
        for (a, b) in self.cont.iter_mut().zip(&other.cont) {
            *a += b;
        }
        for (a, b) in self.atoms.iter_mut().zip(&other.atoms) {
            *a += b;
        }
    }

    /// Stieltjes convolution truncated at the shorter horizon.
    ///
    /// atom ⊗ atom lands on a node, atom ⊗ cell shifts the cell, and
    /// cell ⊗ cell (midpoints summing to a node) splits evenly between the two
    /// cells sharing that node.
    pub fn convolve(&self, other: &GridMeasure) -> GridMeasure {
        let n = self.len().min(other.len());
        let aa = linear_convolution(&self.atoms, &other.atoms, n);
        let ca = linear_convolution(&self.cont, &other.atoms, n);
        let ac = linear_convolution(&self.atoms, &other.cont, n);
        let cc = linear_convolution(&self.cont, &other.cont, n + 1);
        let mut cont = vec![0.0; n];
        for k in 1..n {
            cont[k] = ca[k] + ac[k];
        }
        for k in 2..=n {
            let half = 0.5 * cc[k];
            cont[k - 1] += half;
            if k < n {
                cont[k] += half;
            }
        }
        for c in &mut cont {
            if *c < 0.0 {
                *c = 0.0;
            }
        }
        let atoms = aa.into_iter().map(|x| x.max(0.0)).collect();
        GridMeasure {
            step: self.step,
            cont,
            atoms,
        }
    }
}

const DIRECT_LIMIT: usize = 1 << 16;

/// `out[k] = Σ_{i+j=k} a_i b_j` for `k < len`; exact sparse loop when cheap, FFT otherwise.
pub(crate) fn linear_convolution(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let nz_a: Vec<usize> = (0..a.len().min(len)).filter(|&i| a[i] != 0.0).collect();
    let nz_b: Vec<usize> = (0..b.len().min(len)).filter(|&i| b[i] != 0.0).collect();
    let mut out = vec![0.0; len];
    if nz_a.is_empty() || nz_b.is_empty() {
        return out;
    }
    if nz_a.len().saturating_mul(nz_b.len()) <= DIRECT_LIMIT.max(len) {
        for &i in &nz_a {
            for &j in &nz_b {
                if i + j < len {
                    out[i + j] += a[i] * b[j];
                }
            }
        }
        return out;
    }
    fft_convolution(&a[..a.len().min(len)], &b[..b.len().min(len)], len)
}

pub(crate) fn fft_convolution(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let size = (a.len() + b.len()).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex<f64>> = (0..size)
        .map(|i| Complex::new(a.get(i).copied().unwrap_or(0.0), 0.0))
        .collect();
    let mut fb: Vec<Complex<f64>> = (0..size)
        .map(|i| Complex::new(b.get(i).copied().unwrap_or(0.0), 0.0))
        .collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    (0..len)
        .map(|k| if k < size { fa[k].re * scale } else { 0.0 })
        .collect()
}

/// A distribution function sampled on `0, h, 2h, …, N h`, with its mass
/// decomposition kept for exact convolution of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDistribution {
    pub(crate) measure: GridMeasure,
    values: Vec<f64>,
    snaps: Vec<AtomSnap>,
    tail_mass: f64,
}

impl GridDistribution {
    pub fn step(&self) -> f64 {
        self.measure.step
    }

    /// Values `F(kh)` for `k = 0..=N`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn horizon(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step()
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.step()
    }

    /// Mass beyond the horizon (dropped by discretization or truncated convolution).
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn atom_snaps(&self) -> &[AtomSnap] {
        &self.snaps
    }

    pub fn max_snap_error(&self) -> f64 {
        self.snaps.iter().map(|s| s.error).fold(0.0, f64::max)
    }

    pub fn atom_masses(&self) -> &[f64] {
        &self.measure.atoms
    }

    pub fn continuous_masses(&self) -> &[f64] {
        &self.measure.cont
    }

    /// Linear interpolation between nodes; off-node error is at most `F((k+1)h) - F(kh)`.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let pos = x / self.step();
        let k = pos.floor() as usize;
        if k + 1 >= self.values.len() {
            return *self.values.last().expect("grid is non-empty");
        }
        let frac = pos - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    fn from_measure(measure: GridMeasure, total: f64, snaps: Vec<AtomSnap>) -> Self {
        let values: Vec<f64> = measure
            .cumulative()
            .into_iter()
            .map(|v| v.min(1.0))
            .collect();
        let tail_mass = (total - values.last().copied().unwrap_or(0.0)).max(0.0);
        GridDistribution {
            measure,
            values,
            snaps,
            tail_mass,
        }
    }

    fn total_mass(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0) + self.tail_mass
    }
}

/// Samples `F` at nodes `kh` up to the first node covering `s_max`.
/// Fails when more than [`MAX_TAIL_MASS`] lies beyond the horizon.
pub fn discretize(cdf: &MixedCdf, h: f64, s_max: f64) -> Result<GridDistribution> {
    let grid = discretize_allowing_truncation(cdf, h, s_max)?;
    if grid.tail_mass > MAX_TAIL_MASS {
        return Err(Error::TailTruncated {
            horizon: grid.horizon(),
            tail_mass: grid.tail_mass,
        });
    }
    Ok(grid)
}

/// As [`discretize`], accepting any tail mass beyond the horizon.
pub fn discretize_allowing_truncation(
    cdf: &MixedCdf,
    h: f64,
    s_max: f64,
) -> Result<GridDistribution> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "grid step must be positive, got {h}"
        )));
    }
    if !(s_max >= h && s_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon {s_max} must be at least the step {h}"
        )));
    }
    let n = (s_max / h - 1e-9).ceil() as usize;
    let xs: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let values: Vec<f64> = xs.iter().map(|&x| cdf.eval(x)).collect();
    let jumps = cdf.jumps();
    let jump_mass_upto =
        |x: f64| -> f64 { jumps.iter().filter(|j| j.at <= x).map(|j| j.mass).sum() };

    let mut atoms = vec![0.0; n + 1];
    let mut snaps = Vec::new();
    for j in jumps.iter().filter(|j| j.at <= xs[n]) {
        let node = ((j.at / h).round() as usize).min(n);
        atoms[node] += j.mass;
        snaps.push(AtomSnap {
            location: j.at,
            node,
            mass: j.mass,
            error: (j.at - xs[node]).abs(),
        });
    }
    let cont_cdf: Vec<f64> = xs
        .iter()
        .zip(&values)
        .map(|(&x, &v)| v - jump_mass_upto(x))
        .collect();
    let mut cont = vec![0.0; n + 1];
    for k in 1..=n {
        cont[k] = (cont_cdf[k] - cont_cdf[k - 1]).max(0.0);
    }
    if cont_cdf[0] > 0.0 {
        // continuous mass cannot sit at 0; fold any residual into the origin atom
        atoms[0] += cont_cdf[0];
    }
    let tail_mass = cdf.survival(xs[n]);
    Ok(GridDistribution {
        measure: GridMeasure {
            step: h,
            cont,
            atoms,
        },
        values,
        snaps,
        tail_mass,
    })
}

fn check_steps(a: &GridDistribution, b: &GridDistribution) -> Result<()> {
    let (ha, hb) = (a.step(), b.step());
    if (ha - hb).abs() > 1e-12 * ha.max(hb) {
        return Err(Error::StepMismatch(ha, hb));
    }
    Ok(())
}

/// `(A ∗ B)(x) = ∫ A(x − s) dB(s)` on the common grid.
pub fn convolve(a: &GridDistribution, b: &GridDistribution) -> Result<GridDistribution> {
    check_steps(a, b)?;
    let measure = a.measure.convolve(&b.measure);
    let mut snaps = a.snaps.clone();
    snaps.extend_from_slice(&b.snaps);
    Ok(GridDistribution::from_measure(
        measure,
        a.total_mass() * b.total_mass(),
        snaps,
    ))
}

/// `A^{∗n}` by repeated squaring.
pub fn convolution_power(a: &GridDistribution, n: u32) -> Result<GridDistribution> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "convolution power must be at least 1".into(),
        ));
    }
    let mut result: Option<GridDistribution> = None;
    let mut base = a.clone();
    let mut k = n;
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => convolve(&r, &base)?,
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = convolve(&base, &base)?;
    }
    Ok(result.expect("n >= 1"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    /// `max_k max(F_k − G_k, Φ_k − F_k)`.
    pub max_violation: f64,
    pub at: f64,
    pub pass: bool,
}

/// Checks `G ≥ F ≥ Φ` node by node; passes iff the violation is at most `1e-9`.
pub fn ordering_check(
    g: &GridDistribution,
    f: &GridDistribution,
    phi: &GridDistribution,
) -> Result<OrderingCheck> {
    check_steps(g, f)?;
    check_steps(f, phi)?;
    let n = g.nodes().min(f.nodes()).min(phi.nodes());
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for k in 0..n {
        let v = (f.values[k] - g.values[k]).max(phi.values[k] - f.values[k]);
        if v > worst.0 {
            worst = (v, f.node(k));
        }
    }
    Ok(OrderingCheck {
        max_violation: worst.0,
        at: worst.1,
        pass: worst.0 <= 1e-9,
    })
}
