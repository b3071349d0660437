use serde::{Deserialize, Serialize};

use super::path::{partial_sums, walk};
use super::scenario::ScenarioConfig;
use crate::error::Result;
use crate::par::{map_indexed, Execution};
use crate::stats::Welford;

/// Replications per work item. Fixed so the reduction tree, and therefore
/// every output bit, is independent of the thread count.
pub const BATCH: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub t: f64,
    pub mean_backward: f64,
    pub var_backward: f64,
    pub half_width_backward: f64,
    pub mean_forward: f64,
    pub var_forward: f64,
    pub half_width_forward: f64,
    pub reps: u64,
}

impl EstimateRow {
    pub fn se_backward(&self) -> f64 {
        (self.var_backward / self.reps as f64).sqrt()
    }

    pub fn se_forward(&self) -> f64 {
        (self.var_forward / self.reps as f64).sqrt()
    }
}

/// Monte Carlo means of `B_t` and `W_t` with 95% half-widths `1.96 √(var / reps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateTable {
    pub reps: u64,
    pub rows: Vec<EstimateRow>,
}

fn batches(reps: u64) -> usize {
    reps.div_ceil(BATCH) as usize
}

fn batch_range(b: usize, reps: u64) -> std::ops::Range<u64> {
    let lo = b as u64 * BATCH;
    lo..(lo + BATCH).min(reps)
}

pub fn estimate(scenario: &ScenarioConfig) -> Result<EstimateTable> {
    estimate_with(scenario, Execution::default())
}

pub fn estimate_with(scenario: &ScenarioConfig, exec: Execution) -> Result<EstimateTable> {
    scenario.validate()?;
    let nq = scenario.t_queries.len();
    let partials = map_indexed(
        batches(scenario.reps),
        exec,
        |b| -> Result<Vec<(Welford, Welford)>> {
            let mut acc = vec![(Welford::default(), Welford::default()); nq];
            for r in batch_range(b, scenario.reps) {
                let mut q = 0;
                walk(scenario, r, None, |s| {
                    acc[q].0.push(s.backward);
                    acc[q].1.push(s.forward);
                    q += 1;
                })?;
            }
            Ok(acc)
        },
    );
    let mut total = vec![(Welford::default(), Welford::default()); nq];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            t.0.merge(&p.0);
            t.1.merge(&p.1);
        }
    }
    let reps = scenario.reps;
    let half = |v: f64| 1.96 * (v / reps as f64).sqrt();
    let rows = scenario
        .t_queries
        .iter()
        .zip(total)
        .map(|(&t, (b, w))| EstimateRow {
            t,
            mean_backward: b.mean,
            var_backward: b.variance(),
            half_width_backward: half(b.variance()),
            mean_forward: w.mean,
            var_forward: w.variance(),
            half_width_forward: half(w.variance()),
            reps,
        })
        .collect();
    Ok(EstimateTable { reps, rows })
}

/// Per query time, the backward times `B_t` of all replications in replication order.
pub fn backward_samples(scenario: &ScenarioConfig, exec: Execution) -> Result<Vec<Vec<f64>>> {
    scenario.validate()?;
    let nq = scenario.t_queries.len();
    let parts = map_indexed(batches(scenario.reps), exec, |b| -> Result<Vec<Vec<f64>>> {
        let range = batch_range(b, scenario.reps);
        let mut out = vec![Vec::with_capacity((range.end - range.start) as usize); nq];
        for r in range {
            let mut q = 0;
            walk(scenario, r, None, |s| {
                out[q].push(s.backward);
                q += 1;
            })?;
        }
        Ok(out)
    });
    let mut all = vec![Vec::with_capacity(scenario.reps as usize); nq];
    for part in parts {
        for (a, p) in all.iter_mut().zip(part?) {
            a.extend(p);
        }
    }
    Ok(all)
}

/// `sums[k - 1][r]` is `ξ_1 + ⋯ + ξ_k` on replication `r`, for `k = 1..=n`.
pub fn partial_sum_samples(scenario: &ScenarioConfig, n: usize, exec: Execution) -> Vec<Vec<f64>> {
    let parts = map_indexed(batches(scenario.reps), exec, |b| {
        batch_range(b, scenario.reps)
            .map(|r| partial_sums(scenario, r, n))
            .collect::<Vec<_>>()
    });
    let mut sums = vec![Vec::with_capacity(scenario.reps as usize); n];
    for row in parts.into_iter().flatten() {
        for (k, s) in row.into_iter().enumerate() {
            sums[k].push(s);
        }
    }
    sums
}
