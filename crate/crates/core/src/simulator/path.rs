use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::ScenarioConfig;
use crate::error::{Error, Result};

/// Per-path event cap; exceeding it is reported, never silently truncated.
pub const EVENT_CAP: u64 = 100_000_000;

/// Random stream of replication `r`: ChaCha8 keyed by `seed_from_u64(seed)`
/// on stream id `r`. A pure function of `(seed, r)`.
///
/// Each interval consumes exactly two `Open01` draws, `ζ_j` first and `θ_j`
/// second, whether or not `μ_j` is zero.
pub fn stream(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// Draws `ξ_j = min(ζ_j, θ_j)` by inverting the cumulative hazards of `φ` and `μ_j`.
pub fn generate_interval<R: Rng + ?Sized>(j: u64, scenario: &ScenarioConfig, rng: &mut R) -> f64 {
    let u_zeta: f64 = rng.sample(Open01);
    let u_theta: f64 = rng.sample(Open01);
    let zeta = scenario.phi.inverse_cumulative(-(-u_zeta).ln_1p());
    let theta = scenario.mu.get(j).inverse_cumulative(-(-u_theta).ln_1p());
    zeta.min(theta)
}

/// State of a path at one query time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryState {
    pub t: f64,
    /// `N_t = #{k : t_k ≤ t}`.
    pub count: u64,
    /// `B_t = t − t_{N_t}` with `t_0 = 0`.
    pub backward: f64,
    /// `W_t = t_{N_t + 1} − t`.
    pub forward: f64,
    /// `ξ_{N_t + 1}`, the interval straddling `t`.
    pub straddling: f64,
}

/// One simulated trajectory up to the first renewal after the last query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalPath {
    pub jump_times: Vec<f64>,
    pub intervals: Vec<f64>,
    pub queries: Vec<QueryState>,
}

/// Walks replication `r`, calling `visit` once per query in order.
/// Jump times are optionally collected.
pub(crate) fn walk<F: FnMut(QueryState)>(
    scenario: &ScenarioConfig,
    replication: u64,
    mut jumps: Option<&mut (Vec<f64>, Vec<f64>)>,
    mut visit: F,
) -> Result<()> {
    let mut rng = stream(scenario.seed, replication);
    let queries = &scenario.t_queries;
    let mut q = 0;
    let mut last = 0.0;
    let mut count = 0u64;
    let mut j = 1u64;
    while q < queries.len() {
        if j > EVENT_CAP {
            return Err(Error::EventCap {
                cap: EVENT_CAP,
                time: queries[q],
            });
        }
        let xi = generate_interval(j, scenario, &mut rng);
        let next = last + xi;
        if let Some(store) = jumps.as_deref_mut() {
            store.0.push(next);
            store.1.push(xi);
        }
        while q < queries.len() && queries[q] < next {
            let t = queries[q];
            visit(QueryState {
                t,
                count,
                backward: t - last,
                forward: next - t,
                straddling: xi,
            });
            q += 1;
        }
        last = next;
        count += 1;
        j += 1;
    }
    Ok(())
}

/// Simulates replication `r` of the scenario.
pub fn simulate_path(scenario: &ScenarioConfig, replication: u64) -> Result<RenewalPath> {
    let mut store = (Vec::new(), Vec::new());
    let mut queries = Vec::with_capacity(scenario.t_queries.len());
    walk(scenario, replication, Some(&mut store), |s| queries.push(s))?;
    Ok(RenewalPath {
        jump_times: store.0,
        intervals: store.1,
        queries,
    })
}

/// First `n` partial sums `ξ_1 + ⋯ + ξ_k`, `k = 1..=n`, on replication `r`'s stream.
pub fn partial_sums(scenario: &ScenarioConfig, replication: u64, n: usize) -> Vec<f64> {
    let mut rng = stream(scenario.seed, replication);
    let mut acc = 0.0;
    (1..=n as u64)
        .map(|j| {
            acc += generate_interval(j, scenario, &mut rng);
            acc
        })
        .collect()
}
