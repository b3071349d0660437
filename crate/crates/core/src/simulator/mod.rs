//! Exact Monte Carlo simulation of generalized renewal processes with
//! min-coupled intervals, under a deterministic per-replication stream contract.

mod estimate;
mod path;
mod scenario;
mod verify;

pub use estimate::{
    backward_samples, estimate, estimate_with, partial_sum_samples, EstimateRow, EstimateTable,
    BATCH,
};
pub use path::{
    generate_interval, partial_sums, simulate_path, stream, QueryState, RenewalPath, EVENT_CAP,
};
pub use scenario::{CheckOptions, GridSpec, Mu, MuRule, ScenarioConfig};
pub use verify::{
    envelope_renewal, scenario_bounds, tail_curves, verify_bound, BoundReport, GridDiagnostics,
    TailCurve, TailPoint, TimeVerdict, VerifyOptions, TAIL_GRID_TOL,
};
