use std::path::PathBuf;

use lorden_core::hazard::{check_assumptions, AssumptionReport};
use lorden_core::renewal::{GeneralizedBound, RenewalDiagnostics};
use lorden_core::simulator::{
    envelope_renewal, estimate_with, scenario_bounds, tail_curves, verify_bound, EstimateTable,
    GridDiagnostics, TimeVerdict, VerifyOptions, TAIL_GRID_TOL,
};
use lorden_core::Execution;
use serde::Serialize;

use crate::error::CliResult;
use crate::output::{csv, num, Bundle, ESTIMATES_HEADER, RENEWAL_HEADER, TAIL_HEADER};
use crate::scenario::ScenarioFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Bound,
    Simulate,
    Verify,
    Tail,
    Renewal,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Bound => "bound",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Tail => "tail",
            Command::Renewal => "renewal",
        }
    }
}

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<u64>,
    pub step: Option<f64>,
    pub horizon: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub overrides: Overrides,
    pub execution: Execution,
    pub allow_failed_assumptions: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// `true` iff every verdict the command produced passed.
    pub pass: bool,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Serialize)]
struct Bounds {
    generalized: Option<f64>,
    classical: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Moments {
    eta_mean: f64,
    eta_second: f64,
    zeta_mean: f64,
}

impl From<GeneralizedBound> for Moments {
    fn from(b: GeneralizedBound) -> Self {
        Moments {
            eta_mean: b.eta_mean,
            eta_second: b.eta_second,
            zeta_mean: b.zeta_mean,
        }
    }
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    command: &'static str,
    scenario: &'a str,
    seed: u64,
    reps: u64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    assumptions: Option<&'a AssumptionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assumptions_overridden: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    moments: Option<Moments>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<Bounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdicts: Option<&'a [TimeVerdict]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimates: Option<&'a EstimateTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    renewal: Option<RenewalDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<Vec<TailSummary>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

#[derive(Debug, Serialize)]
struct TailSummary {
    t: f64,
    file: String,
    points: usize,
    worst_excess: f64,
    tolerance: f64,
    pass: bool,
}

impl<'a> Report<'a> {
    fn new(command: Command, file: &'a ScenarioFile) -> Self {
        Report {
            command: command.name(),
            scenario: &file.name,
            seed: file.config.seed,
            reps: file.config.reps,
            pass: true,
            assumptions: None,
            assumptions_overridden: None,
            moments: None,
            bounds: None,
            verdicts: None,
            estimates: None,
            grid: None,
            renewal: None,
            tail: None,
            notes: Vec::new(),
        }
    }
}

pub fn estimates_csv(table: &EstimateTable) -> String {
    csv(
        &ESTIMATES_HEADER,
        table.rows.iter().map(|r| {
            vec![
                r.t,
                r.mean_backward,
                r.half_width_backward,
                r.mean_forward,
                r.half_width_forward,
            ]
        }),
    )
}

/// Runs one subcommand and writes its outputs.
pub fn run(command: Command, mut file: ScenarioFile, opts: &RunOptions) -> CliResult<Outcome> {
    let o = &opts.overrides;
    let c = &mut file.config;
    c.seed = o.seed.unwrap_or(c.seed);
    c.reps = o.reps.unwrap_or(c.reps);
    c.step = o.step.or(c.step);
    c.horizon = o.horizon.or(c.horizon);
    c.validate()?;
    let dir = o
        .out
        .clone()
        .or_else(|| file.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let (want_csv, want_json) = (file.output.csv, file.output.json);
    let mut bundle = Bundle::new(dir);
    let config = &file.config;
    let mut report = Report::new(command, &file);

    let assumptions;
    let estimates;
    let bound_report;
    match command {
        Command::Check => {
            assumptions = check_assumptions(config);
            report.pass = assumptions.passed();
            report.assumptions = Some(&assumptions);
        }
        Command::Bound => {
            let (generalized, classical) = scenario_bounds(config);
            let generalized = generalized?;
            let classical = classical.transpose()?;
            report.moments = Some(generalized.into());
            report.bounds = Some(Bounds {
                generalized: Some(generalized.value),
                classical,
            });
        }
        Command::Simulate => {
            estimates = estimate_with(config, opts.execution)?;
            if want_csv {
                bundle.add("estimates.csv", estimates_csv(&estimates));
            }
            report.estimates = Some(&estimates);
        }
        Command::Verify => {
            let vo = VerifyOptions {
                allow_failed_assumptions: opts.allow_failed_assumptions,
                execution: Some(opts.execution),
            };
            bound_report = verify_bound(config, vo)?;
            let r = &bound_report;
            if want_csv {
                bundle.add("estimates.csv", estimates_csv(&r.estimates));
            }
            report.pass = r.all_pass();
            report.assumptions = Some(&r.assumptions);
            report.assumptions_overridden = Some(r.assumptions_overridden);
            report.moments = r.generalized.map(Moments::from);
            report.bounds = Some(Bounds {
                generalized: r.generalized.map(|b| b.value),
                classical: r.classical_bound,
            });
            report.verdicts = Some(&r.verdicts);
            report.estimates = Some(&r.estimates);
            report.grid = r.diagnostics;
            report.notes = r.notes.clone();
        }
        Command::Tail => {
            let curves = tail_curves(config, TAIL_GRID_TOL, opts.execution)?;
            let mut summary = Vec::with_capacity(curves.len());
            for curve in &curves {
                let name = format!("tail_t{}.csv", num(curve.t));
                if want_csv {
                    let rows = curve
                        .points
                        .iter()
                        .map(|p| vec![p.x, p.upper_bound, p.empirical, p.se]);
                    bundle.add(name.clone(), csv(&TAIL_HEADER, rows));
                }
                summary.push(TailSummary {
                    t: curve.t,
                    file: name,
                    points: curve.points.len(),
                    worst_excess: curve.worst_excess,
                    tolerance: curve.tolerance,
                    pass: curve.pass,
                });
            }
            report.pass = curves.iter().all(|c| c.pass);
            report.tail = Some(summary);
        }
        Command::Renewal => {
            let h = envelope_renewal(config)?;
            if want_csv {
                let rows = h
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| vec![h.node(k), v]);
                bundle.add("renewal.csv", csv(&RENEWAL_HEADER, rows));
            }
            report.renewal = Some(h.diagnostics());
        }
    }
    let pass = report.pass;
    if want_json {
        bundle.add_json("report.json", &report);
    }
    let files = bundle.write(command.name(), &file.name, &file.source)?;
    Ok(Outcome { pass, files })
}
