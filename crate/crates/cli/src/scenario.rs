//! Scenario files.
//!
//! ```toml
//! [phi]
//! family = "exp"
//! rate = 1.0
//!
//! [Q]
//! family = "exp"
//! rate = 3.0
//!
//! [mu]
//! rule = "cycle"
//! intensities = [{ family = "exp", rate = 0.0 }, { family = "exp", rate = 1.0 }]
//!
//! [simulation]
//! t_queries = [1.0, 5.0]
//! reps = 10000
//! seed = 42
//! ```
//!
//! Families are `exp` (`rate`), `uniform` (`a`, `b`), `weibull` (`shape`,
//! `scale`), `deterministic` (`c`) and `piecewise` (`segments`). Any family
//! may add `atoms = [{ at = 1.0, jump = 0.69 }]`; `jump = "inf"` is a full atom.

use std::path::{Path, PathBuf};

use lorden_core::hazard::{families, Atom, GeneralizedIntensity, HazardJump, Segment};
use lorden_core::simulator::{CheckOptions, MuRule, ScenarioConfig};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult, ErrorKind, Location};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    phi: Option<Spanned<IntensitySpec>>,
    #[serde(rename = "Q", alias = "q")]
    q: Option<Spanned<IntensitySpec>>,
    mu: Option<Spanned<RawMu>>,
    simulation: Option<Spanned<RawSimulation>>,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    check: RawCheck,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntensitySpec {
    family: Spanned<String>,
    rate: Option<Spanned<f64>>,
    a: Option<Spanned<f64>>,
    b: Option<Spanned<f64>>,
    shape: Option<Spanned<f64>>,
    scale: Option<Spanned<f64>>,
    c: Option<Spanned<f64>>,
    segments: Option<Spanned<Vec<SegmentSpec>>>,
    atoms: Option<Spanned<Vec<AtomSpec>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentSpec {
    start: f64,
    coeffs: Vec<f64>,
    #[serde(default)]
    poles: Vec<PoleSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoleSpec {
    at: f64,
    weight: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomSpec {
    at: f64,
    jump: JumpSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum JumpSpec {
    Finite(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMu {
    rule: Spanned<String>,
    intensity: Option<Spanned<IntensitySpec>>,
    intensities: Option<Vec<Spanned<IntensitySpec>>>,
    base: Option<f64>,
    slope: Option<f64>,
    cap: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    t_queries: Vec<f64>,
    reps: u64,
    seed: u64,
    h: Option<f64>,
    s_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    epsilon: Option<f64>,
    delay: Option<f64>,
}

/// Where and in which formats results are written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub json: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            csv: true,
            json: true,
        }
    }
}

/// A parsed scenario file.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub name: String,
    pub config: ScenarioConfig,
    pub output: OutputSpec,
    /// Source text, kept so outputs can be tied to the exact input.
    pub source: String,
}

pub fn parse_scenario(path: &Path) -> CliResult<ScenarioFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_str(&text, &path.display().to_string())
}

pub fn parse_str(text: &str, name: &str) -> CliResult<ScenarioFile> {
    let at = |offset: usize| Location::from_offset(name, text, offset);
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let err = CliError::new(ErrorKind::Parse, e.message().trim().to_string());
        match e.span() {
            Some(span) => err.at(at(span.start)),
            None => err,
        }
    })?;
    let missing = |section: &str| {
        CliError::new(ErrorKind::Parse, format!("missing section [{section}]")).at(at(0))
    };
    let phi = raw.phi.ok_or_else(|| missing("phi"))?;
    let q = raw.q.ok_or_else(|| missing("Q"))?;
    let mu = raw.mu.ok_or_else(|| missing("mu"))?;
    let sim = raw.simulation.ok_or_else(|| missing("simulation"))?;

    let intensity =
        |spec: &Spanned<IntensitySpec>, what: &str| -> CliResult<GeneralizedIntensity> {
            build_intensity(spec.get_ref()).map_err(|(m, offset)| {
                CliError::new(ErrorKind::Scenario, format!("{what}: {m}")).at(at(offset))
            })
        };
    let phi = intensity(&phi, "phi")?;
    let q = intensity(&q, "Q")?;
    let mu_span = mu.span().start;
    let mu = build_mu(mu.into_inner(), &intensity).map_err(|e| {
        if e.location.is_none() {
            e.at(at(mu_span))
        } else {
            e
        }
    })?;

    let sim_span = sim.span().start;
    let sim = sim.into_inner();
    let mut config = ScenarioConfig::new(phi, mu, q)
        .with_queries(sim.t_queries)
        .with_reps(sim.reps)
        .with_seed(sim.seed)
        .with_grid(sim.h, sim.s_max);
    let mut checks = CheckOptions::default();
    if let Some(eps) = raw.check.epsilon {
        checks.epsilon = eps;
    }
    checks.delay = raw.check.delay;
    config.checks = checks;
    config.validate().map_err(|e| {
        CliError::new(ErrorKind::Scenario, format!("simulation: {e}")).at(at(sim_span))
    })?;

    let mut output = OutputSpec {
        dir: raw.output.dir,
        ..OutputSpec::default()
    };
    if let Some(formats) = raw.output.formats {
        output.csv = false;
        output.json = false;
        for f in formats {
            match f.as_str() {
                "csv" => output.csv = true,
                "json" => output.json = true,
                other => {
                    return Err(CliError::new(
                        ErrorKind::Scenario,
                        format!("unknown output format `{other}`"),
                    ));
                }
            }
        }
    }
    Ok(ScenarioFile {
        name: name.to_string(),
        config,
        output,
        source: text.to_string(),
    })
}

fn build_atoms(atoms: &[AtomSpec]) -> Result<Vec<Atom>, String> {
    atoms
        .iter()
        .map(|a| {
            let jump = match &a.jump {
                JumpSpec::Finite(d) => HazardJump::Finite(*d),
                JumpSpec::Named(s) if s == "inf" => HazardJump::Full,
                JumpSpec::Named(s) => {
                    return Err(format!(
                        "atom jump must be a number or \"inf\", got \"{s}\""
                    ))
                }
            };
            Ok(Atom::new(a.at, jump))
        })
        .collect()
}

/// Error message with the byte offset it refers to.
type Located = (String, usize);

fn build_intensity(spec: &IntensitySpec) -> Result<GeneralizedIntensity, Located> {
    let family = spec.family.get_ref().as_str();
    let family_at = spec.family.span().start;
    let fields: [(&str, Option<usize>); 8] = [
        ("rate", spec.rate.as_ref().map(|v| v.span().start)),
        ("a", spec.a.as_ref().map(|v| v.span().start)),
        ("b", spec.b.as_ref().map(|v| v.span().start)),
        ("shape", spec.shape.as_ref().map(|v| v.span().start)),
        ("scale", spec.scale.as_ref().map(|v| v.span().start)),
        ("c", spec.c.as_ref().map(|v| v.span().start)),
        ("segments", spec.segments.as_ref().map(|v| v.span().start)),
        ("atoms", spec.atoms.as_ref().map(|v| v.span().start)),
    ];
    let allowed: &[&str] = match family {
        "exp" => &["rate", "atoms"],
        "uniform" => &["a", "b", "atoms"],
        "weibull" => &["shape", "scale", "atoms"],
        "deterministic" => &["c"],
        "piecewise" => &["segments", "atoms"],
        other => {
            return Err((
                format!("unknown family `{other}`, expected exp, uniform, weibull, deterministic or piecewise"),
                family_at,
            ))
        }
    };
    for (name, at) in fields {
        if let Some(at) = at {
            if !allowed.contains(&name) {
                return Err((
                    format!("field `{name}` does not apply to family `{family}`"),
                    at,
                ));
            }
        }
    }
    let need = |v: &Option<Spanned<f64>>, name: &str| {
        v.as_ref()
            .map(|x| *x.get_ref())
            .ok_or_else(|| (format!("family `{family}` needs `{name}`"), family_at))
    };
    let value_at = fields.iter().find_map(|(_, at)| *at).unwrap_or(family_at);
    let core =
        |r: lorden_core::Result<GeneralizedIntensity>| r.map_err(|e| (e.to_string(), value_at));
    let base = match family {
        "exp" => core(families::exponential(need(&spec.rate, "rate")?))?,
        "uniform" => core(families::uniform(need(&spec.a, "a")?, need(&spec.b, "b")?))?,
        "weibull" => core(families::weibull(
            need(&spec.shape, "shape")?,
            need(&spec.scale, "scale")?,
        ))?,
        "deterministic" => core(families::deterministic(need(&spec.c, "c")?))?,
        _ => {
            let segments = spec
                .segments
                .as_ref()
                .ok_or_else(|| ("family `piecewise` needs `segments`".to_string(), family_at))?;
            let at = segments.span().start;
            let mut segs = Vec::with_capacity(segments.get_ref().len());
            for (i, s) in segments.get_ref().iter().enumerate() {
                if s.coeffs.is_empty() || s.coeffs.len() > 4 {
                    return Err((
                        format!(
                            "segment {i} needs 1 to 4 coefficients, got {}",
                            s.coeffs.len()
                        ),
                        at,
                    ));
                }
                let mut c = [0.0; 4];
                c[..s.coeffs.len()].copy_from_slice(&s.coeffs);
                let mut seg = Segment::new(s.start, c);
                for p in &s.poles {
                    seg = seg.with_pole(p.at, p.weight);
                }
                segs.push(seg);
            }
            GeneralizedIntensity::new(segs, Vec::new()).map_err(|e| (e.to_string(), at))?
        }
    };
    match &spec.atoms {
        Some(atoms) if !atoms.get_ref().is_empty() => {
            let at = atoms.span().start;
            let list = build_atoms(atoms.get_ref()).map_err(|m| (m, at))?;
            base.with_atoms(&list).map_err(|e| (e.to_string(), at))
        }
        _ => Ok(base),
    }
}

fn build_mu<F>(raw: RawMu, intensity: &F) -> CliResult<MuRule>
where
    F: Fn(&Spanned<IntensitySpec>, &str) -> CliResult<GeneralizedIntensity>,
{
    let bad = |m: String| CliError::new(ErrorKind::Scenario, format!("mu: {m}"));
    let list = |raw: &RawMu| -> CliResult<Vec<GeneralizedIntensity>> {
        let items = raw
            .intensities
            .as_ref()
            .ok_or_else(|| bad(format!("rule `{}` needs `intensities`", raw.rule.get_ref())))?;
        items
            .iter()
            .enumerate()
            .map(|(i, s)| intensity(s, &format!("mu.intensities[{i}]")))
            .collect()
    };
    let rule = match raw.rule.get_ref().as_str() {
        "none" => MuRule::none(),
        "constant" => {
            let spec = raw
                .intensity
                .as_ref()
                .ok_or_else(|| bad("rule `constant` needs `intensity`".into()))?;
            MuRule::Constant(intensity(spec, "mu.intensity")?)
        }
        "cycle" => MuRule::Cycle(list(&raw)?),
        "sequence" => MuRule::Sequence(list(&raw)?),
        "linear_capped" => {
            let need = |v: Option<f64>, k: &str| {
                v.ok_or_else(|| bad(format!("rule `linear_capped` needs `{k}`")))
            };
            MuRule::LinearCapped {
                base: need(raw.base, "base")?,
                slope: need(raw.slope, "slope")?,
                cap: need(raw.cap, "cap")?,
            }
        }
        other => return Err(bad(format!("unknown rule `{other}`"))),
    };
    rule.validate().map_err(|e| bad(e.to_string()))?;
    Ok(rule)
}
