//! The problem specification file: TOML describing channels, energy
//! functionals, constraints and the task to run. See `docs/spec-format.md`.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use siet_core::gaussian::GaussianMulticast;
use siet_core::{b_max_multicast, make_bsc, make_z, Dmc, EnergyFunctional};
use toml::Spanned;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Pp,
    Multicast,
    Gaussian,
    Segment,
    Verify,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Pp => "pp",
            Task::Multicast => "multicast",
            Task::Gaussian => "gaussian",
            Task::Segment => "segment",
            Task::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Bsc { eps: f64 },
    Z { eps0: f64 },
    Matrix { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedEnergy {
    Hamming,
}

/// `"hamming"` for every channel, or one vector `b(y)` per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnergySpec {
    Named(NamedEnergy),
    PerChannel(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    /// Number of points, endpoints included.
    pub steps: usize,
}

impl GridRange {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

/// Exactly one of the three forms must be given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    /// One common constraint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// One constraint per receiver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
    /// A sweep of common constraints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridRange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Capacity,
    Loss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentOptions {
    pub k: usize,
    pub objective: Objective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianOptions {
    pub sigmas: Vec<f64>,
    pub peak: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    /// Random pairs for the domain convexity probe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Simplex grid step of the single-letter oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    /// Simplex grid step of the two-letter oracle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<Spanned<EnergySpec>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub channels: Vec<Spanned<ChannelSpec>>,
    pub constraints: Spanned<ConstraintSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<Spanned<SegmentOptions>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<Spanned<GaussianOptions>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<Spanned<VerifyOptions>>,
}

/// A diagnostic with the 1-based line it refers to, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for SpecError {}

/// The validated problem a spec describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    PointToPoint {
        channel: Dmc,
        energy: EnergyFunctional,
        grid: Vec<f64>,
    },
    /// One solve per constraint vector.
    Multicast {
        channels: Vec<Dmc>,
        energies: Vec<EnergyFunctional>,
        points: Vec<Vec<f64>>,
    },
    Gaussian {
        instances: Vec<GaussianMulticast>,
        grid_size: usize,
    },
    Segment {
        channels: Vec<Dmc>,
        energies: Vec<EnergyFunctional>,
        points: Vec<Vec<f64>>,
        k: usize,
        objective: Objective,
    },
    Verify {
        channels: Vec<Dmc>,
        energies: Vec<EnergyFunctional>,
        grid: Vec<f64>,
        options: VerifyOptions,
    },
}

struct Located<'t> {
    text: &'t str,
}

impl Located<'_> {
    fn line(&self, span: Range<usize>) -> Option<usize> {
        let start = span.start.min(self.text.len());
        Some(self.text[..start].matches('\n').count() + 1)
    }

    fn error<T>(
        &self,
        span: Option<Range<usize>>,
        message: impl Into<String>,
    ) -> Result<T, SpecError> {
        Err(SpecError {
            message: message.into(),
            line: span.and_then(|s| self.line(s)),
        })
    }
}

/// Parses and validates a spec. Declared constraints beyond the feasible
/// range are not errors here; see [`warnings`].
pub fn parse_spec(text: &str) -> Result<SpecFile, SpecError> {
    let spec: SpecFile = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        SpecError {
            message: e.message().trim().to_string(),
            line,
        }
    })?;
    build(&spec, text)?;
    Ok(spec)
}

/// Renders a spec as TOML that [`parse_spec`] reads back unchanged.
pub fn emit_spec(spec: &SpecFile) -> String {
    toml::to_string(spec).expect("spec types always serialize")
}

impl SpecFile {
    /// The validated problem. Line numbers in errors refer to `text` when it
    /// is the source this spec was parsed from.
    pub fn problem(&self, text: &str) -> Result<Problem, SpecError> {
        build(self, text)
    }
}

fn build_channels(spec: &SpecFile, at: &Located) -> Result<Vec<Dmc>, SpecError> {
    spec.channels
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let made = match c.get_ref() {
                ChannelSpec::Bsc { eps } => make_bsc(*eps),
                ChannelSpec::Z { eps0 } => make_z(*eps0),
                ChannelSpec::Matrix { rows } => Dmc::new(rows.clone()),
            };
            made.or_else(|e| at.error(Some(c.span()), format!("channel {}: {e}", i + 1)))
        })
        .collect()
}

fn build_energies(
    spec: &SpecFile,
    channels: &[Dmc],
    at: &Located,
) -> Result<Vec<EnergyFunctional>, SpecError> {
    let Some(energy) = &spec.energy else {
        return at.error(None, "missing `energy`");
    };
    let span = Some(energy.span());
    match energy.get_ref() {
        EnergySpec::Named(NamedEnergy::Hamming) => {
            if let Some(i) = channels.iter().position(|c| c.output_size() != 2) {
                return at.error(
                    span,
                    format!(
                        "hamming energy needs binary outputs, channel {} has {}",
                        i + 1,
                        channels[i].output_size()
                    ),
                );
            }
            Ok(vec![EnergyFunctional::hamming(); channels.len()])
        }
        EnergySpec::PerChannel(vectors) => {
            if vectors.len() != channels.len() {
                return at.error(
                    span,
                    format!(
                        "{} energy vectors for {} channels",
                        vectors.len(),
                        channels.len()
                    ),
                );
            }
            vectors
                .iter()
                .zip(channels)
                .enumerate()
                .map(|(i, (v, ch))| {
                    if v.len() != ch.output_size() {
                        return at.error(
                            span.clone(),
                            format!(
                                "energy vector {} has {} entries, channel has {} outputs",
                                i + 1,
                                v.len(),
                                ch.output_size()
                            ),
                        );
                    }
                    EnergyFunctional::new(v.clone()).or_else(|e| {
                        at.error(span.clone(), format!("energy vector {}: {e}", i + 1))
                    })
                })
                .collect()
        }
    }
}

/// Common constraint values of a scalar or grid constraint.
fn common_values(spec: &SpecFile, at: &Located) -> Result<Vec<f64>, SpecError> {
    let c = spec.constraints.get_ref();
    let span = Some(spec.constraints.span());
    let values = match (c.b, &c.vector, &c.grid) {
        (Some(b), None, None) => vec![b],
        (None, None, Some(g)) => {
            if g.steps == 0 {
                return at.error(span, "constraint grid needs at least one step");
            }
            if g.steps > 1 && !(g.stop > g.start) {
                return at.error(span, "constraint grid needs stop > start");
            }
            g.points()
        }
        (None, Some(_), None) => {
            return at.error(
                span,
                format!(
                    "task `{}` takes `b` or `grid`, not `vector`",
                    spec.task.name()
                ),
            )
        }
        _ => {
            return at.error(
                span,
                "give exactly one of `b`, `vector` or `grid` in [constraints]",
            )
        }
    };
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return at.error(
            span,
            format!("constraint {v} must be finite and nonnegative"),
        );
    }
    Ok(values)
}

/// Constraint vectors for `receivers` receivers.
fn constraint_points(
    spec: &SpecFile,
    receivers: usize,
    at: &Located,
) -> Result<Vec<Vec<f64>>, SpecError> {
    let c = spec.constraints.get_ref();
    if let (None, Some(v), None) = (c.b, &c.vector, &c.grid) {
        let span = Some(spec.constraints.span());
        if v.len() != receivers {
            return at.error(
                span,
                format!("{} constraints for {receivers} receivers", v.len()),
            );
        }
        if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return at.error(
                span,
                format!("constraint {x} must be finite and nonnegative"),
            );
        }
        return Ok(vec![v.clone()]);
    }
    Ok(common_values(spec, at)?
        .into_iter()
        .map(|b| vec![b; receivers])
        .collect())
}

fn reject_sections(spec: &SpecFile, at: &Located) -> Result<(), SpecError> {
    let task = spec.task;
    if task != Task::Segment {
        if let Some(s) = &spec.segment {
            return at.error(
                Some(s.span()),
                format!("[segment] is not used by task `{}`", task.name()),
            );
        }
    }
    if task != Task::Gaussian {
        if let Some(s) = &spec.gaussian {
            return at.error(
                Some(s.span()),
                format!("[gaussian] is not used by task `{}`", task.name()),
            );
        }
    }
    if task != Task::Verify {
        if let Some(s) = &spec.verify {
            return at.error(
                Some(s.span()),
                format!("[verify] is not used by task `{}`", task.name()),
            );
        }
    }
    Ok(())
}

fn build(spec: &SpecFile, text: &str) -> Result<Problem, SpecError> {
    let at = Located { text };
    reject_sections(spec, &at)?;
    if spec.task == Task::Gaussian {
        return build_gaussian(spec, &at);
    }
    if spec.channels.is_empty() {
        return at.error(
            None,
            format!("task `{}` needs at least one channel", spec.task.name()),
        );
    }
    let channels = build_channels(spec, &at)?;
    if let Some(i) = channels
        .iter()
        .position(|c| c.input_size() != channels[0].input_size())
    {
        return at.error(
            Some(spec.channels[i].span()),
            format!(
                "channel {} has {} inputs, channel 1 has {}",
                i + 1,
                channels[i].input_size(),
                channels[0].input_size()
            ),
        );
    }
    let energies = build_energies(spec, &channels, &at)?;
    match spec.task {
        Task::Pp => {
            if channels.len() != 1 {
                return at.error(
                    None,
                    format!("task `pp` takes one channel, found {}", channels.len()),
                );
            }
            let grid = common_values(spec, &at)?;
            increasing(&grid, spec, &at)?;
            Ok(Problem::PointToPoint {
                channel: channels[0].clone(),
                energy: energies[0].clone(),
                grid,
            })
        }
        Task::Multicast => {
            let points = constraint_points(spec, channels.len(), &at)?;
            Ok(Problem::Multicast {
                channels,
                energies,
                points,
            })
        }
        Task::Segment => {
            let Some(options) = &spec.segment else {
                return at.error(None, "task `segment` needs a [segment] section");
            };
            let opts = options.get_ref();
            if opts.k == 0 || opts.k > channels.len() {
                return at.error(
                    Some(options.span()),
                    format!("k = {} must lie in 1..={}", opts.k, channels.len()),
                );
            }
            if channels.len() > siet_core::segmentation::MAX_RECEIVERS {
                return at.error(
                    None,
                    format!(
                        "segmentation handles at most {} channels",
                        siet_core::segmentation::MAX_RECEIVERS
                    ),
                );
            }
            let points = constraint_points(spec, channels.len(), &at)?;
            Ok(Problem::Segment {
                channels,
                energies,
                points,
                k: opts.k,
                objective: opts.objective,
            })
        }
        Task::Verify => {
            let grid = common_values(spec, &at)?;
            increasing(&grid, spec, &at)?;
            if channels[0].input_size() > 4 {
                return at.error(None, "verification grids support at most 4 input symbols");
            }
            let options = spec
                .verify
                .as_ref()
                .map(|v| v.get_ref().clone())
                .unwrap_or_default();
            if let Some(v) = &spec.verify {
                for step in [options.grid_step, options.product_step]
                    .into_iter()
                    .flatten()
                {
                    if !(step > 0.0 && step <= 0.25) {
                        return at.error(
                            Some(v.span()),
                            format!("grid step {step} must lie in (0, 0.25]"),
                        );
                    }
                }
            }
            Ok(Problem::Verify {
                channels,
                energies,
                grid,
                options,
            })
        }
        Task::Gaussian => unreachable!("handled above"),
    }
}

fn increasing(grid: &[f64], spec: &SpecFile, at: &Located) -> Result<(), SpecError> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return at.error(
            Some(spec.constraints.span()),
            "constraint grid must be strictly increasing",
        );
    }
    Ok(())
}

fn build_gaussian(spec: &SpecFile, at: &Located) -> Result<Problem, SpecError> {
    if let Some(c) = spec.channels.first() {
        return at.error(
            Some(c.span()),
            "task `gaussian` takes [gaussian], not channels",
        );
    }
    if let Some(e) = &spec.energy {
        return at.error(
            Some(e.span()),
            "task `gaussian` fixes the energy to b(y) = y²",
        );
    }
    let Some(options) = &spec.gaussian else {
        return at.error(None, "task `gaussian` needs a [gaussian] section");
    };
    let g = options.get_ref();
    let grid_size = g
        .grid_size
        .unwrap_or(siet_core::gaussian::DEFAULT_GRID_SIZE);
    if grid_size < 3 {
        return at.error(
            Some(options.span()),
            format!("grid_size {grid_size} is below 3"),
        );
    }
    let instances = common_values(spec, at)?
        .into_iter()
        .map(|b| {
            GaussianMulticast::new(g.sigmas.clone(), g.peak, b)
                .or_else(|e| at.error(Some(options.span()), e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Problem::Gaussian {
        instances,
        grid_size,
    })
}

/// Human-readable notes about declared constraints no input can meet. The
/// solvers report these points as infeasible.
pub fn warnings(problem: &Problem) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |channels: &[Dmc], energies: &[EnergyFunctional], points: &[Vec<f64>]| {
        for (l, (ch, e)) in channels.iter().zip(energies).enumerate() {
            let Ok(cap) = b_max_multicast(std::slice::from_ref(ch), std::slice::from_ref(e)) else {
                continue;
            };
            if let Some(p) = points.iter().find(|p| p[l] > cap + 1e-12) {
                out.push(format!(
                    "receiver {} cannot harvest {} (at most {cap})",
                    l + 1,
                    p[l]
                ));
            }
        }
        if let Ok(common) = b_max_multicast(channels, energies) {
            if let Some(p) = points
                .iter()
                .find(|p| p.iter().all(|v| *v == p[0]) && p[0] > common + 1e-12)
            {
                out.push(format!(
                    "common constraint {} exceeds B_max = {common}",
                    p[0]
                ));
            }
        }
    };
    match problem {
        Problem::PointToPoint {
            channel,
            energy,
            grid,
        } => {
            let points: Vec<Vec<f64>> = grid.iter().map(|b| vec![*b]).collect();
            check(
                std::slice::from_ref(channel),
                std::slice::from_ref(energy),
                &points,
            );
        }
        Problem::Multicast {
            channels,
            energies,
            points,
        }
        | Problem::Segment {
            channels,
            energies,
            points,
            ..
        } => check(channels, energies, points),
        Problem::Verify {
            channels,
            energies,
            grid,
            ..
        } => {
            let points: Vec<Vec<f64>> = grid.iter().map(|b| vec![*b; channels.len()]).collect();
            check(channels, energies, &points);
        }
        Problem::Gaussian { instances, .. } => {
            if let Some(g) = instances
                .iter()
                .find(|g| g.constraint() > g.b_max() + 1e-12)
            {
                out.push(format!(
                    "constraint {} exceeds P² + σ_min² = {}",
                    g.constraint(),
                    g.b_max()
                ));
            }
        }
    }
    out
}
