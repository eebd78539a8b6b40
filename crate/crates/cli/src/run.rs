//! Executes a parsed spec and writes its output files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use siet_core::gaussian::{gaussian_capacity_energy, GaussianMulticast, GaussianSolution, KKT_TOL};
use siet_core::multicast::ACTIVE_SET_TOL;
use siet_core::oracle::{
    concavity_violation, domain_convexity_probe, grid_capacity_energy, product_capacity_n2,
    GridSpec,
};
use siet_core::segmentation::{ScoredPartition, Segmenter};
use siet_core::{
    multicast_capacity, upper_bound_min_individual, Dmc, EnergyFunctional, Error, MulticastProblem,
    MulticastSolution, FEASIBILITY_TOL, GAP_TOLERANCE,
};

use crate::output::{num, write_table};
use crate::spec::{Objective, Problem, SpecFile, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INPUT_ERROR: i32 = 3;

/// Tolerance of the two-letter check in `verify`.
const LETTERIZATION_TOL: f64 = 5e-3;
/// Tolerance of the upper-bound, monotonicity and concavity checks.
const PROPERTY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub verbose: bool,
    /// Adds the wall time to the metadata file, which then differs between
    /// runs.
    pub record_time: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Default, Serialize)]
struct Summary {
    points: usize,
    infeasible_points: usize,
    nonconverged_points: usize,
    iterations_total: usize,
    iterations_max: usize,
    max_gap_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    failed_checks: Option<usize>,
}

impl Summary {
    fn record(&mut self, converged: bool, gap: f64, iterations: usize) {
        self.points += 1;
        if !converged {
            self.nonconverged_points += 1;
        }
        self.iterations_total += iterations;
        self.iterations_max = self.iterations_max.max(iterations);
        self.max_gap_estimate = self.max_gap_estimate.max(gap);
    }

    fn infeasible(&mut self) {
        self.points += 1;
        self.infeasible_points += 1;
    }

    fn exit_code(&self) -> i32 {
        if self.infeasible_points > 0 {
            EXIT_INFEASIBLE
        } else if self.nonconverged_points > 0 || self.failed_checks.unwrap_or(0) > 0 {
            EXIT_NOT_CONVERGED
        } else {
            EXIT_OK
        }
    }
}

#[derive(Serialize)]
struct Tolerances {
    feasibility: f64,
    gap: f64,
    active_set: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    kkt: Option<f64>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    task: &'a str,
    spec_sha256: String,
    tolerances: Tolerances,
    #[serde(flatten)]
    summary: &'a Summary,
    files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_seconds: Option<f64>,
}

pub fn spec_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

struct Writer<'o> {
    opts: &'o RunOptions,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn table(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let path = self.opts.out_dir.join(name);
        write_table(&path, header, rows)?;
        self.files.push(path);
        Ok(())
    }

    fn note(&self, message: impl AsRef<str>) {
        if self.opts.verbose {
            eprintln!("{}", message.as_ref());
        }
    }
}

/// Runs the spec's task, or its verification probes when `verify` is set.
pub fn run_task(
    spec: &SpecFile,
    text: &str,
    opts: &RunOptions,
    verify: bool,
) -> Result<RunOutcome> {
    let started = Instant::now();
    let problem = spec.problem(text)?;
    for w in crate::spec::warnings(&problem) {
        eprintln!("warning: {w}");
    }
    fs::create_dir_all(&opts.out_dir)
        .with_context(|| format!("creating {}", opts.out_dir.display()))?;
    let mut out = Writer {
        opts,
        files: Vec::new(),
    };
    let (task, summary) = if verify {
        ("verify", run_verify(&into_verify(problem), &mut out)?)
    } else {
        let summary = match &problem {
            Problem::PointToPoint {
                channel,
                energy,
                grid,
            } => {
                let points: Vec<Vec<f64>> = grid.iter().map(|b| vec![*b]).collect();
                run_curve(
                    std::slice::from_ref(channel),
                    std::slice::from_ref(energy),
                    &points,
                    &mut out,
                )?
            }
            Problem::Multicast {
                channels,
                energies,
                points,
            } => run_curve(channels, energies, points, &mut out)?,
            Problem::Gaussian {
                instances,
                grid_size,
            } => run_gaussian(instances, *grid_size, &mut out)?,
            Problem::Segment {
                channels,
                energies,
                points,
                k,
                objective,
            } => run_segment(channels, energies, points, *k, *objective, &mut out)?,
            Problem::Verify { .. } => run_verify(&problem, &mut out)?,
        };
        (spec.task.name(), summary)
    };

    let is_gaussian = matches!(spec.task, crate::spec::Task::Gaussian);
    let meta_path = opts.out_dir.join("run.json");
    let metadata = Metadata {
        tool: "siet",
        version: env!("CARGO_PKG_VERSION"),
        task,
        spec_sha256: spec_hash(text),
        tolerances: Tolerances {
            feasibility: FEASIBILITY_TOL,
            gap: GAP_TOLERANCE,
            active_set: ACTIVE_SET_TOL,
            kkt: is_gaussian.then_some(KKT_TOL),
        },
        summary: &summary,
        files: out
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        wall_time_seconds: opts.record_time.then(|| started.elapsed().as_secs_f64()),
    };
    let mut json = serde_json::to_string_pretty(&metadata)?;
    json.push('\n');
    fs::write(&meta_path, json).with_context(|| format!("writing {}", meta_path.display()))?;
    out.files.push(meta_path);
    eprintln!(
        "{task}: {} points, {} infeasible, {} not converged, {:.3} s",
        summary.points,
        summary.infeasible_points,
        summary.nonconverged_points,
        started.elapsed().as_secs_f64()
    );
    Ok(RunOutcome {
        exit_code: summary.exit_code(),
        files: out.files,
    })
}

fn into_verify(problem: Problem) -> Problem {
    match problem {
        Problem::PointToPoint {
            channel,
            energy,
            grid,
        } => Problem::Verify {
            channels: vec![channel],
            energies: vec![energy],
            grid,
            options: VerifyOptions::default(),
        },
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
        } => {
            let mut grid: Vec<f64> = points.iter().map(|p| p[0]).collect();
            grid.dedup();
            Problem::Verify {
                channels,
                energies,
                grid,
                options: VerifyOptions::default(),
            }
        }
        other => other,
    }
}

fn constraint_header(points: &[Vec<f64>]) -> (bool, Vec<String>) {
    let unequal = points.iter().any(|p| p.iter().any(|v| *v != p[0]));
    let header = if unequal {
        (1..=points[0].len()).map(|l| format!("B_{l}")).collect()
    } else {
        vec!["B".to_string()]
    };
    (unequal, header)
}

fn constraint_cells(point: &[f64], unequal: bool) -> Vec<String> {
    if unequal {
        point.iter().map(|v| num(*v)).collect()
    } else {
        vec![num(point[0])]
    }
}

fn run_curve(
    channels: &[Dmc],
    energies: &[EnergyFunctional],
    points: &[Vec<f64>],
    out: &mut Writer,
) -> Result<Summary> {
    let solutions: Vec<siet_core::Result<MulticastSolution>> = points
        .par_iter()
        .map(|p| {
            multicast_capacity(&MulticastProblem::new(
                channels.to_vec(),
                energies.to_vec(),
                p.clone(),
            )?)
        })
        .collect();
    let (unequal, mut header) = constraint_header(points);
    let mut plot_header = header.clone();
    header.push("C".into());
    header.extend((0..channels[0].input_size()).map(|x| format!("q_{x}")));
    plot_header.push("C".into());
    let mi: Vec<String> = (1..=channels.len()).map(|l| format!("I_{l}")).collect();
    header.extend(mi.iter().cloned());
    plot_header.extend(mi);
    header.push("active".into());
    header.push("converged".into());

    let mut summary = Summary::default();
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for (p, sol) in points.iter().zip(solutions) {
        let sol = match sol {
            Ok(s) => s,
            Err(e @ Error::Infeasible { .. }) => {
                eprintln!("B = {p:?}: {e}");
                summary.infeasible();
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        summary.record(sol.converged, sol.gap_estimate, sol.iterations);
        out.note(format!(
            "B = {p:?}: C = {} (gap {:.1e})",
            sol.value, sol.gap_estimate
        ));
        let mut row = constraint_cells(p, unequal);
        let mut prow = row.clone();
        row.push(num(sol.value));
        prow.push(num(sol.value));
        row.extend(sol.optimizer.probs().iter().map(|q| num(*q)));
        row.extend(sol.per_channel_mi.iter().map(|v| num(*v)));
        prow.extend(sol.per_channel_mi.iter().map(|v| num(*v)));
        row.push(
            sol.active_set
                .iter()
                .map(|l| (l + 1).to_string())
                .collect::<Vec<_>>()
                .join(";"),
        );
        row.push(sol.converged.to_string());
        rows.push(row);
        plot.push(prow);
    }
    out.table("curve.csv", &header, &rows)?;
    out.table("plot.csv", &plot_header, &plot)?;
    Ok(summary)
}

fn run_gaussian(
    instances: &[GaussianMulticast],
    grid_size: usize,
    out: &mut Writer,
) -> Result<Summary> {
    let solutions: Vec<siet_core::Result<GaussianSolution>> = instances
        .iter()
        .map(|g| {
            out.note(format!("B = {}: solving", g.constraint()));
            gaussian_capacity_energy(g, grid_size)
        })
        .collect();
    let header: Vec<String> = [
        "B",
        "C",
        "lambda",
        "kkt_max_violation",
        "kkt_passed",
        "J",
        "asymmetry",
        "converged",
    ]
    .map(String::from)
    .into();
    let mut summary = Summary::default();
    let mut rows = Vec::new();
    let mut plot = Vec::new();
    let mut inputs = Vec::new();
    for (g, sol) in instances.iter().zip(solutions) {
        let b = num(g.constraint());
        let sol = match sol {
            Ok(s) => s,
            Err(e @ Error::Infeasible { .. }) => {
                eprintln!("B = {}: {e}", g.constraint());
                summary.infeasible();
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        summary.record(
            sol.converged && sol.kkt.passed,
            sol.gap_estimate,
            sol.iterations,
        );
        rows.push(vec![
            b.clone(),
            num(sol.value),
            num(sol.kkt.lambda),
            num(sol.kkt.max_violation),
            sol.kkt.passed.to_string(),
            num(sol.kkt.j_value),
            num(sol.input.asymmetry()),
            sol.converged.to_string(),
        ]);
        plot.push(vec![b.clone(), num(sol.value)]);
        for (x, m) in sol.input.support().iter().zip(sol.input.masses()) {
            inputs.push(vec![b.clone(), num(*x), num(*m)]);
        }
    }
    out.table("gaussian.csv", &header, &rows)?;
    out.table(
        "input.csv",
        &["B".into(), "x".into(), "mass".into()],
        &inputs,
    )?;
    out.table("plot.csv", &["B".into(), "C".into()], &plot)?;
    Ok(summary)
}

fn joined(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";")
}

fn run_segment(
    channels: &[Dmc],
    energies: &[EnergyFunctional],
    points: &[Vec<f64>],
    k: usize,
    objective: Objective,
    out: &mut Writer,
) -> Result<Summary> {
    let (unequal, mut header) = constraint_header(points);
    header.extend(
        [
            "partition",
            "status",
            "c_q",
            "max_loss",
            "group_capacity",
            "group_loss",
            "winner",
        ]
        .map(String::from),
    );
    let mut summary = Summary::default();
    let mut rows = Vec::new();
    for p in points {
        let prob = MulticastProblem::new(channels.to_vec(), energies.to_vec(), p.clone())?;
        let segmenter = Segmenter::new(&prob)?;
        let table: Vec<ScoredPartition> = segmenter.scan(k)?;
        let best = match objective {
            Objective::Capacity => segmenter.optimize_capacity(k),
            Objective::Loss => segmenter.optimize_loss(k),
        };
        let winner = match best {
            Ok((seg, _)) => {
                summary.record(true, 0.0, 0);
                Some(seg)
            }
            Err(e @ Error::Infeasible { .. }) => {
                eprintln!("B = {p:?}: every partition is infeasible: {e}");
                summary.infeasible();
                None
            }
            Err(e) => return Err(e.into()),
        };
        for entry in table {
            let mut row = constraint_cells(p, unequal);
            row.push(entry.segmentation.to_string());
            match &entry.score {
                Ok(s) => {
                    row.push("feasible".into());
                    row.push(num(s.c_q));
                    row.push(num(s.max_loss));
                    row.push(joined(&s.per_group_capacity));
                    row.push(joined(&s.per_group_loss));
                }
                Err(_) => {
                    row.push("infeasible".into());
                    row.extend(std::iter::repeat_n(String::new(), 4));
                }
            }
            let won = winner.as_ref() == Some(&entry.segmentation);
            row.push(if won { "*".into() } else { String::new() });
            rows.push(row);
        }
    }
    out.table("segmentation.csv", &header, &rows)?;
    Ok(summary)
}

/// Default simplex step of the single-letter oracle for each input size.
fn default_grid_step(inputs: usize) -> f64 {
    match inputs {
        1 | 2 => 1e-4,
        3 => 2e-3,
        _ => 1e-2,
    }
}

struct Check {
    probe: &'static str,
    b: Option<f64>,
    value: Option<f64>,
    reference: Option<f64>,
    tolerance: f64,
    passed: bool,
}

fn run_verify(problem: &Problem, out: &mut Writer) -> Result<Summary> {
    let mut summary = Summary::default();
    let mut checks = Vec::new();
    match problem {
        Problem::Verify {
            channels,
            energies,
            grid,
            options,
        } => verify_dmc(
            channels,
            energies,
            grid,
            options,
            &mut checks,
            &mut summary,
            out,
        )?,
        Problem::Gaussian {
            instances,
            grid_size,
        } => {
            for g in instances {
                match gaussian_capacity_energy(g, *grid_size) {
                    Ok(sol) => {
                        summary.record(sol.converged, sol.gap_estimate, sol.iterations);
                        checks.push(Check {
                            probe: "kkt",
                            b: Some(g.constraint()),
                            value: Some(sol.kkt.max_violation),
                            reference: Some(0.0),
                            tolerance: KKT_TOL,
                            passed: sol.kkt.passed,
                        });
                    }
                    Err(Error::Infeasible { .. }) => summary.infeasible(),
                    Err(e) => return Err(e.into()),
                }
            }
        }
        _ => unreachable!("verification runs on DMC or Gaussian problems"),
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    summary.failed_checks = Some(failed);
    let header: Vec<String> = ["probe", "B", "value", "reference", "tolerance", "passed"]
        .map(String::from)
        .into();
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                c.probe.to_string(),
                opt(c.b),
                opt(c.value),
                opt(c.reference),
                num(c.tolerance),
                c.passed.to_string(),
            ]
        })
        .collect();
    out.table("verify.csv", &header, &rows)?;
    // Verification reports infeasible points as checks, not failures.
    summary.infeasible_points = 0;
    Ok(summary)
}

fn verify_dmc(
    channels: &[Dmc],
    energies: &[EnergyFunctional],
    grid: &[f64],
    options: &VerifyOptions,
    checks: &mut Vec<Check>,
    summary: &mut Summary,
    out: &Writer,
) -> Result<()> {
    let inputs = channels[0].input_size();
    let step = options
        .grid_step
        .unwrap_or_else(|| default_grid_step(inputs));
    let grid_spec = GridSpec::new(step, inputs)?;
    let mut curve = Vec::new();
    for &b in grid {
        let prob = MulticastProblem::common(channels.to_vec(), energies.to_vec(), b)?;
        let solved = multicast_capacity(&prob);
        let oracle = grid_capacity_energy(&prob, &grid_spec);
        match (solved, oracle) {
            (Ok(sol), Ok(orc)) => {
                summary.record(sol.converged, sol.gap_estimate, sol.iterations);
                out.note(format!(
                    "B = {b}: solver {} oracle {}",
                    sol.value, orc.value
                ));
                checks.push(Check {
                    probe: "grid_oracle",
                    b: Some(b),
                    value: Some(sol.value),
                    reference: Some(orc.value),
                    tolerance: orc.slack,
                    passed: sol.value >= orc.value - GAP_TOLERANCE
                        && sol.value <= orc.value + orc.slack,
                });
                let bound = upper_bound_min_individual(&prob)?;
                checks.push(Check {
                    probe: "upper_bound",
                    b: Some(b),
                    value: Some(sol.value),
                    reference: Some(bound),
                    tolerance: PROPERTY_TOL,
                    passed: sol.value <= bound + PROPERTY_TOL,
                });
                curve.push((b, sol.value));
            }
            (Err(Error::Infeasible { .. }), Err(Error::NoFeasibleGridPoint)) => {
                summary.infeasible();
                checks.push(Check {
                    probe: "infeasible",
                    b: Some(b),
                    value: None,
                    reference: None,
                    tolerance: 0.0,
                    passed: true,
                });
            }
            (Err(e @ Error::Infeasible { .. }), Ok(_))
            | (Ok(_), Err(e @ Error::NoFeasibleGridPoint)) => {
                checks.push(Check {
                    probe: "infeasible",
                    b: Some(b),
                    value: None,
                    reference: None,
                    tolerance: 0.0,
                    passed: false,
                });
                eprintln!("B = {b}: solver and oracle disagree on feasibility: {e}");
            }
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        }
    }
    let rise = curve
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(0.0, f64::max);
    checks.push(Check {
        probe: "monotonicity",
        b: None,
        value: Some(rise),
        reference: Some(0.0),
        tolerance: PROPERTY_TOL,
        passed: rise <= PROPERTY_TOL,
    });
    let dent = concavity_violation(&curve);
    checks.push(Check {
        probe: "concavity",
        b: None,
        value: Some(dent),
        reference: Some(0.0),
        tolerance: PROPERTY_TOL,
        passed: dent <= PROPERTY_TOL,
    });
    let base = MulticastProblem::common(channels.to_vec(), energies.to_vec(), 0.0)?;
    let trials = options.trials.unwrap_or(1000);
    let convex = domain_convexity_probe(&base, trials, options.seed.unwrap_or(1));
    checks.push(Check {
        probe: "domain_convexity",
        b: None,
        value: Some(trials as f64),
        reference: None,
        tolerance: 0.0,
        passed: convex,
    });
    if inputs == 2 && !curve.is_empty() {
        let product_step = options.product_step.unwrap_or(2e-3);
        let mut picks = vec![curve[0], curve[curve.len() / 2], curve[curve.len() - 1]];
        picks.dedup_by(|a, b| a.0 == b.0);
        for (b, value) in picks {
            let two = product_capacity_n2(channels, energies, b, product_step)?;
            out.note(format!(
                "B = {b}: two-letter {} vs {value}",
                two.value / 2.0
            ));
            checks.push(Check {
                probe: "letterization",
                b: Some(b),
                value: Some(two.value / 2.0),
                reference: Some(value),
                tolerance: LETTERIZATION_TOL,
                passed: (two.value / 2.0 - value).abs() <= LETTERIZATION_TOL,
            });
        }
    }
    Ok(())
}

/// Resolves the output directory: the flag, then `SIET_OUT_DIR`, then `./out`.
pub fn output_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("SIET_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
