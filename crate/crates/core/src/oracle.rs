//! Brute-force checks for the solvers: exhaustive simplex grids, the
//! two-letter product channel, and probes for concavity of capacity curves
//! and convexity of the achievable energy domain.
//!
//! Mutual information here is computed as `H(Y) − Σ q_x H(Y | X = x)`, a
//! different route from the solvers' divergence form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{Dmc, EnergyFunctional, MulticastProblem};
use crate::error::{Error, Result};
use crate::multicast::domain_feasible;
use crate::pp::CapacityCurve;

/// Grid points may fall short of a constraint by this much.
const CONSTRAINT_TOL: f64 = 1e-12;
/// Smallest probability assumed when bounding the entropy gradient.
const MIN_RETAINED_PROBABILITY: f64 = 1e-9;

/// The grid `{q : q_x ∈ step·ℕ, Σ q_x = 1}` on a simplex of `dimension`
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    step: f64,
    dimension: usize,
}

impl GridSpec {
    /// `step` in `(0, 0.25]`, dimension in `1..=4`.
    pub fn new(step: f64, dimension: usize) -> Result<Self> {
        if !(step > 0.0 && step <= 0.25) {
            return Err(Error::InvalidArgument(format!(
                "grid step {step} must lie in (0, 0.25]"
            )));
        }
        if dimension == 0 || dimension > 4 {
            return Err(Error::InvalidArgument(format!(
                "grid dimension {dimension} must lie in 1..=4"
            )));
        }
        Ok(Self { step, dimension })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn divisions(&self) -> usize {
        (1.0 / self.step).round() as usize
    }

    /// Bound on how far the best grid point can fall below the optimum, from
    /// a gradient cap of `log₂(1/1e-9)` bits per unit of probability mass.
    pub fn lipschitz_slack(&self) -> f64 {
        -MIN_RETAINED_PROBABILITY.log2() * self.step * (self.dimension - 1) as f64
    }
}

/// Best grid point found by an exhaustive scan.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub optimizer: Vec<f64>,
    /// See [`GridSpec::lipschitz_slack`].
    pub slack: f64,
}

fn entropy(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter()
        .filter(|v| *v > 0.0)
        .map(|v| -v * v.log2())
        .sum()
}

/// `I(q; P)` in bits via `H(Y) − H(Y|X)`.
pub fn entropy_mi(q: &[f64], ch: &Dmc) -> f64 {
    let mut out = vec![0.0; ch.output_size()];
    let mut conditional = 0.0;
    for (x, &qx) in q.iter().enumerate() {
        if qx > 0.0 {
            let row = ch.row(x);
            for (o, p) in out.iter_mut().zip(row) {
                *o += qx * p;
            }
            conditional += qx * entropy(row.iter().copied());
        }
    }
    (entropy(out) - conditional).max(0.0)
}

/// Visits every composition of `remaining` into `slots` parts appended to
/// `prefix`.
fn compositions(
    prefix: &mut Vec<usize>,
    remaining: usize,
    slots: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if slots == 1 {
        prefix.push(remaining);
        visit(prefix);
        prefix.pop();
        return;
    }
    for k in 0..=remaining {
        prefix.push(k);
        compositions(prefix, remaining - k, slots - 1, visit);
        prefix.pop();
    }
}

fn grid_scan(
    channels: &[Dmc],
    rows: &[Vec<f64>],
    bounds: &[f64],
    grid: &GridSpec,
) -> Result<OracleValue> {
    let n = grid.divisions();
    let d = grid.dimension;
    let best = (0..=n)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(f64, Vec<f64>)> = None;
            let mut q = vec![0.0; d];
            let mut visit = |counts: &[usize]| {
                for (qx, c) in q.iter_mut().zip(counts) {
                    *qx = *c as f64 / n as f64;
                }
                let feasible = rows.iter().zip(bounds).all(|(a, b)| {
                    a.iter().zip(&q).map(|(a, q)| a * q).sum::<f64>() >= b - CONSTRAINT_TOL
                });
                if !feasible {
                    return;
                }
                let v = channels
                    .iter()
                    .map(|ch| entropy_mi(&q, ch))
                    .fold(f64::INFINITY, f64::min);
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, q.clone()));
                }
            };
            if d == 1 {
                if first == n {
                    visit(&[n]);
                }
            } else {
                compositions(&mut vec![first], n - first, d - 1, &mut visit);
            }
            best
        })
        // Ties keep the point with the smaller first coordinate.
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(if b.0 > a.0 { b } else { a }),
                (a, None) => a,
                (None, b) => b,
            },
        );
    best.map(|(value, optimizer)| OracleValue {
        value,
        optimizer,
        slack: grid.lipschitz_slack(),
    })
    .ok_or(Error::NoFeasibleGridPoint)
}

/// `max min_ℓ I(q; P(ℓ))` over the grid points meeting every constraint.
pub fn grid_capacity_energy(prob: &MulticastProblem, grid: &GridSpec) -> Result<OracleValue> {
    if grid.dimension != prob.input_size() {
        return Err(Error::DimensionMismatch {
            what: "grid dimension",
            expected: prob.input_size(),
            found: grid.dimension,
        });
    }
    grid_scan(
        prob.channels(),
        &prob.energy_rows(),
        prob.constraints(),
        grid,
    )
}

/// Two-letter capacity `max min_ℓ I(X₁X₂; Y₁Y₂)` over joint distributions on
/// a grid of the 4-point simplex, for binary-input channels with energy
/// `b(y₁) + b(y₂) ≥ 2B`.
pub fn product_capacity_n2(
    channels: &[Dmc],
    energies: &[EnergyFunctional],
    b: f64,
    step: f64,
) -> Result<OracleValue> {
    if channels.iter().any(|ch| ch.input_size() != 2) {
        return Err(Error::InvalidArgument(
            "the two-letter oracle needs binary inputs".into(),
        ));
    }
    let squared: Vec<Dmc> = channels.iter().map(|ch| ch.product(ch)).collect();
    let doubled: Vec<EnergyFunctional> = energies.iter().map(|e| e.product(e)).collect();
    let prob = MulticastProblem::common(squared, doubled, 2.0 * b)?;
    grid_capacity_energy(&prob, &GridSpec::new(step, 4)?)
}

/// Largest amount by which an interior point of `(B, C)` falls below the
/// chord through its neighbours; zero for a concave sequence or fewer than
/// three points.
pub fn concavity_violation(points: &[(f64, f64)]) -> f64 {
    points
        .windows(3)
        .map(|w| {
            let ((b0, c0), (b1, c1), (b2, c2)) = (w[0], w[1], w[2]);
            let chord = c0 + (c2 - c0) * (b1 - b0) / (b2 - b0);
            chord - c1
        })
        .fold(0.0, f64::max)
}

pub fn concavity_probe(curve: &CapacityCurve) -> f64 {
    concavity_violation(&curve.pairs())
}

/// Draws `trials` pairs of achievable constraint vectors and checks that
/// mixtures of each pair remain achievable.
///
/// A vector is drawn as `B_ℓ = u_ℓ · q·P(ℓ)·b_ℓ` for a random input `q`
/// (a vertex with probability 1/4) and `u_ℓ` uniform on `[0, 1]`.
pub fn domain_convexity_probe(prob: &MulticastProblem, trials: usize, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = prob.energy_rows();
    let n = prob.input_size();
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let q: Vec<f64> = if rng.random_bool(0.25) {
            let x = rng.random_range(0..n);
            (0..n).map(|i| if i == x { 1.0 } else { 0.0 }).collect()
        } else {
            let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|v| v / s).collect()
        };
        rows.iter()
            .map(|a| {
                let u = if rng.random_bool(0.5) {
                    1.0
                } else {
                    rng.random::<f64>()
                };
                u * a.iter().zip(&q).map(|(a, q)| a * q).sum::<f64>()
            })
            .collect()
    };
    (0..trials).all(|_| {
        let (b1, b2) = (draw(&mut rng), draw(&mut rng));
        let mut weights = vec![0.0, 0.5, 1.0];
        weights.push(rng.random::<f64>());
        weights.iter().all(|&t| {
            let mix: Vec<f64> = b1
                .iter()
                .zip(&b2)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect();
            MulticastProblem::new(prob.channels().to_vec(), prob.energies().to_vec(), mix)
                .map(|p| domain_feasible(&p).is_feasible())
                .unwrap_or(false)
        })
    })
}
