//! Amplitude-constrained Gaussian multicast with energy harvesting `b(y) = y²`.
//!
//! Receiver ℓ sees `Y = X + N(0, σ_ℓ²)`, so its harvested energy is
//! `E[X²] + σ_ℓ²`. The noisiest receiver limits the rate and the quietest
//! one limits the energy, which reduces the multicast problem to
//! `max I(X; Y_noisiest)` over inputs on `[-P, P]` with
//! `E[X²] + σ_quietest² ≥ B`.
//!
//! Inputs are restricted to a symmetric grid on `[-P, P]`. The output is
//! discretized with composite Gauss-Legendre panels, which turns the channel
//! into a DMC whose mutual information is exactly the quadrature of the
//! continuous one, and the DMC engine optimizes it. Optimality on the
//! continuum is then checked with the KKT condition on a finer grid.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::channel::{mi_bits, Dmc};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, composite};
use crate::solver::{solve_energy_constrained, SolverOptions};

/// Output integration extends this many noise deviations past the peak.
pub const TAIL_SIGMAS: f64 = 8.0;
/// Default number of input grid points.
pub const DEFAULT_GRID_SIZE: usize = 65;
/// Tolerance of the KKT certificate.
pub const KKT_TOL: f64 = 1e-4;
/// The KKT check uses this many times as many intervals as the solver grid.
const KKT_REFINEMENT: usize = 10;
/// Grid masses below this are dropped from the reported distribution.
const MASS_FLOOR: f64 = 1e-10;
/// Largest disagreement tolerated when the output discretization is doubled.
const QUADRATURE_TOL: f64 = 1e-9;
/// Absolute tolerance of the adaptive information-density integrals.
const DENSITY_TOL: f64 = 1e-12;
/// Constraint slack above which the multiplier is taken to be zero.
const INACTIVE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMulticast {
    sigmas: Vec<f64>,
    peak: f64,
    constraint: f64,
}

impl GaussianMulticast {
    pub fn new(sigmas: Vec<f64>, peak: f64, constraint: f64) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(Error::InvalidArgument("no receivers".into()));
        }
        if let Some(s) = sigmas.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "noise deviation {s} must be positive"
            )));
        }
        if !(peak > 0.0 && peak.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "peak {peak} must be positive"
            )));
        }
        if !(constraint >= 0.0 && constraint.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "energy constraint {constraint} must be nonnegative"
            )));
        }
        Ok(Self {
            sigmas,
            peak,
            constraint,
        })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn constraint(&self) -> f64 {
        self.constraint
    }

    pub fn with_constraint(&self, constraint: f64) -> Result<Self> {
        Self::new(self.sigmas.clone(), self.peak, constraint)
    }

    /// Largest feasible constraint, `P² + σ_min²`.
    pub fn b_max(&self) -> f64 {
        let (lmin, _) = reduce_channels(self);
        rho(self.peak, self.sigmas[lmin])
    }
}

/// Expected received energy `x² + σ²` given input `x`.
pub fn rho(x: f64, sigma: f64) -> f64 {
    x * x + sigma * sigma
}

/// `E[ρ(X)]` under `f`.
pub fn expected_rho(f: &DiscreteInputCdf, sigma: f64) -> f64 {
    f.support
        .iter()
        .zip(&f.masses)
        .map(|(x, m)| m * rho(*x, sigma))
        .sum()
}

/// Indices of the smallest and largest noise variance, lowest index on ties.
pub fn reduce_channels(gm: &GaussianMulticast) -> (usize, usize) {
    let (mut lmin, mut lmax) = (0, 0);
    for (l, s) in gm.sigmas.iter().enumerate() {
        if *s < gm.sigmas[lmin] {
            lmin = l;
        }
        if *s > gm.sigmas[lmax] {
            lmax = l;
        }
    }
    (lmin, lmax)
}

/// A distribution with finitely many support points.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteInputCdf {
    support: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteInputCdf {
    /// Support must be strictly increasing and masses nonnegative, summing
    /// to one within 1e-12.
    pub fn new(support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if support.len() != masses.len() {
            return Err(Error::DimensionMismatch {
                what: "masses",
                expected: support.len(),
                found: masses.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.iter().any(|x| !x.is_finite()) || support.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidDistribution(
                "support must be finite and strictly increasing".into(),
            ));
        }
        if masses.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::InvalidDistribution(
                "masses must be nonnegative".into(),
            ));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(Self { support, masses })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn second_moment(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.masses)
            .map(|(x, m)| m * x * x)
            .sum()
    }

    /// `F(x) = P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.masses)
            .filter(|(s, _)| **s <= x)
            .map(|(_, m)| m)
            .sum()
    }

    /// Largest `|F({x}) − F({−x})|` over the support, matching points within
    /// `1e-12`.
    pub fn asymmetry(&self) -> f64 {
        let mass_at = |x: f64| -> f64 {
            self.support
                .iter()
                .zip(&self.masses)
                .filter(|(s, _)| (**s - x).abs() <= 1e-12)
                .map(|(_, m)| m)
                .sum()
        };
        self.support
            .iter()
            .zip(&self.masses)
            .map(|(x, m)| (m - mass_at(-x)).abs())
            .fold(0.0, f64::max)
    }

    fn extent(&self) -> f64 {
        self.support.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    pub lambda: f64,
    /// `max_x [i(x; F₀) + λx²] − [I(F₀) + λ E₀[x²]]` over the check grid.
    pub max_violation: f64,
    /// `J(F₀) = B − σ_min² − E₀[x²]`, nonpositive when F₀ is feasible.
    pub j_value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSolution {
    /// `C(B, P)` in bits per channel use.
    pub value: f64,
    pub input: DiscreteInputCdf,
    pub kkt: KktReport,
    pub converged: bool,
    pub gap_estimate: f64,
    pub iterations: usize,
    /// Indices of the quietest and noisiest receivers.
    pub energy_receiver: usize,
    pub information_receiver: usize,
}

/// Conditional output density `N(x, σ²)` at `y`.
fn normal_pdf(y: f64, x: f64, sigma: f64) -> f64 {
    let z = (y - x) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// `p(y; F) = Σ_j m_j φ_σ(y − x_j)`.
pub fn output_density(y: f64, f: &DiscreteInputCdf, sigma: f64) -> f64 {
    f.support
        .iter()
        .zip(&f.masses)
        .map(|(x, m)| m * normal_pdf(y, *x, sigma))
        .sum()
}

/// `ln p(y; F) + ln(σ√(2π))`, computed as a log-sum-exp.
fn log_output_scaled(y: f64, f: &DiscreteInputCdf, sigma: f64) -> f64 {
    let s2 = 2.0 * sigma * sigma;
    let mut best = f64::NEG_INFINITY;
    for (x, m) in f.support.iter().zip(&f.masses) {
        if *m > 0.0 {
            best = best.max(m.ln() - (y - x).powi(2) / s2);
        }
    }
    let sum: f64 = f
        .support
        .iter()
        .zip(&f.masses)
        .filter(|(_, m)| **m > 0.0)
        .map(|(x, m)| (m.ln() - (y - x).powi(2) / s2 - best).exp())
        .sum();
    best + sum.ln()
}

fn initial_panels(width: f64, sigma: f64) -> usize {
    ((width / (0.5 * sigma)).ceil() as usize).max(1)
}

/// `i(x; F) = ∫ φ_σ(y − x) log₂[φ_σ(y − x) / p(y; F)] dy`, integrated
/// adaptively over `TAIL_SIGMAS` deviations beyond the support and `x`.
pub fn marginal_information_density(x: f64, f: &DiscreteInputCdf, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bad density arguments x = {x}, σ = {sigma}"
        )));
    }
    let reach = f.extent().max(x.abs());
    let (lo, hi) = (-reach - TAIL_SIGMAS * sigma, reach + TAIL_SIGMAS * sigma);
    let s2 = 2.0 * sigma * sigma;
    let integrand = |y: f64| {
        let log_cond = -(y - x).powi(2) / s2;
        normal_pdf(y, x, sigma) * (log_cond - log_output_scaled(y, f, sigma))
    };
    let nats = adaptive(
        integrand,
        lo,
        hi,
        initial_panels(hi - lo, sigma),
        DENSITY_TOL * LN_2,
    )?;
    Ok(nats / LN_2)
}

/// `I(X; Y) = ∫ i(x; F) dF(x)`.
pub fn gaussian_mutual_information(f: &DiscreteInputCdf, sigma: f64) -> Result<f64> {
    let mut total = 0.0;
    for (x, m) in f.support.iter().zip(&f.masses) {
        if *m > 0.0 {
            total += m * marginal_information_density(*x, f, sigma)?;
        }
    }
    Ok(total)
}

/// Checks `i(x; F₀) + λx² ≤ I(F₀) + λE₀[x²]` on a grid of
/// `10·(DEFAULT_GRID_SIZE − 1) + 1` points in `[−P, P]`. Testing point
/// masses suffices because the left side is linear in F.
pub fn kkt_verify(
    f0: &DiscreteInputCdf,
    lambda: f64,
    gm: &GaussianMulticast,
    tol: f64,
) -> Result<KktReport> {
    kkt_on_grid(
        f0,
        lambda,
        gm,
        tol,
        KKT_REFINEMENT * (DEFAULT_GRID_SIZE - 1),
    )
}

fn kkt_on_grid(
    f0: &DiscreteInputCdf,
    lambda: f64,
    gm: &GaussianMulticast,
    tol: f64,
    intervals: usize,
) -> Result<KktReport> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "multiplier {lambda} is negative"
        )));
    }
    if f0.extent() > gm.peak * (1.0 + 1e-12) {
        return Err(Error::InvalidDistribution(format!(
            "support leaves [-{p}, {p}]",
            p = gm.peak
        )));
    }
    let (lmin, lmax) = reduce_channels(gm);
    let sigma = gm.sigmas[lmax];
    let info = gaussian_mutual_information(f0, sigma)?;
    let moment = f0.second_moment();
    let rhs = info + lambda * moment;
    let mut points = symmetric_grid(gm.peak, intervals + 1);
    points.extend_from_slice(&f0.support);
    let lhs = points
        .par_iter()
        .map(|&x| Ok(marginal_information_density(x, f0, sigma)? + lambda * x * x))
        .collect::<Result<Vec<f64>>>()?;
    let max_violation = lhs.iter().fold(f64::NEG_INFINITY, |a, v| a.max(v - rhs));
    Ok(KktReport {
        lambda,
        max_violation,
        j_value: gm.constraint - gm.sigmas[lmin].powi(2) - moment,
        passed: max_violation <= tol,
    })
}

/// `n` points, symmetric about zero, from `−peak` to `peak`.
fn symmetric_grid(peak: f64, n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|i| peak * (2.0 * i as f64 - m) / m).collect()
}

/// The grid channel with its output discretized into `panels` Gauss-Legendre
/// panels: row `i` holds `w_k φ_σ(y_k − x_i)`.
fn discretize(grid: &[f64], peak: f64, sigma: f64, panels: usize) -> Result<Dmc> {
    let reach = peak + TAIL_SIGMAS * sigma;
    let (y, w) = composite(-reach, reach, panels);
    let rows = grid
        .iter()
        .map(|x| {
            y.iter()
                .zip(&w)
                .map(|(yk, wk)| wk * normal_pdf(*yk, *x, sigma))
                .collect()
        })
        .collect();
    Dmc::new(rows)
}

fn gaussian_options() -> SolverOptions {
    SolverOptions {
        max_iterations: 2_000,
        pair_refinement: false,
        ..SolverOptions::default()
    }
}

/// `C(B, P)` over distributions on a symmetric grid of `grid_size` points,
/// with the KKT certificate at tolerance [`KKT_TOL`].
pub fn gaussian_capacity_energy(
    gm: &GaussianMulticast,
    grid_size: usize,
) -> Result<GaussianSolution> {
    if grid_size < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid size {grid_size} is below 3"
        )));
    }
    let (lmin, lmax) = reduce_channels(gm);
    let b_max = gm.b_max();
    if gm.constraint > b_max + 1e-12 {
        return Err(Error::Infeasible {
            receivers: vec![lmin],
            b_max,
        });
    }
    let sigma = gm.sigmas[lmax];
    let noise_energy = gm.sigmas[lmin].powi(2);
    let grid = symmetric_grid(gm.peak, grid_size);
    let energy_row: Vec<f64> = grid.iter().map(|x| rho(*x, gm.sigmas[lmin])).collect();
    let panels = initial_panels(2.0 * (gm.peak + TAIL_SIGMAS * sigma), sigma);
    let channel = discretize(&grid, gm.peak, sigma, panels)?;
    let opts = gaussian_options();
    let solve = |b: f64| {
        solve_energy_constrained(
            vec![&channel],
            std::slice::from_ref(&energy_row),
            &[b.min(b_max)],
            &opts,
        )
    };

    let raw = solve(gm.constraint)?;
    let fine = discretize(&grid, gm.peak, sigma, 2 * panels)?;
    let drift = (mi_bits(&raw.q, &fine) - raw.value).abs();
    if drift > QUADRATURE_TOL {
        return Err(Error::Quadrature(format!(
            "output discretization changed the rate by {drift:.3e} when refined"
        )));
    }

    let moment: f64 = grid.iter().zip(&raw.q).map(|(x, q)| q * x * x).sum();
    let lambda = if moment + noise_energy - gm.constraint > INACTIVE_SLACK {
        0.0
    } else {
        let h = (1e-4 * gm.constraint).max(1e-6);
        let below = solve((gm.constraint - h).max(0.0))?.value;
        let slope = if gm.constraint + h <= b_max {
            let above = solve(gm.constraint + h)?.value;
            (above - below) / (gm.constraint + h - (gm.constraint - h).max(0.0))
        } else {
            (raw.value - below) / (gm.constraint - (gm.constraint - h).max(0.0))
        };
        (-slope).max(0.0)
    };

    let input = to_cdf(&grid, &raw.q)?;
    let kkt = kkt_on_grid(
        &input,
        lambda,
        gm,
        KKT_TOL,
        KKT_REFINEMENT * (grid_size - 1),
    )?;
    Ok(GaussianSolution {
        value: raw.value,
        input,
        kkt,
        converged: raw.converged,
        gap_estimate: raw.gap_estimate,
        iterations: raw.iterations,
        energy_receiver: lmin,
        information_receiver: lmax,
    })
}

fn to_cdf(grid: &[f64], q: &[f64]) -> Result<DiscreteInputCdf> {
    let kept: Vec<(f64, f64)> = grid
        .iter()
        .zip(q)
        .filter(|(_, m)| **m > MASS_FLOOR)
        .map(|(x, m)| (*x, *m))
        .collect();
    let total: f64 = kept.iter().map(|(_, m)| m).sum();
    DiscreteInputCdf::new(
        kept.iter().map(|(x, _)| *x).collect(),
        kept.iter().map(|(_, m)| m / total).collect(),
    )
}
