//! Multicast (compound) capacity-energy function: the best worst-receiver
//! mutual information over inputs that meet every receiver's energy
//! constraint. Receivers may have different energy functionals and
//! constraints.

use rayon::prelude::*;

use crate::channel::{
    check_channel_family, Dmc, EnergyFunctional, InputDistribution, MulticastProblem,
};
use crate::error::{Error, Result};
use crate::pp::{capacity_energy, CapacityCurve, CapacityPoint};
use crate::solver::{
    feasibility, max_min_linear, solve_energy_constrained, Feasibility, LinearConstraint,
    RawSolution, SolverOptions,
};

/// Channels whose mutual information is within this many bits of the
/// minimum are reported as active.
pub const ACTIVE_SET_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct MulticastSolution {
    /// `min_ℓ I(q*; P(ℓ))` in bits per symbol.
    pub value: f64,
    pub optimizer: InputDistribution,
    pub per_channel_mi: Vec<f64>,
    /// Receivers attaining the minimum within [`ACTIVE_SET_TOL`].
    pub active_set: Vec<usize>,
    pub converged: bool,
    pub gap_estimate: f64,
    pub iterations: usize,
}

impl MulticastSolution {
    fn from_raw(raw: RawSolution) -> Self {
        let active_set = raw
            .per_objective
            .iter()
            .enumerate()
            .filter(|(_, v)| **v <= raw.value + ACTIVE_SET_TOL)
            .map(|(l, _)| l)
            .collect();
        Self {
            value: raw.value,
            optimizer: InputDistribution::from_iterate(&raw.q),
            per_channel_mi: raw.per_objective,
            active_set,
            converged: raw.converged,
            gap_estimate: raw.gap_estimate,
            iterations: raw.iterations,
        }
    }
}

/// Maximizes `min_ℓ I(q; P(ℓ))` subject to `q·P(ℓ)·b_ℓ ≥ B_ℓ` for every ℓ.
pub fn multicast_capacity(prob: &MulticastProblem) -> Result<MulticastSolution> {
    let all: Vec<usize> = (0..prob.receivers()).collect();
    solve_for(prob, &all).map(MulticastSolution::from_raw)
}

/// Maximizes the minimum over the `objectives` subset of receivers under
/// every receiver's energy constraint.
pub(crate) fn solve_for(prob: &MulticastProblem, objectives: &[usize]) -> Result<RawSolution> {
    let rows = prob.energy_rows();
    solve_energy_constrained(
        objectives.iter().map(|&l| &prob.channels()[l]).collect(),
        &rows,
        prob.constraints(),
        &SolverOptions::default(),
    )
}

/// Largest common energy constraint any input can meet at every receiver:
/// `max_q min_ℓ q·P(ℓ)·b_ℓ`.
pub fn b_max_multicast(channels: &[Dmc], energies: &[EnergyFunctional]) -> Result<f64> {
    check_channel_family(channels, energies)?;
    let rows: Vec<Vec<f64>> = channels
        .iter()
        .zip(energies)
        .map(|(ch, b)| crate::channel::row_energies(ch, b))
        .collect();
    Ok(max_min_linear(channels[0].input_size(), &rows))
}

/// Outcome of checking whether an energy constraint vector lies in the
/// achievable domain.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainFeasibility {
    Feasible {
        witness: InputDistribution,
    },
    /// No input meets every constraint; `max_min_slack` is the best achievable
    /// `min_ℓ (q·P(ℓ)·b_ℓ − B_ℓ)` (negative) and `binding` the receivers
    /// attaining it.
    Infeasible {
        max_min_slack: f64,
        binding: Vec<usize>,
    },
}

impl DomainFeasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, DomainFeasibility::Feasible { .. })
    }
}

pub fn domain_feasible(prob: &MulticastProblem) -> DomainFeasibility {
    let constraints: Vec<LinearConstraint> = prob
        .energy_rows()
        .into_iter()
        .zip(prob.constraints())
        .map(|(coeffs, &bound)| LinearConstraint { coeffs, bound })
        .collect();
    match feasibility(prob.input_size(), &constraints) {
        Feasibility::Feasible { witness, .. } => DomainFeasibility::Feasible {
            witness: InputDistribution::from_iterate(&witness),
        },
        Feasibility::Infeasible { slack, binding } => DomainFeasibility::Infeasible {
            max_min_slack: slack,
            binding,
        },
    }
}

/// `min_ℓ C_ℓ(B_ℓ)`, each receiver optimized on its own. Always an upper
/// bound on the multicast value.
pub fn upper_bound_min_individual(prob: &MulticastProblem) -> Result<f64> {
    let mut bound = f64::INFINITY;
    for (l, ((ch, b), &bl)) in prob
        .channels()
        .iter()
        .zip(prob.energies())
        .zip(prob.constraints())
        .enumerate()
    {
        let p = capacity_energy(ch, b, bl).map_err(|e| match e {
            Error::Infeasible { b_max, .. } => Error::Infeasible {
                receivers: vec![l],
                b_max,
            },
            other => other,
        })?;
        bound = bound.min(p.value);
    }
    Ok(bound)
}

/// Multicast solution at one common constraint value.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticastCurvePoint {
    pub constraint: f64,
    pub solution: MulticastSolution,
}

/// Solves the common-`B` multicast problem at every grid value and reports
/// each receiver's mutual information at the shared optimizer.
pub fn per_channel_curves(
    channels: &[Dmc],
    energies: &[EnergyFunctional],
    grid: &[f64],
) -> Result<Vec<MulticastCurvePoint>> {
    check_channel_family(channels, energies)?;
    grid.par_iter()
        .map(|&bv| {
            let prob = MulticastProblem::common(channels.to_vec(), energies.to_vec(), bv)?;
            Ok(MulticastCurvePoint {
                constraint: bv,
                solution: multicast_capacity(&prob)?,
            })
        })
        .collect()
}

/// The multicast values of a sweep as a capacity-energy curve.
pub fn to_capacity_curve(points: &[MulticastCurvePoint]) -> Result<CapacityCurve> {
    CapacityCurve::new(
        points
            .iter()
            .map(|p| CapacityPoint {
                constraint: p.constraint,
                value: p.solution.value,
                optimizer: p.solution.optimizer.clone(),
                converged: p.solution.converged,
                gap_estimate: p.solution.gap_estimate,
                iterations: p.solution.iterations,
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_bsc, make_z, mutual_information, received_energy};

    fn hb(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    }

    fn hamming(n: usize) -> Vec<EnergyFunctional> {
        vec![EnergyFunctional::hamming(); n]
    }

    /// 1-D scan of `min{I_BSC(p), I_Z(p)}` over feasible `p = P(X = 1)`.
    fn scan(eps: f64, eps0: f64, b: f64, step: f64) -> f64 {
        let n = (1.0 / step).round() as usize;
        (0..=n)
            .map(|k| k as f64 / n as f64)
            .filter(|p| eps + (1.0 - 2.0 * eps) * p >= b - 1e-12 && (1.0 - eps0) * p >= b - 1e-12)
            .map(|p| {
                let bsc = hb(eps + (1.0 - 2.0 * eps) * p) - hb(eps);
                let z = hb((1.0 - eps0) * p) - p * hb(eps0);
                bsc.min(z)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn single_receiver_is_point_to_point() {
        let ch = make_z(0.3).unwrap();
        for bv in [0.0, 0.3, 0.6] {
            let prob = MulticastProblem::common(vec![ch.clone()], hamming(1), bv).unwrap();
            let m = multicast_capacity(&prob).unwrap();
            let p = capacity_energy(&ch, &EnergyFunctional::hamming(), bv).unwrap();
            assert_eq!(m.value, p.value);
            assert_eq!(m.optimizer, p.optimizer);
        }
    }

    #[test]
    fn identical_channels() {
        let bsc = make_bsc(0.12).unwrap();
        let prob = MulticastProblem::common(vec![bsc.clone(), bsc], hamming(2), 0.0).unwrap();
        let m = multicast_capacity(&prob).unwrap();
        assert!((m.value - (1.0 - hb(0.12))).abs() < 1e-9);
        assert_eq!(m.active_set, vec![0, 1]);
        assert!(
            (m.value
                - m.per_channel_mi
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min))
            .abs()
                < 1e-12
        );
    }

    #[test]
    fn bsc_and_z_against_scan() {
        for bv in [0.0, 0.5, 0.6, 0.65] {
            let prob = MulticastProblem::common(
                vec![make_bsc(0.12).unwrap(), make_z(0.3).unwrap()],
                hamming(2),
                bv,
            )
            .unwrap();
            let m = multicast_capacity(&prob).unwrap();
            let oracle = scan(0.12, 0.3, bv, 1e-5);
            assert!(
                m.value >= oracle - 1e-12 && m.value - oracle < 1e-4,
                "B={bv}: {} vs {oracle}",
                m.value
            );
            for (l, ch) in prob.channels().iter().enumerate() {
                let e = received_energy(&m.optimizer, ch, &prob.energies()[l]).unwrap();
                assert!(e >= bv - 1e-9);
                assert!(
                    (mutual_information(&m.optimizer, ch).unwrap() - m.per_channel_mi[l]).abs()
                        < 1e-12
                );
            }
            assert!(m.converged, "B={bv} gap {}", m.gap_estimate);
        }
    }

    #[test]
    fn b_max_examples() {
        let b = EnergyFunctional::hamming();
        assert!(
            (b_max_multicast(&[make_bsc(0.2).unwrap()], std::slice::from_ref(&b)).unwrap() - 0.8)
                .abs()
                < 1e-12
        );
        // max_p min{0.12 + 0.76p, 0.7p} = 0.7 at p = 1
        let v = b_max_multicast(
            &[make_bsc(0.12).unwrap(), make_z(0.3).unwrap()],
            &hamming(2),
        )
        .unwrap();
        assert!((v - 0.7).abs() < 1e-12);
        let zero = EnergyFunctional::new(vec![0.0, 0.0]).unwrap();
        let v = b_max_multicast(
            &[make_bsc(0.1).unwrap(), make_z(0.2).unwrap()],
            &[zero.clone(), zero],
        )
        .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn domain_feasibility_examples() {
        let chans = vec![make_bsc(0.12).unwrap(), make_z(0.3).unwrap()];
        let prob = MulticastProblem::common(chans.clone(), hamming(2), 0.0).unwrap();
        assert!(domain_feasible(&prob).is_feasible());
        for (bv, ok) in [(0.69, true), (0.7, true), (0.71, false)] {
            let prob = MulticastProblem::common(chans.clone(), hamming(2), bv).unwrap();
            assert_eq!(domain_feasible(&prob).is_feasible(), ok, "B={bv}");
        }
        let prob = MulticastProblem::new(chans, hamming(2), vec![0.1, 0.75]).unwrap();
        match domain_feasible(&prob) {
            DomainFeasibility::Infeasible {
                binding,
                max_min_slack,
            } => {
                assert_eq!(binding, vec![1]);
                assert!((max_min_slack + 0.05).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_problem_names_receivers() {
        let prob = MulticastProblem::common(
            vec![make_bsc(0.12).unwrap(), make_z(0.3).unwrap()],
            hamming(2),
            0.8,
        )
        .unwrap();
        match multicast_capacity(&prob).unwrap_err() {
            Error::Infeasible { receivers, b_max } => {
                assert_eq!(receivers, vec![1]);
                assert!((b_max - 0.7).abs() < 1e-12);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn upper_bound_examples() {
        let prob = MulticastProblem::common(
            vec![make_bsc(0.3).unwrap(), make_z(0.6).unwrap()],
            hamming(2),
            0.0,
        )
        .unwrap();
        let ub = upper_bound_min_individual(&prob).unwrap();
        assert!((ub - (1.0 - hb(0.3))).abs() < 1e-9);
        let m = multicast_capacity(&prob).unwrap();
        assert!((m.value - ub).abs() < 1e-9);

        let prob = MulticastProblem::common(
            vec![make_bsc(0.12).unwrap(), make_z(0.3).unwrap()],
            hamming(2),
            0.0,
        )
        .unwrap();
        let ub = upper_bound_min_individual(&prob).unwrap();
        assert!((ub - (1.0 - hb(0.12))).abs() < 1e-9);
        assert!(multicast_capacity(&prob).unwrap().value <= ub + 1e-6);
    }

    #[test]
    fn curves_are_consistent() {
        let chans = vec![make_bsc(0.12).unwrap(), make_z(0.3).unwrap()];
        let grid: Vec<f64> = (0..=14).map(|k| 0.05 * k as f64).collect();
        let pts = per_channel_curves(&chans, &hamming(2), &grid).unwrap();
        for p in &pts {
            let min = p
                .solution
                .per_channel_mi
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert_eq!(min, p.solution.value);
        }
        // At B = 0 the BSC optimum p = 1/2 already serves the Z-channel better.
        let first = &pts[0].solution;
        assert!((first.per_channel_mi[0] - (1.0 - hb(0.12))).abs() < 1e-9);
        assert!((first.per_channel_mi[1] - (hb(0.35) - 0.5 * hb(0.3))).abs() < 1e-4);
        // At B_max = 0.7 the only admissible input is p = 1.
        let last = &pts.last().unwrap().solution;
        assert!((last.optimizer.probs()[1] - 1.0).abs() < 1e-8);
        let curve = to_capacity_curve(&pts).unwrap();
        assert!(curve.monotonicity_violation() < 1e-9);
    }
}
