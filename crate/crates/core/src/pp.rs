//! Point-to-point capacity-energy function `C(B) = max_{q·P·b ≥ B} I(q; P)`.

use rayon::prelude::*;

use crate::channel::{row_energies, Dmc, EnergyFunctional, InputDistribution};
use crate::error::{Error, Result};
use crate::solver::{solve_energy_constrained, SolverOptions};

/// One evaluation of a capacity-energy function.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityPoint {
    /// Energy constraint `B` per symbol.
    pub constraint: f64,
    /// Capacity in bits per symbol.
    pub value: f64,
    pub optimizer: InputDistribution,
    pub converged: bool,
    /// Certified upper bound on `C(B) − value`.
    pub gap_estimate: f64,
    pub iterations: usize,
}

/// Capacity-energy points at strictly increasing constraint values.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCurve {
    points: Vec<CapacityPoint>,
}

impl CapacityCurve {
    pub fn new(points: Vec<CapacityPoint>) -> Result<Self> {
        if points
            .windows(2)
            .any(|w| !(w[1].constraint > w[0].constraint))
        {
            return Err(Error::InvalidArgument(
                "curve constraints must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[CapacityPoint] {
        &self.points
    }

    /// `(B, C)` pairs.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| (p.constraint, p.value))
            .collect()
    }

    /// Largest increase of the value between consecutive points (0 for a
    /// non-increasing curve).
    pub fn monotonicity_violation(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1].value - w[0].value)
            .fold(0.0, f64::max)
    }
}

/// Largest single-row expected energy `max_x (P·b)[x]`.
pub fn b_max_single(ch: &Dmc, b: &EnergyFunctional) -> Result<f64> {
    check_energy(ch, b)?;
    Ok(row_energies(ch, b)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

fn check_energy(ch: &Dmc, b: &EnergyFunctional) -> Result<()> {
    if b.len() != ch.output_size() {
        return Err(Error::DimensionMismatch {
            what: "energy functional length",
            expected: ch.output_size(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `C(B)` for a single channel. Fails with [`Error::Infeasible`] when
/// `B > b_max_single + 1e-12`.
pub fn capacity_energy(ch: &Dmc, b: &EnergyFunctional, constraint: f64) -> Result<CapacityPoint> {
    check_energy(ch, b)?;
    if !constraint.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "energy constraint {constraint} is not finite"
        )));
    }
    let rows = vec![row_energies(ch, b)];
    let raw = solve_energy_constrained(vec![ch], &rows, &[constraint], &SolverOptions::default())?;
    Ok(CapacityPoint {
        constraint,
        value: raw.value,
        optimizer: InputDistribution::from_iterate(&raw.q),
        converged: raw.converged,
        gap_estimate: raw.gap_estimate,
        iterations: raw.iterations,
    })
}

/// Sweeps `capacity_energy` over an ascending grid; points are solved in
/// parallel.
pub fn capacity_curve(ch: &Dmc, b: &EnergyFunctional, grid: &[f64]) -> Result<CapacityCurve> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "constraint grid must be strictly increasing".into(),
        ));
    }
    let points = grid
        .par_iter()
        .map(|&bv| capacity_energy(ch, b, bv))
        .collect::<Result<Vec<_>>>()?;
    CapacityCurve::new(points)
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

    /// Unconstrained Z-channel capacity, log2(1 + 2^{-h(ε)/(1-ε)}).
    fn z_capacity(e: f64) -> f64 {
        (1.0 + (-hb(e) / (1.0 - e)).exp2()).log2()
    }

    #[test]
    fn b_max_examples() {
        let b = EnergyFunctional::hamming();
        for eps in [0.0, 0.12, 0.3] {
            assert!(
                (b_max_single(&make_bsc(eps).unwrap(), &b).unwrap() - (1.0 - eps)).abs() < 1e-15
            );
            assert!((b_max_single(&make_z(eps).unwrap(), &b).unwrap() - (1.0 - eps)).abs() < 1e-15);
        }
        assert_eq!(b_max_single(&Dmc::identity(2).unwrap(), &b).unwrap(), 1.0);
        let wrong = EnergyFunctional::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(b_max_single(&make_bsc(0.1).unwrap(), &wrong).is_err());
    }

    #[test]
    fn unconstrained_closed_forms() {
        let b = EnergyFunctional::hamming();
        let p = capacity_energy(&make_bsc(0.12).unwrap(), &b, 0.0).unwrap();
        assert!((p.value - (1.0 - hb(0.12))).abs() < 1e-9);
        assert!((p.optimizer.probs()[0] - 0.5).abs() < 1e-4);
        assert!(p.converged && p.gap_estimate < 1e-7);

        let p = capacity_energy(&make_z(0.3).unwrap(), &b, 0.0).unwrap();
        assert!((p.value - z_capacity(0.3)).abs() < 1e-9, "{}", p.value);
        assert!((z_capacity(0.3) - 0.503_691_933_484_817).abs() < 1e-12);
    }

    #[test]
    fn maximal_energy_forces_the_all_ones_input() {
        let b = EnergyFunctional::hamming();
        let ch = make_bsc(0.12).unwrap();
        let p = capacity_energy(&ch, &b, 0.88).unwrap();
        assert!(p.value.abs() < 1e-8, "{}", p.value);
        assert!((p.optimizer.probs()[1] - 1.0).abs() < 1e-8);
        assert!(received_energy(&p.optimizer, &ch, &b).unwrap() >= 0.88 - 1e-9);
    }

    #[test]
    fn infeasible_constraint_reports_b_max() {
        let b = EnergyFunctional::hamming();
        let err = capacity_energy(&make_bsc(0.12).unwrap(), &b, 0.9).unwrap_err();
        match err {
            Error::Infeasible { receivers, b_max } => {
                assert_eq!(receivers, vec![0]);
                assert!((b_max - 0.88).abs() < 1e-12);
            }
            other => panic!("{other}"),
        }
        // within the 1e-12 allowance
        assert!(capacity_energy(&make_bsc(0.12).unwrap(), &b, 0.88 + 5e-13).is_ok());
    }

    #[test]
    fn inactive_constraint_matches_unconstrained() {
        let b = EnergyFunctional::hamming();
        let ch = make_z(0.3).unwrap();
        let free = capacity_energy(&ch, &b, 0.0).unwrap();
        let delivered = received_energy(&free.optimizer, &ch, &b).unwrap();
        let p = capacity_energy(&ch, &b, 0.9 * delivered).unwrap();
        assert!((p.value - free.value).abs() < 1e-6);
    }

    #[test]
    fn active_constraint_matches_closed_form() {
        // BSC(0.12), B = 0.8 forces p_Y(1) = 0.8: h(0.8) − h(0.12)
        let b = EnergyFunctional::hamming();
        let ch = make_bsc(0.12).unwrap();
        let p = capacity_energy(&ch, &b, 0.8).unwrap();
        assert!((p.value - (hb(0.8) - hb(0.12))).abs() < 1e-9);
        let mi = mutual_information(&p.optimizer, &ch).unwrap();
        assert!((mi - p.value).abs() < 1e-15);
    }

    #[test]
    fn curve_examples() {
        let b = EnergyFunctional::hamming();
        let ch = make_bsc(0.12).unwrap();
        let c = capacity_curve(&ch, &b, &[0.0]).unwrap();
        assert_eq!(c.points().len(), 1);
        assert!((c.points()[0].value - 0.470_639_134_712_635_6).abs() < 1e-9);

        let c = capacity_curve(&ch, &b, &[0.88]).unwrap();
        assert!(c.points()[0].value.abs() < 1e-8);

        let c = capacity_curve(&ch, &b, &[0.0, 0.44, 0.88]).unwrap();
        assert!(c.monotonicity_violation() < 1e-9);

        assert!(capacity_curve(&ch, &b, &[0.5, 0.2]).is_err());
        assert!(capacity_curve(&ch, &b, &[0.5, 0.95]).is_err());
    }
}
