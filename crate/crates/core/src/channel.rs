//! Discrete memoryless channels, energy functionals and input distributions,
//! together with the information and energy quantities every solver shares.
//!
//! All rates are in bits per channel use. Terms with `p(y|x) = 0` contribute
//! nothing to the mutual information, and output symbols that the input never
//! reaches are skipped.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

/// Tolerance used when validating that probabilities sum to one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A discrete memoryless channel given by its row-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    input_size: usize,
    output_size: usize,
    /// Row-major `p(y|x)`.
    rows: Vec<f64>,
}

impl Dmc {
    /// Builds a channel from its rows. Every row must be a probability vector
    /// (within `NORMALIZATION_TOL`); rows are renormalized exactly afterwards.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::InvalidChannel("channel has no input symbols".into()));
        }
        let output_size = rows[0].len();
        if output_size == 0 {
            return Err(Error::InvalidChannel(
                "channel has no output symbols".into(),
            ));
        }
        let mut flat = Vec::with_capacity(input_size * output_size);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::DimensionMismatch {
                    what: "transition matrix row length",
                    expected: output_size,
                    found: row.len(),
                });
            }
            let sum = validate_probability_vector(row)
                .map_err(|msg| Error::InvalidChannel(format!("row {x}: {msg}")))?;
            flat.extend(row.iter().map(|p| p / sum));
        }
        Ok(Self {
            input_size,
            output_size,
            rows: flat,
        })
    }

    /// The noiseless channel on `n` symbols.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// Transition probabilities `p(·|x)`.
    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.output_size)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Product channel `P ⊗ P`: two independent uses, with input pair
    /// `(x1, x2)` at index `x1 * |X| + x2` and likewise for outputs.
    pub fn product(&self, other: &Dmc) -> Dmc {
        let input_size = self.input_size * other.input_size;
        let output_size = self.output_size * other.output_size;
        let mut rows = Vec::with_capacity(input_size * output_size);
        for r1 in self.rows() {
            for r2 in other.rows() {
                for &a in r1 {
                    for &b in r2 {
                        rows.push(a * b);
                    }
                }
            }
        }
        Dmc {
            input_size,
            output_size,
            rows,
        }
    }
}

/// Nonnegative harvested energy `b(y)` per output symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyFunctional {
    values: Vec<f64>,
}

impl EnergyFunctional {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidEnergy("energy functional is empty".into()));
        }
        if let Some((y, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidEnergy(format!(
                "b({y}) = {v} must be finite and nonnegative"
            )));
        }
        Ok(Self { values })
    }

    /// Hamming weight of a binary output: `b = [0, 1]`.
    pub fn hamming() -> Self {
        Self {
            values: vec![0.0, 1.0],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Energy of a pair of outputs indexed as in [`Dmc::product`]:
    /// `b(y1) + b(y2)`.
    pub fn product(&self, other: &EnergyFunctional) -> EnergyFunctional {
        let values = self
            .values
            .iter()
            .flat_map(|a| other.values.iter().map(move |b| a + b))
            .collect();
        EnergyFunctional { values }
    }
}

/// A point on the input probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl InputDistribution {
    /// Validates within `NORMALIZATION_TOL` and renormalizes exactly.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let sum = validate_probability_vector(&probs).map_err(Error::InvalidDistribution)?;
        Ok(Self {
            probs: probs.into_iter().map(|p| p / sum).collect(),
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    /// All mass on input symbol `x`.
    pub fn point(n: usize, x: usize) -> Result<Self> {
        if x >= n {
            return Err(Error::InvalidArgument(format!(
                "symbol {x} outside alphabet of size {n}"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[x] = 1.0;
        Ok(Self { probs })
    }

    /// Clamps tiny negative round-off and renormalizes. Used on solver
    /// iterates, which are simplex points up to floating-point error.
    pub(crate) fn from_iterate(q: &[f64]) -> Self {
        let clamped: Vec<f64> = q.iter().map(|p| p.max(0.0)).collect();
        let sum: f64 = clamped.iter().sum();
        Self {
            probs: clamped.into_iter().map(|p| p / sum).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// L channels sharing an input alphabet, their energy functionals and the
/// per-receiver energy constraint vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticastProblem {
    channels: Vec<Dmc>,
    energies: Vec<EnergyFunctional>,
    constraints: Vec<f64>,
}

impl MulticastProblem {
    pub fn new(
        channels: Vec<Dmc>,
        energies: Vec<EnergyFunctional>,
        constraints: Vec<f64>,
    ) -> Result<Self> {
        check_channel_family(&channels, &energies)?;
        if constraints.len() != channels.len() {
            return Err(Error::DimensionMismatch {
                what: "energy constraint vector",
                expected: channels.len(),
                found: constraints.len(),
            });
        }
        if let Some((l, b)) = constraints
            .iter()
            .enumerate()
            .find(|(_, b)| !b.is_finite() || **b < 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "energy constraint B_{l} = {b} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            channels,
            energies,
            constraints,
        })
    }

    /// Same constraint `b` for every receiver.
    pub fn common(channels: Vec<Dmc>, energies: Vec<EnergyFunctional>, b: f64) -> Result<Self> {
        let l = channels.len();
        Self::new(channels, energies, vec![b; l])
    }

    pub fn channels(&self) -> &[Dmc] {
        &self.channels
    }

    pub fn energies(&self) -> &[EnergyFunctional] {
        &self.energies
    }

    pub fn constraints(&self) -> &[f64] {
        &self.constraints
    }

    pub fn receivers(&self) -> usize {
        self.channels.len()
    }

    pub fn input_size(&self) -> usize {
        self.channels[0].input_size()
    }

    /// The sub-problem seen by a subset of receivers.
    pub fn restrict(&self, receivers: &[usize]) -> Result<Self> {
        if receivers.is_empty() {
            return Err(Error::InvalidArgument("empty receiver group".into()));
        }
        if let Some(&r) = receivers.iter().find(|&&r| r >= self.receivers()) {
            return Err(Error::InvalidArgument(format!(
                "receiver {r} outside 0..{}",
                self.receivers()
            )));
        }
        Ok(Self {
            channels: receivers
                .iter()
                .map(|&r| self.channels[r].clone())
                .collect(),
            energies: receivers
                .iter()
                .map(|&r| self.energies[r].clone())
                .collect(),
            constraints: receivers.iter().map(|&r| self.constraints[r]).collect(),
        })
    }

    /// Per-receiver input-side energy vectors `P(ℓ)·b_ℓ`.
    pub fn energy_rows(&self) -> Vec<Vec<f64>> {
        self.channels
            .iter()
            .zip(&self.energies)
            .map(|(ch, b)| row_energies(ch, b))
            .collect()
    }
}

/// Validates a list of channels and matching energy functionals.
pub(crate) fn check_channel_family(channels: &[Dmc], energies: &[EnergyFunctional]) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one channel is required".into(),
        ));
    }
    if energies.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            what: "number of energy functionals",
            expected: channels.len(),
            found: energies.len(),
        });
    }
    let n = channels[0].input_size();
    for (ch, b) in channels.iter().zip(energies) {
        if ch.input_size() != n {
            return Err(Error::DimensionMismatch {
                what: "shared input alphabet",
                expected: n,
                found: ch.input_size(),
            });
        }
        if b.len() != ch.output_size() {
            return Err(Error::DimensionMismatch {
                what: "energy functional length",
                expected: ch.output_size(),
                found: b.len(),
            });
        }
    }
    Ok(())
}

fn validate_probability_vector(p: &[f64]) -> std::result::Result<f64, String> {
    if p.is_empty() {
        return Err("empty probability vector".into());
    }
    if let Some((i, v)) = p
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
    {
        return Err(format!("entry {i} = {v} is outside [0, 1]"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(format!("entries sum to {sum}, expected 1"));
    }
    Ok(sum)
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}

/// Binary symmetric channel with crossover probability `eps`.
pub fn make_bsc(eps: f64) -> Result<Dmc> {
    check_probability("eps", eps)?;
    Dmc::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
}

/// Z-channel: input 0 is noiseless, input 1 flips to 0 with probability `eps0`.
pub fn make_z(eps0: f64) -> Result<Dmc> {
    check_probability("eps0", eps0)?;
    Dmc::new(vec![vec![1.0, 0.0], vec![eps0, 1.0 - eps0]])
}

fn check_input(q: &InputDistribution, ch: &Dmc) -> Result<()> {
    if q.len() != ch.input_size() {
        return Err(Error::DimensionMismatch {
            what: "input distribution length",
            expected: ch.input_size(),
            found: q.len(),
        });
    }
    Ok(())
}

/// `p_Y(y) = Σ_x q(x) p(y|x)`.
pub fn output_distribution(q: &InputDistribution, ch: &Dmc) -> Result<Vec<f64>> {
    check_input(q, ch)?;
    Ok(output_of(q.probs(), ch))
}

/// `I(X;Y)` in bits for input `q` through `ch`.
pub fn mutual_information(q: &InputDistribution, ch: &Dmc) -> Result<f64> {
    check_input(q, ch)?;
    Ok(mi_bits(q.probs(), ch))
}

/// Expected harvested energy `q·P·b = E[b(Y)]`.
pub fn received_energy(q: &InputDistribution, ch: &Dmc, b: &EnergyFunctional) -> Result<f64> {
    check_input(q, ch)?;
    if b.len() != ch.output_size() {
        return Err(Error::DimensionMismatch {
            what: "energy functional length",
            expected: ch.output_size(),
            found: b.len(),
        });
    }
    Ok(dot(q.probs(), &row_energies(ch, b)))
}

/// Per-input expected energy `(P·b)[x]`.
pub(crate) fn row_energies(ch: &Dmc, b: &EnergyFunctional) -> Vec<f64> {
    ch.rows().map(|row| dot(row, b.values())).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn output_of(q: &[f64], ch: &Dmc) -> Vec<f64> {
    let mut p = vec![0.0; ch.output_size()];
    for (qx, row) in q.iter().zip(ch.rows()) {
        if *qx == 0.0 {
            continue;
        }
        for (py, pyx) in p.iter_mut().zip(row) {
            *py += qx * pyx;
        }
    }
    p
}

/// Mutual information in bits on a raw simplex point.
pub(crate) fn mi_bits(q: &[f64], ch: &Dmc) -> f64 {
    let p = output_of(q, ch);
    let mut acc = 0.0;
    for (qx, row) in q.iter().zip(ch.rows()) {
        if *qx <= 0.0 {
            continue;
        }
        let mut d = 0.0;
        for (pyx, py) in row.iter().zip(&p) {
            if *pyx > 0.0 && *py > 0.0 {
                d += pyx * (pyx / py).ln();
            }
        }
        acc += qx * d;
    }
    (acc / LN_2).max(0.0)
}

/// Smallest output probability used when a row reaches an output that the
/// current input never produces; keeps the gradient finite.
const OUTPUT_FLOOR: f64 = 1e-300;

/// Gradient of `I(q)` in bits: `∂I/∂q_x = D(p(·|x) ‖ p_Y) − 1/ln 2`.
pub(crate) fn mi_gradient(q: &[f64], ch: &Dmc, grad: &mut [f64]) {
    let p = output_of(q, ch);
    for (g, row) in grad.iter_mut().zip(ch.rows()) {
        let mut d = 0.0;
        for (pyx, py) in row.iter().zip(&p) {
            if *pyx > 0.0 {
                d += pyx * (pyx / py.max(OUTPUT_FLOOR)).ln();
            }
        }
        *g = (d - 1.0) / LN_2;
    }
}

/// Value, gradient and Hessian of `I(q)` in bits. The Hessian is
/// `−(1/ln 2) Σ_y p(y|x) p(y|x') / p_Y(y)`, stored row-major.
pub(crate) fn mi_second_order(q: &[f64], ch: &Dmc, grad: &mut [f64], hess: &mut [f64]) -> f64 {
    let n = ch.input_size();
    let p = output_of(q, ch);
    let mut value = 0.0;
    for (x, (g, row)) in grad.iter_mut().zip(ch.rows()).enumerate() {
        let mut d = 0.0;
        for (pyx, py) in row.iter().zip(&p) {
            if *pyx > 0.0 {
                d += pyx * (pyx / py.max(OUTPUT_FLOOR)).ln();
            }
        }
        value += q[x] * d;
        *g = (d - 1.0) / LN_2;
    }
    hess.iter_mut().for_each(|h| *h = 0.0);
    for (y, py) in p.iter().enumerate() {
        if *py <= 0.0 {
            continue;
        }
        for x in 0..n {
            let a = ch.rows[x * ch.output_size + y];
            if a == 0.0 {
                continue;
            }
            let scaled = a / py;
            for x2 in x..n {
                let b = ch.rows[x2 * ch.output_size + y];
                if b != 0.0 {
                    hess[x * n + x2] -= scaled * b;
                }
            }
        }
    }
    for x in 0..n {
        for x2 in x..n {
            let v = hess[x * n + x2] / LN_2;
            hess[x * n + x2] = v;
            hess[x2 * n + x] = v;
        }
    }
    value / LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hb(p: f64) -> f64 {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    }

    fn q(p: &[f64]) -> InputDistribution {
        InputDistribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn bsc_rows() {
        assert_eq!(make_bsc(0.0).unwrap(), Dmc::identity(2).unwrap());
        assert_eq!(
            make_bsc(0.12).unwrap().to_rows(),
            vec![vec![0.88, 0.12], vec![0.12, 0.88]]
        );
        assert!(make_bsc(0.5).unwrap().rows().flatten().all(|&p| p == 0.5));
        assert!(matches!(
            make_bsc(1.2),
            Err(Error::InvalidProbability { name: "eps", .. })
        ));
        assert!(make_bsc(-0.1).is_err());
    }

    #[test]
    fn z_rows() {
        assert_eq!(make_z(0.0).unwrap(), Dmc::identity(2).unwrap());
        assert_eq!(
            make_z(0.3).unwrap().to_rows(),
            vec![vec![1.0, 0.0], vec![0.3, 0.7]]
        );
        assert_eq!(
            make_z(1.0).unwrap().to_rows(),
            vec![vec![1.0, 0.0], vec![1.0, 0.0]]
        );
        assert!(make_z(f64::NAN).is_err());
    }

    #[test]
    fn rejects_bad_rows() {
        let err = Dmc::new(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap_err();
        assert!(err.to_string().contains("row 0"), "{err}");
        assert!(Dmc::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(Dmc::new(vec![]).is_err());
        assert!(Dmc::new(vec![vec![1.5, -0.5]]).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(InputDistribution::new(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(InputDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(InputDistribution::new(vec![1.2, -0.2]).is_err());
        let d = InputDistribution::new(vec![0.25, 0.75 + 5e-13]).unwrap();
        assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn output_distribution_examples() {
        let u = InputDistribution::uniform(2).unwrap();
        let p = output_distribution(&u, &make_bsc(0.12).unwrap()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);

        let z = make_z(0.3).unwrap();
        let p = output_distribution(&q(&[0.0, 1.0]), &z).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-15 && (p[1] - 0.7).abs() < 1e-15);

        // 0.6·[1,0] + 0.4·[0.3,0.7] = [0.72, 0.28]
        let p = output_distribution(&q(&[0.6, 0.4]), &z).unwrap();
        assert!((p[0] - 0.72).abs() < 1e-15 && (p[1] - 0.28).abs() < 1e-15);

        assert!(matches!(
            output_distribution(&InputDistribution::uniform(3).unwrap(), &z),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mutual_information_examples() {
        let u = InputDistribution::uniform(2).unwrap();
        let i = mutual_information(&u, &make_bsc(0.12).unwrap()).unwrap();
        assert!((i - (1.0 - hb(0.12))).abs() < 1e-12);
        assert!((i - 0.470_639_134_712_635_6).abs() < 1e-12);

        let id = Dmc::identity(3).unwrap();
        let d = q(&[0.2, 0.3, 0.5]);
        let h = -[0.2f64, 0.3, 0.5].iter().map(|p| p * p.log2()).sum::<f64>();
        assert!((mutual_information(&d, &id).unwrap() - h).abs() < 1e-12);

        let i = mutual_information(&u, &make_z(0.6).unwrap()).unwrap();
        assert!((i - (hb(0.2) - 0.5 * hb(0.6))).abs() < 1e-12);
        assert!((i - 0.236_452_797_660_028).abs() < 1e-12);
    }

    #[test]
    fn received_energy_examples() {
        let b = EnergyFunctional::hamming();
        let u = InputDistribution::uniform(2).unwrap();
        for eps in [0.0, 0.12, 0.3, 0.5, 1.0] {
            let e = received_energy(&u, &make_bsc(eps).unwrap(), &b).unwrap();
            assert!((e - 0.5).abs() < 1e-15);
        }
        let one = q(&[0.0, 1.0]);
        let e = received_energy(&one, &make_z(0.3).unwrap(), &b).unwrap();
        assert!((e - 0.7).abs() < 1e-15);
        let e = received_energy(&one, &make_bsc(0.12).unwrap(), &b).unwrap();
        assert!((e - 0.88).abs() < 1e-15);
        assert!(received_energy(
            &one,
            &make_bsc(0.1).unwrap(),
            &EnergyFunctional::new(vec![1.0]).unwrap()
        )
        .is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ch = Dmc::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.6, 0.3],
            vec![0.25, 0.25, 0.5],
        ])
        .unwrap();
        let q0 = [0.2, 0.5, 0.3];
        let mut g = [0.0; 3];
        let mut hess = [0.0; 9];
        let v = mi_second_order(&q0, &ch, &mut g, &mut hess);
        assert!((v - mi_bits(&q0, &ch)).abs() < 1e-14);
        // I extended off the simplex is q·D(q) with p_Y linear in q; central
        // differences of that extension give the raw partials.
        let ext = |q: &[f64]| {
            let p = output_of(q, &ch);
            q.iter()
                .zip(ch.rows())
                .map(|(qx, row)| {
                    qx * row
                        .iter()
                        .zip(&p)
                        .filter(|(a, _)| **a > 0.0)
                        .map(|(a, py)| a * (a / py).log2())
                        .sum::<f64>()
                })
                .sum::<f64>()
        };
        let h = 1e-6;
        for x in 0..3 {
            let mut up = q0;
            let mut dn = q0;
            up[x] += h;
            dn[x] -= h;
            let fd = (ext(&up) - ext(&dn)) / (2.0 * h);
            assert!((fd - g[x]).abs() < 1e-6, "x={x} fd={fd} g={}", g[x]);
            let mut gu = [0.0; 3];
            let mut gd = [0.0; 3];
            mi_gradient(&up, &ch, &mut gu);
            mi_gradient(&dn, &ch, &mut gd);
            for x2 in 0..3 {
                let fd2 = (gu[x2] - gd[x2]) / (2.0 * h);
                assert!((fd2 - hess[x2 * 3 + x]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn product_channel_and_energy() {
        let bsc = make_bsc(0.12).unwrap();
        let prod = bsc.product(&bsc);
        assert_eq!(prod.input_size(), 4);
        assert!((prod.row(1)[2] - 0.12 * 0.12).abs() < 1e-15);
        let b = EnergyFunctional::hamming();
        assert_eq!(b.product(&b).values(), &[0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn problem_validation() {
        let z = make_z(0.3).unwrap();
        let b = EnergyFunctional::hamming();
        assert!(MulticastProblem::common(vec![], vec![], 0.0).is_err());
        assert!(MulticastProblem::new(vec![z.clone()], vec![b.clone()], vec![-0.1]).is_err());
        assert!(MulticastProblem::new(vec![z.clone()], vec![b.clone()], vec![0.1, 0.2]).is_err());
        let tern = Dmc::identity(3).unwrap();
        assert!(
            MulticastProblem::common(vec![z.clone(), tern], vec![b.clone(), b.clone()], 0.0)
                .is_err()
        );
        let p = MulticastProblem::new(
            vec![z.clone(), make_bsc(0.1).unwrap()],
            vec![b.clone(), b],
            vec![0.1, 0.2],
        )
        .unwrap();
        let sub = p.restrict(&[1]).unwrap();
        assert_eq!(sub.constraints(), &[0.2]);
        assert!(p.restrict(&[2]).is_err());
    }
}
