//! Gauss-Legendre rules: fixed composite panels and an adaptive integrator.

use crate::error::{Error, Result};

/// Points per panel in the composite and adaptive rules.
pub(crate) const ORDER: usize = 16;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, by Newton iteration
/// on the Legendre polynomial.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Composite rule with `panels` equal panels of [`ORDER`] points on `[a, b]`.
pub(crate) fn composite(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(ORDER);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * ORDER);
    let mut weights = Vec::with_capacity(panels * ORDER);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Adaptive bisection with a [`ORDER`]-point rule on each piece; an interval
/// is accepted when its two halves agree with it to within its share of
/// `tol`. The starting partition has `panels` pieces.
pub(crate) fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
) -> Result<f64> {
    let (x, w) = gauss_legendre(ORDER);
    let rule = |lo: f64, hi: f64| {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        x.iter()
            .zip(&w)
            .map(|(xi, wi)| wi * f(mid + half * xi))
            .sum::<f64>()
            * half
    };
    let width = b - a;
    let h = width / panels as f64;
    let mut total = 0.0;
    let mut stack: Vec<(f64, f64, f64, u32)> = (0..panels)
        .rev()
        .map(|p| {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == panels { b } else { lo + h };
            (lo, hi, rule(lo, hi), 0)
        })
        .collect();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (left, right) = (rule(lo, mid), rule(mid, hi));
        let refined = left + right;
        let allowed = tol * (hi - lo) / width;
        if (refined - whole).abs() <= allowed {
            total += refined;
        } else if depth >= MAX_DEPTH {
            return Err(Error::Quadrature(format!(
                "no convergence on [{lo}, {hi}] after {MAX_DEPTH} bisections"
            )));
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    if !total.is_finite() {
        return Err(Error::Quadrature("integral is not finite".into()));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for k in 0..(2 * ORDER) {
            let got: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * xi.powi(k as i32))
                .sum();
            let exact = if k % 2 == 1 {
                0.0
            } else {
                2.0 / (k + 1) as f64
            };
            assert!((got - exact).abs() < 1e-13, "degree {k}");
        }
        let (x, _) = gauss_legendre(5);
        assert!(x[2].abs() < 1e-16 && x.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn composite_gaussian_mass() {
        let (y, w) = composite(-9.0, 9.0, 24);
        let mass: f64 = y
            .iter()
            .zip(&w)
            .map(|(y, w)| w * (-0.5 * y * y).exp())
            .sum::<f64>()
            / (2.0 * std::f64::consts::PI).sqrt();
        assert!((mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_sharp_features() {
        let v = adaptive(|x| (-1e4 * (x - 0.3).powi(2)).exp(), -1.0, 1.0, 1, 1e-12).unwrap();
        assert!((v - (std::f64::consts::PI / 1e4).sqrt()).abs() < 1e-12);
        let v = adaptive(|x| x.abs().sqrt(), -1.0, 1.0, 2, 1e-10).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-9);
        assert!(adaptive(|x| 1.0 / x, 0.0, 1.0, 1, 1e-10).is_err());
    }
}
