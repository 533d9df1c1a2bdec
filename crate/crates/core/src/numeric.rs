//! Gauss quadrature rules and a bracketing root finder.
//!
//! Nodes and weights come from the Golub–Welsch eigenvalue method applied to
//! the Jacobi matrix of the monic three-term recurrence of each family.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::basis::PolynomialFamily;
use crate::error::{Error, Result};

/// A quadrature rule: nodes and matching weights.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss rule with `n` nodes for the probability measure of `family`
/// (uniform on [-1, 1], standard normal, or unit exponential). Weights sum to 1.
pub fn gauss_rule(family: PolynomialFamily, n: usize) -> QuadratureRule {
    assert!(n >= 1, "a Gauss rule needs at least one node");
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        jacobi[(k, k)] = match family {
            PolynomialFamily::Legendre | PolynomialFamily::Hermite => 0.0,
            PolynomialFamily::Laguerre => 2.0 * kf + 1.0,
        };
        if k + 1 < n {
            let m = kf + 1.0;
            let beta = match family {
                PolynomialFamily::Legendre => m * m / (4.0 * m * m - 1.0),
                PolynomialFamily::Hermite => m,
                PolynomialFamily::Laguerre => m * m,
            };
            jacobi[(k, k + 1)] = beta.sqrt();
            jacobi[(k + 1, k)] = beta.sqrt();
        }
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Legendre rule on `[a, b]` with Lebesgue weights (summing to `b - a`).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> QuadratureRule {
    let reference = gauss_rule(PolynomialFamily::Legendre, n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    QuadratureRule {
        nodes: reference.nodes.iter().map(|&x| mid + half * x).collect(),
        // reference weights integrate against dx/2
        weights: reference.weights.iter().map(|&w| 2.0 * half * w).collect(),
    }
}

/// Composite Gauss–Legendre on `[a, b]`: `panels` equal panels of `order` nodes each.
/// An empty interval yields an empty rule.
pub fn composite_gauss_legendre(order: usize, panels: usize, a: f64, b: f64) -> QuadratureRule {
    let mut rule = QuadratureRule {
        nodes: Vec::with_capacity(order * panels),
        weights: Vec::with_capacity(order * panels),
    };
    if b <= a || panels == 0 {
        return rule;
    }
    let reference = gauss_legendre(order, -1.0, 1.0);
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        for (&x, &w) in reference.nodes.iter().zip(&reference.weights) {
            rule.nodes.push(mid + 0.5 * width * x);
            rule.weights.push(0.5 * width * w);
        }
    }
    rule
}

/// Bisection on a sign-changing bracket. Terminates when the bracket is below
/// `tol` (absolute) or the function vanishes exactly.
pub fn bisect(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::RootFinding(format!(
        "bisection did not reach tolerance {tol} in {max_iter} iterations"
    )))
}
