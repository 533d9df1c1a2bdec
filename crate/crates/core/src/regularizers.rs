//! Sparsity-promoting penalties and their proximal operators.
//!
//! `prox(y; mu)` returns a global minimizer of `mu * J(t) + 0.5 * |t - y|^2`.
//! All kinds except `L1MinusL2` are separable and act componentwise.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const ERF_NEWTON_MAX_ITER: usize = 50;
const ERF_NEWTON_TOL: f64 = 1e-12;

/// Penalty functional J used in the coefficient subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// `sum |c_n|`.
    L1,
    /// `sum sqrt|c_n|`, proximated by half thresholding.
    LHalf,
    /// Transformed l1: `sum (gamma + 1)|c_n| / (gamma + |c_n|)`.
    TransformedL1 { gamma: f64 },
    /// `|c|_1 - |c|_2`.
    L1MinusL2,
    /// `sum int_0^{|c_n|} exp(-t^2 / sigma^2) dt`.
    Erf { sigma: f64 },
}

impl Regularizer {
    pub const DEFAULT_GAMMA: f64 = 1.0;
    pub const DEFAULT_SIGMA: f64 = 1.0;

    pub fn transformed_l1(gamma: f64) -> Result<Self> {
        let r = Regularizer::TransformedL1 { gamma };
        r.validate()?;
        Ok(r)
    }

    pub fn erf(sigma: f64) -> Result<Self> {
        let r = Regularizer::Erf { sigma };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Regularizer::TransformedL1 { gamma } if !(gamma > 0.0 && gamma.is_finite()) => Err(
                Error::InvalidParameter(format!("TL1 gamma must be positive, got {gamma}")),
            ),
            Regularizer::Erf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidParameter(format!("ERF sigma must be positive, got {sigma}")),
            ),
            _ => Ok(()),
        }
    }

    /// Short identifier, also accepted by `FromStr`.
    pub fn name(&self) -> &'static str {
        match self {
            Regularizer::L1 => "l1",
            Regularizer::LHalf => "lhalf",
            Regularizer::TransformedL1 { .. } => "tl1",
            Regularizer::L1MinusL2 => "l1-l2",
            Regularizer::Erf { .. } => "erf",
        }
    }

    pub fn is_separable(&self) -> bool {
        !matches!(self, Regularizer::L1MinusL2)
    }

    /// J(c).
    pub fn penalty(&self, c: &[f64]) -> f64 {
        match *self {
            Regularizer::L1 => l1_norm(c),
            Regularizer::LHalf => c.iter().map(|v| v.abs().sqrt()).sum(),
            Regularizer::TransformedL1 { gamma } => c
                .iter()
                .map(|v| (gamma + 1.0) * v.abs() / (gamma + v.abs()))
                .sum(),
            Regularizer::L1MinusL2 => (l1_norm(c) - l2_norm(c)).max(0.0),
            Regularizer::Erf { sigma } => c
                .iter()
                .map(|v| sigma * 0.5 * PI.sqrt() * libm::erf(v.abs() / sigma))
                .sum(),
        }
    }

    /// `mu * J(t) + 0.5 * |t - y|^2`.
    pub fn prox_objective(&self, t: &[f64], y: &[f64], mu: f64) -> f64 {
        let fit: f64 = t.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        mu * self.penalty(t) + 0.5 * fit
    }

    pub fn prox(&self, y: &[f64], mu: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; y.len()];
        self.prox_into(y, mu, &mut out)?;
        Ok(out)
    }

    pub fn prox_into(&self, y: &[f64], mu: f64, out: &mut [f64]) -> Result<()> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "prox weight must be positive, got {mu}"
            )));
        }
        if y.len() != out.len() {
            return Err(Error::mismatch("prox output", y.len(), out.len()));
        }
        match *self {
            Regularizer::L1 => {
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = soft_threshold(v, mu);
                }
            }
            Regularizer::LHalf => {
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = half_threshold(v, mu);
                }
            }
            Regularizer::TransformedL1 { gamma } => {
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = tl1_threshold(v, mu, gamma);
                }
            }
            Regularizer::Erf { sigma } => {
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = erf_prox_scalar(v, mu, sigma)?;
                }
            }
            Regularizer::L1MinusL2 => l1_minus_l2_prox(y, mu, out),
        }
        Ok(())
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Regularizer::TransformedL1 { gamma } => write!(f, "tl1(gamma={gamma})"),
            Regularizer::Erf { sigma } => write!(f, "erf(sigma={sigma})"),
            _ => f.write_str(self.name()),
        }
    }
}

impl FromStr for Regularizer {
    type Err = Error;

    /// Parses a kind name with default shape parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Regularizer::L1),
            "lhalf" | "l1/2" | "l_half" => Ok(Regularizer::LHalf),
            "tl1" => Ok(Regularizer::TransformedL1 {
                gamma: Self::DEFAULT_GAMMA,
            }),
            "l1-l2" | "l1_l2" | "l1minusl2" => Ok(Regularizer::L1MinusL2),
            "erf" => Ok(Regularizer::Erf {
                sigma: Self::DEFAULT_SIGMA,
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown regularizer '{other}'"
            ))),
        }
    }
}

fn l1_norm(c: &[f64]) -> f64 {
    c.iter().map(|v| v.abs()).sum()
}

fn l2_norm(c: &[f64]) -> f64 {
    c.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
pub fn soft_threshold(y: f64, mu: f64) -> f64 {
    y.signum() * (y.abs() - mu).max(0.0)
}

/// Half thresholding: minimizer of `mu sqrt|t| + 0.5 (t - y)^2`.
fn half_threshold(y: f64, mu: f64) -> f64 {
    let a = y.abs();
    // Jump threshold where the nonzero branch ties with zero.
    if a <= 1.5 * mu.powf(2.0 / 3.0) {
        return 0.0;
    }
    let phi = (0.25 * mu * (3.0 / a).powf(1.5)).min(1.0).acos();
    let t = 2.0 / 3.0 * a * (1.0 + (2.0 * PI / 3.0 - 2.0 * phi / 3.0).cos());
    y.signum() * t
}

/// Thresholding for `mu (gamma + 1)|t| / (gamma + |t|) + 0.5 (t - y)^2`.
fn tl1_threshold(y: f64, mu: f64, gamma: f64) -> f64 {
    let a = y.abs();
    let threshold = if mu <= gamma * gamma / (2.0 * (gamma + 1.0)) {
        mu * (gamma + 1.0) / gamma
    } else {
        (2.0 * mu * (gamma + 1.0)).sqrt() - 0.5 * gamma
    };
    if a <= threshold {
        return 0.0;
    }
    let arg = 1.0 - 27.0 * mu * gamma * (gamma + 1.0) / (2.0 * (gamma + a).powi(3));
    let phi = arg.clamp(-1.0, 1.0).acos();
    let t = 2.0 / 3.0 * (gamma + a) * (phi / 3.0).cos() - 2.0 / 3.0 * gamma + a / 3.0;
    y.signum() * t.clamp(0.0, a)
}

fn l1_minus_l2_prox(y: &[f64], mu: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let (mut imax, mut ymax) = (0usize, 0.0f64);
    for (i, &v) in y.iter().enumerate() {
        if v.abs() > ymax {
            ymax = v.abs();
            imax = i;
        }
    }
    if y.is_empty() {
        return;
    }
    if ymax > mu {
        for (o, &v) in out.iter_mut().zip(y) {
            *o = soft_threshold(v, mu);
        }
        let zn = l2_norm(out);
        let scale = (zn + mu) / zn;
        out.iter_mut().for_each(|o| *o *= scale);
    } else {
        // Every 1-sparse vector on a largest entry is optimal; take the first.
        out[imax] = y[imax].signum() * ymax;
    }
}

/// Global minimizer of `mu * int_0^{|t|} exp(-s^2/sigma^2) ds + 0.5 (t - y)^2`.
///
/// Stationary points on `t > 0` solve `phi(t) = t + mu exp(-t^2/sigma^2) = |y|`.
/// `phi` has at most two turning points, so `[0, |y|]` splits into monotone
/// pieces, each holding at most one root; the best of zero and those roots wins.
pub fn erf_prox_scalar(y: f64, mu: f64, sigma: f64) -> Result<f64> {
    let a = y.abs();
    if a == 0.0 {
        return Ok(0.0);
    }
    let s2 = sigma * sigma;
    let g = |t: f64| t + mu * (-t * t / s2).exp() - a;
    let dg = |t: f64| 1.0 - 2.0 * mu * t / s2 * (-t * t / s2).exp();
    let objective =
        |t: f64| mu * sigma * 0.5 * PI.sqrt() * libm::erf(t / sigma) + 0.5 * (t - a) * (t - a);

    let mut breaks = vec![0.0];
    // turning points of phi: (2 mu t / sigma^2) exp(-t^2/sigma^2) = 1
    let peak = sigma / 2f64.sqrt();
    let h = |t: f64| 2.0 * mu * t / s2 * (-t * t / s2).exp() - 1.0;
    if h(peak) > 0.0 {
        let left = crate::numeric::bisect(h, 0.0, peak, 1e-15 * peak, 200)?;
        let mut hi = 2.0 * peak;
        while h(hi) > 0.0 {
            hi *= 2.0;
        }
        let right = crate::numeric::bisect(h, peak, hi, 1e-15 * hi, 200)?;
        breaks.extend([left, right].into_iter().filter(|&t| t > 0.0 && t < a));
    }
    breaks.push(a);

    let mut best_t = 0.0;
    let mut best_f = objective(0.0);
    for seg in breaks.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        // A local minimum needs g to cross from negative to positive.
        let g_hi = g(hi);
        if !(g(lo) < 0.0 && g_hi >= 0.0) {
            continue;
        }
        // the penalty slope can underflow against |y|, leaving the root at |y|
        let t = if g_hi == 0.0 {
            hi
        } else {
            safeguarded_newton(&g, &dg, lo, hi).ok_or(Error::ProxNonConvergence { y, mu })?
        };
        let f = objective(t);
        if f < best_f {
            best_f = f;
            best_t = t;
        }
    }
    Ok(y.signum() * best_t)
}

/// Newton iteration on an increasing bracket `g(lo) < 0 < g(hi)`, falling back
/// to bisection whenever a step leaves the bracket.
fn safeguarded_newton(
    g: &impl Fn(f64) -> f64,
    dg: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
) -> Option<f64> {
    let mut t = 0.5 * (lo + hi);
    for _ in 0..ERF_NEWTON_MAX_ITER {
        let gt = g(t);
        if gt == 0.0 {
            return Some(t);
        }
        if gt < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let d = dg(t);
        let mut next = t - gt / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let tol = ERF_NEWTON_TOL * t.abs().max(1.0);
        if (next - t).abs() <= tol || hi - lo <= tol {
            return Some(next);
        }
        t = next;
    }
    None
}
