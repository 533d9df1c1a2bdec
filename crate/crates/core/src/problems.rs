//! Benchmark quantities of interest.
//!
//! * ridge function of the input sum,
//! * 1-D elliptic equation with a log-normal Karhunen–Loève coefficient,
//! * KdV soliton driven by Karhunen–Loève additive noise,
//! * a 100-dimensional quadratic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numeric::{bisect, composite_gauss_legendre, QuadratureRule};

/// `s + 0.25 s^2 + 0.025 s^3` with `s = sum xi_i`.
pub fn ridge_value(xi: &[f64]) -> f64 {
    let s: f64 = xi.iter().sum();
    s + 0.25 * s * s + 0.025 * s * s * s
}

/// `sum xi_i + 0.25 (sum xi_i / sqrt(i))^2`, with 1-based i.
pub fn highdim_value(xi: &[f64]) -> f64 {
    let mut linear = 0.0;
    let mut weighted = 0.0;
    for (i, &x) in xi.iter().enumerate() {
        linear += x;
        weighted += x / ((i + 1) as f64).sqrt();
    }
    linear + 0.25 * weighted * weighted
}

/// Orthogonal matrix whose first row is `d^{-1/2} (1, ..., 1)`; the other rows
/// come from Gram–Schmidt on the standard basis.
pub fn ridge_analytic_rotation(dimension: usize) -> Result<DMatrix<f64>> {
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let d = dimension;
    let mut rows: Vec<DVector<f64>> = vec![DVector::from_element(d, 1.0 / (d as f64).sqrt())];
    for k in 0..d {
        if rows.len() == d {
            break;
        }
        let mut v = DVector::zeros(d);
        v[k] = 1.0;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for r in &rows {
                let proj = r.dot(&v);
                v.axpy(-proj, r, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            rows.push(v / norm);
        }
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

/// One eigenpair of the exponential kernel on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlMode {
    pub frequency: f64,
    pub eigenvalue: f64,
    /// Symmetric about x = 1/2 (cosine) or antisymmetric (sine).
    pub even: bool,
    norm: f64,
}

impl KlMode {
    /// Normalized eigenfunction at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let s = x - 0.5;
        if self.even {
            (self.frequency * s).cos() / self.norm
        } else {
            (self.frequency * s).sin() / self.norm
        }
    }
}

/// Leading eigenpairs of `C(x, x') = exp(-|x - x'| / l_c)` on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct KlExpansion {
    pub correlation_length: f64,
    pub modes: Vec<KlMode>,
}

impl KlExpansion {
    pub fn dimension(&self) -> usize {
        self.modes.len()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    /// Fraction of the kernel trace (which is 1) captured by the retained modes.
    pub fn captured_variance(&self) -> f64 {
        self.modes.iter().map(|m| m.eigenvalue).sum()
    }
}

/// First `dimension` eigenpairs in descending eigenvalue order.
///
/// With `c = 1 / l_c` and the interval centred at 1/2, even modes solve
/// `c cos(w/2) = w sin(w/2)` and odd modes solve `w cos(w/2) = -c sin(w/2)`;
/// the eigenvalue is `2c / (w^2 + c^2)`. Roots interleave, one per half period.
pub fn kl_eigenpairs(correlation_length: f64, dimension: usize) -> Result<KlExpansion> {
    if !(correlation_length > 0.0 && correlation_length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "correlation length must be positive, got {correlation_length}"
        )));
    }
    if dimension == 0 {
        return Err(Error::InvalidParameter("KL dimension must be at least 1".into()));
    }
    let c = 1.0 / correlation_length;
    let mut modes = Vec::with_capacity(dimension);
    for i in 0..dimension {
        let k = (i / 2) as f64;
        let even = i % 2 == 0;
        let (lo, hi) = if even {
            (2.0 * k * PI, 2.0 * k * PI + PI)
        } else {
            (2.0 * k * PI + PI, 2.0 * k * PI + 2.0 * PI)
        };
        let omega = if even {
            bisect(|w| c * (0.5 * w).cos() - w * (0.5 * w).sin(), lo, hi, 1e-14 * hi, 200)?
        } else {
            bisect(|w| w * (0.5 * w).cos() + c * (0.5 * w).sin(), lo, hi, 1e-14 * hi, 200)?
        };
        let half = omega.sin() / (2.0 * omega);
        let norm = if even { 0.5 + half } else { 0.5 - half }.sqrt();
        modes.push(KlMode {
            frequency: omega,
            eigenvalue: 2.0 * c / (omega * omega + c * c),
            even,
            norm,
        });
    }
    Ok(KlExpansion {
        correlation_length,
        modes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Ridge,
    Elliptic,
    Kdv,
    HighDim,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::Ridge,
        ProblemKind::Elliptic,
        ProblemKind::Kdv,
        ProblemKind::HighDim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Ridge => "ridge",
            ProblemKind::Elliptic => "elliptic",
            ProblemKind::Kdv => "kdv",
            ProblemKind::HighDim => "highdim",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ridge" => Ok(ProblemKind::Ridge),
            "elliptic" => Ok(ProblemKind::Elliptic),
            "kdv" => Ok(ProblemKind::Kdv),
            "highdim" | "hd" => Ok(ProblemKind::HighDim),
            other => Err(Error::InvalidParameter(format!("unknown problem '{other}'"))),
        }
    }
}

/// Problem constants. Fields not used by a kind are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub dimension: usize,
    /// Field amplitude sigma (elliptic, KdV).
    pub sigma: f64,
    /// KL correlation length (elliptic, KdV).
    pub correlation_length: f64,
    /// Coefficient floor a0 (elliptic).
    pub a0: f64,
    /// QoI location (elliptic in [0, 1]; KdV on the real line).
    pub location: f64,
    /// QoI time (KdV, in (0, 1]).
    pub time: f64,
    /// Composite Gauss–Legendre panels per integration interval.
    pub panels: usize,
}

impl ProblemSpec {
    pub const DEFAULT_PANELS: usize = 24;
    /// Gauss–Legendre nodes per panel.
    pub const PANEL_ORDER: usize = 10;

    pub fn defaults(kind: ProblemKind) -> Self {
        let base = ProblemSpec {
            kind,
            dimension: 12,
            sigma: 0.0,
            correlation_length: 0.0,
            a0: 0.0,
            location: 0.0,
            time: 0.0,
            panels: Self::DEFAULT_PANELS,
        };
        match kind {
            ProblemKind::Ridge => base,
            ProblemKind::HighDim => ProblemSpec {
                dimension: 100,
                ..base
            },
            ProblemKind::Elliptic => ProblemSpec {
                dimension: 15,
                sigma: 0.5,
                correlation_length: 0.2,
                a0: 0.1,
                location: 0.35,
                ..base
            },
            ProblemKind::Kdv => ProblemSpec {
                dimension: 10,
                sigma: 0.4,
                correlation_length: 0.25,
                location: 6.0,
                time: 1.0,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!("{} {what} = {v}", self.kind)))
        };
        if self.dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        match self.kind {
            ProblemKind::Ridge | ProblemKind::HighDim => Ok(()),
            ProblemKind::Elliptic | ProblemKind::Kdv => {
                if self.sigma.is_nan() || self.sigma <= 0.0 {
                    return bad("sigma", self.sigma);
                }
                if self.correlation_length.is_nan() || self.correlation_length <= 0.0 {
                    return bad("correlation length", self.correlation_length);
                }
                if self.panels == 0 {
                    return Err(Error::InvalidParameter("panels must be positive".into()));
                }
                if self.kind == ProblemKind::Elliptic {
                    if self.a0.is_nan() || self.a0 <= 0.0 {
                        return bad("a0", self.a0);
                    }
                    if !(0.0..=1.0).contains(&self.location) {
                        return bad("location", self.location);
                    }
                } else if !(self.time > 0.0 && self.time <= 1.0) {
                    return bad("time", self.time);
                }
                Ok(())
            }
        }
    }
}

/// Quadrature nodes with `sqrt(lambda_i) phi_i` tabulated at each node.
#[derive(Debug, Clone)]
struct ModeTable {
    rule: QuadratureRule,
    // node-major: table[node * d + i]
    table: Vec<f64>,
}

impl ModeTable {
    fn new(kl: &KlExpansion, rule: QuadratureRule) -> Self {
        let d = kl.dimension();
        let mut table = Vec::with_capacity(rule.len() * d);
        for &x in &rule.nodes {
            for m in &kl.modes {
                table.push(m.eigenvalue.sqrt() * m.eval(x));
            }
        }
        ModeTable { rule, table }
    }
}

/// `u(x_qoi)` for `-(a u')' = 1` on (0, 1) with `u(0) = u(1) = 0` and
/// `a(x) = a0 + exp(sigma sum sqrt(lambda_i) phi_i(x) xi_i)`.
#[derive(Debug, Clone)]
pub struct EllipticOracle {
    kl: KlExpansion,
    a0: f64,
    sigma: f64,
    location: f64,
    left: ModeTable,
    right: ModeTable,
}

impl EllipticOracle {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        if spec.kind != ProblemKind::Elliptic {
            return Err(Error::InvalidParameter("not an elliptic problem spec".into()));
        }
        spec.validate()?;
        let kl = kl_eigenpairs(spec.correlation_length, spec.dimension)?;
        let order = ProblemSpec::PANEL_ORDER;
        let left = composite_gauss_legendre(order, spec.panels, 0.0, spec.location);
        let right = composite_gauss_legendre(order, spec.panels, spec.location, 1.0);
        Ok(EllipticOracle {
            left: ModeTable::new(&kl, left),
            right: ModeTable::new(&kl, right),
            kl,
            a0: spec.a0,
            sigma: spec.sigma,
            location: spec.location,
        })
    }

    pub fn kl(&self) -> &KlExpansion {
        &self.kl
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    /// Log-coefficient `sigma sum sqrt(lambda_i) phi_i xi_i` at each node of `piece`.
    fn log_coefficients(&self, piece: &ModeTable, xi: &[f64]) -> Result<Vec<f64>> {
        let d = xi.len();
        piece
            .rule
            .nodes
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                let row = &piece.table[j * d..(j + 1) * d];
                let s = self.sigma * row.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
                if s.is_finite() {
                    Ok(s)
                } else {
                    Err(Error::Overflow(format!("log-coefficient is {s} at x = {x}")))
                }
            })
            .collect()
    }

    /// `e^{shift} (int 1/a, int x/a)` over one piece, with `0 <= shift <= max(s, 0)`.
    fn scaled_moments(&self, piece: &ModeTable, logs: &[f64], shift: f64) -> (f64, f64) {
        let (mut m0, mut m1) = (0.0, 0.0);
        for ((&x, &w), &s) in piece.rule.nodes.iter().zip(&piece.rule.weights).zip(logs) {
            // e^{shift} / (a0 + e^s) written with non-positive exponents only
            let inv_a = if s > 0.0 {
                (shift - s).exp() / (1.0 + self.a0 * (-s).exp())
            } else {
                shift.exp() / (self.a0 + s.exp())
            };
            m0 += w * inv_a;
            m1 += w * x * inv_a;
        }
        (m0, m1)
    }

    pub fn qoi(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.kl.dimension() {
            return Err(Error::mismatch("elliptic input", self.kl.dimension(), xi.len()));
        }
        let left = self.log_coefficients(&self.left, xi)?;
        let right = self.log_coefficients(&self.right, xi)?;
        // u is homogeneous of degree one in 1/a; when the coefficient is huge
        // everywhere the moments are accumulated relative to its minimum
        let shift = left.iter().chain(&right).fold(f64::INFINITY, |m, &s| m.min(s)).max(0.0);
        let (l0, l1) = self.scaled_moments(&self.left, &left, shift);
        let (r0, r1) = self.scaled_moments(&self.right, &right, shift);
        let total = l0 + r0;
        if total == 0.0 {
            return Ok(0.0);
        }
        // flux constant a(0) u'(0) from u(1) = 0
        let flux = (l1 + r1) / total;
        Ok((flux * l0 - l1) * (-shift).exp())
    }
}

/// KdV soliton with KL additive forcing, reduced to
/// `sigma sum A_i xi_i - 2 sech^2(x - 4t + 6 sigma sum B_i xi_i)`.
#[derive(Debug, Clone)]
pub struct KdvOracle {
    kl: KlExpansion,
    sigma: f64,
    shift: f64,
    /// `sqrt(lambda_i) int_0^t phi_i`
    pub a: Vec<f64>,
    /// `sqrt(lambda_i) int_0^t int_0^z phi_i(y) dy dz`
    pub b: Vec<f64>,
}

impl KdvOracle {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        if spec.kind != ProblemKind::Kdv {
            return Err(Error::InvalidParameter("not a KdV problem spec".into()));
        }
        spec.validate()?;
        let kl = kl_eigenpairs(spec.correlation_length, spec.dimension)?;
        let (a, b) = kdv_integrals(&kl, spec.time, spec.panels);
        Ok(KdvOracle {
            kl,
            sigma: spec.sigma,
            shift: spec.location - 4.0 * spec.time,
            a,
            b,
        })
    }

    pub fn kl(&self) -> &KlExpansion {
        &self.kl
    }

    pub fn qoi(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.kl.dimension() {
            return Err(Error::mismatch("KdV input", self.kl.dimension(), xi.len()));
        }
        let linear: f64 = self.a.iter().zip(xi).map(|(a, x)| a * x).sum();
        let phase: f64 = self.b.iter().zip(xi).map(|(b, x)| b * x).sum();
        let arg = self.shift + 6.0 * self.sigma * phase;
        Ok(self.sigma * linear - 2.0 * sech_squared(arg))
    }
}

pub fn sech_squared(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}

/// `A_i` and `B_i` up to time `t`; the double integral is reduced by Fubini
/// to `int_0^t (t - y) phi_i(y) dy`.
pub fn kdv_integrals(kl: &KlExpansion, time: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = composite_gauss_legendre(ProblemSpec::PANEL_ORDER, panels, 0.0, time);
    kl.modes
        .iter()
        .map(|m| {
            let scale = m.eigenvalue.sqrt();
            let a = rule.integrate(|y| m.eval(y));
            let b = rule.integrate(|y| (time - y) * m.eval(y));
            (scale * a, scale * b)
        })
        .unzip()
}

/// A ready-to-evaluate benchmark.
#[derive(Debug, Clone)]
pub enum Problem {
    Ridge { dimension: usize },
    Elliptic(EllipticOracle),
    Kdv(KdvOracle),
    HighDim { dimension: usize },
}

impl Problem {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.validate()?;
        Ok(match spec.kind {
            ProblemKind::Ridge => Problem::Ridge {
                dimension: spec.dimension,
            },
            ProblemKind::HighDim => Problem::HighDim {
                dimension: spec.dimension,
            },
            ProblemKind::Elliptic => Problem::Elliptic(EllipticOracle::new(spec)?),
            ProblemKind::Kdv => Problem::Kdv(KdvOracle::new(spec)?),
        })
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::Ridge { .. } => ProblemKind::Ridge,
            Problem::Elliptic(_) => ProblemKind::Elliptic,
            Problem::Kdv(_) => ProblemKind::Kdv,
            Problem::HighDim { .. } => ProblemKind::HighDim,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Problem::Ridge { dimension } | Problem::HighDim { dimension } => *dimension,
            Problem::Elliptic(o) => o.kl().dimension(),
            Problem::Kdv(o) => o.kl().dimension(),
        }
    }

    pub fn evaluate(&self, xi: &[f64]) -> Result<f64> {
        let d = self.dimension();
        if xi.len() != d {
            return Err(Error::mismatch("problem input", d, xi.len()));
        }
        match self {
            Problem::Ridge { .. } => Ok(ridge_value(xi)),
            Problem::HighDim { .. } => Ok(highdim_value(xi)),
            Problem::Elliptic(o) => o.qoi(xi),
            Problem::Kdv(o) => o.qoi(xi),
        }
    }

    /// Outputs at every row of `samples`.
    pub fn evaluate_rows(&self, samples: &DMatrix<f64>) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(samples.nrows());
        let mut xi = vec![0.0; samples.ncols()];
        for q in 0..samples.nrows() {
            for (k, x) in xi.iter_mut().enumerate() {
                *x = samples[(q, k)];
            }
            out[q] = self.evaluate(&xi)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::gauss_legendre;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ridge_spot_values() {
        assert_eq!(ridge_value(&[0.0; 5]), 0.0);
        assert!((ridge_value(&[1.0, 1.0]) - 3.2).abs() < 1e-15);
    }

    #[test]
    fn ridge_duplicate_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let xi: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = xi.iter().fold(0.0, |a, b| a + b);
            let expect = s * (1.0 + s * (0.25 + 0.025 * s));
            assert!((ridge_value(&xi) - expect).abs() < 1e-14 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn highdim_spot_values() {
        assert_eq!(highdim_value(&[0.0; 100]), 0.0);
        let mut e1 = vec![0.0; 100];
        e1[0] = 1.0;
        assert_eq!(highdim_value(&e1), 1.25);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xi: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lin: f64 = xi.iter().sum();
        let q: f64 = (1..=100).map(|i| xi[i - 1] * (1.0 / i as f64).sqrt()).sum();
        assert!((highdim_value(&xi) - (lin + q * q / 4.0)).abs() < 1e-13);
    }

    #[test]
    fn analytic_rotation_shapes() {
        assert_eq!(ridge_analytic_rotation(1).unwrap(), DMatrix::from_element(1, 1, 1.0));
        let a4 = ridge_analytic_rotation(4).unwrap();
        assert!(a4.row(0).iter().all(|&v| (v - 0.5).abs() < 1e-15));
        for d in [2, 7, 12, 30] {
            let a = ridge_analytic_rotation(d).unwrap();
            let err = (&a * a.transpose() - DMatrix::identity(d, d)).abs().max();
            assert!(err < 1e-12, "d={d}: {err}");
        }
        assert!(ridge_analytic_rotation(0).is_err());
    }

    #[test]
    fn kl_modes_are_normalized_and_satisfy_eigen_equation() {
        let kl = kl_eigenpairs(0.2, 15).unwrap();
        let ev = kl.eigenvalues();
        for w in ev.windows(2) {
            assert!(w[0] > w[1] && w[1] > 0.0);
        }
        let rule = gauss_legendre(200, 0.0, 1.0);
        for m in &kl.modes {
            let n = rule.integrate(|x| m.eval(x).powi(2));
            assert!((n - 1.0).abs() < 1e-8);
        }
        // eigen residual at a few points; the kernel kink at x' = x is split
        let c = 1.0 / 0.2;
        for m in kl.modes.iter().take(6) {
            for &x in &[0.1, 0.47, 0.9] {
                let l = gauss_legendre(120, 0.0, x);
                let r = gauss_legendre(120, x, 1.0);
                let f = |y: f64| (-c * (x - y).abs()).exp() * m.eval(y);
                let integral = l.integrate(f) + r.integrate(f);
                assert!((integral - m.eigenvalue * m.eval(x)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn kl_truncation_fractions() {
        // reference sums from a 2000-point midpoint Nystrom discretization
        let a = kl_eigenpairs(0.2, 15).unwrap().captured_variance();
        let b = kl_eigenpairs(0.25, 10).unwrap().captured_variance();
        assert!(a >= 0.93);
        assert!((a - 0.930_651).abs() < 1e-5, "{a}");
        assert!((b - 0.915_749).abs() < 1e-5, "{b}");
        assert!(kl_eigenpairs(0.0, 3).is_err());
        assert!(kl_eigenpairs(0.3, 0).is_err());
    }

    #[test]
    fn elliptic_constant_coefficient() {
        let spec = ProblemSpec::defaults(ProblemKind::Elliptic);
        let o = EllipticOracle::new(&spec).unwrap();
        let u = o.qoi(&[0.0; 15]).unwrap();
        let exact = (0.35 - 0.35 * 0.35) / (2.0 * 1.1);
        assert!((u - exact).abs() < 1e-12);
        assert!((u - 0.103_409_090_909_090_9).abs() < 1e-8);
    }

    #[test]
    fn elliptic_boundaries_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let xi: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
        for loc in [0.0, 1.0] {
            let spec = ProblemSpec {
                location: loc,
                ..ProblemSpec::defaults(ProblemKind::Elliptic)
            };
            let o = EllipticOracle::new(&spec).unwrap();
            assert!(o.qoi(&xi).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn elliptic_self_convergence() {
        let base = ProblemSpec::defaults(ProblemKind::Elliptic);
        let fine = ProblemSpec {
            panels: 2 * base.panels,
            ..base
        };
        let (a, b) = (EllipticOracle::new(&base).unwrap(), EllipticOracle::new(&fine).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let xi: Vec<f64> = (0..15)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            assert!((a.qoi(&xi).unwrap() - b.qoi(&xi).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn elliptic_rejects_non_finite_input() {
        let o = EllipticOracle::new(&ProblemSpec::defaults(ProblemKind::Elliptic)).unwrap();
        let mut xi = vec![0.0; 15];
        xi[0] = f64::INFINITY;
        assert!(matches!(o.qoi(&xi), Err(Error::Overflow(_))));
        // very large but finite inputs stay finite
        xi[0] = 1e5;
        assert!(o.qoi(&xi).unwrap().is_finite());
    }

    #[test]
    fn kdv_origin_value() {
        let o = KdvOracle::new(&ProblemSpec::defaults(ProblemKind::Kdv)).unwrap();
        let v = o.qoi(&[0.0; 10]).unwrap();
        let expect = -2.0 / 2f64.cosh().powi(2);
        assert!((v - expect).abs() < 1e-12);
        assert!((v + 0.141_301_64).abs() < 1e-8);
    }

    #[test]
    fn kdv_integrals_match_closed_form() {
        let kl = kl_eigenpairs(0.25, 10).unwrap();
        let (a, b) = kdv_integrals(&kl, 1.0, 24);
        for (i, m) in kl.modes.iter().enumerate() {
            let w = m.frequency;
            let s = m.eigenvalue.sqrt() / m_norm(m);
            let (ea, eb) = if m.even {
                // int cos(w(y-1/2)) = 2 sin(w/2)/w ; int (1-y) cos(..) = sin(w/2)/w by symmetry
                (2.0 * (0.5 * w).sin() / w, (0.5 * w).sin() / w)
            } else {
                // int sin(w(y-1/2)) = 0 ; int (1-y) sin(w(y-1/2)) = -int s sin(w s) ds over [-1/2,1/2]
                let t = (0.5 * w).sin() / (w * w) - 0.5 * (0.5 * w).cos() / w;
                (0.0, -2.0 * t)
            };
            assert!((a[i] - s * ea).abs() < 1e-12, "A_{i}");
            assert!((b[i] - s * eb).abs() < 1e-12, "B_{i}");
        }
    }

    fn m_norm(m: &KlMode) -> f64 {
        // eval(1/2 + s) * norm recovers the raw sinusoid
        if m.even {
            1.0 / m.eval(0.5)
        } else {
            let s = 0.3;
            (m.frequency * s).sin() / m.eval(0.5 + s)
        }
    }

    #[test]
    fn kdv_gradient_at_origin() {
        let o = KdvOracle::new(&ProblemSpec::defaults(ProblemKind::Kdv)).unwrap();
        let sigma = 0.4;
        // d/dz sech^2(z) = -2 sech^2(z) tanh(z)
        let dsech = -2.0 * sech_squared(2.0) * 2f64.tanh();
        let h = 1e-6;
        for i in 0..10 {
            let mut p = vec![0.0; 10];
            let mut q = vec![0.0; 10];
            p[i] = h;
            q[i] = -h;
            let fd = (o.qoi(&p).unwrap() - o.qoi(&q).unwrap()) / (2.0 * h);
            let exact = sigma * o.a[i] - 2.0 * dsech * 6.0 * sigma * o.b[i];
            assert!((fd - exact).abs() < 1e-8, "i={i}: {fd} vs {exact}");
        }
    }

    #[test]
    fn kdv_integrals_self_converge() {
        let kl = kl_eigenpairs(0.25, 10).unwrap();
        let (a1, b1) = kdv_integrals(&kl, 1.0, 24);
        let (a2, b2) = kdv_integrals(&kl, 1.0, 48);
        for i in 0..10 {
            assert!((a1[i] - a2[i]).abs() < 1e-10);
            assert!((b1[i] - b2[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn problem_dispatch_and_validation() {
        for kind in ProblemKind::ALL {
            let p = Problem::new(&ProblemSpec::defaults(kind)).unwrap();
            assert_eq!(p.kind(), kind);
            let xi = vec![0.0; p.dimension()];
            assert!(p.evaluate(&xi).unwrap().is_finite());
            assert!(p.evaluate(&xi[1..]).is_err());
            assert_eq!(kind.name().parse::<ProblemKind>().unwrap(), kind);
        }
        let bad = ProblemSpec {
            a0: 0.0,
            ..ProblemSpec::defaults(ProblemKind::Elliptic)
        };
        assert!(Problem::new(&bad).is_err());
        assert!("nope".parse::<ProblemKind>().is_err());
    }
}
