//! Orthonormal tensor-product polynomial bases and measurement matrices.
//!
//! Every univariate family is normalized to be orthonormal under its own
//! probability measure, so the degree-0 polynomial is identically one and a
//! Gram matrix computed by Gauss quadrature of the matching rule is the
//! identity.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, Uniform};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Univariate orthonormal polynomial family together with its input measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolynomialFamily {
    /// Uniform measure on [-1, 1].
    Legendre,
    /// Standard normal measure (probabilists' Hermite).
    Hermite,
    /// Unit-rate exponential measure on [0, inf).
    Laguerre,
}

impl PolynomialFamily {
    pub const ALL: [PolynomialFamily; 3] = [
        PolynomialFamily::Legendre,
        PolynomialFamily::Hermite,
        PolynomialFamily::Laguerre,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolynomialFamily::Legendre => "legendre",
            PolynomialFamily::Hermite => "hermite",
            PolynomialFamily::Laguerre => "laguerre",
        }
    }

    /// Coefficients `(a, b, c)` of the unnormalized recurrence
    /// `P_{n+1} = (a x + b) P_n - c P_{n-1}`.
    #[inline]
    fn recurrence(self, n: usize) -> (f64, f64, f64) {
        let nf = n as f64;
        match self {
            PolynomialFamily::Legendre => ((2.0 * nf + 1.0) / (nf + 1.0), 0.0, nf / (nf + 1.0)),
            PolynomialFamily::Hermite => (1.0, 0.0, nf),
            PolynomialFamily::Laguerre => {
                (-1.0 / (nf + 1.0), (2.0 * nf + 1.0) / (nf + 1.0), nf / (nf + 1.0))
            }
        }
    }

    /// Fills `values[0..=max_degree]` (and optionally `derivs`) with the
    /// orthonormal polynomials and their derivatives at `x`.
    pub fn eval_upto(self, x: f64, values: &mut [f64], mut derivs: Option<&mut [f64]>) {
        let len = values.len();
        if len == 0 {
            return;
        }
        if let Some(d) = derivs.as_deref() {
            assert_eq!(d.len(), len, "derivative buffer length");
        }
        // Unnormalized recurrence, then scale.
        let (mut p_prev, mut p) = (0.0, 1.0);
        let (mut dp_prev, mut dp) = (0.0, 0.0);
        let mut hermite_scale = 1.0;
        for n in 0..len {
            let scale = match self {
                PolynomialFamily::Legendre => ((2 * n + 1) as f64).sqrt(),
                PolynomialFamily::Hermite => {
                    if n > 0 {
                        hermite_scale /= (n as f64).sqrt();
                    }
                    hermite_scale
                }
                PolynomialFamily::Laguerre => 1.0,
            };
            values[n] = scale * p;
            if let Some(d) = derivs.as_deref_mut() {
                d[n] = scale * dp;
            }
            let (a, b, c) = self.recurrence(n);
            let next = (a * x + b) * p - c * p_prev;
            let dnext = a * p + (a * x + b) * dp - c * dp_prev;
            p_prev = p;
            p = next;
            dp_prev = dp;
            dp = dnext;
        }
    }

    /// Degree-`degree` orthonormal polynomial at `x`.
    pub fn eval(self, degree: usize, x: f64) -> f64 {
        let mut v = vec![0.0; degree + 1];
        self.eval_upto(x, &mut v, None);
        v[degree]
    }

    /// Derivative of the degree-`degree` orthonormal polynomial at `x`.
    pub fn eval_deriv(self, degree: usize, x: f64) -> f64 {
        let mut v = vec![0.0; degree + 1];
        let mut d = vec![0.0; degree + 1];
        self.eval_upto(x, &mut v, Some(&mut d));
        d[degree]
    }

    /// One draw from the family's measure.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            PolynomialFamily::Legendre => Uniform::new_inclusive(-1.0, 1.0)
                .expect("valid bounds")
                .sample(rng),
            PolynomialFamily::Hermite => StandardNormal.sample(rng),
            PolynomialFamily::Laguerre => Exp1.sample(rng),
        }
    }
}

impl fmt::Display for PolynomialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolynomialFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "legendre" => Ok(PolynomialFamily::Legendre),
            "hermite" => Ok(PolynomialFamily::Hermite),
            "laguerre" => Ok(PolynomialFamily::Laguerre),
            other => Err(Error::InvalidParameter(format!(
                "unknown polynomial family '{other}'"
            ))),
        }
    }
}

/// Degrees of a tensor-product polynomial, one per input dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    alpha: Vec<u32>,
}

impl MultiIndex {
    pub fn new(alpha: Vec<u32>) -> Self {
        MultiIndex { alpha }
    }

    pub fn degrees(&self) -> &[u32] {
        &self.alpha
    }

    pub fn total_degree(&self) -> usize {
        self.alpha.iter().map(|&a| a as usize).sum()
    }

    pub fn dimension(&self) -> usize {
        self.alpha.len()
    }

    /// `(dimension, degree)` pairs with nonzero degree.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0)
            .map(|(k, &a)| (k, a as usize))
    }
}

/// `C(p + d, d)`, or `None` if it does not fit in `usize`.
pub fn basis_size(dimension: usize, order: usize) -> Option<usize> {
    let mut count: u128 = 1;
    for i in 1..=order as u128 {
        // count = C(d + i - 1, i - 1) here; the product is divisible by i
        count = count.checked_mul(dimension as u128 + i)? / i;
    }
    usize::try_from(count).ok()
}

/// All multi-indices with total degree at most `order`, in graded order:
/// total degree ascending, and within a degree, descending lexicographic
/// (so the first linear term is the one in the first variable).
pub fn multi_indices(dimension: usize, order: usize) -> Result<Vec<MultiIndex>> {
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let size = basis_size(dimension, order).ok_or(Error::BasisTooLarge { dimension, order })?;
    let mut out = Vec::new();
    out.try_reserve_exact(size)
        .map_err(|_| Error::BasisTooLarge { dimension, order })?;
    let mut current = vec![0u32; dimension];
    for degree in 0..=order {
        compositions(degree as u32, 0, &mut current, &mut out);
    }
    debug_assert_eq!(out.len(), size);
    Ok(out)
}

fn compositions(remaining: u32, pos: usize, current: &mut [u32], out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.to_vec()));
        current[pos] = 0;
        return;
    }
    for first in (0..=remaining).rev() {
        current[pos] = first;
        compositions(remaining - first, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// A total-degree tensor basis of a given family.
#[derive(Debug, Clone)]
pub struct BasisSet {
    family: PolynomialFamily,
    dimension: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    // (dimension, degree) factors of each index, for sparse products
    support: Vec<Vec<(usize, usize)>>,
}

impl BasisSet {
    pub fn new(family: PolynomialFamily, dimension: usize, order: usize) -> Result<Self> {
        let indices = multi_indices(dimension, order)?;
        let support = indices.iter().map(|m| m.support().collect()).collect();
        Ok(BasisSet {
            family,
            dimension,
            order,
            indices,
            support,
        })
    }

    pub fn family(&self) -> PolynomialFamily {
        self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Number of basis functions N.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dimension {
            return Err(Error::mismatch("basis point", self.dimension, point.len()));
        }
        Ok(())
    }

    /// Univariate values (and derivatives) at each coordinate, laid out as
    /// `table[k * (p + 1) + degree]`.
    fn univariate_table(&self, point: &[f64], values: &mut [f64], derivs: Option<&mut [f64]>) {
        let stride = self.order + 1;
        match derivs {
            Some(d) => {
                for (k, &x) in point.iter().enumerate() {
                    let r = k * stride..(k + 1) * stride;
                    self.family
                        .eval_upto(x, &mut values[r.clone()], Some(&mut d[r]));
                }
            }
            None => {
                for (k, &x) in point.iter().enumerate() {
                    self.family
                        .eval_upto(x, &mut values[k * stride..(k + 1) * stride], None);
                }
            }
        }
    }

    /// Writes all N basis values at `point` into `out`. The caller guarantees
    /// `point.len() == d` and `out.len() == N`.
    pub(crate) fn eval_into(&self, point: &[f64], table: &mut [f64], out: &mut [f64]) {
        let stride = self.order + 1;
        self.univariate_table(point, table, None);
        for (o, factors) in out.iter_mut().zip(&self.support) {
            *o = factors
                .iter()
                .map(|&(k, a)| table[k * stride + a])
                .product();
        }
    }

    /// `(psi_1(x), ..., psi_N(x))`.
    pub fn eval(&self, point: &[f64]) -> Result<DVector<f64>> {
        self.check_point(point)?;
        let mut table = vec![0.0; self.dimension * (self.order + 1)];
        let mut out = DVector::zeros(self.len());
        self.eval_into(point, &mut table, out.as_mut_slice());
        Ok(out)
    }

    /// d×N matrix of partial derivatives `d psi_n / d x_k`.
    pub fn eval_grad(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(point)?;
        let stride = self.order + 1;
        let mut values = vec![0.0; self.dimension * stride];
        let mut derivs = vec![0.0; self.dimension * stride];
        self.univariate_table(point, &mut values, Some(&mut derivs));
        let mut grad = DMatrix::zeros(self.dimension, self.len());
        for (n, factors) in self.support.iter().enumerate() {
            for (i, &(k, a)) in factors.iter().enumerate() {
                let mut g = derivs[k * stride + a];
                for (j, &(kj, aj)) in factors.iter().enumerate() {
                    if j != i {
                        g *= values[kj * stride + aj];
                    }
                }
                grad[(k, n)] = g;
            }
        }
        Ok(grad)
    }

    /// Gradient of `sum_n coeffs[n] psi_n` at `point`, accumulated into `grad`
    /// (length d, overwritten). Buffers are caller-provided scratch of length
    /// `d * (p + 1)`.
    pub(crate) fn expansion_gradient_into(
        &self,
        coeffs: &[f64],
        point: &[f64],
        values: &mut [f64],
        derivs: &mut [f64],
        grad: &mut [f64],
    ) {
        let stride = self.order + 1;
        self.univariate_table(point, values, Some(derivs));
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (factors, &c) in self.support.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            for (i, &(k, a)) in factors.iter().enumerate() {
                let mut g = c * derivs[k * stride + a];
                for (j, &(kj, aj)) in factors.iter().enumerate() {
                    if j != i {
                        g *= values[kj * stride + aj];
                    }
                }
                grad[k] += g;
            }
        }
    }

    /// Measurement matrix with `Psi[q, n] = psi_n(samples row q)`.
    pub fn measurement_matrix(&self, samples: &DMatrix<f64>) -> Result<MeasurementMatrix> {
        if samples.ncols() != self.dimension {
            return Err(Error::mismatch(
                "sample matrix columns",
                self.dimension,
                samples.ncols(),
            ));
        }
        let m = samples.nrows();
        let n = self.len();
        let table_len = self.dimension * (self.order + 1);
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map_init(
                || (vec![0.0; table_len], vec![0.0; self.dimension]),
                |(table, point), q| {
                    for k in 0..self.dimension {
                        point[k] = samples[(q, k)];
                    }
                    let mut row = vec![0.0; n];
                    self.eval_into(point, table, &mut row);
                    row
                },
            )
            .collect();
        let matrix = DMatrix::from_fn(m, n, |q, j| rows[q][j]);
        MeasurementMatrix::new(matrix)
    }
}

/// M×N matrix of basis evaluations at sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix(DMatrix<f64>);

impl MeasurementMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(
                "measurement matrix has non-finite entries".into(),
            ));
        }
        Ok(MeasurementMatrix(matrix))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }
}

/// `m` i.i.d. draws from the `d`-dimensional product measure of `family`,
/// one sample per row.
pub fn sample_inputs(
    family: PolynomialFamily,
    dimension: usize,
    count: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_inputs_with(family, dimension, count, &mut rng)
}

pub fn sample_inputs_with<R: Rng + ?Sized>(
    family: PolynomialFamily,
    dimension: usize,
    count: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if dimension == 0 || count == 0 {
        return Err(Error::InvalidParameter(format!(
            "sample matrix must be non-empty (M = {count}, d = {dimension})"
        )));
    }
    // Row-major draw order so a sample's coordinates are consecutive draws.
    let data: Vec<f64> = (0..count * dimension).map(|_| family.sample(rng)).collect();
    Ok(DMatrix::from_row_slice(count, dimension, &data))
}
