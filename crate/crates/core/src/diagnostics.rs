//! Coherence, relative error and sparsity metrics.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basis::{sample_inputs, MeasurementMatrix, PolynomialFamily};
use crate::error::{Error, Result};
use crate::surrogate::Surrogate;

const COHERENCE_BLOCK: usize = 256;

/// Mutual coherence: largest absolute cosine between two distinct columns.
pub fn coherence(psi: &MeasurementMatrix) -> Result<f64> {
    let p = psi.matrix();
    let n = p.ncols();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "coherence needs at least two columns".into(),
        ));
    }
    let mut normalized = p.clone();
    for (j, mut col) in normalized.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        col /= norm;
    }
    // Blocks of the upper triangle of the Gram matrix.
    let starts: Vec<usize> = (0..n).step_by(COHERENCE_BLOCK).collect();
    let best = starts
        .par_iter()
        .map(|&j0| {
            let width = COHERENCE_BLOCK.min(n - j0);
            let block = normalized.columns(j0, width);
            let left = normalized.columns(0, j0 + width);
            let gram = left.tr_mul(&block);
            let mut best = 0.0f64;
            for jj in 0..width {
                let j = j0 + jj;
                for i in 0..j {
                    best = best.max(gram[(i, jj)].abs());
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best.min(1.0))
}

/// Monte Carlo validation points with exact model outputs.
#[derive(Debug, Clone)]
pub struct ValidationSet {
    pub points: DMatrix<f64>,
    pub truth: Vec<f64>,
    pub seed: u64,
}

impl ValidationSet {
    pub const DEFAULT_SIZE: usize = 100_000;

    pub fn new(points: DMatrix<f64>, truth: Vec<f64>, seed: u64) -> Result<Self> {
        if points.nrows() != truth.len() {
            return Err(Error::mismatch("validation truth", points.nrows(), truth.len()));
        }
        if truth.iter().any(|t| !t.is_finite()) {
            return Err(Error::Overflow("validation truth is not finite".into()));
        }
        Ok(ValidationSet {
            points,
            truth,
            seed,
        })
    }

    /// Draws `size` points from the family's product measure and evaluates
    /// `model` at each of them.
    pub fn generate<F>(
        family: PolynomialFamily,
        dimension: usize,
        size: usize,
        seed: u64,
        model: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let points = sample_inputs(family, dimension, size, seed)?;
        let truth = (0..size)
            .into_par_iter()
            .map(|q| {
                let xi: Vec<f64> = points.row(q).iter().copied().collect();
                model(&xi)
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(points, truth, seed)
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }
}

/// `|u - u_g|_2 / |u|_2` over the validation set.
pub fn relative_error(surrogate: &Surrogate<'_>, validation: &ValidationSet) -> Result<f64> {
    let approx = surrogate.eval_rows(&validation.points)?;
    relative_error_of(&approx, &validation.truth)
}

/// Relative l2 discrepancy between two equally long value lists.
pub fn relative_error_of(approx: &[f64], truth: &[f64]) -> Result<f64> {
    if approx.len() != truth.len() {
        return Err(Error::mismatch("relative error", truth.len(), approx.len()));
    }
    // sequential sums keep the result bitwise reproducible
    let denom: f64 = truth.iter().map(|t| t * t).sum();
    if denom == 0.0 {
        return Err(Error::ZeroTruth);
    }
    let num: f64 = truth
        .iter()
        .zip(approx)
        .map(|(t, a)| (t - a) * (t - a))
        .sum();
    Ok((num / denom).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityProfile {
    /// Number of coefficients with magnitude strictly above the threshold.
    pub count: usize,
    /// All magnitudes, descending.
    pub magnitudes: Vec<f64>,
}

pub fn sparsity_profile(c: &DVector<f64>, threshold: f64) -> SparsityProfile {
    let mut magnitudes: Vec<f64> = c.iter().map(|v| v.abs()).collect();
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    SparsityProfile {
        count: magnitudes.iter().filter(|&&m| m > threshold).count(),
        magnitudes,
    }
}

/// Minimum-norm least-squares coefficients, used as a reference fit.
pub fn least_squares(psi: &MeasurementMatrix, u: &DVector<f64>) -> Result<DVector<f64>> {
    if u.len() != psi.rows() {
        return Err(Error::mismatch("least squares data", psi.rows(), u.len()));
    }
    let svd = psi.matrix().clone().svd(true, true);
    let scale = svd.singular_values.max();
    svd.solve(u, 1e-13 * scale.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Svd(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisSet;

    #[test]
    fn coherence_of_identity_and_duplicate_columns() {
        let id = MeasurementMatrix::new(DMatrix::identity(5, 5)).unwrap();
        assert_eq!(coherence(&id).unwrap(), 0.0);
        let mut m = DMatrix::from_fn(6, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        let c0 = m.column(0).clone_owned();
        m.set_column(3, &(c0 * 2.5));
        let dup = MeasurementMatrix::new(m).unwrap();
        assert!((coherence(&dup).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coherence_errors() {
        let mut m = DMatrix::from_element(3, 3, 1.0);
        m.set_column(1, &DVector::zeros(3));
        assert!(matches!(
            coherence(&MeasurementMatrix::new(m).unwrap()),
            Err(Error::ZeroColumn(1))
        ));
        let single = MeasurementMatrix::new(DMatrix::from_element(3, 1, 1.0)).unwrap();
        assert!(coherence(&single).is_err());
    }

    #[test]
    fn coherence_matches_brute_force_across_blocks() {
        let b = BasisSet::new(PolynomialFamily::Legendre, 6, 5).unwrap();
        let s = sample_inputs(PolynomialFamily::Legendre, 6, 60, 3).unwrap();
        let psi = b.measurement_matrix(&s).unwrap();
        assert!(psi.cols() > COHERENCE_BLOCK);
        let p = psi.matrix();
        let mut brute = 0.0f64;
        for i in 0..p.ncols() {
            for j in (i + 1)..p.ncols() {
                let c = p.column(i).dot(&p.column(j)) / (p.column(i).norm() * p.column(j).norm());
                brute = brute.max(c.abs());
            }
        }
        assert!((coherence(&psi).unwrap() - brute).abs() < 1e-14);
    }

    #[test]
    fn relative_error_basics() {
        let truth = vec![1.0, -1.0, 2.0, -2.0];
        assert_eq!(relative_error_of(&truth, &truth).unwrap(), 0.0);
        assert_eq!(relative_error_of(&[0.0; 4], &truth).unwrap(), 1.0);
        assert!(matches!(
            relative_error_of(&[0.0; 2], &[0.0; 2]),
            Err(Error::ZeroTruth)
        ));
    }

    #[test]
    fn sparsity_counts() {
        let zero = DVector::zeros(5);
        assert_eq!(sparsity_profile(&zero, 1e-3).count, 0);
        let c = DVector::from_vec(vec![1.0, 1e-4, -0.5]);
        let p = sparsity_profile(&c, 1e-3);
        assert_eq!(p.count, 2);
        assert_eq!(p.magnitudes, vec![1.0, 0.5, 1e-4]);
    }
}
