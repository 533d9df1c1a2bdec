//! Evaluation of a fitted expansion `u_g(xi) = sum_n c_n psi_n(A xi)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basis::BasisSet;
use crate::error::{Error, Result};

/// Rotated samples `eta = A xi`, one sample per row.
pub fn rotate_samples(xi: &DMatrix<f64>, rotation: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if rotation.nrows() != rotation.ncols() || rotation.ncols() != xi.ncols() {
        return Err(Error::mismatch("rotation size", xi.ncols(), rotation.ncols()));
    }
    Ok(xi * rotation.transpose())
}

#[derive(Debug, Clone, Copy)]
pub struct Surrogate<'a> {
    basis: &'a BasisSet,
    coefficients: &'a DVector<f64>,
    rotation: &'a DMatrix<f64>,
}

impl<'a> Surrogate<'a> {
    pub fn new(
        basis: &'a BasisSet,
        coefficients: &'a DVector<f64>,
        rotation: &'a DMatrix<f64>,
    ) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::mismatch("surrogate coefficients", basis.len(), coefficients.len()));
        }
        let d = basis.dimension();
        if rotation.nrows() != d || rotation.ncols() != d {
            return Err(Error::mismatch("surrogate rotation", d, rotation.nrows()));
        }
        Ok(Surrogate {
            basis,
            coefficients,
            rotation,
        })
    }

    pub fn basis(&self) -> &BasisSet {
        self.basis
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        self.coefficients
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        self.rotation
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        let d = self.basis.dimension();
        if xi.len() != d {
            return Err(Error::mismatch("surrogate point", d, xi.len()));
        }
        let mut eta = vec![0.0; d];
        let mut table = vec![0.0; d * (self.basis.order() + 1)];
        let mut values = vec![0.0; self.basis.len()];
        Ok(self.eval_with(xi, &mut eta, &mut table, &mut values))
    }

    fn eval_with(&self, xi: &[f64], eta: &mut [f64], table: &mut [f64], values: &mut [f64]) -> f64 {
        for (i, e) in eta.iter_mut().enumerate() {
            *e = self
                .rotation
                .row(i)
                .iter()
                .zip(xi)
                .map(|(a, x)| a * x)
                .sum();
        }
        self.basis.eval_into(eta, table, values);
        values
            .iter()
            .zip(self.coefficients.iter())
            .map(|(v, c)| v * c)
            .sum()
    }

    /// Values at every row of `points`, evaluated in parallel. The result is
    /// independent of the thread count.
    pub fn eval_rows(&self, points: &DMatrix<f64>) -> Result<Vec<f64>> {
        let d = self.basis.dimension();
        if points.ncols() != d {
            return Err(Error::mismatch("surrogate points", d, points.ncols()));
        }
        let table_len = d * (self.basis.order() + 1);
        let n = self.basis.len();
        Ok((0..points.nrows())
            .into_par_iter()
            .map_init(
                || (vec![0.0; d], vec![0.0; d], vec![0.0; table_len], vec![0.0; n]),
                |(xi, eta, table, values), q| {
                    for k in 0..d {
                        xi[k] = points[(q, k)];
                    }
                    self.eval_with(xi, eta, table, values)
                },
            )
            .collect())
    }
}
