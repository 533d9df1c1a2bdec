//! Iterative rotation of the inputs.
//!
//! Each outer step fits sparse coefficients by ADMM, samples the gradient of
//! the current surrogate with respect to the original inputs, and takes the
//! left singular vectors of that gradient matrix as the next rotation.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::admm::{self, AdmmConfig};
use crate::basis::{BasisSet, MeasurementMatrix};
use crate::diagnostics::{self, ValidationSet};
use crate::error::{Error, Result};
use crate::regularizers::Regularizer;
use crate::surrogate::{rotate_samples, Surrogate};

/// Relative spread below which all singular values count as equal.
const DEGENERATE_SPREAD: f64 = 1e-12;

/// `W` (d×M) whose column q is `A^T grad v_g(A xi_q) / sqrt(M)`.
pub fn gradient_matrix(
    basis: &BasisSet,
    coeffs: &DVector<f64>,
    rotation: &DMatrix<f64>,
    xi: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let d = basis.dimension();
    if coeffs.len() != basis.len() {
        return Err(Error::mismatch("gradient coefficients", basis.len(), coeffs.len()));
    }
    if rotation.nrows() != d || rotation.ncols() != d {
        return Err(Error::mismatch("gradient rotation", d, rotation.nrows()));
    }
    if xi.ncols() != d {
        return Err(Error::mismatch("gradient samples", d, xi.ncols()));
    }
    let m = xi.nrows();
    let eta = rotate_samples(xi, rotation)?;
    let stride = basis.order() + 1;
    let scale = 1.0 / (m as f64).sqrt();
    let columns: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map_init(
            || (vec![0.0; d], vec![0.0; d * stride], vec![0.0; d * stride], vec![0.0; d]),
            |(point, values, derivs, grad), q| {
                for k in 0..d {
                    point[k] = eta[(q, k)];
                }
                basis.expansion_gradient_into(coeffs.as_slice(), point, values, derivs, grad);
                // chain rule: grad_xi = A^T grad_eta
                (0..d)
                    .map(|j| scale * (0..d).map(|i| rotation[(i, j)] * grad[i]).sum::<f64>())
                    .collect()
            },
        )
        .collect();
    Ok(DMatrix::from_fn(d, m, |k, q| columns[q][k]))
}

/// Rotation extracted from a gradient matrix.
#[derive(Debug, Clone)]
pub struct SvdRotation {
    /// `U^T`, rows ordered by nonincreasing singular value.
    pub rotation: DMatrix<f64>,
    /// Left singular vectors as columns (sign-normalized).
    pub left: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    /// Right singular vectors as columns, matching `left`.
    pub right: DMatrix<f64>,
    /// All singular values equal: the rotation carries no information.
    pub degenerate: bool,
}

/// `A = U^T` from the SVD `W = U S V^T`, with each left singular vector
/// flipped so that its largest-magnitude entry (first on ties) is positive.
pub fn rotation_from_svd(w: &DMatrix<f64>) -> Result<SvdRotation> {
    let (d, m) = w.shape();
    if d == 0 {
        return Err(Error::InvalidParameter("empty gradient matrix".into()));
    }
    if m < d {
        return Err(Error::InvalidParameter(format!(
            "gradient matrix needs at least as many samples as dimensions ({m} < {d})"
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Svd("non-finite gradient matrix".into()));
    }
    let svd = w
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Svd("SVD did not converge".into()))?;
    let u = svd.u.ok_or_else(|| Error::Svd("missing U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Svd("missing V^T".into()))?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

    let mut left = DMatrix::zeros(d, d);
    let mut right = DMatrix::zeros(m, d);
    let mut values = DVector::zeros(d);
    for (dst, &src) in order.iter().enumerate() {
        let col = u.column(src);
        let mut pivot = 0;
        for i in 1..d {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        left.set_column(dst, &(col * sign));
        right.set_column(dst, &(v_t.row(src).transpose() * sign));
        values[dst] = sv[src];
    }
    let top = values[0];
    let bottom = values[d - 1];
    let degenerate = top == 0.0 || (top - bottom) <= DEGENERATE_SPREAD * top;
    Ok(SvdRotation {
        rotation: left.transpose(),
        left,
        singular_values: values,
        right,
        degenerate,
    })
}

/// Outer-loop controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationConfig {
    /// Maximum number of ADMM solves, the first of which is unrotated.
    pub max_iterations: usize,
    /// Stop once the relative coefficient change drops below this.
    pub tol: f64,
    /// Start each solve from the previous coefficients.
    pub warm_start: bool,
}

impl Default for RotationConfig {
    fn default() -> Self {
        RotationConfig {
            max_iterations: 9,
            tol: 1e-3,
            warm_start: true,
        }
    }
}

impl RotationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("l_max must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidParameter(format!("tol_e = {}", self.tol)));
        }
        Ok(())
    }
}

/// Optional per-iteration diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct IterateOptions<'a> {
    pub coherence: bool,
    pub validation: Option<&'a ValidationSet>,
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    /// Rotation index l (0 = unrotated).
    pub index: usize,
    /// `|c^(l) - c^(l-1)|_2 / |c^(l)|_2`, with `c^(-1) = 0`.
    pub change: f64,
    pub coherence: Option<f64>,
    pub relative_error: Option<f64>,
    /// Rotation estimate, measurement matrix and ADMM solve.
    pub wall_time: Duration,
    pub admm_iterations: usize,
    pub admm_converged: bool,
    /// The SVD was degenerate and the previous rotation was kept.
    pub degenerate_svd: bool,
}

#[derive(Debug, Clone)]
pub struct RotationState {
    /// Current rotation A.
    pub rotation: DMatrix<f64>,
    /// `A xi`, one sample per row.
    pub eta_samples: DMatrix<f64>,
    /// Index of the last completed solve.
    pub iteration: usize,
    /// Coefficients after each solve.
    pub coeff_history: Vec<DVector<f64>>,
    /// Rotation used for each solve.
    pub rotation_history: Vec<DMatrix<f64>>,
    /// Singular values of the last gradient matrix (empty before any rotation).
    pub singular_values: DVector<f64>,
}

impl RotationState {
    pub fn coefficients(&self) -> &DVector<f64> {
        self.coeff_history.last().expect("at least one solve")
    }

    pub fn surrogate<'a>(&'a self, basis: &'a BasisSet) -> Result<Surrogate<'a>> {
        Surrogate::new(basis, self.coefficients(), &self.rotation)
    }
}

/// `|new - old| / |new|`; zero when both vanish.
pub fn relative_change(new: &DVector<f64>, old: &DVector<f64>) -> f64 {
    let diff = (new - old).norm();
    let scale = new.norm();
    if scale > 0.0 {
        diff / scale
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Alternates ADMM coefficient fits with SVD rotation updates.
pub fn iterate(
    xi: &DMatrix<f64>,
    u: &DVector<f64>,
    basis: &BasisSet,
    regularizer: &Regularizer,
    admm_config: &AdmmConfig,
    config: &RotationConfig,
    options: IterateOptions<'_>,
) -> Result<(RotationState, Vec<IterationReport>)> {
    let mut reports = Vec::new();
    let state = iterate_into(xi, u, basis, regularizer, admm_config, config, options, &mut reports)?;
    Ok((state, reports))
}

/// As [`iterate`], appending reports as they are produced so the completed
/// iterations survive a failure in a later one.
#[allow(clippy::too_many_arguments)]
pub fn iterate_into(
    xi: &DMatrix<f64>,
    u: &DVector<f64>,
    basis: &BasisSet,
    regularizer: &Regularizer,
    admm_config: &AdmmConfig,
    config: &RotationConfig,
    options: IterateOptions<'_>,
    reports: &mut Vec<IterationReport>,
) -> Result<RotationState> {
    config.validate()?;
    admm_config.validate()?;
    regularizer.validate()?;
    let d = basis.dimension();
    if xi.ncols() != d {
        return Err(Error::mismatch("rotation samples", d, xi.ncols()));
    }
    if xi.nrows() != u.len() {
        return Err(Error::mismatch("rotation data", xi.nrows(), u.len()));
    }

    let mut rotation = DMatrix::<f64>::identity(d, d);
    let mut state = RotationState {
        rotation: rotation.clone(),
        eta_samples: xi.clone(),
        iteration: 0,
        coeff_history: Vec::new(),
        rotation_history: Vec::new(),
        singular_values: DVector::zeros(0),
    };
    let mut previous = DVector::zeros(basis.len());

    for l in 0..config.max_iterations {
        let start = Instant::now();
        let mut degenerate = false;
        if l > 0 {
            let w = gradient_matrix(basis, &previous, &rotation, xi)
                .map_err(|e| annotate(l, e))?;
            let svd = rotation_from_svd(&w).map_err(|e| annotate(l, e))?;
            state.singular_values = svd.singular_values.clone();
            if svd.degenerate {
                degenerate = true;
            } else {
                rotation = svd.rotation;
            }
        }
        let eta = rotate_samples(xi, &rotation)?;
        let psi = basis.measurement_matrix(&eta).map_err(|e| annotate(l, e))?;
        let init = (config.warm_start && l > 0).then_some(&previous);
        let solved = admm::solve(&psi, u, regularizer, admm_config, init)
            .map_err(|e| annotate(l, e))?;
        let wall_time = start.elapsed();

        let change = relative_change(&solved.coefficients, &previous);
        let coherence = if options.coherence {
            Some(diagnostics::coherence(&psi).map_err(|e| annotate(l, e))?)
        } else {
            None
        };
        let relative_error = match options.validation {
            Some(val) => {
                let s = Surrogate::new(basis, &solved.coefficients, &rotation)?;
                Some(diagnostics::relative_error(&s, val)?)
            }
            None => None,
        };
        reports.push(IterationReport {
            index: l,
            change,
            coherence,
            relative_error,
            wall_time,
            admm_iterations: solved.iterations,
            admm_converged: solved.converged,
            degenerate_svd: degenerate,
        });

        previous = solved.coefficients;
        state.coeff_history.push(previous.clone());
        state.rotation_history.push(rotation.clone());
        state.rotation = rotation.clone();
        state.eta_samples = eta;
        state.iteration = l;

        if change < config.tol {
            break;
        }
    }
    Ok(state)
}

fn annotate(index: usize, source: Error) -> Error {
    Error::Rotation {
        index,
        source: Box::new(source),
    }
}

/// Measurement matrix for `basis` at the rotated samples `A xi`.
pub fn rotated_measurement_matrix(
    basis: &BasisSet,
    xi: &DMatrix<f64>,
    rotation: &DMatrix<f64>,
) -> Result<MeasurementMatrix> {
    basis.measurement_matrix(&rotate_samples(xi, rotation)?)
}
