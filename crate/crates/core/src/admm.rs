//! ADMM for `min_c lambda J(c) + 0.5 |Psi c - u|^2`.
//!
//! The splitting `c = y` gives three steps per iteration: a proximal step in
//! `c`, a ridge-type linear solve in `y`, and a dual ascent step in `w`. The
//! linear solve uses the Woodbury identity so only the M×M matrix
//! `Psi Psi^T + rho I` is ever factored.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::basis::MeasurementMatrix;
use crate::error::{Error, Result};
use crate::regularizers::Regularizer;

/// Convergence also requires `|c - y| <= FEASIBILITY_FACTOR * eps`.
pub const FEASIBILITY_FACTOR: f64 = 10.0;

/// Solver knobs. `max_iter = None` means `2 N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    pub lambda: f64,
    pub rho: f64,
    pub max_iter: Option<usize>,
    pub tol: f64,
}

impl AdmmConfig {
    pub const DEFAULT_TOL: f64 = 1e-6;

    pub fn new(lambda: f64, rho: f64) -> Self {
        AdmmConfig {
            lambda,
            rho,
            max_iter: None,
            tol: Self::DEFAULT_TOL,
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = Some(max_iter);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda = {}", self.lambda)));
        }
        if !positive(self.rho) {
            return Err(Error::InvalidParameter(format!("rho = {}", self.rho)));
        }
        if !positive(self.tol) {
            return Err(Error::InvalidParameter(format!("eps = {}", self.tol)));
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidParameter("k_max must be at least 1".into()));
        }
        Ok(())
    }

    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(2 * n).max(1)
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// `|c_k - c_{k-1}|_2`
    pub step_norm: f64,
    /// `|c_k - y_k|_2`
    pub primal_residual: f64,
    /// `lambda J(c_k) + 0.5 |Psi c_k - u|^2`
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub coefficients: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    /// Final auxiliary variable `y`.
    pub auxiliary: DVector<f64>,
}

/// Cached Cholesky factor of `Psi Psi^T + rho I` for applying
/// `(Psi^T Psi + rho I)^{-1} = (I - Psi^T (Psi Psi^T + rho I)^{-1} Psi) / rho`.
#[derive(Debug, Clone)]
pub struct WoodburyFactor {
    rho: f64,
    chol: Cholesky<f64, Dyn>,
}

impl WoodburyFactor {
    pub fn new(psi: &MeasurementMatrix, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho = {rho}")));
        }
        let p = psi.matrix();
        let mut gram = p * p.transpose();
        for i in 0..gram.nrows() {
            gram[(i, i)] += rho;
        }
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization("non-finite Gram matrix".into()));
        }
        let chol = Cholesky::new(gram)
            .ok_or_else(|| Error::Factorization("Psi Psi^T + rho I is not positive definite".into()))?;
        Ok(WoodburyFactor { rho, chol })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(Psi^T Psi + rho I)^{-1} r`.
    pub fn apply(&self, psi: &MeasurementMatrix, r: &DVector<f64>) -> DVector<f64> {
        let p = psi.matrix();
        let mut z = p * r;
        self.chol.solve_mut(&mut z);
        let mut out = r.clone();
        out.gemv_tr(-1.0, p, &z, 1.0);
        out /= self.rho;
        out
    }

    /// `(Psi^T Psi + rho I)^{-1} (Psi^T u + rho v)`, evaluated as
    /// `v + Psi^T (Psi Psi^T + rho I)^{-1} (u - Psi v)` so nothing is divided
    /// by `rho`. This stays accurate for the very small `rho` some methods use.
    pub fn solve_shifted(&self, psi: &MeasurementMatrix, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let p = psi.matrix();
        let mut z = u.clone();
        z.gemv(-1.0, p, v, 1.0);
        self.chol.solve_mut(&mut z);
        let mut out = v.clone();
        out.gemv_tr(1.0, p, &z, 1.0);
        out
    }
}

/// `Psi c` exploiting zeros in `c`.
fn sparse_product(psi: &DMatrix<f64>, c: &DVector<f64>, out: &mut DVector<f64>) {
    out.fill(0.0);
    for (j, &cj) in c.iter().enumerate() {
        if cj != 0.0 {
            out.axpy(cj, &psi.column(j), 1.0);
        }
    }
}

/// Runs ADMM from `init` (or zero) and returns the last coefficient iterate.
pub fn solve(
    psi: &MeasurementMatrix,
    u: &DVector<f64>,
    regularizer: &Regularizer,
    config: &AdmmConfig,
    init: Option<&DVector<f64>>,
) -> Result<SolveResult> {
    config.validate()?;
    regularizer.validate()?;
    let factor = WoodburyFactor::new(psi, config.rho)?;
    solve_with_factor(psi, &factor, u, regularizer, config, init)
}

/// As [`solve`], reusing a precomputed factor built with `config.rho`.
pub fn solve_with_factor(
    psi: &MeasurementMatrix,
    factor: &WoodburyFactor,
    u: &DVector<f64>,
    regularizer: &Regularizer,
    config: &AdmmConfig,
    init: Option<&DVector<f64>>,
) -> Result<SolveResult> {
    config.validate()?;
    let (m, n) = (psi.rows(), psi.cols());
    if u.len() != m {
        return Err(Error::mismatch("ADMM data vector", m, u.len()));
    }
    if let Some(c0) = init {
        if c0.len() != n {
            return Err(Error::mismatch("ADMM initial guess", n, c0.len()));
        }
    }
    if factor.rho() != config.rho {
        return Err(Error::InvalidParameter(
            "Woodbury factor was built with a different rho".into(),
        ));
    }
    let p = psi.matrix();
    let (lambda, rho) = (config.lambda, config.rho);
    let mu = lambda / rho;
    let cap = config.iteration_cap(n);

    let mut c = init.cloned().unwrap_or_else(|| DVector::zeros(n));
    let mut y = c.clone();
    let mut w = DVector::zeros(n);
    let mut v = DVector::zeros(n);
    let mut c_next = DVector::zeros(n);
    let mut fitted = DVector::zeros(m);
    let mut trace = Vec::with_capacity(cap.min(4096));
    let mut converged = false;

    for k in 0..cap {
        // c-step
        v.copy_from(&y);
        v.axpy(-1.0 / rho, &w, 1.0);
        regularizer.prox_into(v.as_slice(), mu, c_next.as_mut_slice())?;
        // y-step: Psi^T u + rho c + w = Psi^T u + rho (c + w / rho)
        v.copy_from(&c_next);
        v.axpy(1.0 / rho, &w, 1.0);
        y = factor.solve_shifted(psi, u, &v);
        // w-step
        w.axpy(rho, &c_next, 1.0);
        w.axpy(-rho, &y, 1.0);

        let step_norm = (&c_next - &c).norm();
        let primal_residual = (&c_next - &y).norm();
        sparse_product(p, &c_next, &mut fitted);
        fitted -= u;
        let objective = lambda * regularizer.penalty(c_next.as_slice()) + 0.5 * fitted.norm_squared();
        trace.push(IterationRecord {
            step_norm,
            primal_residual,
            objective,
        });
        std::mem::swap(&mut c, &mut c_next);

        let finite = step_norm.is_finite()
            && primal_residual.is_finite()
            && objective.is_finite()
            && w.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Diverged {
                iteration: k + 1,
                trace,
            });
        }
        // A stalled c alone is not enough (a zero start is trivially
        // stationary on its first step); the split must also agree.
        if step_norm <= config.tol && primal_residual <= FEASIBILITY_FACTOR * config.tol {
            converged = true;
            break;
        }
    }

    Ok(SolveResult {
        iterations: trace.len(),
        coefficients: c,
        converged,
        trace,
        auxiliary: y,
    })
}
