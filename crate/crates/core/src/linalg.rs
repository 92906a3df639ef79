//! Dense symmetric positive definite operators.
//!
//! Coordinates are fixed so that the reference operator inducing the primal
//! norm is the identity. Dual pairings are plain dot products and every
//! relative norm is expressed through an explicit operator `H`:
//! `‖s‖*_{H^{-1}} = ⟨s, H s⟩^{1/2}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Radicands in `[-RADICAND_CLAMP, 0)` are rounded up to zero.
pub const RADICAND_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator must have positive dimension")]
    Empty,
    #[error("matrix is not symmetric (largest asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("operator is not positive definite (quadratic form {0:e})")]
    NotPositiveDefinite(f64),
    #[error("power iteration did not converge in {0} iterations")]
    NoConvergence(usize),
}

/// Square root of a quadratic form value, tolerating tiny negative round-off.
pub fn clamped_sqrt(radicand: f64) -> Result<f64, LinalgError> {
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -RADICAND_CLAMP {
        Ok(0.0)
    } else {
        Err(LinalgError::NotPositiveDefinite(radicand))
    }
}

/// Self-adjoint positive definite operator stored as a dense matrix.
///
/// Symmetry is exact: every mutation writes the upper triangle and mirrors it.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    m: Matrix,
}

impl SymmetricOperator {
    pub fn identity(dim: usize) -> Self {
        Self { m: Matrix::identity(dim, dim) }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        Self { m: Matrix::identity(dim, dim) * scale }
    }

    /// Wraps a matrix, rejecting anything that is not symmetric up to round-off.
    /// The stored copy is exactly symmetric.
    pub fn from_matrix(m: Matrix) -> Result<Self, LinalgError> {
        let n = m.nrows();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        if m.ncols() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, got: m.ncols() });
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if worst > 1e-12 * scale {
            return Err(LinalgError::NotSymmetric(worst));
        }
        let mut op = Self { m };
        op.symmetrize();
        Ok(op)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self { m: Matrix::from_diagonal(&Vector::from_column_slice(diag)) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    /// `H v`.
    pub fn apply(&self, v: &Vector) -> Vector {
        &self.m * v
    }

    /// `⟨s, H s⟩`.
    pub fn quadratic_form(&self, s: &Vector) -> f64 {
        s.dot(&self.apply(s))
    }

    /// `⟨u, H v⟩`.
    pub fn bilinear_form(&self, u: &Vector, v: &Vector) -> f64 {
        u.dot(&self.apply(v))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { m: &self.m * factor }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.m.clone().cholesky().is_some()
    }

    pub fn inverse(&self) -> Result<Self, LinalgError> {
        let chol = self
            .m
            .clone()
            .cholesky()
            .ok_or(LinalgError::NotPositiveDefinite(f64::NAN))?;
        let mut op = Self { m: chol.inverse() };
        op.symmetrize();
        Ok(op)
    }

    /// Solves `H x = rhs`.
    pub fn solve(&self, rhs: &Vector) -> Result<Vector, LinalgError> {
        let chol = self
            .m
            .clone()
            .cholesky()
            .ok_or(LinalgError::NotPositiveDefinite(f64::NAN))?;
        Ok(chol.solve(rhs))
    }

    /// `ln det H` from a Cholesky factorization.
    pub fn log_determinant(&self) -> Result<f64, LinalgError> {
        let chol = self
            .m
            .clone()
            .cholesky()
            .ok_or(LinalgError::NotPositiveDefinite(f64::NAN))?;
        let l = chol.l_dirty();
        Ok((0..self.dim()).map(|i| 2.0 * l[(i, i)].ln()).sum())
    }

    /// In-place rank-one update `H ← H − coef · v vᵀ`. Entries are formed as
    /// `coef · (v_i v_j)`, so a symmetric `H` stays exactly symmetric.
    pub(crate) fn subtract_outer(&mut self, v: &Vector, coef: f64) {
        let n = self.dim();
        let vs = v.as_slice();
        for (col, &vj) in self.m.as_mut_slice().chunks_exact_mut(n).zip(vs) {
            for (h, &vi) in col.iter_mut().zip(vs) {
                *h -= coef * (vi * vj);
            }
        }
    }

    /// [`Self::subtract_outer`] fused with the product of the updated operator
    /// and `w`, in a single pass over the matrix.
    pub(crate) fn subtract_outer_apply(&mut self, v: &Vector, coef: f64, w: &Vector) -> Vector {
        let n = self.dim();
        let (vs, ws) = (v.as_slice(), w.as_slice());
        let mut out = vec![0.0; n];
        for ((col, &vj), &wj) in self.m.as_mut_slice().chunks_exact_mut(n).zip(vs).zip(ws) {
            for ((h, &vi), o) in col.iter_mut().zip(vs).zip(out.iter_mut()) {
                *h -= coef * (vi * vj);
                *o += *h * wj;
            }
        }
        Vector::from_vec(out)
    }

    fn symmetrize(&mut self) {
        let n = self.dim();
        for j in 0..n {
            for i in 0..j {
                let avg = 0.5 * (self.m[(i, j)] + self.m[(j, i)]);
                self.m[(i, j)] = avg;
                self.m[(j, i)] = avg;
            }
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), LinalgError> {
    if expected == got {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, got })
    }
}

/// `‖s‖*_{H^{-1}} = ⟨s, H s⟩^{1/2}`.
pub fn dual_norm(h: &SymmetricOperator, s: &Vector) -> Result<f64, LinalgError> {
    check_dim(h.dim(), s.len())?;
    clamped_sqrt(h.quadratic_form(s))
}

/// `‖x‖_{H^{-1}} = ⟨H^{-1} x, x⟩^{1/2}`, the norm conjugate to [`dual_norm`].
pub fn primal_norm(h: &SymmetricOperator, x: &Vector) -> Result<f64, LinalgError> {
    check_dim(h.dim(), x.len())?;
    let y = h.solve(x)?;
    clamped_sqrt(x.dot(&y))
}

/// Sherman–Morrison update of an inverse operator: given `H = G^{-1}`, returns
/// `(G + b g gᵀ)^{-1} = H − b (Hg)(Hg)ᵀ / (1 + b gᵀHg)`.
pub fn rank_one_inverse_update(
    h: &SymmetricOperator,
    g: &Vector,
    b: f64,
) -> Result<SymmetricOperator, LinalgError> {
    check_dim(h.dim(), g.len())?;
    let mut out = h.clone();
    if b == 0.0 {
        return Ok(out);
    }
    let hg = h.apply(g);
    let ghg = g.dot(&hg);
    out.subtract_outer(&hg, b / (1.0 + b * ghg));
    Ok(out)
}

/// Plain power iteration from the normalized all-ones vector.
///
/// Stops once `‖Gv − λv‖ ≤ tol·λ`; the iteration cap is `⌈10·n·ln(1/tol)⌉`.
pub fn power_iteration(g: &SymmetricOperator, tol: f64) -> Result<(f64, Vector), LinalgError> {
    let n = g.dim();
    let cap = (10.0 * n as f64 * (1.0 / tol).ln()).ceil().max(1.0) as usize;
    let mut v = Vector::from_element(n, 1.0 / (n as f64).sqrt());
    for _ in 0..cap {
        let w = g.apply(&v);
        let lambda = v.dot(&w);
        if lambda <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite(lambda));
        }
        let residual = (&w - &v * lambda).norm();
        if residual <= tol * lambda {
            return Ok((lambda, canonical_sign(v)));
        }
        let norm = w.norm();
        v = w / norm;
    }
    Err(LinalgError::NoConvergence(cap))
}

/// Largest eigenvalue and a unit eigenvector of a symmetric positive definite
/// operator. Falls back to a full symmetric eigendecomposition when power
/// iteration stalls or locks onto a lower eigenpair (start vector orthogonal
/// to the top eigenspace).
pub fn top_eigenpair(g: &SymmetricOperator, tol: f64) -> Result<(f64, Vector), LinalgError> {
    // λ_max ≥ max_i G_ii; a converged pair below that bound is a lower eigenpair.
    let max_diag = g.matrix().diagonal().max();
    match power_iteration(g, tol) {
        Ok((lambda, v)) if lambda >= max_diag * (1.0 - tol) => Ok((lambda, v)),
        Ok(_) | Err(LinalgError::NoConvergence(_)) => {
            let eig = SymmetricEigen::new(g.matrix().clone());
            let (idx, &lambda) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .ok_or(LinalgError::Empty)?;
            if lambda <= 0.0 {
                return Err(LinalgError::NotPositiveDefinite(lambda));
            }
            let v = eig.eigenvectors.column(idx).into_owned();
            Ok((lambda, canonical_sign(v)))
        }
        Err(e) => Err(e),
    }
}

// Largest-magnitude component made positive so results are reproducible.
fn canonical_sign(v: Vector) -> Vector {
    let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        -v
    } else {
        v
    }
}
