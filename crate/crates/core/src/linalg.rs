//! Dense linear algebra: SVD factors, the Moore-Penrose inverse, the metric
//! operator `H = JᵀJ`, and a numerical check of the pseudoinverse
//! perturbation bounds.
//!
//! All operator norms are spectral norms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Negative slack allowed before a perturbation bound is reported as failing.
pub const PERTURBATION_SLACK_TOL: f64 = 1e-10;

/// Thin SVD `A = left · diag(singulars) · rightᵀ` with singular values sorted
/// nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub left: Matrix,
    pub singulars: Vector,
    pub right: Matrix,
    rows: usize,
    cols: usize,
}

impl SvdFactors {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn largest_singular(&self) -> f64 {
        self.singulars.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest singular value of `A` viewed as a map `ℝⁿ → ℝᵐ`, i.e.
    /// `min_{‖x‖=1} ‖Ax‖`. Zero whenever `cols > rows`.
    pub fn smallest_singular(&self) -> f64 {
        if self.cols > self.rows || self.singulars.is_empty() {
            return 0.0;
        }
        self.singulars[self.singulars.len() - 1]
    }

    /// `eps · max(m, n) · σ_max`.
    pub fn default_rank_tolerance(&self) -> f64 {
        f64::EPSILON * self.rows.max(self.cols) as f64 * self.largest_singular()
    }

    pub fn rank(&self, rank_tol: f64) -> usize {
        self.singulars.iter().filter(|&&s| s > rank_tol).count()
    }

    /// `U · diag(s) · Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.left.clone();
        for (j, s) in self.singulars.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * self.right.transpose()
    }

    /// `V · diag(1/s_i for s_i > rank_tol) · Uᵀ`.
    pub fn pseudoinverse(&self, rank_tol: f64) -> Matrix {
        let mut scaled = self.right.clone();
        for (j, s) in self.singulars.iter().enumerate() {
            let inv = if *s > rank_tol { 1.0 / s } else { 0.0 };
            scaled.column_mut(j).scale_mut(inv);
        }
        scaled * self.left.transpose()
    }
}

fn ensure_finite(a: &Matrix) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMatrix)
    }
}

/// Thin SVD with singular values sorted nonincreasing.
pub fn svd(a: &Matrix) -> Result<SvdFactors> {
    ensure_finite(a)?;
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Ok(SvdFactors {
            left: Matrix::zeros(rows, 0),
            singulars: Vector::zeros(0),
            right: Matrix::zeros(cols, 0),
            rows,
            cols,
        });
    }
    // faer's thin SVD returns singular values in nonincreasing order
    let fa = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let decomposition = fa.thin_svd().map_err(|_| Error::InvalidMatrix)?;
    let (u, s, v) = (decomposition.U(), decomposition.S(), decomposition.V());
    let left = Matrix::from_fn(rows, k, |i, j| u[(i, j)]);
    let right = Matrix::from_fn(cols, k, |i, j| v[(i, j)]);
    let mut singulars = Vector::from_fn(k, |i, _| s[i]);
    // guard the ordering contract against backend changes
    debug_assert!(singulars.as_slice().windows(2).all(|w| w[0] >= w[1]));
    singulars.iter_mut().for_each(|x| *x = x.max(0.0));
    Ok(SvdFactors {
        left,
        singulars,
        right,
        rows,
        cols,
    })
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    Ok(svd(a)?.largest_singular())
}

/// Moore-Penrose inverse via SVD. Singular values at or below `rank_tol` are
/// treated as zero; `None` selects `eps · max(m, n) · σ_max`.
pub fn pseudoinverse(a: &Matrix, rank_tol: Option<f64>) -> Result<Matrix> {
    let factors = svd(a)?;
    let tol = rank_tol.unwrap_or_else(|| factors.default_rank_tolerance());
    if !(tol >= 0.0) {
        return Err(Error::HypothesisViolated(format!(
            "rank tolerance must be nonnegative, got {tol}"
        )));
    }
    Ok(factors.pseudoinverse(tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub injective: bool,
    pub smallest_singular: f64,
    pub threshold: f64,
}

pub fn injectivity(a: &Matrix, threshold: f64) -> Result<InjectivityReport> {
    let smallest = svd(a)?.smallest_singular();
    Ok(InjectivityReport {
        injective: smallest > threshold,
        smallest_singular: smallest,
        threshold,
    })
}

/// `H = JᵀJ`. Exactly symmetric: entry `(i, j)` and `(j, i)` are the same dot
/// product.
pub fn metric_operator(jac: &Matrix) -> Matrix {
    jac.tr_mul(jac)
}

/// Extreme eigenvalues `(λ_min, λ_max)` of the symmetric part of `h`.
pub fn symmetric_eigen_range(h: &Matrix) -> Result<(f64, f64)> {
    ensure_finite(h)?;
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: h.ncols(),
        });
    }
    if h.nrows() == 0 {
        return Ok((0.0, 0.0));
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((min, max))
}

/// Outcome of [`check_perturbation_lemma`]. Each slack is `bound − observed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationReport {
    /// `‖A†‖·‖A − B‖`, which must be below one.
    pub contraction: f64,
    pub norm_bound_ok: bool,
    pub diff_bound_ok: bool,
    /// `‖A†‖/(1 − ‖A†‖‖A−B‖) − ‖B†‖`
    pub norm_slack: f64,
    /// `√2‖A†‖²‖A−B‖/(1 − ‖A†‖‖A−B‖) − ‖B† − A†‖`
    pub diff_slack: f64,
}

/// Checks the pseudoinverse perturbation bounds for an injective `A` and a
/// nearby `B`:
///
/// ```text
/// ‖B†‖ ≤ ‖A†‖ / (1 − ‖A†‖‖A−B‖)
/// ‖B† − A†‖ ≤ √2 ‖A†‖² ‖A−B‖ / (1 − ‖A†‖‖A−B‖)
/// ```
pub fn check_perturbation_lemma(a: &Matrix, b: &Matrix) -> Result<PerturbationReport> {
    ensure_finite(a)?;
    ensure_finite(b)?;
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let fa = svd(a)?;
    let a_smallest = fa.smallest_singular();
    if !(a_smallest > fa.default_rank_tolerance()) {
        return Err(Error::HypothesisViolated(format!(
            "A is not injective (smallest singular value {a_smallest:e})"
        )));
    }
    let a_pinv_norm = 1.0 / a_smallest;
    let gap = spectral_norm(&(a - b))?;
    let contraction = a_pinv_norm * gap;
    if contraction >= 1.0 {
        return Err(Error::HypothesisViolated(format!(
            "‖A†‖‖A−B‖ = {contraction} >= 1"
        )));
    }
    let a_pinv = fa.pseudoinverse(fa.default_rank_tolerance());
    let b_pinv = pseudoinverse(b, None)?;
    let b_pinv_norm = spectral_norm(&b_pinv)?;
    let diff_norm = spectral_norm(&(&b_pinv - &a_pinv))?;

    let denom = 1.0 - contraction;
    let norm_slack = a_pinv_norm / denom - b_pinv_norm;
    let diff_slack = std::f64::consts::SQRT_2 * a_pinv_norm * a_pinv_norm * gap / denom - diff_norm;
    Ok(PerturbationReport {
        contraction,
        norm_bound_ok: norm_slack >= -PERTURBATION_SLACK_TOL,
        diff_bound_ok: diff_slack >= -PERTURBATION_SLACK_TOL,
        norm_slack,
        diff_slack,
    })
}
