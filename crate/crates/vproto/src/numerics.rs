//! Numerically stable primitives: row normalization, temperature softmax,
//! cosine similarity, orthonormal bases, and the central-difference gradient
//! oracle used to verify every analytic gradient in the crate.

use crate::error::{Error, Result};
use crate::mat::{dot, norm, Matrix};

/// Norm floor under which a row counts as zero.
pub const ZERO_ROW_TOL: f64 = 1e-12;

/// Default rank tolerance for Gram-Schmidt residuals.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// `ln` with the argument clamped at 1e-300, so probabilities that underflow
/// to zero still produce a finite log.
pub fn safe_ln(x: f64) -> f64 {
    x.max(1e-300).ln()
}

/// Rescales every row to unit Euclidean norm.
pub fn l2_normalize_rows(m: &Matrix) -> Result<Matrix> {
    let mut out = m.clone();
    for i in 0..m.rows() {
        let n = norm(m.row(i));
        if n <= ZERO_ROW_TOL {
            return Err(Error::ZeroRow { row: i, norm: n });
        }
        let inv = 1.0 / n;
        for v in out.row_mut(i) {
            *v *= inv;
        }
    }
    Ok(out)
}

/// Normalizes a single vector in place; errors on a zero vector.
pub fn normalize_in_place(v: &mut [f64]) -> Result<()> {
    let n = norm(v);
    if n <= ZERO_ROW_TOL {
        return Err(Error::ZeroRow { row: 0, norm: n });
    }
    let inv = 1.0 / n;
    for x in v.iter_mut() {
        *x *= inv;
    }
    Ok(())
}

/// Temperature softmax with max-shift: `softmax(x / tau)`.
pub fn softmax(logits: &[f64], tau: f64) -> Result<Vec<f64>> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::InvalidTemperature { tau });
    }
    let max = logits.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b / tau));
    let mut out: Vec<f64> = logits.iter().map(|&v| (v / tau - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Log of the temperature softmax, computed without forming the
/// probabilities first.
pub fn log_softmax(logits: &[f64], tau: f64) -> Result<Vec<f64>> {
    if tau <= 0.0 || !tau.is_finite() {
        return Err(Error::InvalidTemperature { tau });
    }
    let scaled: Vec<f64> = logits.iter().map(|&v| v / tau).collect();
    let max = scaled.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let log_sum = scaled.iter().map(|&v| (v - max).exp()).sum::<f64>().ln() + max;
    Ok(scaled.iter().map(|&v| v - log_sum).collect())
}

/// Pairwise cosine similarities: entry `(i, j)` compares row `i` of `a` with
/// row `j` of `b`.
pub fn cosine_similarity_matrix(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            context: format!("cosine: {} vs {} columns", a.cols(), b.cols()),
        });
    }
    let a_norms: Vec<f64> = (0..a.rows()).map(|i| norm(a.row(i))).collect();
    let b_norms: Vec<f64> = (0..b.rows()).map(|j| norm(b.row(j))).collect();
    if let Some(i) = a_norms.iter().position(|&n| n <= ZERO_ROW_TOL) {
        return Err(Error::ZeroRow { row: i, norm: a_norms[i] });
    }
    if let Some(j) = b_norms.iter().position(|&n| n <= ZERO_ROW_TOL) {
        return Err(Error::ZeroRow { row: j, norm: b_norms[j] });
    }
    let mut out = Matrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        for j in 0..b.rows() {
            out.set(i, j, dot(a.row(i), b.row(j)) / (a_norms[i] * b_norms[j]));
        }
    }
    Ok(out)
}

/// Orthonormal basis of the row space via modified Gram-Schmidt with one
/// re-orthogonalization pass. Rows whose residual norm falls at or below
/// `tol` are discarded, so the returned row count is the numerical rank.
/// Deterministic: input rows are processed in order.
pub fn orthonormal_basis(m: &Matrix, tol: f64) -> Matrix {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..m.rows() {
        let mut v = m.row(i).to_vec();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                for (vk, qk) in v.iter_mut().zip(q) {
                    *vk -= c * qk;
                }
            }
        }
        let n = norm(&v);
        if n > tol {
            let inv = 1.0 / n;
            for x in &mut v {
                *x *= inv;
            }
            basis.push(v);
        }
    }
    let rank = basis.len();
    Matrix::from_vec(rank, m.cols(), basis.concat()).expect("basis rows share the input width")
}

/// Central-difference gradient `(f(x + h e_j) - f(x - h e_j)) / 2h`.
///
/// Independent oracle for the analytic gradients in the loss module; keep it
/// free of any code path it is used to check.
pub fn finite_diff_gradient<F>(mut f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::NonFiniteEvaluation { context: format!("step size {h}") });
    }
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        let orig = probe[j];
        probe[j] = orig + h;
        let up = f(&probe);
        probe[j] = orig - h;
        let down = f(&probe);
        probe[j] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFiniteEvaluation {
                context: format!("f at coordinate {j}: {up} / {down}"),
            });
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// Relative error between two gradient vectors, `||a - b|| / max(||a||, ||b||)`,
/// with an absolute fallback when both are near zero.
pub fn gradient_rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = norm(a).max(norm(b));
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}
