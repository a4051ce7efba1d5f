//! Dense row-major matrices and the prototype container.
//!
//! Everything in the crate runs on `f64`; gradient verification against
//! central finite differences needs the precision.

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Rows are embeddings. The alias marks call sites where the unit-row-norm
/// convention applies.
pub type EmbeddingMatrix = Matrix;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Builds from row-major data, checking length and finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: format!("expected {} entries for {rows}x{cols}, got {}", rows * cols, data.len()),
            });
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEvaluation {
                context: format!("matrix entry {idx} is {}", data[idx]),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { context: "ragged row lengths".into() });
        }
        Matrix::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.data {
            *v *= alpha;
        }
    }

    /// `self += alpha * other`; shapes must match.
    pub fn add_scaled(&mut self, alpha: f64, other: &Matrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "add_scaled {}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dot product of equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a slice.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Squared Euclidean distance between two slices.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A set of class prototypes.
///
/// Mathematically this is a `dim x n_classes` matrix whose columns are
/// prototypes; in memory each prototype is a contiguous row (`n_classes x
/// dim`) so the per-class inner loops stay cache-friendly. Serialization
/// converts back to the on-disk column-per-prototype layout.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeSet {
    protos: Matrix,
}

impl PrototypeSet {
    /// Builds from one row per prototype.
    pub fn from_rows(protos: Matrix) -> PrototypeSet {
        PrototypeSet { protos }
    }

    /// Builds from the mathematical `dim x n_classes` layout (column per
    /// prototype), as stored on disk.
    pub fn from_dim_by_class(m: &Matrix) -> PrototypeSet {
        PrototypeSet { protos: m.transpose() }
    }

    /// The `dim x n_classes` layout for serialization.
    pub fn to_dim_by_class(&self) -> Matrix {
        self.protos.transpose()
    }

    pub fn n_classes(&self) -> usize {
        self.protos.rows()
    }

    pub fn dim(&self) -> usize {
        self.protos.cols()
    }

    pub fn proto(&self, class: usize) -> &[f64] {
        self.protos.row(class)
    }

    pub fn proto_mut(&mut self, class: usize) -> &mut [f64] {
        self.protos.row_mut(class)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.protos
    }

    pub fn as_matrix_mut(&mut self) -> &mut Matrix {
        &mut self.protos
    }

    pub fn into_matrix(self) -> Matrix {
        self.protos
    }

    pub fn max_column_norm(&self) -> f64 {
        (0..self.n_classes())
            .map(|n| norm(self.proto(n)))
            .fold(0.0, f64::max)
    }
}
