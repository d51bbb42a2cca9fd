//! Real system matrices in either dense or compressed-column storage.

use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatRef, Par};

use crate::error::{Error, Result};

/// A real `n×m` matrix. Generators and Matrix Market input produce the
/// sparse form, reduced models the dense one; every consumer dispatches on
/// the storage kind.
#[derive(Clone, Debug)]
pub enum SysMatrix {
    Dense(Mat<f64>),
    Sparse(SparseColMat<usize, f64>),
}

impl SysMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let triplets: Vec<_> = entries
            .iter()
            .map(|&(i, j, v)| Triplet::new(i, j, v))
            .collect();
        for t in &triplets {
            if t.row >= nrows || t.col >= ncols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({}, {}) outside a {nrows}x{ncols} matrix",
                    t.row, t.col
                )));
            }
        }
        SparseColMat::try_new_from_triplets(nrows, ncols, &triplets)
            .map(SysMatrix::Sparse)
            .map_err(|e| Error::InvalidArgument(format!("sparse assembly failed: {e:?}")))
    }

    pub fn identity(n: usize) -> Self {
        let entries: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &entries).expect("identity pattern is valid")
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let entries: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        let n = values.len();
        Self::from_triplets(n, n, &entries).expect("diagonal pattern is valid")
    }

    pub fn nrows(&self) -> usize {
        match self {
            SysMatrix::Dense(m) => m.nrows(),
            SysMatrix::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            SysMatrix::Dense(m) => m.ncols(),
            SysMatrix::Sparse(m) => m.ncols(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, SysMatrix::Sparse(_))
    }

    /// Structural entries as `(row, col, value)`; dense matrices report
    /// every entry.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match self {
            SysMatrix::Dense(m) => {
                let mut out = Vec::with_capacity(m.nrows() * m.ncols());
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        out.push((i, j, m[(i, j)]));
                    }
                }
                out
            }
            SysMatrix::Sparse(m) => m
                .as_ref()
                .triplet_iter()
                .map(|t| (t.row, t.col, *t.val))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        match self {
            SysMatrix::Dense(m) => m.clone(),
            SysMatrix::Sparse(m) => m.as_ref().to_dense(),
        }
    }

    pub fn transpose(&self) -> SysMatrix {
        match self {
            SysMatrix::Dense(m) => SysMatrix::Dense(m.transpose().to_owned()),
            SysMatrix::Sparse(_) => {
                let swapped: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
                Self::from_triplets(self.ncols(), self.nrows(), &swapped)
                    .expect("transposed pattern is valid")
            }
        }
    }

    /// `self · rhs` for a dense right-hand side.
    pub fn mul_dense(&self, rhs: MatRef<'_, f64>) -> Mat<f64> {
        assert_eq!(self.ncols(), rhs.nrows(), "inner dimensions differ");
        match self {
            SysMatrix::Dense(m) => m * rhs,
            SysMatrix::Sparse(m) => {
                let mut out = Mat::zeros(m.nrows(), rhs.ncols());
                faer::sparse::linalg::matmul::sparse_dense_matmul(
                    out.as_mut(),
                    faer::Accum::Replace,
                    m.as_ref(),
                    rhs,
                    1.0,
                    Par::Seq,
                );
                out
            }
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.triplets().iter().fold(0.0, |acc, &(_, _, v)| acc.max(v.abs()))
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if self.nrows() != self.ncols() {
            return false;
        }
        let d = self.to_dense();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..d.nrows()).all(|i| (0..i).all(|j| (d[(i, j)] - d[(j, i)]).abs() <= rel_tol * scale))
    }
}

impl From<Mat<f64>> for SysMatrix {
    fn from(m: Mat<f64>) -> Self {
        SysMatrix::Dense(m)
    }
}
