//! Fixed-size symmetric matrices (up to 4×4) and cofactor determinants.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalue floor for positive semidefiniteness, applied to correlation
/// (unit-diagonal) matrices.
pub const PSD_TOL: f64 = 1e-10;

pub const MAX_DIM: usize = 4;

/// A symmetric covariance matrix of dimension 1 to 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix {
    dim: usize,
    entries: [[f64; MAX_DIM]; MAX_DIM],
}

impl CovMatrix {
    /// Builds from row slices, checking shape and symmetry (relative 1e-12).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Range(format!("covariance dimension {dim} not in 1..=4")));
        }
        let mut entries = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::LengthMismatch(row.len(), dim));
            }
            entries[i][..dim].copy_from_slice(row);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (entries[i][j], entries[j][i]);
                let scale = a.abs().max(b.abs()).max(1e-300);
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::Range(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds from a symmetric array without checks; only the upper
    /// `dim × dim` block is used.
    pub(crate) fn from_array(dim: usize, entries: [[f64; MAX_DIM]; MAX_DIM]) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, row) in entries.iter_mut().enumerate().take(dim) {
            row[i] = 1.0;
        }
        Self::from_array(dim, entries)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut entries = [[0.0; MAX_DIM]; MAX_DIM];
        for (i, &d) in diag.iter().enumerate() {
            entries[i][i] = d;
        }
        Self::from_array(diag.len(), entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "index ({i},{j}) out of range");
        self.entries[i][j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.entries[i][..self.dim].to_vec()).collect()
    }

    pub fn det(&self) -> f64 {
        let all: Vec<usize> = (0..self.dim).collect();
        self.minor(&all, &all)
    }

    /// Determinant of the submatrix with the given row and column index lists.
    /// The lists need not coincide, so non-principal minors are supported.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> f64 {
        assert_eq!(rows.len(), cols.len(), "minor must be square");
        cofactor_det(&self.entries, rows, cols)
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> CovMatrix {
        let mut entries = [[0.0; MAX_DIM]; MAX_DIM];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                entries[a][b] = self.entries[i][j];
            }
        }
        Self::from_array(idx.len(), entries)
    }

    /// Product of the diagonal; bounds the determinant of a PSD matrix from above.
    pub fn diag_product(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[i][i]).product()
    }

    /// Correlation matrix; coordinates with zero variance get a unit
    /// diagonal and zero off-diagonal entries.
    pub fn correlation(&self) -> CovMatrix {
        let sd: Vec<f64> = (0..self.dim).map(|i| self.entries[i][i].max(0.0).sqrt()).collect();
        let mut entries = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..self.dim {
            for j in 0..self.dim {
                entries[i][j] = if i == j {
                    1.0
                } else if sd[i] > 0.0 && sd[j] > 0.0 {
                    self.entries[i][j] / (sd[i] * sd[j])
                } else {
                    0.0
                };
            }
        }
        Self::from_array(self.dim, entries)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dmatrix()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// PSD check on the scale-free correlation matrix.
    pub fn check_psd(&self) -> Result<()> {
        let min_eigenvalue = self.correlation().min_eigenvalue();
        if min_eigenvalue < -PSD_TOL {
            Err(Error::NotPsd { min_eigenvalue })
        } else {
            Ok(())
        }
    }

    /// Symmetric square root `V diag(sqrt(max(λ,0))) Vᵀ`, row-major `dim × dim`.
    pub(crate) fn sqrt_factor(&self) -> Result<Vec<f64>> {
        self.check_psd()?;
        let d = self.dim;
        let eig = SymmetricEigen::new(self.to_dmatrix());
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = (0..d)
                    .map(|k| {
                        let lam = eig.eigenvalues[k].max(0.0);
                        eig.eigenvectors[(i, k)] * lam.sqrt() * eig.eigenvectors[(j, k)]
                    })
                    .sum();
            }
        }
        Ok(out)
    }

    fn to_dmatrix(self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entries[i][j])
    }
}

fn cofactor_det(m: &[[f64; MAX_DIM]; MAX_DIM], rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => m[rows[0]][cols[0]],
        2 => m[rows[0]][cols[0]] * m[rows[1]][cols[1]] - m[rows[0]][cols[1]] * m[rows[1]][cols[0]],
        n => {
            let mut acc = 0.0;
            let mut sub_cols = [0usize; MAX_DIM];
            for k in 0..n {
                let a = m[rows[0]][cols[k]];
                if a == 0.0 {
                    continue;
                }
                let mut t = 0;
                for (c, &col) in cols.iter().enumerate() {
                    if c != k {
                        sub_cols[t] = col;
                        t += 1;
                    }
                }
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * a * cofactor_det(m, &rows[1..], &sub_cols[..n - 1]);
            }
            acc
        }
    }
}
