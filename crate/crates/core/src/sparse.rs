// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Compressed-column complex matrices.

use std::io::Write;

use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square CSC matrix with sorted, duplicate-free row indices in each column.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CscMatrix {
    /// Builds from per-column entry lists. Duplicates are summed, rows sorted.
    pub fn from_columns(dim: usize, columns: Vec<Vec<(usize, Complex64)>>) -> Result<Self> {
        if columns.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: columns.len(),
            });
        }
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in columns {
            col.sort_by_key(|e| e.0);
            for (r, v) in col {
                if r >= dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        found: r + 1,
                    });
                }
                if row_idx.len() > *col_ptr.last().unwrap() && row_idx.last() == Some(&r) {
                    *values.last_mut().unwrap() += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self {
            dim,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored `(row, value)` entries of column `j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |j| self.column(j).map(move |(r, v)| (r, j, v)))
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.row_idx[range.clone()].binary_search(&row) {
            Ok(k) => self.values[range.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (j, &xj) in x.iter().enumerate() {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (r, v) in self.column(j) {
                y[r] += v * xj;
            }
        }
        y
    }

    /// `y = A^H x`.
    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|j| self.column(j).map(|(r, v)| v.conj() * x[r]).sum())
            .collect()
    }

    /// Row vector `wᵀ A` for a real weight vector `w`.
    pub fn left_mul_real(&self, w: &[f64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|j| self.column(j).map(|(r, v)| v * w[r]).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.dim];
        for (r, v) in self.row_idx.iter().zip(&self.values) {
            rows[*r] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        let mut m = Mat::<Complex64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, Complex64>> {
        let triplets: Vec<Triplet<usize, usize, Complex64>> = self
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &triplets)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))
    }

    /// Coordinate text dump: `# dim=<n> sector=<label>` then `row col re im`.
    pub fn write_coo<W: Write>(&self, mut w: W, sector: &str) -> Result<()> {
        writeln!(w, "# dim={} sector={}", self.dim, sector)?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{} {} {:.16e} {:.16e}", r, c, v.re, v.im)?;
        }
        Ok(())
    }
}
