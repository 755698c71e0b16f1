// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Steady states as the normalized kernel of the reduced generator.
//!
//! Because `t·L̃ = 0`, any row `k` with `t_k ≠ 0` is a combination of the
//! others and can be replaced by a normalization condition. The dense path
//! uses `t` itself (row `k` of largest trace weight), so `A c = e_k` is
//! nonsingular exactly when the kernel is one-dimensional and yields the
//! unit-trace state directly. A dense row ruins sparse fill-in, so the sparse
//! path pins `c_k = 1` on the all-down orbit instead and normalizes the trace
//! afterwards. Either factorization also inverts `L̃` on the trace-zero
//! subspace, which is what the gap estimate needs.

use std::sync::Arc;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::sparse::linalg::solvers::Lu as SparseLu;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::ProjectorPair;
use crate::liouvillian::ReducedLiouvillian;
use crate::orbit::{InvariantBasis, Sector, DENSE_MAX_SITES};
use crate::sparse::CscMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Residual bound relative to `‖L̃‖_∞`.
    pub residual_tol: f64,
    /// Eigenvalues below this magnitude count as zero.
    pub gap_threshold: f64,
    /// Largest dimension solved with a dense LU.
    pub dense_max_dim: usize,
    /// Largest dimension whose full spectrum is computed for the gap.
    pub dense_eigen_max_dim: usize,
    /// Krylov dimension of the shift-invert gap estimate.
    pub krylov_dim: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            gap_threshold: 1e-8,
            dense_max_dim: 5000,
            dense_eigen_max_dim: 1000,
            krylov_dim: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    DenseLu,
    SparseLu,
    NormalEquations,
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    coefficients: Vec<Complex64>,
    basis: Arc<InvariantBasis>,
    residual: f64,
    method: Method,
}

impl SteadyState {
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &Arc<InvariantBasis> {
        &self.basis
    }

    pub fn sector(&self) -> Sector {
        self.basis.sector()
    }

    /// `‖L̃ c‖_∞` of the normalized vector.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// `Σ_k c_k t_k`.
    pub fn trace(&self) -> Complex64 {
        self.coefficients
            .iter()
            .zip(self.basis.elements())
            .map(|(c, e)| c * e.trace_value)
            .sum()
    }

    /// Coefficient of the orbit with canonical representative `canon`, zero if absent.
    pub fn coefficient_of(&self, canon: ProjectorPair) -> Complex64 {
        self.basis
            .index_of_canonical(canon)
            .map_or(ZERO, |j| self.coefficients[j])
    }

    /// Largest `|c_j − conj(c_adj(j))|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let e = self.basis.elements();
        self.coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| (c - self.coefficients[e[j].adjoint_index].conj()).norm())
            .fold(0.0, f64::max)
    }
}

enum Factorization {
    Dense(PartialPivLu<Complex64>),
    Sparse(SparseLu<usize, Complex64>),
}

/// The bordered matrix `A` and its factorization.
struct Bordered {
    matrix: CscMatrix,
    pivot: usize,
    factor: Option<Factorization>,
}

/// Replacement for row `pivot` of `L̃`.
#[derive(Clone, Copy, PartialEq)]
enum Border {
    Trace,
    Unit,
}

impl Bordered {
    fn new(l: &ReducedLiouvillian, opts: &SolverOptions) -> Result<Self> {
        let t = l.trace_vector();
        let pivot = t
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
            .filter(|&(_, v)| v > 0.0)
            .map(|(i, _)| i)
            .ok_or_else(|| {
                Error::NoSteadyState("basis contains no operator with nonzero trace".into())
            })?;
        let n = l.dim();
        let dense = n <= opts.dense_max_dim;
        let (pivot, border) = match l.basis().index_of_canonical(ProjectorPair::new(0, 0)) {
            Some(k) if !dense => (k, Border::Unit),
            _ => (pivot, Border::Trace),
        };
        let columns: Vec<Vec<(usize, Complex64)>> = (0..n)
            .map(|j| {
                let mut col: Vec<(usize, Complex64)> =
                    l.matrix().column(j).filter(|&(r, _)| r != pivot).collect();
                let border_entry = match border {
                    Border::Trace => t[j],
                    Border::Unit => f64::from(u8::from(j == pivot)),
                };
                if border_entry != 0.0 {
                    col.push((pivot, Complex64::new(border_entry, 0.0)));
                }
                col
            })
            .collect();
        let matrix = CscMatrix::from_columns(n, columns)?;
        let factor = if dense {
            Some(Factorization::Dense(matrix.to_dense().partial_piv_lu()))
        } else {
            matrix.to_faer()?.sp_lu().ok().map(Factorization::Sparse)
        };
        Ok(Self {
            matrix,
            pivot,
            factor,
        })
    }

    fn method(&self) -> Method {
        match self.factor {
            Some(Factorization::Dense(_)) => Method::DenseLu,
            Some(Factorization::Sparse(_)) => Method::SparseLu,
            None => Method::NormalEquations,
        }
    }

    fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = rhs.len();
        let mut b = Mat::<Complex64>::from_fn(n, 1, |i, _| rhs[i]);
        match &self.factor {
            Some(Factorization::Dense(lu)) => lu.solve_in_place(b.as_mut()),
            Some(Factorization::Sparse(lu)) => lu.solve_in_place(b.as_mut()),
            None => return cgnr(&self.matrix, rhs, 1e-14, 50 * n.max(100)),
        }
        (0..n).map(|i| b[(i, 0)]).collect()
    }
}

/// Conjugate gradients on `A^H A x = A^H b`.
fn cgnr(a: &CscMatrix, b: &[Complex64], tol: f64, max_iter: usize) -> Vec<Complex64> {
    let n = b.len();
    let dot = |u: &[Complex64], v: &[Complex64]| -> Complex64 {
        u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
    };
    let mut x = vec![ZERO; n];
    let mut r = b.to_vec();
    let mut z = a.adjoint_matvec(&r);
    let mut p = z.clone();
    let mut zz = dot(&z, &z).re;
    let stop = tol * zz.sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        if zz.sqrt() <= stop {
            break;
        }
        let w = a.matvec(&p);
        let alpha = zz / dot(&w, &w).re;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * w[i];
        }
        z = a.adjoint_matvec(&r);
        let zz_new = dot(&z, &z).re;
        let beta = zz_new / zz;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        zz = zz_new;
    }
    x
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Unit-trace, Hermitian null vector of `L̃`.
pub fn solve_steady(l: &ReducedLiouvillian, opts: &SolverOptions) -> Result<SteadyState> {
    let bordered = Bordered::new(l, opts)?;
    solve_with(l, &bordered, opts)
}

fn solve_with(l: &ReducedLiouvillian, bordered: &Bordered, opts: &SolverOptions) -> Result<SteadyState> {
    let n = l.dim();
    let t = l.trace_vector();
    let mut rhs = vec![ZERO; n];
    rhs[bordered.pivot] = Complex64::new(1.0, 0.0);
    let mut c = bordered.solve(&rhs);
    if c.iter().any(|z| !z.is_finite()) {
        return Err(Error::NoSteadyState(
            "bordered system is singular; the kernel is not one-dimensional".into(),
        ));
    }

    let trace = |c: &[Complex64]| -> Complex64 { c.iter().zip(t).map(|(z, w)| z * w).sum() };
    let tr = trace(&c);
    if tr.norm() < f64::EPSILON {
        return Err(Error::NoSteadyState("null vector has zero trace".into()));
    }
    c.iter_mut().for_each(|z| *z /= tr);
    let elements = l.basis().elements();
    let symmetrized: Vec<Complex64> = (0..n)
        .map(|j| 0.5 * (c[j] + c[elements[j].adjoint_index].conj()))
        .collect();
    let tr = trace(&symmetrized).re;
    let c: Vec<Complex64> = symmetrized.into_iter().map(|z| z / tr).collect();

    let residual = inf_norm(&l.matrix().matvec(&c));
    let tolerance = opts.residual_tol * l.matrix().norm_inf().max(f64::MIN_POSITIVE);
    if !(residual <= tolerance) {
        return Err(Error::Convergence {
            residual,
            tolerance,
        });
    }
    Ok(SteadyState {
        coefficients: c,
        basis: Arc::clone(l.basis()),
        residual,
        method: bordered.method(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    /// Eigenvalues (or estimates) in increasing magnitude, at most `krylov_dim` of them.
    pub smallest: Vec<Complex64>,
    /// Number of eigenvalues found below the threshold.
    pub near_zero: usize,
    /// Magnitude of the smallest eigenvalue above the threshold.
    pub gap: f64,
    pub dense: bool,
}

impl GapReport {
    pub fn is_unique(&self) -> bool {
        self.near_zero == 1
    }

    /// Turns a degenerate kernel into a [`Error::Reducible`].
    pub fn ensure_unique(&self) -> Result<()> {
        if self.is_unique() {
            Ok(())
        } else {
            Err(Error::Reducible(format!(
                "{} eigenvalues below threshold (smallest magnitudes {:?})",
                self.near_zero,
                self.smallest.iter().take(3).map(|z| z.norm()).collect::<Vec<_>>()
            )))
        }
    }
}

/// Smallest-magnitude part of the spectrum of `L̃`.
///
/// Small matrices are diagonalized densely. Larger ones use Arnoldi on
/// `L̃⁻¹` restricted to the trace-zero subspace, which `L̃` maps into itself
/// and which carries every eigenvector with nonzero eigenvalue.
pub fn check_uniqueness(l: &ReducedLiouvillian, opts: &SolverOptions) -> Result<GapReport> {
    let n = l.dim();
    if n <= opts.dense_eigen_max_dim {
        let mut ev = l
            .matrix()
            .to_dense()
            .eigenvalues()
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let near_zero = ev.iter().filter(|z| z.norm() < opts.gap_threshold).count();
        let gap = ev.get(1).map_or(f64::INFINITY, |z| z.norm());
        ev.truncate(opts.krylov_dim.max(2));
        return Ok(GapReport {
            smallest: ev,
            near_zero,
            gap,
            dense: true,
        });
    }
    let bordered = Bordered::new(l, opts)?;
    arnoldi_gap(l, &bordered, opts)
}

/// Solves and checks uniqueness with one factorization.
pub fn solve_and_check(
    l: &ReducedLiouvillian,
    opts: &SolverOptions,
) -> Result<(SteadyState, GapReport)> {
    let bordered = Bordered::new(l, opts)?;
    let ss = solve_with(l, &bordered, opts)?;
    let report = if l.dim() <= opts.dense_eigen_max_dim {
        check_uniqueness(l, opts)?
    } else {
        arnoldi_gap(l, &bordered, opts)?
    };
    Ok((ss, report))
}

fn arnoldi_gap(l: &ReducedLiouvillian, bordered: &Bordered, opts: &SolverOptions) -> Result<GapReport> {
    let n = l.dim();
    let t = l.trace_vector();
    let tt: f64 = t.iter().map(|x| x * x).sum();
    let project = |v: &mut [Complex64]| {
        let s: Complex64 = v.iter().zip(t).map(|(z, w)| z * w).sum::<Complex64>() / tt;
        v.iter_mut().zip(t).for_each(|(z, w)| *z -= s * w);
    };
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let trace = |v: &[Complex64]| -> Complex64 { v.iter().zip(t).map(|(z, w)| z * w).sum() };
    let mut e_k = vec![ZERO; n];
    e_k[bordered.pivot] = Complex64::new(1.0, 0.0);
    let kernel = bordered.solve(&e_k);
    let kernel_trace = trace(&kernel);
    // L̃ y = x on the trace-zero subspace: zero the pivot entry, solve A y = x,
    // then remove the kernel component that carries trace
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        let mut rhs = x.to_vec();
        rhs[bordered.pivot] = ZERO;
        let mut y = bordered.solve(&rhs);
        let s = trace(&y) / kernel_trace;
        y.iter_mut().zip(&kernel).for_each(|(z, k)| *z -= s * k);
        y
    };

    let m = opts.krylov_dim.min(n.saturating_sub(1)).max(1);
    let mut v0: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i % 7) as f64 * 0.1, (i % 3) as f64 * 0.05))
        .collect();
    project(&mut v0);
    let nv = norm(&v0);
    if nv == 0.0 {
        return Err(Error::LinearAlgebra("degenerate Arnoldi start vector".into()));
    }
    v0.iter_mut().for_each(|z| *z /= nv);
    let mut q: Vec<Vec<Complex64>> = vec![v0];
    let mut h = Mat::<Complex64>::zeros(m + 1, m);
    let mut steps = m;
    for k in 0..m {
        let mut w = apply(&q[k]);
        if w.iter().any(|z| !z.is_finite()) {
            return Ok(GapReport {
                smallest: vec![ZERO, ZERO],
                near_zero: 2,
                gap: 0.0,
                dense: false,
            });
        }
        project(&mut w);
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c: Complex64 = qi.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                h[(i, k)] += c;
                w.iter_mut().zip(qi).for_each(|(b, a)| *b -= c * a);
            }
        }
        let beta = norm(&w);
        h[(k + 1, k)] = Complex64::new(beta, 0.0);
        if beta < 1e-14 * h[(k, k)].norm().max(1.0) {
            steps = k + 1;
            break;
        }
        w.iter_mut().for_each(|z| *z /= beta);
        q.push(w);
    }
    let hm = Mat::<Complex64>::from_fn(steps, steps, |i, j| h[(i, j)]);
    let mu = hm
        .eigenvalues()
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let mut lambda: Vec<Complex64> = mu
        .into_iter()
        .filter(|z| z.norm() > 0.0)
        .map(|z| Complex64::new(1.0, 0.0) / z)
        .collect();
    lambda.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let extra_zero = lambda.iter().filter(|z| z.norm() < opts.gap_threshold).count();
    let gap = lambda
        .iter()
        .map(|z| z.norm())
        .find(|&x| x >= opts.gap_threshold)
        .unwrap_or(f64::INFINITY);
    let mut smallest = vec![ZERO];
    smallest.extend(lambda);
    Ok(GapReport {
        smallest,
        near_zero: 1 + extra_zero,
        gap,
        dense: false,
    })
}

/// `Σ_j c_j ρ_j` as a dense `2^V × 2^V` matrix.
pub fn reconstruct_dense(ss: &SteadyState) -> Result<Mat<Complex64>> {
    let basis = ss.basis();
    let v = basis.n_sites();
    if v > DENSE_MAX_SITES {
        return Err(Error::ResourceLimit(format!(
            "dense reconstruction needs V <= {DENSE_MAX_SITES}, got {v}"
        )));
    }
    let dim = 1usize << v;
    let mut rho = Mat::<Complex64>::zeros(dim, dim);
    for (j, c) in ss.coefficients().iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        let amp = c * basis.element(j).amplitude();
        for pp in basis.orbit_members(j) {
            rho[(pp.ket.0 as usize, pp.bra.0 as usize)] += amp;
        }
    }
    Ok(rho)
}
