// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference on the full `4^V`-dimensional operator space.
//!
//! Operators are built as Kronecker products of explicit 2×2 matrices, with
//! site `V−1` as the most significant factor so that the row index of `|n⟩`
//! is the bit word `n`. Density matrices are vectorized by stacking columns,
//! `vec(ρ)[i + d j] = ρ_ij`, giving
//!
//! ```text
//! ℒ = −i(I⊗H − Hᵀ⊗I) + Σ γ [ conj(L)⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I ].
//! ```
//!
//! Nothing here goes through projector pairs or orbits.

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{SitePermutation, SymmetryGroup};
use crate::model::{LindbladModel, LocalOp, OperatorSum};
use crate::orbit::DENSE_MAX_SITES;

/// Seed of the random test matrices used by [`verify_weak_symmetry_numeric`].
pub const DEFAULT_SEED: u64 = 0x5eed_1ab1;

/// Largest cluster accepted by the numeric weak-symmetry check.
pub const WEAK_SYMMETRY_MAX_SITES: usize = 5;

type CMat = Mat<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Explicit matrices in the `(|0⟩, |1⟩)` basis, `|1⟩` being spin up.
fn local(op: LocalOp) -> CMat {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let rows = match op {
        LocalOp::X => [[z, one], [one, z]],
        LocalOp::Y => [[z, c(0.0, 1.0)], [c(0.0, -1.0), z]],
        LocalOp::Z => [[-one, z], [z, one]],
        LocalOp::Plus => [[z, z], [one, z]],
        LocalOp::Minus => [[z, one], [z, z]],
        LocalOp::Number => [[z, z], [z, one]],
    };
    Mat::from_fn(2, 2, |i, j| rows[i][j])
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

fn identity(d: usize) -> CMat {
    Mat::from_fn(d, d, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

fn adjoint(a: &CMat) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

fn transpose(a: &CMat) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)])
}

fn scale(a: &CMat, s: Complex64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| s * a[(i, j)])
}

fn conj(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj())
}

pub fn frobenius(a: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    frobenius(&(a - b))
}

pub fn trace(a: &CMat) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// Dense `2^V × 2^V` matrix of an operator sum.
pub fn dense_operator(op: &OperatorSum, n_sites: usize) -> Result<CMat> {
    if n_sites > DENSE_MAX_SITES {
        return Err(Error::ResourceLimit(format!(
            "dense operators need V <= {DENSE_MAX_SITES}, got {n_sites}"
        )));
    }
    if let Some(site) = op.max_site().filter(|&s| s >= n_sites) {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let d = 1usize << n_sites;
    let mut total = Mat::<Complex64>::zeros(d, d);
    for term in op.terms() {
        let mut factors = vec![identity(2); n_sites];
        for &(site, o) in term.factors() {
            factors[site] = local(o);
        }
        let mut m = identity(1);
        for f in factors.iter().rev() {
            m = kron(&m, f);
        }
        let coeff = term.coefficient();
        total += Mat::from_fn(d, d, |i, j| coeff * m[(i, j)]);
    }
    Ok(total)
}

/// Hamiltonian and jump operators as dense matrices.
#[derive(Clone, Debug)]
pub struct DenseModel {
    pub n_sites: usize,
    pub hamiltonian: CMat,
    pub jumps: Vec<(f64, CMat)>,
}

impl DenseModel {
    pub fn new(m: &LindbladModel) -> Result<Self> {
        let n = m.n_sites();
        Ok(Self {
            n_sites: n,
            hamiltonian: dense_operator(m.hamiltonian(), n)?,
            jumps: m
                .jumps()
                .iter()
                .map(|j| Ok((j.rate, dense_operator(&j.operator, n)?)))
                .collect::<Result<_>>()?,
        })
    }

    /// `ℒ[ρ]` by direct matrix products.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let h = &self.hamiltonian;
        let comm = h * rho - rho * h;
        let mut out = scale(&comm, c(0.0, -1.0));
        for (g, l) in &self.jumps {
            let ld = adjoint(l);
            let ldl = &ld * l;
            let term = l * rho * &ld - scale(&(&ldl * rho + rho * &ldl), c(0.5, 0.0));
            out += scale(&term, c(*g, 0.0));
        }
        out
    }
}

/// The full superoperator in column-stacked form.
#[derive(Clone, Debug)]
pub struct DenseLiouvillian {
    n_sites: usize,
    matrix: CMat,
}

impl DenseLiouvillian {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Largest `|Σ_i ℒ_{(i,i),col}|`, i.e. how far the trace is from the left kernel.
    pub fn trace_defect(&self) -> f64 {
        let d = 1usize << self.n_sites;
        (0..self.matrix.ncols())
            .map(|col| (0..d).map(|i| self.matrix[(i + d * i, col)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }
}

pub fn build_full(m: &LindbladModel) -> Result<DenseLiouvillian> {
    let n = m.n_sites();
    if n > DENSE_MAX_SITES {
        return Err(Error::ResourceLimit(format!(
            "full superoperator needs V <= {DENSE_MAX_SITES}, got {n}"
        )));
    }
    let dm = DenseModel::new(m)?;
    let d = 1usize << n;
    let id = identity(d);
    let h = &dm.hamiltonian;
    let mut sup = scale(&(kron(&id, h) - kron(&transpose(h), &id)), c(0.0, -1.0));
    for (g, l) in &dm.jumps {
        let ldl = &adjoint(l) * l;
        let anti = kron(&id, &ldl) + kron(&transpose(&ldl), &id);
        let term = kron(&conj(l), l) - scale(&anti, c(0.5, 0.0));
        sup += scale(&term, c(*g, 0.0));
    }
    Ok(DenseLiouvillian {
        n_sites: n,
        matrix: sup,
    })
}

/// Minimum eigenvalue of the Hermitian part of `a`.
pub fn min_eigenvalue_hermitian(a: &CMat) -> Result<f64> {
    let h = Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let ev = h
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
}

/// Steady state from the right singular vector of the smallest singular value.
pub fn full_steady(fl: &DenseLiouvillian) -> Result<CMat> {
    let svd = fl
        .matrix
        .svd()
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let s = svd.S().column_vector();
    let n = s.nrows();
    let scale = s[0].re.max(f64::MIN_POSITIVE);
    if n >= 2 && s[n - 2].re < 1e-8 * scale {
        return Err(Error::Reducible(format!(
            "two singular values below {:.1e}",
            1e-8 * scale
        )));
    }
    let v = svd.V();
    let d = 1usize << fl.n_sites;
    let raw = Mat::from_fn(d, d, |i, j| v[(i + d * j, n - 1)]);
    let tr = trace(&raw);
    if tr.norm() < 1e-14 {
        return Err(Error::NoSteadyState("null vector has zero trace".into()));
    }
    let rho = Mat::from_fn(d, d, |i, j| 0.5 * (raw[(i, j)] / tr + (raw[(j, i)] / tr).conj()));
    let min = min_eigenvalue_hermitian(&rho)?;
    if min < -1e-10 {
        return Err(Error::Consistency(format!(
            "oracle steady state has eigenvalue {min:.3e}"
        )));
    }
    Ok(rho)
}

/// Permutation matrix with `W|n⟩ = |π(n)⟩`, bit `s` of `n` moved to bit `π(s)`.
pub fn permutation_matrix(p: &SitePermutation) -> CMat {
    let v = p.len();
    let d = 1usize << v;
    let mut w = Mat::<Complex64>::zeros(d, d);
    for n in 0..d {
        let mut image = 0usize;
        for s in 0..v {
            if (n >> s) & 1 == 1 {
                image |= 1 << p.apply(s);
            }
        }
        w[(image, n)] = c(1.0, 0.0);
    }
    w
}

/// `diag((−1)^{popcount(n)})`.
pub fn parity_operator(n_sites: usize) -> CMat {
    let d = 1usize << n_sites;
    Mat::from_fn(d, d, |i, j| {
        if i != j {
            c(0.0, 0.0)
        } else if i.count_ones() % 2 == 0 {
            c(1.0, 0.0)
        } else {
            c(-1.0, 0.0)
        }
    })
}

/// `W ρ W†`.
pub fn conjugate_by(w: &CMat, rho: &CMat) -> CMat {
    w * rho * adjoint(w)
}

/// Random Hermitian matrix with entries uniform in `[−1, 1]`.
pub fn random_hermitian(d: usize, rng: &mut impl Rng) -> CMat {
    let mut m = Mat::<Complex64>::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c(rng.gen_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// `max_{W, ρ} ‖W ℒ[ρ] W† − ℒ[W ρ W†]‖_F` over the group and three seeded
/// random Hermitian `ρ`.
pub fn verify_weak_symmetry_numeric(m: &LindbladModel, g: &SymmetryGroup, seed: u64) -> Result<f64> {
    let n = m.n_sites();
    if n > WEAK_SYMMETRY_MAX_SITES {
        return Err(Error::ResourceLimit(format!(
            "numeric symmetry check needs V <= {WEAK_SYMMETRY_MAX_SITES}, got {n}"
        )));
    }
    if g.n_sites() != n {
        return Err(Error::Dimension {
            expected: n,
            found: g.n_sites(),
        });
    }
    let dm = DenseModel::new(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<CMat> = (0..3).map(|_| random_hermitian(1 << n, &mut rng)).collect();
    let mut worst = 0.0f64;
    for p in g.elements() {
        let w = permutation_matrix(p);
        for rho in &samples {
            let lhs = conjugate_by(&w, &dm.apply(rho));
            let rhs = dm.apply(&conjugate_by(&w, rho));
            worst = worst.max(frobenius_distance(&lhs, &rhs));
        }
    }
    Ok(worst)
}

/// `(√|O| / |G|) Σ_g W_g P W_g†` for a single projector pair, built densely.
pub fn symmetrize_pair(g: &SymmetryGroup, ket: u32, bra: u32) -> Result<CMat> {
    let n = g.n_sites();
    if n > DENSE_MAX_SITES {
        return Err(Error::ResourceLimit(format!(
            "dense symmetrization needs V <= {DENSE_MAX_SITES}, got {n}"
        )));
    }
    let d = 1usize << n;
    let mut p = Mat::<Complex64>::zeros(d, d);
    p[(ket as usize, bra as usize)] = c(1.0, 0.0);
    let mut sum = Mat::<Complex64>::zeros(d, d);
    for e in g.elements() {
        sum += conjugate_by(&permutation_matrix(e), &p);
    }
    // the group sum hits each of the |O| members |G|/|O| times
    let hits = sum[(ket as usize, bra as usize)].re;
    let orbit = g.order() as f64 / hits;
    Ok(scale(&sum, c(orbit.sqrt() / g.order() as f64, 0.0)))
}
