// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Expectation values, magnetization and susceptibilities of steady states.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SymmetryGroup};
use crate::liouvillian::build_reduced;
use crate::model::{LocalOp, OperatorString, OperatorSum, XyzParams};
use crate::orbit::{Parity, Sector};
use crate::solver::{solve_steady, SolverOptions, SteadyState};

/// Largest site-to-site spread tolerated in a magnetization.
pub const UNIFORMITY_TOL: f64 = 1e-10;

/// `tr(O ρ)` evaluated orbit by orbit from the coefficients.
pub fn expect(op: &OperatorSum, ss: &SteadyState) -> Result<Complex64> {
    let basis = ss.basis();
    let n_sites = basis.n_sites();
    if let Some(site) = op.max_site().filter(|&s| s >= n_sites) {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    // a string with f flips only links pairs at Hamming distance f
    let mut flips: Vec<u32> = op.terms().iter().map(|t| t.flip_count() as u32).collect();
    flips.sort_unstable();
    flips.dedup();
    let mut total = Complex64::new(0.0, 0.0);
    for (j, c) in ss.coefficients().iter().enumerate() {
        let el = basis.element(j);
        if c.norm() == 0.0 {
            continue;
        }
        let distance = (el.canonical.ket.0 ^ el.canonical.bra.0).count_ones();
        if flips.binary_search(&distance).is_err() {
            continue;
        }
        // tr(O |n⟩⟨m|) = ⟨m|O|n⟩
        let mut sum = Complex64::new(0.0, 0.0);
        for pp in basis.orbit_members(j) {
            for t in op.terms() {
                if let Some((out, a)) = t.apply(pp.ket) {
                    if out == pp.bra {
                        sum += a;
                    }
                }
            }
        }
        total += c * el.amplitude() * sum;
    }
    Ok(total)
}

pub fn expect_many(ops: &[OperatorSum], ss: &SteadyState) -> Result<Vec<Complex64>> {
    ops.iter().map(|op| expect(op, ss)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Magnetization {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Site-averaged `⟨σᵅ⟩`, after checking that every site agrees.
pub fn magnetization(ss: &SteadyState) -> Result<Magnetization> {
    let n = ss.basis().n_sites();
    let mut out = [0.0; 3];
    for (slot, op) in out.iter_mut().zip([LocalOp::X, LocalOp::Y, LocalOp::Z]) {
        let values: Vec<f64> = (0..n)
            .map(|s| {
                let sum = OperatorSum::new(vec![OperatorString::single(1.0, s, op)]);
                expect(&sum, ss).map(|z| z.re)
            })
            .collect::<Result<_>>()?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > UNIFORMITY_TOL {
            return Err(Error::Consistency(format!(
                "{op:?} magnetization varies across sites by {:.3e}",
                hi - lo
            )));
        }
        *slot = values.iter().sum::<f64>() / n as f64;
    }
    Ok(Magnetization {
        x: out[0],
        y: out[1],
        z: out[2],
    })
}

/// `χ_αβ = ∂M_α / ∂h_β` at zero field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SusceptibilityTensor {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl SusceptibilityTensor {
    pub fn identity() -> Self {
        Self::diag(1.0, 1.0)
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self {
            xx: a,
            xy: 0.0,
            yx: 0.0,
            yy: b,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.xx, self.xy, self.yx, self.yy].iter().all(|v| v.is_finite())
    }

    /// Largest componentwise difference relative to the largest component.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let a = [self.xx, self.xy, self.yx, self.yy];
        let b = [other.xx, other.xy, other.yx, other.yy];
        let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        diff / scale.max(f64::MIN_POSITIVE)
    }

    /// Singular values `σ₁ ≥ σ₂ ≥ 0`.
    pub fn singular_values(&self) -> (f64, f64) {
        // for a 2×2 real matrix, σ₁ ± σ₂ = ‖(a+d, c−b)‖, ‖(a−d, c+b)‖
        let (a, b, c, d) = (self.xx, self.xy, self.yx, self.yy);
        let p = (a + d).hypot(c - b);
        let q = (a - d).hypot(c + b);
        ((p + q) / 2.0, (p - q).abs() / 2.0)
    }
}

/// Central differences of `M_x, M_y` with respect to `h_x, h_y`.
///
/// `magnetization_at(hx, hy)` must return `(M_x, M_y)`; the four evaluations
/// run concurrently.
pub fn susceptibility<F>(magnetization_at: F, delta: f64) -> Result<SusceptibilityTensor>
where
    F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
{
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("field step must be > 0, got {delta}")));
    }
    let f = &magnetization_at;
    let ((px, mx), (py, my)) = rayon::join(
        || rayon::join(|| f(delta, 0.0), || f(-delta, 0.0)),
        || rayon::join(|| f(0.0, delta), || f(0.0, -delta)),
    );
    let (px, mx, py, my) = (px?, mx?, py?, my?);
    let d = 2.0 * delta;
    Ok(SusceptibilityTensor {
        xx: (px.0 - mx.0) / d,
        yx: (px.1 - mx.1) / d,
        xy: (py.0 - my.0) / d,
        yy: (py.1 - my.1) / d,
    })
}

/// In-plane magnetization of the XYZ model on `lattice` under field `(hx, hy)`.
pub fn xyz_in_plane_magnetization(
    lattice: &Lattice,
    group: &SymmetryGroup,
    params: &XyzParams,
    hx: f64,
    hy: f64,
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let model = XyzParams { hx, hy, ..*params }.build(lattice)?;
    let sector = if model.is_parity_preserving() {
        Sector::Even
    } else {
        Sector::Full
    };
    let l = build_reduced(&model, group, sector)?;
    let ss = solve_steady(&l, opts)?;
    let m = magnetization(&ss)?;
    Ok((m.x, m.y))
}

/// Susceptibility of the XYZ model at the zero-field point of `params`.
pub fn xyz_susceptibility(
    lattice: &Lattice,
    params: &XyzParams,
    delta: f64,
    opts: &SolverOptions,
) -> Result<SusceptibilityTensor> {
    let group = lattice.symmetry_group()?;
    susceptibility(
        |hx, hy| xyz_in_plane_magnetization(lattice, &group, params, hx, hy, opts),
        delta,
    )
}

/// Complete elliptic integral of the second kind `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`
/// via the arithmetic-geometric mean, for `0 ≤ m < 1`.
fn elliptic_e(m: f64) -> f64 {
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    let mut sum = m / 2.0;
    let mut pow = 0.5;
    while (a - b).abs() > f64::EPSILON * a {
        let c = (a - b) / 2.0;
        let a_next = (a + b) / 2.0;
        b = (a * b).sqrt();
        a = a_next;
        pow *= 2.0;
        sum += pow * c * c;
    }
    (PI / (2.0 * a)) * (1.0 - sum)
}

/// Field-direction average `(1/2π) ∫ |χ (cos θ, sin θ)| dθ`.
///
/// The integrand only depends on the singular values, and equals the speed
/// along an ellipse with those semi-axes, so the average is
/// `(2/π) σ₁ E(1 − σ₂²/σ₁²)`.
pub fn chi_av(chi: &SusceptibilityTensor) -> f64 {
    let (s1, s2) = chi.singular_values();
    if s1 == 0.0 {
        return 0.0;
    }
    if s2 == 0.0 {
        return 2.0 * s1 / PI;
    }
    let ratio = s2 / s1;
    2.0 * s1 / PI * elliptic_e(1.0 - ratio * ratio)
}

/// The same average by the periodic trapezoid rule on `n_theta` nodes.
pub fn chi_av_quadrature(chi: &SusceptibilityTensor, n_theta: usize) -> Result<f64> {
    if n_theta < 8 {
        return Err(Error::InvalidArgument(format!("n_theta must be >= 8, got {n_theta}")));
    }
    let sum: f64 = (0..n_theta)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / n_theta as f64).sin_cos();
            (chi.xx * c + chi.xy * s).hypot(chi.yx * c + chi.yy * s)
        })
        .sum();
    Ok(sum / n_theta as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRecord {
    /// Position after sorting by `|c|` (0-based).
    pub rank: usize,
    /// Basis index.
    pub index: usize,
    pub value: Complex64,
    pub delta_n: i32,
    pub parity: Parity,
    pub orbit_size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSpectrum {
    /// Sorted by `|c|` descending, ties by basis index.
    pub by_magnitude: Vec<SpectrumRecord>,
    /// The same records in basis order.
    pub by_index: Vec<SpectrumRecord>,
}

impl CoefficientSpectrum {
    /// Count of coefficients with `|c| > tol` for the given parity.
    pub fn count_above(&self, parity: Parity, tol: f64) -> usize {
        self.by_index
            .iter()
            .filter(|r| r.parity == parity && r.value.norm() > tol)
            .count()
    }

    pub fn max_abs(&self, parity: Parity) -> f64 {
        self.by_index
            .iter()
            .filter(|r| r.parity == parity)
            .map(|r| r.value.norm())
            .fold(0.0, f64::max)
    }
}

pub fn coefficient_spectrum(ss: &SteadyState) -> CoefficientSpectrum {
    let basis = ss.basis();
    let mut order: Vec<usize> = (0..ss.coefficients().len()).collect();
    let abs: Vec<f64> = ss.coefficients().iter().map(|z| z.norm()).collect();
    order.sort_by(|&a, &b| abs[b].total_cmp(&abs[a]).then(a.cmp(&b)));
    let mut by_index: Vec<SpectrumRecord> = ss
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, &value)| {
            let el = basis.element(j);
            SpectrumRecord {
                rank: 0,
                index: j,
                value,
                delta_n: el.delta_n,
                parity: el.parity,
                orbit_size: el.orbit_size,
            }
        })
        .collect();
    for (rank, &j) in order.iter().enumerate() {
        by_index[j].rank = rank;
    }
    let by_magnitude = order.iter().map(|&j| by_index[j].clone()).collect();
    CoefficientSpectrum {
        by_magnitude,
        by_index,
    }
}
