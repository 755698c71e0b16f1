// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Hamiltonians and jump operators as sums of site-local operator strings.
//!
//! Local dictionary, with `|0⟩` the spin-down state (`σᶻ = −1`):
//!
//! | op   | `|0⟩`      | `|1⟩`      |
//! |------|------------|------------|
//! | `σˣ` | `|1⟩`      | `|0⟩`      |
//! | `σʸ` | `−i |1⟩`   | `i |0⟩`    |
//! | `σᶻ` | `−|0⟩`     | `|1⟩`      |
//! | `σ⁺` | `|1⟩`      | 0          |
//! | `σ⁻` | 0          | `|0⟩`      |
//! | `n`  | 0          | `|1⟩`      |
//!
//! so that `σʸ = i σˣ σᶻ`, `[σˣ, σʸ] = 2i σᶻ` and `σ⁻ = (σˣ − i σʸ)/2`.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::BasisState;
use crate::lattice::{BondConvention, Lattice, SitePermutation, SymmetryGroup};
use crate::orbit::Parity;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalOp {
    X,
    Y,
    Z,
    Plus,
    Minus,
    Number,
}

impl LocalOp {
    /// Image of the single-site state `bit`, or `None` if annihilated.
    #[inline]
    pub fn apply(self, bit: bool) -> Option<(bool, Complex64)> {
        match (self, bit) {
            (LocalOp::X, b) => Some((!b, ONE)),
            (LocalOp::Y, false) => Some((true, -I)),
            (LocalOp::Y, true) => Some((false, I)),
            (LocalOp::Z, false) => Some((false, -ONE)),
            (LocalOp::Z, true) => Some((true, ONE)),
            (LocalOp::Plus, false) => Some((true, ONE)),
            (LocalOp::Plus, true) => None,
            (LocalOp::Minus, false) => None,
            (LocalOp::Minus, true) => Some((false, ONE)),
            (LocalOp::Number, false) => None,
            (LocalOp::Number, true) => Some((true, ONE)),
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            LocalOp::Plus => LocalOp::Minus,
            LocalOp::Minus => LocalOp::Plus,
            op => op,
        }
    }

    /// Whether the operator changes the occupation of its site.
    pub fn flips(self) -> bool {
        matches!(self, LocalOp::X | LocalOp::Y | LocalOp::Plus | LocalOp::Minus)
    }

    /// 2×2 matrix `[⟨r|op|c⟩]` in the `(|0⟩, |1⟩)` basis.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for c in 0..2 {
            if let Some((r, a)) = self.apply(c == 1) {
                m[r as usize][c] = a;
            }
        }
        m
    }

    fn symbol(self) -> &'static str {
        match self {
            LocalOp::X => "X",
            LocalOp::Y => "Y",
            LocalOp::Z => "Z",
            LocalOp::Plus => "+",
            LocalOp::Minus => "-",
            LocalOp::Number => "N",
        }
    }
}

/// Factors plus the bit patterns of the coefficient.
type ExactKey = (Vec<(usize, LocalOp)>, u64, u64);

/// `coefficient · Π_s op_s` with at most one factor per site, stored sorted by site.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorString {
    coefficient: Complex64,
    factors: Vec<(usize, LocalOp)>,
}

impl OperatorString {
    pub fn new(coefficient: Complex64, mut factors: Vec<(usize, LocalOp)>) -> Result<Self> {
        factors.sort_by_key(|f| f.0);
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidOperator(format!(
                "more than one factor on a site in {factors:?}"
            )));
        }
        Ok(Self {
            coefficient,
            factors,
        })
    }

    pub fn single(coefficient: f64, site: usize, op: LocalOp) -> Self {
        Self {
            coefficient: Complex64::new(coefficient, 0.0),
            factors: vec![(site, op)],
        }
    }

    pub fn pair(coefficient: f64, i: usize, a: LocalOp, j: usize, b: LocalOp) -> Result<Self> {
        Self::new(Complex64::new(coefficient, 0.0), vec![(i, a), (j, b)])
    }

    pub fn coefficient(&self) -> Complex64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[(usize, LocalOp)] {
        &self.factors
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.last().map(|f| f.0)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            coefficient: self.coefficient * s,
            factors: self.factors.clone(),
        }
    }

    /// Factors on distinct sites commute, so the adjoint is factorwise.
    pub fn adjoint(&self) -> Self {
        Self {
            coefficient: self.coefficient.conj(),
            factors: self.factors.iter().map(|&(s, op)| (s, op.adjoint())).collect(),
        }
    }

    /// Relabels sites through `p`.
    pub fn permuted(&self, p: &SitePermutation) -> Self {
        let mut factors: Vec<(usize, LocalOp)> =
            self.factors.iter().map(|&(s, op)| (p.apply(s), op)).collect();
        factors.sort_by_key(|f| f.0);
        Self {
            coefficient: self.coefficient,
            factors,
        }
    }

    pub fn flip_count(&self) -> usize {
        self.factors.iter().filter(|f| f.1.flips()).count()
    }

    pub fn parity(&self) -> Parity {
        if self.flip_count().is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Image of a product state with accumulated amplitude, or `None` if annihilated.
    #[inline]
    pub fn apply(&self, s: BasisState) -> Option<(BasisState, Complex64)> {
        let mut word = s.0;
        let mut amp = self.coefficient;
        for &(site, op) in &self.factors {
            let bit = (word >> site) & 1 == 1;
            let (out, a) = op.apply(bit)?;
            if out != bit {
                word ^= 1 << site;
            }
            amp *= a;
        }
        Some((BasisState(word), amp))
    }

    /// Sort key for exact multiset comparisons.
    fn exact_key(&self) -> ExactKey {
        (
            self.factors.clone(),
            self.coefficient.re.to_bits(),
            self.coefficient.im.to_bits(),
        )
    }
}

impl fmt::Display for OperatorString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coefficient)?;
        for (s, op) in &self.factors {
            write!(f, " {}{}", op.symbol(), s)?;
        }
        Ok(())
    }
}

/// Checked application: every factor must lie within `n_sites`.
pub fn apply_string(
    t: &OperatorString,
    n_sites: usize,
    s: BasisState,
) -> Result<Option<(BasisState, Complex64)>> {
    if let Some(site) = t.max_site().filter(|&m| m >= n_sites) {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    Ok(t.apply(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityClass {
    Even,
    Odd,
    Mixed,
}

pub fn parity_of(t: &OperatorString) -> Parity {
    t.parity()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorSum {
    terms: Vec<OperatorString>,
}

impl OperatorSum {
    pub fn new(terms: Vec<OperatorString>) -> Self {
        Self { terms }
    }

    pub fn identity() -> Self {
        Self {
            terms: vec![OperatorString {
                coefficient: ONE,
                factors: Vec::new(),
            }],
        }
    }

    pub fn terms(&self) -> &[OperatorString] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn push(&mut self, t: OperatorString) {
        self.terms.push(t);
    }

    pub fn extend(&mut self, terms: impl IntoIterator<Item = OperatorString>) {
        self.terms.extend(terms);
    }

    pub fn max_site(&self) -> Option<usize> {
        self.terms.iter().filter_map(|t| t.max_site()).max()
    }

    pub fn parity_class(&self) -> ParityClass {
        let even = self.terms.iter().any(|t| t.parity() == Parity::Even);
        let odd = self.terms.iter().any(|t| t.parity() == Parity::Odd);
        match (even, odd) {
            (_, false) => ParityClass::Even,
            (false, true) => ParityClass::Odd,
            (true, true) => ParityClass::Mixed,
        }
    }

    pub fn permuted(&self, p: &SitePermutation) -> Self {
        Self {
            terms: self.terms.iter().map(|t| t.permuted(p)).collect(),
        }
    }

    /// Hermiticity of the sum, decided by merging terms with equal factor
    /// lists and pairing each merged term with its adjoint.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let mut merged: HashMap<Vec<(usize, LocalOp)>, Complex64> = HashMap::new();
        for t in &self.terms {
            *merged.entry(t.factors.clone()).or_default() += t.coefficient;
        }
        merged.iter().all(|(factors, c)| {
            let adj: Vec<(usize, LocalOp)> =
                factors.iter().map(|&(s, op)| (s, op.adjoint())).collect();
            let partner = merged.get(&adj).copied().unwrap_or_default();
            (partner.conj() - c).norm() <= tol
        })
    }

    fn sorted_keys(&self) -> Vec<ExactKey> {
        let mut keys: Vec<_> = self.terms.iter().map(|t| t.exact_key()).collect();
        keys.sort();
        keys
    }
}

impl FromIterator<OperatorString> for OperatorSum {
    fn from_iter<T: IntoIterator<Item = OperatorString>>(iter: T) -> Self {
        Self {
            terms: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub operator: OperatorSum,
    pub rate: f64,
}

#[derive(Clone, Debug)]
pub struct LindbladModel {
    n_sites: usize,
    hamiltonian: OperatorSum,
    jumps: Vec<Jump>,
}

impl LindbladModel {
    pub fn new(n_sites: usize, hamiltonian: OperatorSum, jumps: Vec<Jump>) -> Result<Self> {
        if n_sites == 0 || n_sites > crate::lattice::MAX_SITES {
            return Err(Error::InvalidModel(format!("unsupported site count {n_sites}")));
        }
        let check_sites = |sum: &OperatorSum| match sum.max_site() {
            Some(site) if site >= n_sites => Err(Error::SiteOutOfRange { site, n_sites }),
            _ => Ok(()),
        };
        check_sites(&hamiltonian)?;
        for j in &jumps {
            check_sites(&j.operator)?;
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(Error::InvalidModel(format!("jump rate {} must be >= 0", j.rate)));
            }
        }
        if !hamiltonian.is_hermitian(1e-14) {
            return Err(Error::InvalidModel("Hamiltonian is not Hermitian".into()));
        }
        Ok(Self {
            n_sites,
            hamiltonian,
            jumps,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn hamiltonian(&self) -> &OperatorSum {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Adds terms to the Hamiltonian (e.g. a magnetic field).
    pub fn with_hamiltonian_terms(
        mut self,
        terms: impl IntoIterator<Item = OperatorString>,
    ) -> Result<Self> {
        self.hamiltonian.extend(terms);
        Self::new(self.n_sites, self.hamiltonian, self.jumps)
    }

    /// Whether the parity-mixing part of the generator vanishes identically:
    /// every Hamiltonian string is even and every jump has a definite parity.
    pub fn is_parity_preserving(&self) -> bool {
        self.hamiltonian.parity_class() == ParityClass::Even
            && self
                .jumps
                .iter()
                .all(|j| j.operator.parity_class() != ParityClass::Mixed)
    }
}

/// Couplings of the dissipative XYZ model, in units of the decay rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XyzParams {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub gamma: f64,
    pub hx: f64,
    pub hy: f64,
    pub bonds: BondConvention,
}

impl Default for XyzParams {
    fn default() -> Self {
        Self {
            jx: 0.9,
            jy: 1.0,
            jz: 1.0,
            gamma: 1.0,
            hx: 0.0,
            hy: 0.0,
            bonds: BondConvention::Unique,
        }
    }
}

impl XyzParams {
    pub fn build(&self, lattice: &Lattice) -> Result<LindbladModel> {
        let model = build_xyz_with(lattice, self.jx, self.jy, self.jz, self.gamma, self.bonds)?;
        model.with_hamiltonian_terms(build_field(lattice.n_sites(), self.hx, self.hy))
    }
}

/// `Σ_⟨ij⟩ (Jx σˣσˣ + Jy σʸσʸ + Jz σᶻσᶻ)` over unique first-neighbor bonds,
/// with one `σ⁻` jump of rate `gamma` per site.
pub fn build_xyz(lattice: &Lattice, jx: f64, jy: f64, jz: f64, gamma: f64) -> Result<LindbladModel> {
    build_xyz_with(lattice, jx, jy, jz, gamma, BondConvention::Unique)
}

pub fn build_xyz_with(
    lattice: &Lattice,
    jx: f64,
    jy: f64,
    jz: f64,
    gamma: f64,
    bonds: BondConvention,
) -> Result<LindbladModel> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidModel(format!("gamma must be > 0, got {gamma}")));
    }
    let mut h = OperatorSum::default();
    for (i, j) in lattice.bonds(bonds) {
        for (coupling, op) in [(jx, LocalOp::X), (jy, LocalOp::Y), (jz, LocalOp::Z)] {
            if coupling != 0.0 {
                h.push(OperatorString::pair(coupling, i, op, j, op)?);
            }
        }
    }
    let jumps = (0..lattice.n_sites())
        .map(|s| Jump {
            operator: OperatorSum::new(vec![OperatorString::single(1.0, s, LocalOp::Minus)]),
            rate: gamma,
        })
        .collect();
    LindbladModel::new(lattice.n_sites(), h, jumps)
}

/// Uniform in-plane field `Σ_i (hx σˣ_i + hy σʸ_i)`; zero components add no terms.
pub fn build_field(n_sites: usize, hx: f64, hy: f64) -> Vec<OperatorString> {
    let mut terms = Vec::new();
    for s in 0..n_sites {
        if hx != 0.0 {
            terms.push(OperatorString::single(hx, s, LocalOp::X));
        }
        if hy != 0.0 {
            terms.push(OperatorString::single(hy, s, LocalOp::Y));
        }
    }
    terms
}

/// A term declared relative to an anchor site by lattice displacements,
/// replicated over every anchor with periodic wrapping.
#[derive(Clone, Debug, PartialEq)]
pub struct TermTemplate {
    pub coefficient: Complex64,
    pub factors: Vec<((i64, i64), LocalOp)>,
}

impl TermTemplate {
    pub fn replicate(&self, lattice: &Lattice) -> Result<Vec<OperatorString>> {
        (0..lattice.n_sites())
            .map(|anchor| {
                let (x, y) = lattice.coords(anchor);
                let factors = self
                    .factors
                    .iter()
                    .map(|&((dx, dy), op)| (lattice.site_at(x as i64 + dx, y as i64 + dy), op))
                    .collect();
                OperatorString::new(self.coefficient, factors)
            })
            .collect()
    }
}

/// Homogeneous finite-range model: every Hamiltonian template and every
/// `(jump template, rate)` is translated over all sites.
pub fn build_homogeneous(
    lattice: &Lattice,
    hamiltonian: &[TermTemplate],
    jumps: &[(TermTemplate, f64)],
) -> Result<LindbladModel> {
    let mut h = OperatorSum::default();
    for t in hamiltonian {
        h.extend(t.replicate(lattice)?);
    }
    let mut js = Vec::new();
    for (t, rate) in jumps {
        for op in t.replicate(lattice)? {
            js.push(Jump {
                operator: OperatorSum::new(vec![op]),
                rate: *rate,
            });
        }
    }
    LindbladModel::new(lattice.n_sites(), h, js)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakSymmetryReport {
    pub passed: bool,
    /// Index of the first failing group element.
    pub failing_element: Option<usize>,
    /// A term of the permuted model without a partner in the original.
    pub witness: Option<String>,
}

/// Structural sufficient condition for weak symmetry: for every group element
/// the permuted Hamiltonian term multiset and the permuted multiset of
/// `(jump, rate)` equal the originals, with coefficients compared bit-exactly.
pub fn check_weak_symmetry(m: &LindbladModel, g: &SymmetryGroup) -> WeakSymmetryReport {
    if g.n_sites() != m.n_sites() {
        return WeakSymmetryReport {
            passed: false,
            failing_element: None,
            witness: Some(format!(
                "group acts on {} sites, model has {}",
                g.n_sites(),
                m.n_sites()
            )),
        };
    }
    let h_keys = m.hamiltonian.sorted_keys();
    let jump_keys = |jumps: &[Jump]| {
        let mut keys: Vec<_> = jumps
            .iter()
            .map(|j| (j.operator.sorted_keys(), j.rate.to_bits()))
            .collect();
        keys.sort();
        keys
    };
    let j_keys = jump_keys(&m.jumps);
    for (e, p) in g.elements().iter().enumerate() {
        let permuted = m.hamiltonian.permuted(p);
        if permuted.sorted_keys() != h_keys {
            let witness = permuted
                .terms
                .iter()
                .find(|t| !h_keys.contains(&t.exact_key()))
                .map(|t| t.to_string());
            return WeakSymmetryReport {
                passed: false,
                failing_element: Some(e),
                witness: witness.or_else(|| Some("Hamiltonian term multiplicity".into())),
            };
        }
        let permuted_jumps: Vec<Jump> = m
            .jumps
            .iter()
            .map(|j| Jump {
                operator: j.operator.permuted(p),
                rate: j.rate,
            })
            .collect();
        if jump_keys(&permuted_jumps) != j_keys {
            return WeakSymmetryReport {
                passed: false,
                failing_element: Some(e),
                witness: Some("jump operator set".into()),
            };
        }
    }
    WeakSymmetryReport {
        passed: true,
        failing_element: None,
        witness: None,
    }
}

/// Returns a copy of `m` with the `Jx` coupling of one bond shifted by `delta`.
pub fn perturb_bond(
    lattice: &Lattice,
    params: &XyzParams,
    bond: usize,
    delta: f64,
) -> Result<LindbladModel> {
    let bonds = lattice.bonds(params.bonds);
    let &(i, j) = bonds.get(bond).ok_or_else(|| {
        Error::InvalidArgument(format!("bond {bond} out of range ({} bonds)", bonds.len()))
    })?;
    let base = params.build(lattice)?;
    base.with_hamiltonian_terms([OperatorString::pair(delta, i, LocalOp::X, j, LocalOp::X)?])
}
