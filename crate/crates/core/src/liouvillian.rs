// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! The Lindblad generator acting on projector pairs, and its matrix on the
//! invariant basis.
//!
//! For `P = |n⟩⟨m|` and jumps `L = Σ_a ℓ_a` written as sums of strings,
//!
//! ```text
//! ℒ[P] = −i(H P − P H) + Σ γ Σ_{a,b} ( ℓ_a P ℓ_b† − ½ ℓ_a† ℓ_b P − ½ P ℓ_b† ℓ_a )
//! ```
//!
//! Every string maps a product state to at most one product state, so each
//! term yields at most one output pair. A term changes the parity of `ΔN`
//! exactly when its net flip count is odd; [`Part`] selects the terms that
//! keep or change it.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{GroupAction, ProjectorPair};
use crate::lattice::SymmetryGroup;
use crate::model::{LindbladModel, OperatorString};
use crate::orbit::{InvariantBasis, Parity, Sector, DEFAULT_ENUMERATION_MAX_SITES};
use crate::sparse::CscMatrix;

/// Entries with smaller magnitude are not stored.
pub const DROP_TOLERANCE: f64 = 1e-15;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which terms of the generator to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Part {
    Full,
    /// Terms that preserve the parity of `ΔN`.
    Even,
    /// Terms that flip the parity of `ΔN`.
    Odd,
}

impl Part {
    fn keeps(self, parity: Parity) -> bool {
        match self {
            Part::Full => true,
            Part::Even => parity == Parity::Even,
            Part::Odd => parity == Parity::Odd,
        }
    }
}

struct CompiledJump {
    rate: f64,
    strings: Vec<OperatorString>,
    adjoints: Vec<OperatorString>,
}

/// A model preprocessed for repeated application to projector pairs.
pub struct Generator<'m> {
    model: &'m LindbladModel,
    jumps: Vec<CompiledJump>,
}

impl<'m> Generator<'m> {
    pub fn new(model: &'m LindbladModel) -> Self {
        let jumps = model
            .jumps()
            .iter()
            .filter(|j| j.rate > 0.0)
            .map(|j| CompiledJump {
                rate: j.rate,
                strings: j.operator.terms().to_vec(),
                adjoints: j.operator.terms().iter().map(|t| t.adjoint()).collect(),
            })
            .collect();
        Self { model, jumps }
    }

    pub fn model(&self) -> &LindbladModel {
        self.model
    }

    /// Calls `emit` once per term contribution; outputs may repeat.
    pub fn apply(&self, pp: ProjectorPair, part: Part, mut emit: impl FnMut(ProjectorPair, Complex64)) {
        let (n, m) = (pp.ket, pp.bra);
        for t in self.model.hamiltonian().terms() {
            if !part.keeps(t.parity()) {
                continue;
            }
            if let Some((n2, a)) = t.apply(n) {
                emit(ProjectorPair { ket: n2, bra: m }, -I * a);
            }
            // ⟨m|H = (H|m⟩)† summed over terms, valid because H = H†
            if let Some((m2, b)) = t.apply(m) {
                emit(ProjectorPair { ket: n, bra: m2 }, I * b.conj());
            }
        }
        for jump in &self.jumps {
            let g = jump.rate;
            let half = -0.5 * g;
            for (a, la) in jump.strings.iter().enumerate() {
                for lb in &jump.strings {
                    let same = la.parity() == lb.parity();
                    let parity = if same { Parity::Even } else { Parity::Odd };
                    if !part.keeps(parity) {
                        continue;
                    }
                    // ℓ_a P ℓ_b†
                    if let (Some((x, alpha)), Some((y, beta))) = (la.apply(n), lb.apply(m)) {
                        emit(ProjectorPair { ket: x, bra: y }, g * alpha * beta.conj());
                    }
                    // ℓ_a† ℓ_b P
                    if let Some((x, beta)) = lb.apply(n) {
                        if let Some((y, alpha)) = jump.adjoints[a].apply(x) {
                            emit(ProjectorPair { ket: y, bra: m }, half * alpha * beta);
                        }
                    }
                    // P ℓ_b† ℓ_a = |n⟩ (ℓ_a† ℓ_b |m⟩)†
                    if let Some((x, beta)) = lb.apply(m) {
                        if let Some((y, alpha)) = jump.adjoints[a].apply(x) {
                            emit(ProjectorPair { ket: n, bra: y }, half * (alpha * beta).conj());
                        }
                    }
                }
            }
        }
    }
}

/// `ℒ[|n⟩⟨m|]` as a sorted, merged list of `(pair, coefficient)`.
pub fn apply_generator(m: &LindbladModel, pp: ProjectorPair) -> Result<Vec<(ProjectorPair, Complex64)>> {
    apply_generator_part(m, pp, Part::Full)
}

pub fn apply_generator_part(
    m: &LindbladModel,
    pp: ProjectorPair,
    part: Part,
) -> Result<Vec<(ProjectorPair, Complex64)>> {
    let limit = 1u64 << m.n_sites();
    if pp.ket.0 as u64 >= limit || pp.bra.0 as u64 >= limit {
        return Err(Error::Dimension {
            expected: m.n_sites(),
            found: (32 - pp.ket.0.max(pp.bra.0).leading_zeros()) as usize,
        });
    }
    let mut acc: BTreeMap<ProjectorPair, Complex64> = BTreeMap::new();
    Generator::new(m).apply(pp, part, |q, w| *acc.entry(q).or_default() += w);
    Ok(acc.into_iter().filter(|(_, w)| w.norm() >= DROP_TOLERANCE).collect())
}

/// Generator matrix `L̃_kj = tr(ρ_k† ℒ[ρ_j])` on an invariant basis.
#[derive(Clone, Debug)]
pub struct ReducedLiouvillian {
    matrix: CscMatrix,
    basis: Arc<InvariantBasis>,
    trace_vector: Vec<f64>,
    part: Part,
}

impl ReducedLiouvillian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> &Arc<InvariantBasis> {
        &self.basis
    }

    pub fn sector(&self) -> Sector {
        self.basis.sector()
    }

    pub fn part(&self) -> Part {
        self.part
    }

    pub fn trace_vector(&self) -> &[f64] {
        &self.trace_vector
    }

    /// Largest `|(t·L̃)_j|` over columns.
    pub fn trace_defect(&self) -> f64 {
        self.matrix
            .left_mul_real(&self.trace_vector)
            .into_iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Stored entries linking basis elements of opposite parity.
    pub fn parity_coupling_entries(&self) -> usize {
        let e = self.basis.elements();
        self.matrix
            .triplets()
            .filter(|&(r, c, _)| e[r].parity != e[c].parity)
            .count()
    }

    pub fn write_coo<W: Write>(&self, w: W) -> Result<()> {
        self.matrix.write_coo(w, self.sector().as_str())
    }
}

/// Column `j`: orbit index and accumulated amplitude, scaled to `L̃_kj`.
fn reduced_column(
    generator: &Generator<'_>,
    basis: &InvariantBasis,
    j: usize,
    part: Part,
) -> Result<Vec<(usize, Complex64)>> {
    let action = basis.action();
    let el = basis.element(j);
    let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
    let mut missing = None;
    generator.apply(el.canonical, part, |q, w| {
        let (canon, _) = action.canonical(q);
        match basis.index_of_canonical(canon) {
            Some(k) => *acc.entry(k).or_default() += w,
            None => missing = Some(q),
        }
    });
    if let Some(q) = missing {
        return Err(if basis.sector() == Sector::Even && !q.is_even() {
            Error::SectorLeak {
                ket: q.ket.0,
                bra: q.bra.0,
            }
        } else {
            Error::UnknownOrbit {
                ket: q.ket.0,
                bra: q.bra.0,
            }
        });
    }
    let size_j = el.orbit_size as f64;
    Ok(acc
        .into_iter()
        .map(|(k, w)| (k, w * (size_j / basis.element(k).orbit_size as f64).sqrt()))
        .filter(|(_, v)| v.norm() >= DROP_TOLERANCE)
        .collect())
}

/// Assembles `L̃` column by column in parallel on a fixed basis.
pub fn assemble(m: &LindbladModel, b: &Arc<InvariantBasis>) -> Result<ReducedLiouvillian> {
    assemble_part(m, b, Part::Full)
}

pub fn assemble_part(m: &LindbladModel, b: &Arc<InvariantBasis>, part: Part) -> Result<ReducedLiouvillian> {
    if m.n_sites() != b.n_sites() {
        return Err(Error::Dimension {
            expected: b.n_sites(),
            found: m.n_sites(),
        });
    }
    if b.sector() == Sector::Even && !m.is_parity_preserving() {
        return Err(Error::InvalidModel(
            "even-sector assembly requires a parity-preserving model".into(),
        ));
    }
    let generator = Generator::new(m);
    let columns: Vec<Vec<(usize, Complex64)>> = (0..b.len())
        .into_par_iter()
        .map(|j| reduced_column(&generator, b, j, part))
        .collect::<Result<_>>()?;
    Ok(ReducedLiouvillian {
        matrix: CscMatrix::from_columns(b.len(), columns)?,
        basis: Arc::clone(b),
        trace_vector: b.trace_vector(),
        part,
    })
}

/// `(M⁺, M⁻)`: the parity-preserving and parity-changing parts of `L̃`.
pub fn split_parity(
    m: &LindbladModel,
    b: &Arc<InvariantBasis>,
) -> Result<(ReducedLiouvillian, ReducedLiouvillian)> {
    Ok((assemble_part(m, b, Part::Even)?, assemble_part(m, b, Part::Odd)?))
}

/// Assembles `L̃` on the orbits reachable from `|0…0⟩⟨0…0|`, discovering them
/// breadth-first instead of enumerating all `4^V` pairs.
///
/// The span of reachable orbits is invariant under `ℒ` and contains the
/// trajectory of the dark state, hence the steady state.
pub fn assemble_discovered(
    m: &LindbladModel,
    group: &SymmetryGroup,
    sector: Sector,
) -> Result<ReducedLiouvillian> {
    let n = group.n_sites();
    if m.n_sites() != n {
        return Err(Error::Dimension {
            expected: n,
            found: m.n_sites(),
        });
    }
    if sector == Sector::Even && !m.is_parity_preserving() {
        return Err(Error::InvalidModel(
            "even-sector assembly requires a parity-preserving model".into(),
        ));
    }
    let action = GroupAction::new(group);
    let generator = Generator::new(m);

    let seed = ProjectorPair::new(0, 0);
    let mut order: Vec<(ProjectorPair, usize)> = vec![(seed, 1)];
    let mut index: HashMap<u64, usize> = HashMap::from([(seed.key(n), 0)]);
    // raw columns keyed by discovery index: (output canonical, output size, weight)
    let mut raw: Vec<Vec<(ProjectorPair, usize, Complex64)>> = Vec::new();
    let mut frontier: VecDeque<usize> = VecDeque::from([0]);

    while !frontier.is_empty() {
        let wave: Vec<usize> = frontier.drain(..).collect();
        let columns: Vec<Vec<(ProjectorPair, usize, Complex64)>> = wave
            .par_iter()
            .map(|&j| discovered_column(&generator, &action, order[j].0))
            .collect();
        for (j, col) in wave.into_iter().zip(columns) {
            for &(canon, size, _) in &col {
                let key = canon.key(n);
                if let Entry::Vacant(slot) = index.entry(key) {
                    if sector == Sector::Even && !canon.is_even() {
                        return Err(Error::SectorLeak {
                            ket: canon.ket.0,
                            bra: canon.bra.0,
                        });
                    }
                    slot.insert(order.len());
                    frontier.push_back(order.len());
                    order.push((canon, size));
                }
            }
            if raw.len() <= j {
                raw.resize_with(j + 1, Vec::new);
            }
            raw[j] = col;
        }
    }

    let basis = Arc::new(InvariantBasis::from_orbits(group.clone(), order.clone(), sector, false)?);
    let mut columns = vec![Vec::new(); basis.len()];
    for ((canon, size_j), col) in order.iter().zip(raw) {
        let j = basis.index_of_canonical(*canon).expect("registered orbit");
        columns[j] = col
            .into_iter()
            .map(|(c, size_k, w)| {
                let k = basis.index_of_canonical(c).expect("registered orbit");
                (k, w * (*size_j as f64 / size_k as f64).sqrt())
            })
            .filter(|(_, v)| v.norm() >= DROP_TOLERANCE)
            .collect();
    }
    Ok(ReducedLiouvillian {
        matrix: CscMatrix::from_columns(basis.len(), columns)?,
        trace_vector: basis.trace_vector(),
        basis,
        part: Part::Full,
    })
}

fn discovered_column(
    generator: &Generator<'_>,
    action: &GroupAction,
    rep: ProjectorPair,
) -> Vec<(ProjectorPair, usize, Complex64)> {
    let mut acc: BTreeMap<ProjectorPair, (usize, Complex64)> = BTreeMap::new();
    generator.apply(rep, Part::Full, |q, w| {
        let (canon, size) = action.canonical(q);
        acc.entry(canon).or_insert((size, Complex64::new(0.0, 0.0))).1 += w;
    });
    acc.into_iter()
        .filter(|(_, (_, w))| w.norm() >= DROP_TOLERANCE)
        .map(|(c, (s, w))| (c, s, w))
        .collect()
}

/// Reduced generator for `sector`, enumerating the basis when the cluster is
/// small enough and discovering reachable orbits otherwise.
pub fn build_reduced(
    m: &LindbladModel,
    group: &SymmetryGroup,
    sector: Sector,
) -> Result<ReducedLiouvillian> {
    if group.n_sites() <= DEFAULT_ENUMERATION_MAX_SITES {
        let basis = Arc::new(InvariantBasis::enumerate(
            group,
            sector,
            DEFAULT_ENUMERATION_MAX_SITES,
        )?);
        assemble(m, &basis)
    } else {
        assemble_discovered(m, group, sector)
    }
}
