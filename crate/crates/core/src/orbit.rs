// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Orbits of projector pairs under a site-permutation group and the
//! orthonormal basis of G-invariant operators they span.
//!
//! Each orbit `O` yields one basis operator `ρ = |O|^{-1/2} Σ_{P ∈ O} P`.
//! Summing `g P g†` over the whole group visits every orbit member
//! `|G| / |O|` times, so normalizing that group sum gives the same operator.
//! Distinct orbits are disjoint, which makes the set orthonormal.

use std::collections::HashMap;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{GroupAction, ProjectorPair};
use crate::lattice::SymmetryGroup;

/// Default ceiling for exhaustive `4^V` pair enumeration.
pub const DEFAULT_ENUMERATION_MAX_SITES: usize = 10;

/// Largest cluster for which dense `2^V × 2^V` reconstructions are allowed.
pub const DENSE_MAX_SITES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_delta(delta_n: i32) -> Self {
        if delta_n.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Which part of the invariant space a basis or generator covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    Full,
    /// Only orbits with even `ΔN`.
    Even,
}

impl Sector {
    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Full => "full",
            Sector::Even => "even",
        }
    }

    pub fn admits(self, pp: ProjectorPair) -> bool {
        match self {
            Sector::Full => true,
            Sector::Even => pp.is_even(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizedBasisElement {
    pub canonical: ProjectorPair,
    pub orbit_size: usize,
    pub delta_n: i32,
    pub parity: Parity,
    /// `tr ρ`: `√|O|` for diagonal orbits, zero otherwise.
    pub trace_value: f64,
    pub adjoint_index: usize,
}

impl SymmetrizedBasisElement {
    /// Amplitude of every orbit member inside the normalized operator.
    pub fn amplitude(&self) -> f64 {
        1.0 / (self.orbit_size as f64).sqrt()
    }

    pub fn is_diagonal(&self) -> bool {
        self.canonical.is_diagonal()
    }
}

/// Counts of a basis: total, even and odd parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisDims {
    pub total: usize,
    pub even: usize,
    pub odd: usize,
}

#[derive(Clone, Debug)]
pub struct InvariantBasis {
    group: SymmetryGroup,
    action: GroupAction,
    elements: Vec<SymmetrizedBasisElement>,
    lookup: HashMap<u64, usize>,
    n_even: usize,
    sector: Sector,
    complete: bool,
}

/// Lexicographically smallest group image of `pp` and its orbit size.
pub fn canonical_rep(pp: ProjectorPair, g: &SymmetryGroup) -> Result<(ProjectorPair, usize)> {
    let limit = 1u64 << g.n_sites();
    if pp.ket.0 as u64 >= limit || pp.bra.0 as u64 >= limit {
        return Err(Error::Dimension {
            expected: g.n_sites(),
            found: 32 - pp.ket.0.max(pp.bra.0).leading_zeros() as usize,
        });
    }
    Ok(GroupAction::new(g).canonical(pp))
}

/// Exhaustive orbit partition of all `4^V` projector pairs.
pub fn enumerate_basis(g: &SymmetryGroup) -> Result<InvariantBasis> {
    InvariantBasis::enumerate(g, Sector::Full, DEFAULT_ENUMERATION_MAX_SITES)
}

/// Number of orbits, `|G|⁻¹ Σ_g 4^{cycles(g)}`.
pub fn burnside_dim(g: &SymmetryGroup) -> u64 {
    let sum: u128 = g
        .elements()
        .iter()
        .map(|p| 1u128 << (2 * p.cycle_count()))
        .sum();
    (sum / g.order() as u128) as u64
}

/// Number of orbits with even `ΔN`.
///
/// Weighting each fixed pair by `(−1)^{ΔN}`, a cycle of length `λ` contributes
/// `2 + 2(−1)^λ`, so the signed fixed-point count is `4^{cycles}` when every
/// cycle is even and zero otherwise.
pub fn even_dim(g: &SymmetryGroup) -> u64 {
    let mut plain: u128 = 0;
    let mut signed: u128 = 0;
    for p in g.elements() {
        let lengths = p.cycle_lengths();
        plain += 1u128 << (2 * lengths.len());
        if lengths.iter().all(|l| l % 2 == 0) {
            signed += 1u128 << (2 * lengths.len());
        }
    }
    ((plain + signed) / (2 * g.order() as u128)) as u64
}

impl InvariantBasis {
    /// Partitions every pair admitted by `sector` into orbits, scanning pairs
    /// in increasing key order; a pair that is its own canonical
    /// representative opens a new orbit.
    pub fn enumerate(group: &SymmetryGroup, sector: Sector, max_sites: usize) -> Result<Self> {
        let n = group.n_sites();
        if n > max_sites {
            return Err(Error::ResourceLimit(format!(
                "exhaustive enumeration of 4^{n} pairs exceeds the {max_sites}-site cap"
            )));
        }
        let action = GroupAction::new(group);
        let total = 1u64 << (2 * n);
        const CHUNK: u64 = 1 << 14;
        let n_chunks = total.div_ceil(CHUNK);
        let orbits: Vec<(ProjectorPair, usize)> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut found = Vec::new();
                for key in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    let pp = ProjectorPair::from_key(key, n);
                    if sector.admits(pp) && action.is_canonical(pp) {
                        found.push((pp, action.canonical(pp).1));
                    }
                }
                found
            })
            .flatten()
            .collect();
        Self::from_orbits(group.clone(), orbits, sector, true)
    }

    /// Builds a basis from canonical representatives and orbit sizes.
    ///
    /// Elements are ordered even parity first, then by canonical pair.
    pub fn from_orbits(
        group: SymmetryGroup,
        mut orbits: Vec<(ProjectorPair, usize)>,
        sector: Sector,
        complete: bool,
    ) -> Result<Self> {
        let n = group.n_sites();
        let action = GroupAction::new(&group);
        orbits.sort_by_key(|(pp, _)| (!pp.is_even(), *pp));
        let lookup: HashMap<u64, usize> = orbits
            .iter()
            .enumerate()
            .map(|(i, (pp, _))| (pp.key(n), i))
            .collect();
        let mut elements = Vec::with_capacity(orbits.len());
        for (pp, size) in &orbits {
            let (adj, _) = action.canonical(pp.adjoint());
            let adjoint_index = *lookup.get(&adj.key(n)).ok_or(Error::UnknownOrbit {
                ket: adj.ket.0,
                bra: adj.bra.0,
            })?;
            let delta_n = pp.delta_n();
            elements.push(SymmetrizedBasisElement {
                canonical: *pp,
                orbit_size: *size,
                delta_n,
                parity: Parity::of_delta(delta_n),
                trace_value: if pp.is_diagonal() {
                    (*size as f64).sqrt()
                } else {
                    0.0
                },
                adjoint_index,
            });
        }
        let n_even = elements
            .iter()
            .take_while(|e| e.parity == Parity::Even)
            .count();
        Ok(Self {
            group,
            action,
            elements,
            lookup,
            n_even,
            sector,
            complete,
        })
    }

    pub fn group(&self) -> &SymmetryGroup {
        &self.group
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn n_sites(&self) -> usize {
        self.group.n_sites()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[SymmetrizedBasisElement] {
        &self.elements
    }

    pub fn element(&self, j: usize) -> &SymmetrizedBasisElement {
        &self.elements[j]
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// Whether every orbit of the sector is present (false for bases grown
    /// on demand from a seed orbit).
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn dims(&self) -> BasisDims {
        BasisDims {
            total: self.elements.len(),
            even: self.n_even,
            odd: self.elements.len() - self.n_even,
        }
    }

    /// Index of the orbit containing `pp`, if present.
    pub fn index_of(&self, pp: ProjectorPair) -> Option<usize> {
        let (canon, _) = self.action.canonical(pp);
        self.lookup.get(&canon.key(self.n_sites())).copied()
    }

    pub fn index_of_canonical(&self, canon: ProjectorPair) -> Option<usize> {
        self.lookup.get(&canon.key(self.n_sites())).copied()
    }

    pub fn orbit_members(&self, j: usize) -> Vec<ProjectorPair> {
        self.action.orbit(self.elements[j].canonical)
    }

    pub fn trace_vector(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.trace_value).collect()
    }

    /// Dense `2^V × 2^V` matrix of basis operator `j`.
    pub fn dense_element(&self, j: usize) -> Result<Mat<Complex64>> {
        let n = self.n_sites();
        if n > DENSE_MAX_SITES {
            return Err(Error::ResourceLimit(format!(
                "dense reconstruction needs V <= {DENSE_MAX_SITES}, got {n}"
            )));
        }
        let dim = 1usize << n;
        let amp = Complex64::new(self.elements[j].amplitude(), 0.0);
        let mut m = Mat::<Complex64>::zeros(dim, dim);
        for pp in self.orbit_members(j) {
            m[(pp.ket.0 as usize, pp.bra.0 as usize)] = amp;
        }
        Ok(m)
    }

    /// CSV with columns `index, canonical_ket, canonical_bra, orbit_size, delta_n, parity`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "index",
            "canonical_ket",
            "canonical_bra",
            "orbit_size",
            "delta_n",
            "parity",
        ])?;
        for (i, e) in self.elements.iter().enumerate() {
            w.write_record([
                i.to_string(),
                e.canonical.ket.0.to_string(),
                e.canonical.bra.0.to_string(),
                e.orbit_size.to_string(),
                e.delta_n.to_string(),
                e.parity.as_str().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain_group, build_rectangle_group, SitePermutation};
    use std::collections::HashSet;

    fn swap_group() -> SymmetryGroup {
        SymmetryGroup::from_generators(
            2,
            vec![("swap".into(), SitePermutation::new(vec![1, 0]).unwrap())],
        )
        .unwrap()
    }

    /// Orbits by brute force: union images of each pair, no canonical ordering.
    fn brute_orbits(g: &SymmetryGroup) -> Vec<HashSet<ProjectorPair>> {
        let n = g.n_sites();
        let mut assigned = HashSet::new();
        let mut orbits = Vec::new();
        for key in 0..1u64 << (2 * n) {
            let pp = ProjectorPair::from_key(key, n);
            if assigned.contains(&pp) {
                continue;
            }
            let orbit: HashSet<ProjectorPair> = g
                .elements()
                .iter()
                .map(|p| crate::fock::permute_pair(p, pp))
                .collect();
            assigned.extend(orbit.iter().copied());
            orbits.push(orbit);
        }
        orbits
    }

    #[test]
    fn canonical_rep_examples() {
        let trivial = SymmetryGroup::trivial(2);
        let pp = ProjectorPair::new(0b10, 0b01);
        assert_eq!(canonical_rep(pp, &trivial).unwrap(), (pp, 1));
        let g = swap_group();
        assert_eq!(
            canonical_rep(ProjectorPair::new(0b10, 0b00), &g).unwrap(),
            (ProjectorPair::new(0b01, 0b00), 2)
        );
        assert_eq!(
            canonical_rep(ProjectorPair::new(0, 0), &g).unwrap(),
            (ProjectorPair::new(0, 0), 1)
        );
        assert!(canonical_rep(ProjectorPair::new(0b100, 0), &g).is_err());
    }

    #[test]
    fn burnside_examples() {
        assert_eq!(burnside_dim(&build_rectangle_group(2, 2).unwrap()), 55);
        assert_eq!(burnside_dim(&build_rectangle_group(2, 3).unwrap()), 430);
        assert_eq!(burnside_dim(&SymmetryGroup::trivial(2)), 16);
        assert_eq!(burnside_dim(&swap_group()), 10);
    }

    #[test]
    fn burnside_sum_for_square() {
        let g = build_rectangle_group(2, 2).unwrap();
        let mut terms: Vec<u64> = g
            .elements()
            .iter()
            .map(|p| 1u64 << (2 * p.cycle_count()))
            .collect();
        terms.sort();
        assert_eq!(terms, vec![4, 4, 16, 16, 16, 64, 64, 256]);
        assert_eq!(terms.iter().sum::<u64>(), 440);
    }

    #[test]
    fn even_dim_examples() {
        assert_eq!(even_dim(&build_rectangle_group(2, 3).unwrap()), 226);
        assert_eq!(even_dim(&build_rectangle_group(2, 2).unwrap()), 31);
        assert_eq!(even_dim(&SymmetryGroup::trivial(1)), 2);
    }

    #[test]
    fn signed_sum_for_two_by_three() {
        let g = build_rectangle_group(2, 3).unwrap();
        let signed: u64 = g
            .elements()
            .iter()
            .filter(|p| p.cycle_lengths().iter().all(|l| l % 2 == 0))
            .map(|p| 1u64 << (2 * p.cycle_count()))
            .sum();
        assert_eq!(signed, 264);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let groups = [
            swap_group(),
            build_chain_group(3).unwrap(),
            build_chain_group(4).unwrap(),
            build_rectangle_group(2, 2).unwrap(),
        ];
        for g in &groups {
            let basis = enumerate_basis(g).unwrap();
            let brute = brute_orbits(g);
            assert_eq!(basis.len(), brute.len());
            assert_eq!(basis.len() as u64, burnside_dim(g));
            assert_eq!(basis.dims().even as u64, even_dim(g));
            for (j, e) in basis.elements().iter().enumerate() {
                let members: HashSet<ProjectorPair> =
                    basis.orbit_members(j).into_iter().collect();
                assert!(brute.contains(&members));
                assert_eq!(members.len(), e.orbit_size);
                assert_eq!(*members.iter().min().unwrap(), e.canonical);
            }
        }
    }

    #[test]
    fn swap_group_has_ten_orbits() {
        let basis = enumerate_basis(&swap_group()).unwrap();
        assert_eq!(basis.len(), 10);
    }

    #[test]
    fn partition_covers_all_pairs() {
        for g in [build_rectangle_group(2, 3).unwrap(), build_chain_group(6).unwrap()] {
            let basis = enumerate_basis(&g).unwrap();
            let covered: usize = basis.elements().iter().map(|e| e.orbit_size).sum();
            assert_eq!(covered, 1 << (2 * g.n_sites()));
            for e in basis.elements() {
                assert_eq!(g.order() % e.orbit_size, 0);
            }
        }
    }

    #[test]
    fn ordering_even_first() {
        let basis = enumerate_basis(&build_rectangle_group(2, 3).unwrap()).unwrap();
        let dims = basis.dims();
        assert_eq!((dims.total, dims.even, dims.odd), (430, 226, 204));
        for (j, e) in basis.elements().iter().enumerate() {
            assert_eq!(e.parity == Parity::Even, j < dims.even);
            assert_eq!(e.parity, Parity::of_delta(e.canonical.delta_n()));
        }
        let even = &basis.elements()[..dims.even];
        assert!(even.windows(2).all(|w| w[0].canonical < w[1].canonical));
    }

    #[test]
    fn adjoint_is_involution() {
        let basis = enumerate_basis(&build_rectangle_group(2, 2).unwrap()).unwrap();
        for (j, e) in basis.elements().iter().enumerate() {
            assert_eq!(basis.element(e.adjoint_index).adjoint_index, j);
            if e.is_diagonal() {
                assert_eq!(e.adjoint_index, j);
            }
        }
    }

    #[test]
    fn even_sector_enumeration() {
        let g = build_rectangle_group(2, 3).unwrap();
        let basis = InvariantBasis::enumerate(&g, Sector::Even, 10).unwrap();
        assert_eq!(basis.len(), 226);
        assert_eq!(basis.dims().odd, 0);
    }

    #[test]
    fn enumeration_cap() {
        let g = build_rectangle_group(3, 4).unwrap();
        assert!(matches!(
            enumerate_basis(&g),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn csv_dump_layout() {
        let basis = enumerate_basis(&swap_group()).unwrap();
        let mut out = Vec::new();
        basis.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,canonical_ket,canonical_bra,orbit_size,delta_n,parity");
        assert_eq!(lines.len(), 11);
        assert_eq!(lines[1], "0,0,0,1,0,even");
    }
}
