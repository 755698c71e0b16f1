// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-1/2 product states and projector pairs `|n⟩⟨m|`.
//!
//! Bit `s` of a [`BasisState`] is the occupation of site `s`; `0` is the
//! spin-down state annihilated by `σ⁻`. Site permutations act by relabeling
//! bits, without phases.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{SitePermutation, SymmetryGroup};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState(pub u32);

impl BasisState {
    #[inline]
    pub fn bit(self, site: usize) -> bool {
        (self.0 >> site) & 1 == 1
    }

    #[inline]
    pub fn popcount(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn flip(self, site: usize) -> BasisState {
        BasisState(self.0 ^ (1 << site))
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The operator `P_{n,m} = |ket⟩⟨bra|`. Ordered by ket first, then bra.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjectorPair {
    pub ket: BasisState,
    pub bra: BasisState,
}

impl ProjectorPair {
    pub fn new(ket: u32, bra: u32) -> Self {
        Self {
            ket: BasisState(ket),
            bra: BasisState(bra),
        }
    }

    /// Packs the pair so that integer order equals (ket, bra) lexicographic order.
    #[inline]
    pub fn key(self, n_sites: usize) -> u64 {
        ((self.ket.0 as u64) << n_sites) | self.bra.0 as u64
    }

    #[inline]
    pub fn from_key(key: u64, n_sites: usize) -> Self {
        let mask = (1u64 << n_sites) - 1;
        Self::new((key >> n_sites) as u32, (key & mask) as u32)
    }

    pub fn adjoint(self) -> Self {
        Self {
            ket: self.bra,
            bra: self.ket,
        }
    }

    pub fn is_diagonal(self) -> bool {
        self.ket == self.bra
    }

    /// Occupation difference `ΔN = |n| − |m|`.
    pub fn delta_n(self) -> i32 {
        self.ket.popcount() as i32 - self.bra.popcount() as i32
    }

    pub fn is_even(self) -> bool {
        self.delta_n().rem_euclid(2) == 0
    }
}

pub fn delta_n(pp: ProjectorPair) -> i32 {
    pp.delta_n()
}

/// Moves the occupation of site `s` to site `p(s)`.
pub fn permute_state(p: &SitePermutation, s: BasisState) -> BasisState {
    let mut out = 0u32;
    for (site, &target) in p.image().iter().enumerate() {
        if s.bit(site) {
            out |= 1 << target;
        }
    }
    BasisState(out)
}

pub fn permute_pair(p: &SitePermutation, pp: ProjectorPair) -> ProjectorPair {
    ProjectorPair {
        ket: permute_state(p, pp.ket),
        bra: permute_state(p, pp.bra),
    }
}

/// Checked variant of [`permute_state`] for states of a declared size.
pub fn try_permute_state(
    p: &SitePermutation,
    n_sites: usize,
    s: BasisState,
) -> Result<BasisState> {
    if p.len() != n_sites {
        return Err(Error::Dimension {
            expected: n_sites,
            found: p.len(),
        });
    }
    Ok(permute_state(p, s))
}

/// Byte-sliced lookup tables for one permutation: the image of a state is
/// the OR of one table entry per 8-bit chunk.
#[derive(Clone, Debug)]
struct ChunkTable {
    chunks: Vec<[u32; 256]>,
}

impl ChunkTable {
    fn new(p: &SitePermutation) -> Self {
        let n = p.len();
        let n_chunks = n.div_ceil(8).max(1);
        let mut chunks = vec![[0u32; 256]; n_chunks];
        for (c, table) in chunks.iter_mut().enumerate() {
            for (byte, slot) in table.iter_mut().enumerate() {
                let mut out = 0u32;
                for b in 0..8 {
                    let site = 8 * c + b;
                    if site < n && (byte >> b) & 1 == 1 {
                        out |= 1 << p.apply(site);
                    }
                }
                *slot = out;
            }
        }
        Self { chunks }
    }

    #[inline]
    fn apply(&self, s: u32) -> u32 {
        let mut out = 0;
        for (c, table) in self.chunks.iter().enumerate() {
            out |= table[((s >> (8 * c)) & 0xff) as usize];
        }
        out
    }
}

/// Precomputed action of every element of a group on basis states.
#[derive(Clone, Debug)]
pub struct GroupAction {
    n_sites: usize,
    tables: Vec<ChunkTable>,
}

impl GroupAction {
    pub fn new(group: &SymmetryGroup) -> Self {
        Self {
            n_sites: group.n_sites(),
            tables: group.elements().iter().map(ChunkTable::new).collect(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn order(&self) -> usize {
        self.tables.len()
    }

    #[inline]
    pub fn permute_state(&self, element: usize, s: BasisState) -> BasisState {
        BasisState(self.tables[element].apply(s.0))
    }

    #[inline]
    pub fn permute_pair(&self, element: usize, pp: ProjectorPair) -> ProjectorPair {
        let t = &self.tables[element];
        ProjectorPair {
            ket: BasisState(t.apply(pp.ket.0)),
            bra: BasisState(t.apply(pp.bra.0)),
        }
    }

    /// Lexicographically smallest image of `pp` and the size of its orbit.
    pub fn canonical(&self, pp: ProjectorPair) -> (ProjectorPair, usize) {
        let mut best = pp;
        let mut stabilizer = 0usize;
        for t in &self.tables {
            let img = ProjectorPair {
                ket: BasisState(t.apply(pp.ket.0)),
                bra: BasisState(t.apply(pp.bra.0)),
            };
            if img == pp {
                stabilizer += 1;
            }
            if img < best {
                best = img;
            }
        }
        (best, self.tables.len() / stabilizer)
    }

    /// True when no group image of `pp` is lexicographically smaller.
    pub fn is_canonical(&self, pp: ProjectorPair) -> bool {
        self.tables.iter().all(|t| {
            let img = ProjectorPair {
                ket: BasisState(t.apply(pp.ket.0)),
                bra: BasisState(t.apply(pp.bra.0)),
            };
            img >= pp
        })
    }

    /// Distinct images of `pp`, sorted.
    pub fn orbit(&self, pp: ProjectorPair) -> Vec<ProjectorPair> {
        let mut members: Vec<ProjectorPair> =
            (0..self.order()).map(|g| self.permute_pair(g, pp)).collect();
        members.sort_unstable();
        members.dedup();
        members
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain_group, build_rectangle_group};
    use proptest::prelude::*;

    #[test]
    fn identity_permutation_fixes_states() {
        let id = SitePermutation::identity(4);
        for s in 0..16 {
            assert_eq!(permute_state(&id, BasisState(s)), BasisState(s));
        }
    }

    #[test]
    fn swap_moves_bit() {
        let swap = SitePermutation::new(vec![1, 0]).unwrap();
        assert_eq!(permute_state(&swap, BasisState(0b01)), BasisState(0b10));
        let pp = permute_pair(&swap, ProjectorPair::new(0b01, 0b00));
        assert_eq!(pp, ProjectorPair::new(0b10, 0b00));
    }

    #[test]
    fn three_cycle_transport() {
        // 0 → 1 → 2 → 0; occupation on site 2 ("100") moves to site 0
        let p = SitePermutation::new(vec![1, 2, 0]).unwrap();
        assert_eq!(permute_state(&p, BasisState(0b100)), BasisState(0b001));
        assert_eq!(permute_state(&p, BasisState(0b001)), BasisState(0b010));
    }

    #[test]
    fn diagonal_stays_diagonal() {
        let g = build_chain_group(5).unwrap();
        for p in g.elements() {
            for n in 0..32 {
                assert!(permute_pair(p, ProjectorPair::new(n, n)).is_diagonal());
            }
        }
    }

    #[test]
    fn delta_n_values() {
        assert_eq!(delta_n(ProjectorPair::new(0b11, 0b00)), 2);
        assert_eq!(delta_n(ProjectorPair::new(0b101, 0b101)), 0);
        assert_eq!(delta_n(ProjectorPair::new(0b100, 0b111)), -2);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let p = SitePermutation::identity(3);
        assert!(try_permute_state(&p, 4, BasisState(1)).is_err());
        assert!(try_permute_state(&p, 3, BasisState(1)).is_ok());
    }

    #[test]
    fn key_order_matches_pair_order() {
        let n = 3;
        let mut pairs: Vec<ProjectorPair> = (0..8)
            .flat_map(|k| (0..8).map(move |b| ProjectorPair::new(k, b)))
            .collect();
        pairs.sort();
        let keys: Vec<u64> = pairs.iter().map(|p| p.key(n)).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        for p in pairs {
            assert_eq!(ProjectorPair::from_key(p.key(n), n), p);
        }
    }

    #[test]
    fn tables_match_direct_action() {
        let g = build_rectangle_group(3, 4).unwrap();
        let action = GroupAction::new(&g);
        for (i, p) in g.elements().iter().enumerate() {
            for s in (0..4096u32).step_by(37) {
                assert_eq!(
                    action.permute_state(i, BasisState(s)),
                    permute_state(p, BasisState(s))
                );
            }
        }
    }

    proptest! {
        #[test]
        fn composition_acts_sequentially(s in 0u32..(1 << 12), a in 0usize..48, b in 0usize..48) {
            let g = build_rectangle_group(3, 4).unwrap();
            let p = &g.elements()[a];
            let q = &g.elements()[b];
            let lhs = permute_state(&p.compose(q), BasisState(s));
            let rhs = permute_state(p, permute_state(q, BasisState(s)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn permutation_commutes_with_adjoint(n in 0u32..64, m in 0u32..64, e in 0usize..12) {
            let g = build_chain_group(6).unwrap();
            let p = &g.elements()[e];
            let pp = ProjectorPair::new(n, m);
            prop_assert_eq!(permute_pair(p, pp).adjoint(), permute_pair(p, pp.adjoint()));
        }

        #[test]
        fn delta_n_is_invariant(n in 0u32..64, m in 0u32..64, e in 0usize..12) {
            let g = build_rectangle_group(2, 3).unwrap();
            let pp = ProjectorPair::new(n, m);
            prop_assert_eq!(permute_pair(&g.elements()[e], pp).delta_n(), pp.delta_n());
        }
    }
}
