// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Periodic cluster geometry and the finite permutation groups acting on it.
//!
//! Sites are numbered `s = x + l1 * y` on rectangles and `s = x` on chains.
//! A [`SitePermutation`] stores the image `π(s)` at position `s`; composition
//! `p.compose(q)` is the map `s ↦ p(q(s))`.
//!
//! Groups are kept as explicit, deduplicated sets of permutations obtained
//! by breadth-first closure over a generating set. On small tori distinct
//! geometric operations frequently coincide as site permutations (on a 2×2
//! torus the 32 formal products `T·S` collapse to 8 permutations), and orbit
//! counting must range over the distinct ones.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hard ceiling on the number of sites: pair keys pack two `V`-bit words in a `u64`.
pub const MAX_SITES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Chain,
    Rectangle,
}

/// Whether bonds across a length-2 periodic direction are counted once or twice.
///
/// On a torus with a side of length 2 the "+1" and "−1" neighbors of a site
/// coincide, so the naive `2V` bond list contains every such bond twice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BondConvention {
    /// Each unordered site pair appears once.
    #[default]
    Unique,
    /// One bond per site and positive lattice direction, duplicates kept.
    Double,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    kind: LatticeKind,
    l1: usize,
    l2: usize,
}

impl Lattice {
    pub fn chain(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidLattice(format!("chain length {l} < 2")));
        }
        if l > MAX_SITES {
            return Err(Error::InvalidLattice(format!(
                "chain length {l} exceeds {MAX_SITES} sites"
            )));
        }
        Ok(Self {
            kind: LatticeKind::Chain,
            l1: l,
            l2: 1,
        })
    }

    pub fn rectangle(l1: usize, l2: usize) -> Result<Self> {
        if l1 < 2 || l2 < 2 {
            return Err(Error::InvalidLattice(format!(
                "rectangle sides {l1}x{l2} must both be >= 2"
            )));
        }
        if l1 * l2 > MAX_SITES {
            return Err(Error::InvalidLattice(format!(
                "{l1}x{l2} exceeds {MAX_SITES} sites"
            )));
        }
        Ok(Self {
            kind: LatticeKind::Rectangle,
            l1,
            l2,
        })
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    /// Side lengths `(l1, l2)`; chains report `l2 = 1`.
    pub fn lengths(&self) -> (usize, usize) {
        (self.l1, self.l2)
    }

    pub fn n_sites(&self) -> usize {
        self.l1 * self.l2
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.l1, site / self.l1)
    }

    /// Site index at integer coordinates, wrapped periodically.
    pub fn site_at(&self, x: i64, y: i64) -> usize {
        let x = x.rem_euclid(self.l1 as i64) as usize;
        let y = y.rem_euclid(self.l2 as i64) as usize;
        x + self.l1 * y
    }

    /// First-neighbor bonds `(i, j)` with `i < j` under the given convention.
    pub fn bonds(&self, convention: BondConvention) -> Vec<(usize, usize)> {
        let mut raw = Vec::with_capacity(2 * self.n_sites());
        for s in 0..self.n_sites() {
            let (x, y) = self.coords(s);
            let (x, y) = (x as i64, y as i64);
            raw.push((s, self.site_at(x + 1, y)));
            if self.kind == LatticeKind::Rectangle {
                raw.push((s, self.site_at(x, y + 1)));
            }
        }
        let mut bonds: Vec<(usize, usize)> = raw
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        bonds.sort_unstable();
        if convention == BondConvention::Unique {
            bonds.dedup();
        }
        bonds
    }

    /// The lattice symmetry group: dihedral for chains, translations times
    /// the square or rectangle point group otherwise.
    pub fn symmetry_group(&self) -> Result<SymmetryGroup> {
        match self.kind {
            LatticeKind::Chain => build_chain_group(self.l1),
            LatticeKind::Rectangle => build_rectangle_group(self.l1, self.l2),
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LatticeKind::Chain => write!(f, "{}", self.l1),
            LatticeKind::Rectangle => write!(f, "{}x{}", self.l1, self.l2),
        }
    }
}

/// Parses `"6"` as a chain of six sites and `"2x3"` as a 2×3 rectangle.
impl FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidLattice(format!("cannot parse '{s}'")))
        };
        match s.split_once(['x', 'X', '×']) {
            Some((a, b)) => Lattice::rectangle(parse(a)?, parse(b)?),
            None => Lattice::chain(parse(s)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SitePermutation(Vec<usize>);

impl SitePermutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &t in &image {
            if t >= n || seen[t] {
                return Err(Error::InvalidArgument(format!(
                    "{image:?} is not a permutation of 0..{n}"
                )));
            }
            seen[t] = true;
        }
        Ok(Self(image))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        Self::new((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, site: usize) -> usize {
        self.0[site]
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &SitePermutation) -> SitePermutation {
        debug_assert_eq!(self.len(), other.len());
        SitePermutation(other.0.iter().map(|&s| self.0[s]).collect())
    }

    pub fn inverse(&self) -> SitePermutation {
        let mut inv = vec![0; self.len()];
        for (s, &t) in self.0.iter().enumerate() {
            inv[t] = s;
        }
        SitePermutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(s, &t)| s == t)
    }

    /// Lengths of the disjoint cycles, fixed points included as 1-cycles.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut lengths = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut s = start;
            while !seen[s] {
                seen[s] = true;
                s = self.0[s];
                len += 1;
            }
            lengths.push(len);
        }
        lengths
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_lengths().len()
    }
}

pub fn cycle_count(p: &SitePermutation) -> usize {
    p.cycle_count()
}

/// A finite group of site permutations, stored as its sorted element list.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    n_sites: usize,
    elements: Vec<SitePermutation>,
    generators: Vec<(String, SitePermutation)>,
}

impl SymmetryGroup {
    /// Breadth-first closure of the generators under composition.
    pub fn from_generators(
        n_sites: usize,
        generators: Vec<(String, SitePermutation)>,
    ) -> Result<Self> {
        if let Some((_, g)) = generators.iter().find(|(_, g)| g.len() != n_sites) {
            return Err(Error::Dimension {
                expected: n_sites,
                found: g.len(),
            });
        }
        let identity = SitePermutation::identity(n_sites);
        let mut seen: HashSet<SitePermutation> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(identity.clone());
        queue.push_back(identity);
        while let Some(p) = queue.pop_front() {
            for (_, g) in &generators {
                let q = g.compose(&p);
                if seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        let mut elements: Vec<SitePermutation> = seen.into_iter().collect();
        elements.sort();
        Ok(Self {
            n_sites,
            elements,
            generators,
        })
    }

    /// Wraps an arbitrary element list without checking the group axioms;
    /// use [`SymmetryGroup::verify`] to inspect it.
    pub fn from_elements_unchecked(n_sites: usize, elements: Vec<SitePermutation>) -> Self {
        Self {
            n_sites,
            elements,
            generators: Vec::new(),
        }
    }

    pub fn trivial(n_sites: usize) -> Self {
        Self {
            n_sites,
            elements: vec![SitePermutation::identity(n_sites)],
            generators: Vec::new(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[SitePermutation] {
        &self.elements
    }

    pub fn generators(&self) -> &[(String, SitePermutation)] {
        &self.generators
    }

    pub fn contains(&self, p: &SitePermutation) -> bool {
        self.elements.contains(p)
    }

    /// Exhaustive check of the group axioms on the stored element set.
    pub fn verify(&self) -> GroupReport {
        let set: HashSet<&SitePermutation> = self.elements.iter().collect();
        let no_duplicates = set.len() == self.elements.len();
        let has_identity = set.contains(&SitePermutation::identity(self.n_sites));
        let closed = self
            .elements
            .iter()
            .all(|g| self.elements.iter().all(|h| set.contains(&g.compose(h))));
        let has_inverses = self.elements.iter().all(|g| set.contains(&g.inverse()));
        GroupReport {
            has_identity,
            closed,
            has_inverses,
            no_duplicates,
        }
    }
}

pub fn verify_group(g: &SymmetryGroup) -> GroupReport {
    g.verify()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupReport {
    pub has_identity: bool,
    pub closed: bool,
    pub has_inverses: bool,
    pub no_duplicates: bool,
}

impl GroupReport {
    pub fn is_valid(&self) -> bool {
        self.has_identity && self.closed && self.has_inverses && self.no_duplicates
    }

    /// Name of the first failing axiom, if any.
    pub fn first_failure(&self) -> Option<&'static str> {
        if !self.has_identity {
            Some("identity")
        } else if !self.closed {
            Some("closure")
        } else if !self.has_inverses {
            Some("inverses")
        } else if !self.no_duplicates {
            Some("duplicates")
        } else {
            None
        }
    }
}

/// Dihedral group of a periodic chain: translation by one site and the
/// reflection `s ↦ l − 1 − s`.
pub fn build_chain_group(l: usize) -> Result<SymmetryGroup> {
    let lattice = Lattice::chain(l)?;
    let n = lattice.n_sites();
    let translation = SitePermutation::from_fn(n, |s| (s + 1) % n)?;
    let reflection = SitePermutation::from_fn(n, |s| (n - 1 - s) % n)?;
    SymmetryGroup::from_generators(
        n,
        vec![("T".to_string(), translation), ("R".to_string(), reflection)],
    )
}

/// Translations `T1`, `T2` combined with the point group of the cluster:
/// `D4 = {1, D_ac, D_bd, R_x, R_y, Ω, Ω², Ω³}` for squares and
/// `{1, R_x, R_y, Ω²}` otherwise.
pub fn build_rectangle_group(l1: usize, l2: usize) -> Result<SymmetryGroup> {
    let lattice = Lattice::rectangle(l1, l2)?;
    let mut generators = Vec::new();
    for (label, op) in rectangle_generators(l1 == l2) {
        generators.push((label.to_string(), point_map(&lattice, op)?));
    }
    SymmetryGroup::from_generators(lattice.n_sites(), generators)
}

/// Geometric operations on integer coordinates, before periodic wrapping.
#[derive(Clone, Copy, Debug)]
enum GridOp {
    T1,
    T2,
    Rx,
    Ry,
    Rot2,
    Rot,
    Dac,
    Dbd,
}

fn rectangle_generators(square: bool) -> Vec<(&'static str, GridOp)> {
    let mut gens = vec![
        ("T1", GridOp::T1),
        ("T2", GridOp::T2),
        ("Rx", GridOp::Rx),
        ("Ry", GridOp::Ry),
        ("Omega2", GridOp::Rot2),
    ];
    if square {
        gens.push(("Omega", GridOp::Rot));
        gens.push(("Dac", GridOp::Dac));
        gens.push(("Dbd", GridOp::Dbd));
    }
    gens
}

fn point_map(lattice: &Lattice, op: GridOp) -> Result<SitePermutation> {
    SitePermutation::from_fn(lattice.n_sites(), |s| {
        let (x, y) = lattice.coords(s);
        let (x, y) = (x as i64, y as i64);
        let (u, v) = match op {
            GridOp::T1 => (x + 1, y),
            GridOp::T2 => (x, y + 1),
            GridOp::Rx => (x, -y),
            GridOp::Ry => (-x, y),
            GridOp::Rot2 => (-x, -y),
            GridOp::Rot => (-y, x),
            GridOp::Dac => (y, x),
            GridOp::Dbd => (-y, -x),
        };
        lattice.site_at(u, v)
    })
}

/// The translation subgroup and the point group of a rectangle, as separate
/// permutation lists `(T, S)`. Every element of the full group is `t ∘ s`.
pub fn rectangle_factors(l1: usize, l2: usize) -> Result<(Vec<SitePermutation>, Vec<SitePermutation>)> {
    let lattice = Lattice::rectangle(l1, l2)?;
    let n = lattice.n_sites();
    let mut translations = Vec::with_capacity(n);
    for b in 0..l2 as i64 {
        for a in 0..l1 as i64 {
            translations.push(SitePermutation::from_fn(n, |s| {
                let (x, y) = lattice.coords(s);
                lattice.site_at(x as i64 + a, y as i64 + b)
            })?);
        }
    }
    let mut points = vec![SitePermutation::identity(n)];
    let ops: &[GridOp] = if l1 == l2 {
        &[
            GridOp::Dac,
            GridOp::Dbd,
            GridOp::Rx,
            GridOp::Ry,
            GridOp::Rot,
            GridOp::Rot2,
        ]
    } else {
        &[GridOp::Rx, GridOp::Ry, GridOp::Rot2]
    };
    for &op in ops {
        points.push(point_map(&lattice, op)?);
    }
    if l1 == l2 {
        let rot = point_map(&lattice, GridOp::Rot)?;
        points.push(rot.compose(&rot).compose(&rot));
    }
    Ok((translations, points))
}
