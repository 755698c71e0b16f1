// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Symmetry-reduced steady states of Lindblad equations on periodic
//! spin-1/2 clusters.
//!
//! The pipeline is: build the lattice symmetry group, partition projector
//! pairs `|n⟩⟨m|` into orbits, assemble the generator on the orbit basis,
//! and extract its null vector. [`oracle`] repeats the computation on the
//! full space for validation.

pub mod error;
pub mod fock;
pub mod lattice;
pub mod liouvillian;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod orbit;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use fock::{BasisState, GroupAction, ProjectorPair};
pub use lattice::{BondConvention, Lattice, LatticeKind, SitePermutation, SymmetryGroup};
pub use liouvillian::{assemble, Part, ReducedLiouvillian};
pub use model::{LindbladModel, LocalOp, OperatorString, OperatorSum, XyzParams};
pub use observables::{chi_av, SusceptibilityTensor};
pub use orbit::{InvariantBasis, Parity, Sector};
pub use solver::{solve_steady, SolverOptions, SteadyState};
