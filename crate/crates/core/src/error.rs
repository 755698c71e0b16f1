// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("dimension mismatch: expected {expected} sites, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("projector pair ({ket}, {bra}) has no orbit in the basis")]
    UnknownOrbit { ket: u32, bra: u32 },

    #[error("generator leaks out of the even-parity sector at ({ket}, {bra})")]
    SectorLeak { ket: u32, bra: u32 },

    #[error("no steady state: {0}")]
    NoSteadyState(String),

    #[error("solver did not converge: residual {residual:.3e} above tolerance {tolerance:.3e}")]
    Convergence { residual: f64, tolerance: f64 },

    #[error("steady state is not unique: {0}")]
    Reducible(String),

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
