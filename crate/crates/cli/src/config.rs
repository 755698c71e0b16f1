// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a TOML file with `[lattice]`, `[model]`, `[field]`,
//! `[solver]`, `[sweep]` and `[output]` tables, all optional. Energies and
//! fields are in units of the decay rate.
//!
//! ```toml
//! [lattice]
//! shape = "2x3"        # "l1xl2" for a torus, "l" for a ring
//! bonds = "unique"     # or "double" (counts both bonds of a length-2 direction)
//!
//! [model]
//! jx = 0.9
//! jy = 1.0
//! jz = 1.0
//! gamma = 1.0
//! # perturb_bond = 0   # add perturb_delta·σˣσˣ on one bond (breaks the symmetry)
//! # perturb_delta = 0.1
//!
//! [field]
//! hx = 0.0
//! hy = 0.0
//!
//! [solver]
//! sector = "auto"      # auto | full | even
//! residual_tol = 1e-10
//! gap_threshold = 1e-8
//! dense_max_dim = 5000
//! delta = 1e-3         # field step of the susceptibility
//!
//! [sweep]
//! param = "jy"         # jx | jy | jz | gamma
//! start = 0.8
//! stop = 1.2
//! step = 0.05
//!
//! [output]
//! dir = "out"
//! threads = 0          # 0 uses every core
//! seed = 1592596145    # random test matrices of `verify`
//! ```

use std::path::{Path, PathBuf};

use lindsym::lattice::{BondConvention, Lattice};
use lindsym::model::XyzParams;
use lindsym::oracle::DEFAULT_SEED;
use lindsym::solver::SolverOptions;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSection {
    pub shape: String,
    pub bonds: String,
}

impl Default for LatticeSection {
    fn default() -> Self {
        Self {
            shape: "2x2".into(),
            bonds: "unique".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub gamma: f64,
    pub perturb_bond: Option<usize>,
    pub perturb_delta: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            jx: 0.9,
            jy: 1.0,
            jz: 1.0,
            gamma: 1.0,
            perturb_bond: None,
            perturb_delta: 0.1,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSection {
    pub hx: f64,
    pub hy: f64,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SectorChoice {
    #[default]
    Auto,
    Full,
    Even,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub sector: SectorChoice,
    pub residual_tol: f64,
    pub gap_threshold: f64,
    pub dense_max_dim: usize,
    pub delta: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            sector: SectorChoice::Auto,
            residual_tol: o.residual_tol,
            gap_threshold: o.gap_threshold,
            dense_max_dim: o.dense_max_dim,
            delta: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            param: "jy".into(),
            start: 0.8,
            stop: 1.2,
            step: 0.05,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub threads: usize,
    pub seed: u64,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            threads: 0,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSection,
    pub model: ModelSection,
    pub field: FieldSection,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

/// Coupling that a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Jx,
    Jy,
    Jz,
    Gamma,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Jx => "jx",
            SweepParam::Jy => "jy",
            SweepParam::Jz => "jz",
            SweepParam::Gamma => "gamma",
        }
    }

    pub fn set(self, p: &mut XyzParams, value: f64) {
        match self {
            SweepParam::Jx => p.jx = value,
            SweepParam::Jy => p.jy = value,
            SweepParam::Jz => p.jz = value,
            SweepParam::Gamma => p.gamma = value,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn lattices(&self) -> Result<Vec<Lattice>, CliError> {
        self.lattice
            .shape
            .split(',')
            .map(|s| s.trim().parse::<Lattice>().map_err(|e| CliError::Config(e.to_string())))
            .collect()
    }

    pub fn single_lattice(&self) -> Result<Lattice, CliError> {
        match self.lattices()?.as_slice() {
            [one] => Ok(*one),
            _ => Err(CliError::Config(format!(
                "expected a single lattice, got '{}'",
                self.lattice.shape
            ))),
        }
    }

    pub fn bonds(&self) -> Result<BondConvention, CliError> {
        match self.lattice.bonds.as_str() {
            "unique" => Ok(BondConvention::Unique),
            "double" => Ok(BondConvention::Double),
            other => Err(CliError::Config(format!("unknown bond convention '{other}'"))),
        }
    }

    /// Model parameters; steady-state commands need `gamma > 0`.
    pub fn params(&self) -> Result<XyzParams, CliError> {
        let m = &self.model;
        if !(m.gamma > 0.0) {
            return Err(CliError::Config(format!("gamma must be > 0, got {}", m.gamma)));
        }
        Ok(XyzParams {
            jx: m.jx,
            jy: m.jy,
            jz: m.jz,
            gamma: m.gamma,
            hx: self.field.hx,
            hy: self.field.hy,
            bonds: self.bonds()?,
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            residual_tol: self.solver.residual_tol,
            gap_threshold: self.solver.gap_threshold,
            dense_max_dim: self.solver.dense_max_dim,
            ..SolverOptions::default()
        }
    }

    pub fn sweep_param(&self) -> Result<SweepParam, CliError> {
        match self.sweep.param.to_ascii_lowercase().as_str() {
            "jx" => Ok(SweepParam::Jx),
            "jy" => Ok(SweepParam::Jy),
            "jz" => Ok(SweepParam::Jz),
            "gamma" => Ok(SweepParam::Gamma),
            other => Err(CliError::Config(format!("cannot sweep '{other}'"))),
        }
    }

    /// Sweep values `start + i·step`, endpoints included.
    pub fn sweep_values(&self) -> Result<Vec<f64>, CliError> {
        let s = &self.sweep;
        if s.step == 0.0 || !s.step.is_finite() {
            return Err(CliError::Config("sweep step must be nonzero".into()));
        }
        let span = (s.stop - s.start) / s.step;
        if span < -1e-9 {
            return Err(CliError::Config("sweep step points away from stop".into()));
        }
        let count = span.round() as usize + 1;
        Ok((0..count).map(|i| s.start + i as f64 * s.step).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::from_toml("[model]\njy = 1.1\n[lattice]\nshape = \"2x3\"\n").unwrap();
        assert_eq!(cfg.model.jy, 1.1);
        assert_eq!(cfg.model.jx, 0.9);
        assert_eq!(cfg.single_lattice().unwrap().n_sites(), 6);
        assert_eq!(cfg.solver.sector, SectorChoice::Auto);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::from_toml("[model]\nfoo = 1\n").is_err());
        assert!(RunConfig::from_toml("[solver]\nsector = \"odd\"\n").is_err());
    }

    #[test]
    fn sweep_counts() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.sweep_values().unwrap().len(), 9);
        cfg.sweep.stop = cfg.sweep.start;
        assert_eq!(cfg.sweep_values().unwrap().len(), 1);
        cfg.sweep.step = 0.0;
        assert!(cfg.sweep_values().is_err());
    }

    #[test]
    fn gamma_must_be_positive() {
        let cfg = RunConfig::from_toml("[model]\ngamma = 0.0\n").unwrap();
        assert!(cfg.params().is_err());
    }
}
