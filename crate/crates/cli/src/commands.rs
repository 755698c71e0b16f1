// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Subcommand implementations. CSV tables go to files under the output
//! directory; a short report goes to stdout.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use lindsym::lattice::{verify_group, Lattice};
use lindsym::liouvillian::{build_reduced, Part};
use lindsym::model::{check_weak_symmetry, perturb_bond, XyzParams};
use lindsym::observables::{
    chi_av, coefficient_spectrum, magnetization, xyz_susceptibility, SusceptibilityTensor,
};
use lindsym::oracle::{
    build_full, frobenius_distance, full_steady, verify_weak_symmetry_numeric,
    WEAK_SYMMETRY_MAX_SITES,
};
use lindsym::orbit::{burnside_dim, even_dim, DEFAULT_ENUMERATION_MAX_SITES};
use lindsym::solver::{check_uniqueness, reconstruct_dense, solve_and_check, solve_steady};
use lindsym::{InvariantBasis, LindbladModel, Parity, Sector, SymmetryGroup};
use rayon::prelude::*;

use crate::config::{RunConfig, SectorChoice};
use crate::CliError;

/// Coefficients at or below this magnitude count as zero in reports.
pub const ZERO_TOL: f64 = 1e-10;
/// Largest cluster for the brute-force comparison in `verify`.
pub const ORACLE_MAX_SITES: usize = WEAK_SYMMETRY_MAX_SITES;
const ORACLE_TOL: f64 = 1e-8;
const WEAK_SYMMETRY_TOL: f64 = 1e-10;

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_file(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    fs::create_dir_all(dir)?;
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?)))
}

/// The configured model, including the optional single-bond perturbation.
pub fn build_model(cfg: &RunConfig, lattice: &Lattice) -> Result<LindbladModel, CliError> {
    let params = cfg.params()?;
    Ok(match cfg.model.perturb_bond {
        Some(bond) => perturb_bond(lattice, &params, bond, cfg.model.perturb_delta)?,
        None => params.build(lattice)?,
    })
}

/// Refuses models that the lattice group is not a weak symmetry of.
fn ensure_symmetric(m: &LindbladModel, g: &SymmetryGroup) -> Result<(), CliError> {
    let report = check_weak_symmetry(m, g);
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "model is not invariant under the lattice group (element {:?}, term {})",
            report.failing_element,
            report.witness.unwrap_or_default()
        )))
    }
}

/// `auto` picks the even sector exactly when every Hamiltonian term and jump
/// product preserves parity, which forces the parity-changing block to vanish.
pub fn choose_sector(choice: SectorChoice, m: &LindbladModel) -> Result<Sector, CliError> {
    match choice {
        SectorChoice::Full => Ok(Sector::Full),
        SectorChoice::Auto if m.is_parity_preserving() => Ok(Sector::Even),
        SectorChoice::Auto => Ok(Sector::Full),
        SectorChoice::Even if m.is_parity_preserving() => Ok(Sector::Even),
        SectorChoice::Even => Err(CliError::Config(
            "sector = even needs a parity-preserving model (set the field to zero)".into(),
        )),
    }
}

pub fn dims(cfg: &RunConfig, enumerate: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let lattices = cfg.lattices()?;
    let mut header = vec!["lattice", "sites", "group_order", "operator_dim", "dim_invariant", "dim_even"];
    if enumerate {
        header.extend(["enum_invariant", "enum_even", "orbit_size_sum"]);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for lat in &lattices {
        let g = lat.symmetry_group()?;
        let v = lat.n_sites();
        let mut row = vec![
            lat.to_string(),
            v.to_string(),
            g.order().to_string(),
            (1u128 << (2 * v)).to_string(),
            burnside_dim(&g).to_string(),
            even_dim(&g).to_string(),
        ];
        if enumerate {
            if v <= DEFAULT_ENUMERATION_MAX_SITES {
                let basis = InvariantBasis::enumerate(&g, Sector::Full, DEFAULT_ENUMERATION_MAX_SITES)?;
                let d = basis.dims();
                let total: usize = basis.elements().iter().map(|e| e.orbit_size).sum();
                row.extend([d.total.to_string(), d.even.to_string(), total.to_string()]);
            } else {
                row.extend(["".to_string(), "".to_string(), "".to_string()]);
            }
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    out.write_all(&bytes)?;
    Ok(())
}

pub fn steady(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let lat = cfg.single_lattice()?;
    let g = lat.symmetry_group()?;
    let m = build_model(cfg, &lat)?;
    ensure_symmetric(&m, &g)?;
    let sector = choose_sector(cfg.solver.sector, &m)?;
    let opts = cfg.solver_options();

    let l = build_reduced(&m, &g, sector)?;
    let (ss, gap) = solve_and_check(&l, &opts)?;
    gap.ensure_unique()?;
    let mag = magnetization(&ss)?;
    let spectrum = coefficient_spectrum(&ss);

    let dir = &cfg.output.dir;
    let mut w = csv_file(dir, "spectrum.csv")?;
    w.write_record(["index", "re", "im", "abs", "parity", "orbit_size", "rank", "delta_n"])?;
    for r in &spectrum.by_magnitude {
        w.write_record([
            r.index.to_string(),
            fmt_f64(r.value.re),
            fmt_f64(r.value.im),
            fmt_f64(r.value.norm()),
            r.parity.as_str().to_string(),
            r.orbit_size.to_string(),
            r.rank.to_string(),
            r.delta_n.to_string(),
        ])?;
    }
    w.flush()?;

    let summary_header = [
        "lattice", "sector", "dim", "method", "residual", "gap", "mx", "my", "mz", "nonzero_even",
        "nonzero_odd", "max_odd",
    ];
    let summary_row = [
        lat.to_string(),
        sector.as_str().to_string(),
        l.dim().to_string(),
        format!("{:?}", ss.method()),
        fmt_f64(ss.residual()),
        fmt_f64(gap.gap),
        fmt_f64(mag.x),
        fmt_f64(mag.y),
        fmt_f64(mag.z),
        spectrum.count_above(Parity::Even, ZERO_TOL).to_string(),
        spectrum.count_above(Parity::Odd, ZERO_TOL).to_string(),
        fmt_f64(spectrum.max_abs(Parity::Odd)),
    ];
    let mut w = csv_file(dir, "summary.csv")?;
    w.write_record(summary_header)?;
    w.write_record(&summary_row)?;
    w.flush()?;

    for (k, v) in summary_header.iter().zip(&summary_row) {
        writeln!(out, "{k:>12}  {v}")?;
    }
    Ok(())
}

fn chi_record(chi: &SusceptibilityTensor) -> [String; 5] {
    [
        fmt_f64(chi.xx),
        fmt_f64(chi.xy),
        fmt_f64(chi.yx),
        fmt_f64(chi.yy),
        fmt_f64(chi_av(chi)),
    ]
}

/// Susceptibility and gap at the zero-field point of `params`.
fn susceptibility_point(
    lat: &Lattice,
    g: &SymmetryGroup,
    params: &XyzParams,
    cfg: &RunConfig,
) -> Result<(SusceptibilityTensor, f64), CliError> {
    let opts = cfg.solver_options();
    let zero = XyzParams { hx: 0.0, hy: 0.0, ..*params };
    let m = zero.build(lat)?;
    ensure_symmetric(&m, g)?;
    let l = build_reduced(&m, g, choose_sector(SectorChoice::Auto, &m)?)?;
    let report = check_uniqueness(&l, &opts)?;
    report.ensure_unique()?;
    let chi = xyz_susceptibility(lat, &zero, cfg.solver.delta, &opts)?;
    Ok((chi, report.gap))
}

fn reject_perturbation(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.model.perturb_bond.is_some() {
        return Err(CliError::Config(
            "perturb_bond breaks the lattice symmetry; only `verify` accepts it".into(),
        ));
    }
    Ok(())
}

pub fn susceptibility(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    reject_perturbation(cfg)?;
    let lat = cfg.single_lattice()?;
    let g = lat.symmetry_group()?;
    let (chi, gap) = susceptibility_point(&lat, &g, &cfg.params()?, cfg)?;
    let header = ["chi_xx", "chi_xy", "chi_yx", "chi_yy", "chi_av", "gap", "delta"];
    let mut row = chi_record(&chi).to_vec();
    row.extend([fmt_f64(gap), fmt_f64(cfg.solver.delta)]);
    let mut w = csv_file(&cfg.output.dir, "susceptibility.csv")?;
    w.write_record(header)?;
    w.write_record(&row)?;
    w.flush()?;
    for (k, v) in header.iter().zip(&row) {
        writeln!(out, "{k:>8}  {v}")?;
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    reject_perturbation(cfg)?;
    let lat = cfg.single_lattice()?;
    let g = lat.symmetry_group()?;
    let param = cfg.sweep_param()?;
    let values = cfg.sweep_values()?;
    let base = cfg.params()?;

    let results: Vec<Result<(SusceptibilityTensor, f64), CliError>> = values
        .par_iter()
        .map(|&v| {
            let mut p = base;
            param.set(&mut p, v);
            if !(p.gamma > 0.0) {
                return Err(CliError::Config(format!("gamma must be > 0, got {}", p.gamma)));
            }
            susceptibility_point(&lat, &g, &p, cfg)
        })
        .collect();

    let mut w = csv_file(&cfg.output.dir, "sweep.csv")?;
    w.write_record([param.name(), "chi_xx", "chi_xy", "chi_yx", "chi_yy", "chi_av", "gap", "status"])?;
    let nan = fmt_f64(f64::NAN);
    let mut first_error = None;
    let mut ok = 0;
    for (v, r) in values.iter().zip(results) {
        let mut row = vec![fmt_f64(*v)];
        match r {
            Ok((chi, gap)) => {
                ok += 1;
                row.extend(chi_record(&chi));
                row.extend([fmt_f64(gap), "ok".to_string()]);
                writeln!(out, "{}={v:.6}  chi_av={:.10}", param.name(), chi_av(&chi))?;
            }
            Err(e) => {
                let status = format!("error {}: {e}", e.exit_code());
                writeln!(out, "{}={v:.6}  {status}", param.name())?;
                row.extend(std::iter::repeat_n(nan.clone(), 6));
                row.push(status);
                first_error.get_or_insert(e);
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    match (ok, first_error) {
        (0, Some(e)) => Err(CliError::SweepFailed(Box::new(e))),
        _ => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn bound(name: &'static str, value: f64, tol: f64) -> Self {
        Check {
            name,
            status: if value < tol { CheckStatus::Pass } else { CheckStatus::Fail },
            detail: format!("{} (tolerance {tol:e})", fmt_f64(value)),
        }
    }

    fn from_result(name: &'static str, r: Result<Check, CliError>) -> Self {
        r.unwrap_or_else(|e| Check {
            name,
            status: CheckStatus::Fail,
            detail: e.to_string(),
        })
    }

    fn skipped(name: &'static str, why: String) -> Self {
        Check {
            name,
            status: CheckStatus::Skipped,
            detail: why,
        }
    }
}

/// Runs every applicable consistency check on the configured instance.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let lat = cfg.single_lattice()?;
    let g = lat.symmetry_group()?;
    let m = build_model(cfg, &lat)?;
    let v = lat.n_sites();
    let mut checks = Vec::new();

    let report = verify_group(&g);
    checks.push(Check {
        name: "group",
        status: if report.is_valid() { CheckStatus::Pass } else { CheckStatus::Fail },
        detail: match report.first_failure() {
            Some(f) => f.to_string(),
            None => format!("order {}", g.order()),
        },
    });

    let weak = check_weak_symmetry(&m, &g);
    checks.push(Check {
        name: "weak_symmetry_structural",
        status: if weak.passed { CheckStatus::Pass } else { CheckStatus::Fail },
        detail: match (weak.failing_element, weak.witness) {
            (Some(i), Some(t)) => format!("element {i} maps term {t} outside the model"),
            (Some(i), None) => format!("element {i}"),
            _ => format!("{} elements", g.order()),
        },
    });

    checks.push(if v <= WEAK_SYMMETRY_MAX_SITES {
        Check::from_result(
            "weak_symmetry_numeric",
            verify_weak_symmetry_numeric(&m, &g, cfg.output.seed)
                .map(|d| Check::bound("weak_symmetry_numeric", d, WEAK_SYMMETRY_TOL))
                .map_err(CliError::from),
        )
    } else {
        Check::skipped("weak_symmetry_numeric", format!("needs V <= {WEAK_SYMMETRY_MAX_SITES}"))
    });

    if m.is_parity_preserving() {
        checks.push(if v <= DEFAULT_ENUMERATION_MAX_SITES {
            Check::from_result("parity_blocks", parity_check(&m, &g))
        } else {
            Check::skipped("parity_blocks", format!("needs V <= {DEFAULT_ENUMERATION_MAX_SITES}"))
        });
    }

    checks.push(if v <= ORACLE_MAX_SITES {
        Check::from_result("oracle_equivalence", oracle_check(cfg, &m, &g))
    } else {
        Check::skipped("oracle_equivalence", format!("needs V <= {ORACLE_MAX_SITES}"))
    });
    Ok(checks)
}

fn parity_check(m: &LindbladModel, g: &SymmetryGroup) -> Result<Check, CliError> {
    let l = build_reduced(m, g, Sector::Full)?;
    let n = l.parity_coupling_entries();
    let odd = lindsym::liouvillian::assemble_part(m, l.basis(), Part::Odd)?;
    Ok(Check {
        name: "parity_blocks",
        status: if n == 0 && odd.matrix().nnz() == 0 { CheckStatus::Pass } else { CheckStatus::Fail },
        detail: format!("{n} coupling entries, {} in the odd part", odd.matrix().nnz()),
    })
}

fn oracle_check(cfg: &RunConfig, m: &LindbladModel, g: &SymmetryGroup) -> Result<Check, CliError> {
    let l = build_reduced(m, g, choose_sector(cfg.solver.sector, m)?)?;
    let rho = reconstruct_dense(&solve_steady(&l, &cfg.solver_options())?)?;
    let oracle = full_steady(&build_full(m)?)?;
    Ok(Check::bound("oracle_equivalence", frobenius_distance(&rho, &oracle), ORACLE_TOL))
}

pub fn verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let checks = run_checks(cfg)?;
    let mut w = csv_file(&cfg.output.dir, "verify.csv")?;
    w.write_record(["check", "status", "detail"])?;
    for c in &checks {
        w.write_record([c.name, c.status.as_str(), &c.detail])?;
        writeln!(out, "{:<26} {:<8} {}", c.name, c.status.as_str(), c.detail)?;
    }
    w.flush()?;
    match checks.iter().find(|c| c.status == CheckStatus::Fail) {
        Some(c) => Err(CliError::Verification(format!("{}: {}", c.name, c.detail))),
        None => Ok(()),
    }
}

pub fn basis_dump(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let lat = cfg.single_lattice()?;
    let g = lat.symmetry_group()?;
    let m = build_model(cfg, &lat)?;
    ensure_symmetric(&m, &g)?;
    let sector = choose_sector(cfg.solver.sector, &m)?;
    let l = build_reduced(&m, &g, sector)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    l.basis().write_csv(BufWriter::new(File::create(dir.join("basis.csv"))?))?;
    let mut coo = BufWriter::new(File::create(dir.join("liouvillian.coo"))?);
    l.write_coo(&mut coo)?;
    coo.flush()?;
    writeln!(
        out,
        "{lat}: {} basis elements ({} sector, {}), {} nonzeros",
        l.dim(),
        sector.as_str(),
        if l.basis().is_complete() { "enumerated" } else { "reachable orbits" },
        l.matrix().nnz()
    )?;
    Ok(())
}
