//! Orchestration of one configured run: studies, CSV tables, snapshots
//! and the pass/fail summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::Result;
use crate::mesh::{Mesh, Point};
use crate::slab_solver::{march, project_initial_data, Discretization, SlabState, TimeGrid};
use crate::verification::properties::{property_suite, Check};
use crate::verification::{
    default_mms, eoc, error_norms, mass_conservation_audit, spatial_study, temporal_study, Eoc, FieldErrors,
    StudyRow, StudySettings,
};

use super::config::{render_config, Mode, RunConfig};

/// Tolerance of the mass-balance audit.
pub const MASS_AUDIT_TOL: f64 = 1e-9;
/// Slack on every measured convergence order.
pub const EOC_SLACK: f64 = 0.2;
/// Largest relative change allowed when τ is halved in the spatial study.
pub const TAU_HALVING_TOL: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Writes `contents` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_eoc(e: Option<&Eoc>) -> String {
    match e {
        None => String::new(),
        Some(Eoc::Rate(r)) => fmt_f(*r),
        Some(Eoc::Exact) => "exact".into(),
    }
}

/// One row per level: `level, h, tau, unknowns`, the `L^∞`-in-time norm of
/// every error, the endpoint maximum of the combined error, the audit and
/// solver residual, then one EOC column per error.
pub fn study_csv(rows: &[StudyRow], h: &[f64], tau: &[f64]) -> String {
    let names: Vec<String> = FieldErrors::NAMES
        .iter()
        .map(|n| n.to_string())
        .chain(["combined_endpoints".to_string()])
        .collect();
    let series: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut v = r.report.linf.to_array().to_vec();
            v.push(r.report.linf_endpoints.combined);
            v
        })
        .collect();
    let steps: Vec<f64> = rows.iter().map(|r| r.step).collect();
    let rates: Vec<Vec<Eoc>> = (0..names.len())
        .map(|i| eoc(&series.iter().map(|s| s[i]).collect::<Vec<_>>(), &steps))
        .collect();

    let mut s = String::from("level,h,tau,unknowns");
    for n in &names {
        let _ = write!(s, ",{n}");
    }
    s.push_str(",mass_audit,solver_residual");
    for n in &names {
        let _ = write!(s, ",eoc_{n}");
    }
    s.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(s, "{},{},{},{}", r.level, fmt_f(h[i]), fmt_f(tau[i]), r.unknowns);
        for v in &series[i] {
            let _ = write!(s, ",{}", fmt_f(*v));
        }
        let _ = write!(s, ",{},{}", fmt_f(r.mass_audit), fmt_f(r.max_solver_residual));
        for rate in &rates {
            let _ = write!(s, ",{}", fmt_eoc(if i == 0 { None } else { rate.get(i - 1) }));
        }
        s.push('\n');
    }
    s
}

fn settings(c: &RunConfig) -> StudySettings {
    StudySettings {
        k: c.k,
        ell: c.ell,
        t_final: c.t_final,
        omega: c.omega,
        params: c.physical_params(),
    }
}

fn rate_check(name: &str, rates: &[Eoc], min: f64) -> Check {
    let worst = rates.iter().filter_map(Eoc::rate).fold(f64::INFINITY, f64::min);
    let passed = rates.iter().all(|r| r.rate().is_none_or(|v| v >= min));
    let shown: Vec<String> = rates.iter().map(|r| r.to_string()).collect();
    Check {
        name: name.into(),
        passed,
        detail: format!("EOCs [{}], need >= {min:.2} (min {worst:.3})", shown.join(", ")),
    }
}

fn audit_checks(rows: &[StudyRow]) -> Vec<Check> {
    let audit = rows.iter().map(|r| r.mass_audit).fold(0.0, f64::max);
    let resid = rows.iter().map(|r| r.max_solver_residual).fold(0.0, f64::max);
    vec![
        Check {
            name: "mass audit".into(),
            passed: audit <= MASS_AUDIT_TOL,
            detail: format!("max relative residual {audit:.3e}"),
        },
        Check {
            name: "solver residual".into(),
            passed: resid <= crate::linalg::SOLVE_TOLERANCE,
            detail: format!("max relative residual {resid:.3e}"),
        },
    ]
}

fn time_study(c: &RunConfig, out: &mut RunOutcome) -> Result<()> {
    let counts: Vec<usize> = (0..c.levels).map(|i| c.slabs << i).collect();
    let study = temporal_study(&settings(c), c.mesh, &counts)?;
    let h = Mesh::unit_square(c.mesh)?.h_max();
    let tau = study.steps();
    let csv = study_csv(&study.rows, &vec![h; tau.len()], &tau);
    let path = c.out.join("study_time.csv");
    write_atomic(&path, &csv)?;
    out.artifacts.push(path);
    out.checks.push(rate_check(
        "temporal EOC of combined endpoint error",
        &study.combined_eoc(),
        (c.k + 1) as f64 - EOC_SLACK,
    ));
    out.checks.extend(audit_checks(&study.rows));
    Ok(())
}

fn space_study(c: &RunConfig, out: &mut RunOutcome) -> Result<()> {
    let meshes: Vec<usize> = (0..c.levels).map(|i| c.mesh << i).collect();
    let study = spatial_study(&settings(c), &meshes, c.slabs)?;
    let h = study.steps();
    let tau = vec![c.t_final / c.slabs as f64; h.len()];
    let path = c.out.join("study_space.csv");
    write_atomic(&path, &study_csv(&study.rows, &h, &tau))?;
    out.artifacts.push(path);
    out.checks.push(rate_check(
        "spatial EOC of combined error",
        &study.combined_eoc(),
        (c.ell + 1) as f64 - EOC_SLACK,
    ));
    out.checks.push(rate_check(
        "spatial EOC of displacement L2 error",
        &study.u_l2_eoc(),
        (c.ell + 2) as f64 - EOC_SLACK,
    ));
    let (dc, du) = study.tau_halving_change();
    out.checks.push(Check {
        name: "temporal error subdominant".into(),
        passed: dc < TAU_HALVING_TOL && du < TAU_HALVING_TOL,
        detail: format!("relative change on halving tau: combined {dc:.3e}, u {du:.3e}"),
    });
    let mut rows = study.rows.clone();
    rows.push(study.halved.clone());
    out.checks.extend(audit_checks(&rows));
    Ok(())
}

fn centroid_values(disc: &Discretization, s: &SlabState) -> Result<(Vec<f64>, [Vec<Point>; 3])> {
    let mesh = &disc.mesh;
    let mut p = Vec::with_capacity(mesh.num_cells());
    let mut vecs: [Vec<Point>; 3] = Default::default();
    for c in 0..mesh.num_cells() {
        let x = mesh.centroid(c);
        p.push(disc.p_space.eval_field_scalar(&s.p, c, x)?.val);
        for (v, coeffs) in vecs.iter_mut().zip([&s.u, &s.v, &s.w]) {
            v.push(disc.u_space.eval_field_vector(coeffs, c, x)?.val);
        }
    }
    Ok((p, vecs))
}

fn snapshot(disc: &Discretization, s: &SlabState, t: f64) -> Result<String> {
    let (p, [u, v, w]) = centroid_values(disc, s)?;
    Ok(disc.mesh.to_vtk(
        &format!("biot state t={t:?}"),
        &[("p", &p)],
        &[("u", &u), ("v", &v), ("w", &w)],
    ))
}

fn single_run(c: &RunConfig, out: &mut RunOutcome) -> Result<()> {
    let mesh = Arc::new(Mesh::unit_square(c.mesh)?);
    let disc = Arc::new(Discretization::new(mesh, c.ell, c.physical_params())?);
    let mms = default_mms(c.physical_params(), c.omega);
    let grid = TimeGrid::new(c.t_final, c.slabs)?;
    let sources = mms.sources();
    let traj = march(disc.clone(), c.k, grid, project_initial_data(&disc, &mms, 0.0), &sources)?;
    let report = error_norms(&disc, &traj, &mms);
    let audit = mass_conservation_audit(&disc, &traj, &sources)?;
    let rows = [StudyRow {
        level: c.mesh,
        step: disc.mesh.h_max(),
        unknowns: c.k * (2 * disc.u_space.n_free() + disc.u_space.n_dofs() + disc.p_space.n_dofs()) + 1,
        report,
        mass_audit: audit.max_relative,
        max_solver_residual: traj.residuals.iter().cloned().fold(0.0, f64::max),
    }];
    let path = c.out.join("single_run.csv");
    write_atomic(&path, &study_csv(&rows, &[disc.mesh.h_max()], &[grid.tau()]))?;
    out.artifacts.push(path);
    if c.snapshots {
        for n in 0..=grid.slabs {
            let path = c.out.join("snapshots").join(format!("state_{n:05}.vtk"));
            write_atomic(&path, &snapshot(&disc, &traj.endpoints[n], grid.t(n))?)?;
            out.artifacts.push(path);
        }
    }
    out.checks.extend(audit_checks(&rows));
    Ok(())
}

fn summary(c: &RunConfig, out: &RunOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode: {}", c.mode.as_str());
    for ch in &out.checks {
        let _ = writeln!(s, "{} {}: {}", if ch.passed { "PASS" } else { "FAIL" }, ch.name, ch.detail);
    }
    let passed = out.checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(s, "passed {passed}/{}", out.checks.len());
    let _ = writeln!(s, "overall: {}", if out.passed() { "PASS" } else { "FAIL" });
    let _ = writeln!(s, "\n# effective configuration\n{}", render_config(c));
    s
}

/// Runs the configured mode and writes its artifacts under `config.out`.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut out = RunOutcome {
        checks: Vec::new(),
        artifacts: Vec::new(),
    };
    match config.mode {
        Mode::TimeStudy => time_study(config, &mut out)?,
        Mode::SpaceStudy => space_study(config, &mut out)?,
        Mode::SingleRun => single_run(config, &mut out)?,
        Mode::PropertySuite => out.checks = property_suite(config.seed)?,
    }
    let path = config.out.join("summary.txt");
    write_atomic(&path, &summary(config, &out))?;
    out.artifacts.push(path);
    Ok(out)
}
