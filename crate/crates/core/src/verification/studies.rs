//! Convergence studies in time and space, the exactness check for
//! polynomial-in-time data, and the projection rate study.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::PhysicalParams;
use crate::error::Result;
use crate::mesh::Mesh;
use crate::slab_solver::{march, project_initial_data, Discretization, TimeGrid};

use super::audit::mass_conservation_audit;
use super::discrete::DiscreteMms;
use super::eoc::{eoc, Eoc};
use super::mms::{default_mms, TimeFunction};
use super::norms::{error_norms, ErrorReport, FieldErrors};
use super::projections::{projection_errors, ProjectionErrors};

/// One refinement level of a convergence study.
#[derive(Debug, Clone)]
pub struct StudyRow {
    /// Number of slabs (temporal study) or cells per side (spatial study).
    pub level: usize,
    /// τ or h.
    pub step: f64,
    pub unknowns: usize,
    pub report: ErrorReport,
    pub mass_audit: f64,
    pub max_solver_residual: f64,
}

#[derive(Debug, Clone)]
pub struct StudySettings {
    pub k: usize,
    pub ell: usize,
    pub t_final: f64,
    pub omega: f64,
    pub params: PhysicalParams,
}

/// Temporal study: fixed mesh, slab counts doubled.
#[derive(Debug, Clone)]
pub struct TemporalStudy {
    pub settings: StudySettings,
    pub mesh_n: usize,
    pub rows: Vec<StudyRow>,
}

impl TemporalStudy {
    /// Max over slab endpoints of the combined energy-type error.
    pub fn combined_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.linf_endpoints.combined).collect()
    }

    pub fn combined_eoc(&self) -> Vec<Eoc> {
        eoc(&self.combined_errors(), &self.steps())
    }

    pub fn steps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.step).collect()
    }
}

/// Spatial study: meshes refined with fixed τ.
#[derive(Debug, Clone)]
pub struct SpatialStudy {
    pub settings: StudySettings,
    pub slabs: usize,
    pub rows: Vec<StudyRow>,
    /// The finest level repeated with τ halved.
    pub halved: StudyRow,
}

impl SpatialStudy {
    pub fn steps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.step).collect()
    }

    /// `L^∞` in time of `‖e_u‖_{U_h} + ‖e_{v,w}‖_ρ + √s0‖e_p‖`.
    pub fn combined_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.linf.combined).collect()
    }

    pub fn u_l2_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.linf.u_l2).collect()
    }

    pub fn combined_eoc(&self) -> Vec<Eoc> {
        eoc(&self.combined_errors(), &self.steps())
    }

    pub fn u_l2_eoc(&self) -> Vec<Eoc> {
        eoc(&self.u_l2_errors(), &self.steps())
    }

    /// Relative change of the finest-level combined and `u` errors when τ
    /// is halved.
    pub fn tau_halving_change(&self) -> (f64, f64) {
        let fine = &self.rows.last().expect("at least one level").report.linf;
        let h = &self.halved.report.linf;
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        (rel(fine.combined, h.combined), rel(fine.u_l2, h.u_l2))
    }
}

fn trig_time_functions(omega: f64) -> (TimeFunction, TimeFunction, TimeFunction) {
    let m = default_mms(PhysicalParams::default(), omega);
    (m.a, m.b, m.c)
}

fn run_discrete(disc: &Arc<Discretization>, mms: &DiscreteMms, k: usize, grid: TimeGrid) -> Result<StudyRow> {
    let traj = march(disc.clone(), k, grid, mms.state(0.0), mms)?;
    let report = error_norms(disc, &traj, mms);
    let audit = mass_conservation_audit(disc, &traj, mms)?;
    Ok(StudyRow {
        level: grid.slabs,
        step: grid.tau(),
        unknowns: k * (disc.u_space.n_free() * 2 + disc.u_space.n_dofs() + disc.p_space.n_dofs()) + 1,
        report,
        mass_audit: audit.max_relative,
        max_solver_residual: traj.residuals.iter().cloned().fold(0.0, f64::max),
    })
}

/// Temporal convergence against a solution whose spatial profiles lie in
/// the finite element spaces, so the spatial error vanishes.
pub fn temporal_study(settings: &StudySettings, mesh_n: usize, slab_counts: &[usize]) -> Result<TemporalStudy> {
    let mesh = Arc::new(Mesh::unit_square(mesh_n)?);
    let disc = Arc::new(Discretization::new(mesh, settings.ell, settings.params)?);
    let (a, b, c) = trig_time_functions(settings.omega);
    let mms = DiscreteMms::trigonometric(disc.clone(), a, b, c);
    let rows = slab_counts
        .iter()
        .map(|&n| run_discrete(&disc, &mms, settings.k, TimeGrid::new(settings.t_final, n)?))
        .collect::<Result<_>>()?;
    Ok(TemporalStudy {
        settings: settings.clone(),
        mesh_n,
        rows,
    })
}

fn run_smooth(settings: &StudySettings, mesh_n: usize, slabs: usize) -> Result<StudyRow> {
    let mesh = Arc::new(Mesh::unit_square(mesh_n)?);
    let disc = Arc::new(Discretization::new(mesh.clone(), settings.ell, settings.params)?);
    let mms = default_mms(settings.params, settings.omega);
    let grid = TimeGrid::new(settings.t_final, slabs)?;
    let initial = project_initial_data(&disc, &mms, 0.0);
    let sources = mms.sources();
    let traj = march(disc.clone(), settings.k, grid, initial, &sources)?;
    let report = error_norms(&disc, &traj, &mms);
    let audit = mass_conservation_audit(&disc, &traj, &sources)?;
    Ok(StudyRow {
        level: mesh_n,
        step: mesh.h_max(),
        unknowns: settings.k * (disc.u_space.n_free() * 2 + disc.u_space.n_dofs() + disc.p_space.n_dofs()) + 1,
        report,
        mass_audit: audit.max_relative,
        max_solver_residual: traj.residuals.iter().cloned().fold(0.0, f64::max),
    })
}

/// Spatial convergence against the trigonometric solution on uniformly
/// refined meshes of the unit square.
pub fn spatial_study(settings: &StudySettings, mesh_ns: &[usize], slabs: usize) -> Result<SpatialStudy> {
    let rows: Vec<StudyRow> = mesh_ns
        .iter()
        .map(|&n| run_smooth(settings, n, slabs))
        .collect::<Result<_>>()?;
    let finest = *mesh_ns.last().ok_or_else(|| crate::error::domain("no mesh levels"))?;
    let halved = run_smooth(settings, finest, 2 * slabs)?;
    Ok(SpatialStudy {
        settings: settings.clone(),
        slabs,
        rows,
        halved,
    })
}

/// Largest error over all samples when the time profiles are random
/// polynomials of degree `k`, which the scheme must reproduce.
#[derive(Debug, Clone)]
pub struct ExactnessReport {
    pub k: usize,
    pub linf: FieldErrors,
    pub mass_audit: f64,
    /// Size of the exact solution, for scale.
    pub solution_scale: f64,
}

impl ExactnessReport {
    /// Largest of the `U_h`, energy, `L²` and divergence errors.
    pub fn max_error(&self) -> f64 {
        let e = &self.linf;
        [e.combined, e.u_l2, e.v_l2, e.w_l2, e.w_div, e.p_l2].into_iter().fold(0.0, f64::max)
    }
}

pub fn polynomial_exactness(
    k: usize,
    ell: usize,
    mesh_n: usize,
    slabs: usize,
    params: PhysicalParams,
    seed: u64,
) -> Result<ExactnessReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut poly = || TimeFunction::Polynomial((0..=k).map(|_| rng.random_range(-1.0..1.0)).collect());
    let (a, b, c) = (poly(), poly(), poly());
    let mesh = Arc::new(Mesh::unit_square(mesh_n)?);
    let disc = Arc::new(Discretization::new(mesh, ell, params)?);
    let mms = DiscreteMms::trigonometric(disc.clone(), a, b, c);
    let row = run_discrete(&disc, &mms, k, TimeGrid::new(1.0, slabs)?)?;
    let zero = crate::slab_solver::SlabState::zeros(&disc);
    let scale = (0..=slabs)
        .map(|n| {
            let t = n as f64 / slabs as f64;
            super::norms::field_errors(&disc, &zero, &mms, t).combined
        })
        .fold(0.0, f64::max);
    Ok(ExactnessReport {
        k,
        linf: row.report.linf,
        mass_audit: row.mass_audit,
        solution_scale: scale,
    })
}

/// Projection errors on a sequence of meshes at a fixed time.
#[derive(Debug, Clone)]
pub struct ProjectionStudy {
    pub ell: usize,
    pub t: f64,
    pub levels: Vec<usize>,
    pub steps: Vec<f64>,
    pub errors: Vec<ProjectionErrors>,
}

impl ProjectionStudy {
    /// EOCs per error kind, in the order of [`ProjectionErrors::NAMES`].
    pub fn rates(&self) -> Vec<Vec<Eoc>> {
        (0..ProjectionErrors::NAMES.len())
            .map(|i| {
                let e: Vec<f64> = self.errors.iter().map(|r| r.to_array()[i]).collect();
                eoc(&e, &self.steps)
            })
            .collect()
    }
}

pub fn projection_study(ell: usize, mesh_ns: &[usize], params: PhysicalParams, omega: f64, t: f64) -> Result<ProjectionStudy> {
    let mms = default_mms(params, omega);
    let mut steps = Vec::new();
    let mut errors = Vec::new();
    for &n in mesh_ns {
        let mesh = Arc::new(Mesh::unit_square(n)?);
        steps.push(mesh.h_max());
        let disc = Discretization::new(mesh, ell, params)?;
        errors.push(projection_errors(&disc, &mms, t)?);
    }
    Ok(ProjectionStudy {
        ell,
        t,
        levels: mesh_ns.to_vec(),
        steps,
        errors,
    })
}
