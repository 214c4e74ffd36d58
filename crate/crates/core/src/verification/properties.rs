//! Invariant checks of the time bases, the discrete spaces and the slab
//! scheme, run as one suite.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::PhysicalParams;
use crate::error::Result;
use crate::fem_spaces::TriangleRule;
use crate::mesh::Mesh;
use crate::slab_solver::{march, Discretization, NoSources, SlabState, TimeGrid};
use crate::time_basis::{
    beta_transform_identities, gauss_derivative_matrix, gauss_lobatto_rule, gauss_rule, weighted_gauss_identities,
    QuadratureRule, TimeSlab,
};

use super::audit::mass_conservation_audit;
use super::mms::default_mms;

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn monomial_rel_err(rule: &QuadratureRule, m: i32) -> f64 {
    let exact = 1.0 / (f64::from(m) + 1.0);
    (rule.integrate(|s| s.powi(m)) - exact).abs() / exact
}

/// Both rules integrate monomials of degree `≤ 2k−1` to `tol` and miss
/// degree `2k`.
pub fn quadrature_exactness(max_k: usize, tol: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for k in 1..=max_k {
        for (label, rule) in [("gauss", gauss_rule(k)?), ("gauss-lobatto", gauss_lobatto_rule(k)?)] {
            let deg = 2 * k as i32;
            let worst = (0..deg).map(|m| monomial_rel_err(&rule, m)).fold(0.0, f64::max);
            let miss = monomial_rel_err(&rule, deg);
            out.push(Check::new(
                format!("quadrature {label} k={k}"),
                worst <= tol && miss > tol,
                format!("max err deg<={}: {worst:.2e}, err deg {deg}: {miss:.2e}", deg - 1),
            ));
        }
    }
    Ok(out)
}

/// The four weighted-basis identities on `trials` random coefficient sets
/// per `k`, and positivity of the symmetric part of the scaled derivative
/// matrix.
pub fn time_basis_identities(max_k: usize, trials: usize, tol: f64, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in 1..=max_k {
        let mut worst = [0.0f64; 4];
        for _ in 0..trials {
            let slab = TimeSlab {
                index: 1,
                t_start: rng.random_range(0.0..2.0),
                tau: rng.random_range(0.05..1.0),
            };
            let a = weighted_gauss_identities(k, slab, &mut rng)?;
            let b = beta_transform_identities(k, slab, &mut rng)?;
            let errs = [a.weighted_pairing.rel_err, a.weighted_swap.rel_err, b.derivative_pairing.rel_err, b.derivative_swap.rel_err];
            for (w, e) in worst.iter_mut().zip(errs) {
                *w = w.max(e);
            }
        }
        let names = ["weighted pairing", "weighted swap", "derivative pairing", "derivative swap"];
        for (name, w) in names.iter().zip(worst) {
            out.push(Check::new(format!("{name} k={k}"), w <= tol, format!("max rel err {w:.2e} over {trials} trials")));
        }
    }
    for k in 1..=4 {
        let m = gauss_derivative_matrix(k)?;
        out.push(Check::new(
            format!("derivative matrix coercive k={k}"),
            m.min_eig_sym > 0.0,
            format!("min eig of symmetric part {:.6e}", m.min_eig_sym),
        ));
    }
    Ok(out)
}

/// Normal continuity of random BDM fields, `div U_h ⊂ Q_h`, and the
/// commuting property `div Π_BDM w = Π_DG div w`.
pub fn space_invariants(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mesh = Arc::new(Mesh::unit_square(3)?);
    for ell in 0..=1 {
        let disc = Discretization::new(mesh.clone(), ell, PhysicalParams::default())?;
        let s = &disc.u_space;
        let coeffs: Vec<f64> = (0..s.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();

        let mut jump = 0.0f64;
        for e in 0..mesh.num_edges() {
            let (c1, Some(c2)) = mesh.edge_cells(e) else { continue };
            let n = mesh.edge_normal(e);
            let [a, b] = mesh.edge(e);
            let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
            for t in [0.1, 0.37, 0.5, 0.83] {
                let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let v1 = s.eval_field_vector(&coeffs, c1, x)?.val;
                let v2 = s.eval_field_vector(&coeffs, c2, x)?.val;
                jump = jump.max(((v1[0] - v2[0]) * n[0] + (v1[1] - v2[1]) * n[1]).abs());
            }
        }
        out.push(Check::new(format!("normal continuity ell={ell}"), jump <= 1e-11, format!("max normal jump {jump:.2e}")));

        // div of a BDM field equals its projection onto the pressure space.
        let bt = disc.div_t.matvec(&coeffs);
        let proj = crate::linalg::lu_solve(&crate::linalg::LinearSystem::new(Arc::new(disc.p_mass.clone()), bt)?)?;
        let rule = TriangleRule::new(2 * (ell + 2));
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for c in 0..mesh.num_cells() {
            for &xh in &rule.points {
                let d = s.eval_vector_ref(&coeffs, c, xh).div;
                let p = disc.p_space.eval_scalar_ref(&proj, c, xh).val;
                diff = diff.max((d - p).abs());
                scale = scale.max(d.abs());
            }
        }
        out.push(Check::new(
            format!("div compatibility ell={ell}"),
            diff <= 1e-10 * scale.max(1.0),
            format!("max |div u - P div u| {diff:.2e}"),
        ));

        let mms = default_mms(PhysicalParams::default(), 1.0);
        let w = s.interpolate_vector(|x| mms.w_at(x, 0.4));
        let pdiv = disc.p_space.interpolate_scalar(|x| mms.div_w_at(x, 0.4));
        let mut comm = 0.0f64;
        for c in 0..mesh.num_cells() {
            for &xh in &rule.points {
                let d = s.eval_vector_ref(&w, c, xh).div;
                let p = disc.p_space.eval_scalar_ref(&pdiv, c, xh).val;
                comm = comm.max((d - p).abs());
            }
        }
        out.push(Check::new(format!("commuting interpolation ell={ell}"), comm <= 1e-10, format!("max defect {comm:.2e}")));
    }
    Ok(out)
}

/// Random free state with zero-mean pressure.
pub fn random_state(disc: &Discretization, rng: &mut impl Rng) -> SlabState {
    let s = &disc.u_space;
    let mut rand_vec = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let mut st = SlabState {
        u: rand_vec(s.n_dofs()),
        v: rand_vec(s.n_dofs()),
        w: rand_vec(s.n_dofs()),
        p: rand_vec(disc.p_space.n_dofs()),
    };
    for x in [&mut st.u, &mut st.v, &mut st.w] {
        s.apply_constraints(x);
    }
    crate::slab_solver::remove_mean(disc, &mut st.p);
    st
}

/// With zero sources the discrete energy does not increase from one slab
/// endpoint to the next.
pub fn energy_decay(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = Arc::new(Mesh::unit_square(3)?);
    let mut out = Vec::new();
    for (k, ell) in [(1, 0), (2, 0), (1, 1), (3, 1)] {
        let disc = Arc::new(Discretization::new(mesh.clone(), ell, PhysicalParams::default())?);
        let init = random_state(&disc, &mut rng);
        let traj = march(disc.clone(), k, TimeGrid::new(1.0, 6)?, init, &NoSources)?;
        let e: Vec<f64> = traj.endpoints.iter().map(|s| disc.energy(s)).collect();
        let worst = e.windows(2).map(|w| (w[1] - w[0]) / w[0]).fold(f64::NEG_INFINITY, f64::max);
        out.push(Check::new(
            format!("energy non-increasing k={k} ell={ell}"),
            worst <= 1e-12,
            format!("max relative increase {worst:.2e}, E0 {:.4e}, EN {:.4e}", e[0], e[e.len() - 1]),
        ));
    }
    Ok(out)
}

/// Mass balance holds at Gauss points for compatible spaces and fails for
/// an incompatible pairing.
pub fn mass_balance(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = Arc::new(Mesh::unit_square(3)?);
    let params = PhysicalParams::default();
    let mms = default_mms(params, 1.0);
    let sources = mms.sources();
    let mut out = Vec::new();
    for (bdm, dgp, compatible) in [(1, 0, true), (2, 1, true), (2, 0, false)] {
        let disc = Arc::new(Discretization::with_degrees(mesh.clone(), bdm, dgp, params)?);
        let init = random_state(&disc, &mut rng);
        let traj = march(disc.clone(), 2, TimeGrid::new(0.5, 4)?, init, &sources)?;
        let audit = mass_conservation_audit(&disc, &traj, &sources)?;
        let passed = if compatible { audit.passes(1e-9) } else { audit.max_relative > 1e-3 };
        out.push(Check::new(
            format!("mass audit BDM{bdm}/P{dgp}{}", if compatible { "" } else { " (negative control)" }),
            passed,
            format!("max relative residual {:.2e}", audit.max_relative),
        ));
    }
    Ok(out)
}

/// Every check above.
pub fn property_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = quadrature_exactness(4, 1e-13)?;
    out.extend(time_basis_identities(3, 100, 1e-11, seed)?);
    out.extend(space_invariants(seed)?);
    out.extend(energy_decay(seed)?);
    out.extend(mass_balance(seed)?);
    Ok(out)
}
