//! The three spatial projections and their approximation errors.

use std::sync::Arc;

use crate::assembly::elasticity_action;
use crate::error::Result;
use crate::linalg::LuFactorization;
use crate::slab_solver::{Discretization, SlabState};

use super::mms::ExactFields;
use super::norms::field_errors;

/// Elliptic projection: `a_h(P1 y, φ) = a_h(y, φ)` for every free `φ`,
/// with `y = fields.u(·, t)`.
pub fn projection_p1(disc: &Discretization, fields: &dyn ExactFields, t: f64) -> Result<Vec<f64>> {
    let space = &disc.u_space;
    let pr = &disc.params;
    let rhs = elasticity_action(space, pr.mu, pr.lambda, pr.eta, &|c, x| (fields.u(c, x, t), fields.grad_u(c, x, t)))?;
    let free = space.free_dofs();
    let a = Arc::new(disc.elasticity.select(&free, &free));
    let lu = LuFactorization::new(a)?;
    let b: Vec<f64> = free.iter().map(|&i| rhs[i]).collect();
    let x = lu.solve(&b)?;
    let mut out = vec![0.0; space.n_dofs()];
    for (&i, v) in free.iter().zip(x) {
        out[i] = v;
    }
    Ok(out)
}

/// Canonical BDM interpolant of `fields.w(·, t)`.
pub fn projection_p2(disc: &Discretization, fields: &dyn ExactFields, t: f64) -> Vec<f64> {
    let mut w = disc.u_space.interpolate_vector_cellwise(|c, x| fields.w(c, x, t));
    disc.u_space.apply_constraints(&mut w);
    w
}

/// Cellwise `L²` projection of `fields.p(·, t)`.
pub fn projection_p3(disc: &Discretization, fields: &dyn ExactFields, t: f64) -> Vec<f64> {
    disc.p_space.interpolate_scalar_cellwise(|c, x| fields.p(c, x, t))
}

/// The six approximation errors of the projections at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionErrors {
    pub u_l2: f64,
    pub u_div: f64,
    pub u_dg: f64,
    pub w_l2: f64,
    pub w_div: f64,
    pub p_l2: f64,
}

impl ProjectionErrors {
    pub const NAMES: [&'static str; 6] = ["u_l2", "u_div", "u_dg", "w_l2", "w_div", "p_l2"];

    pub fn to_array(&self) -> [f64; 6] {
        [self.u_l2, self.u_div, self.u_dg, self.w_l2, self.w_div, self.p_l2]
    }
}

pub fn projection_errors(disc: &Discretization, fields: &dyn ExactFields, t: f64) -> Result<ProjectionErrors> {
    let u = projection_p1(disc, fields, t)?;
    let state = SlabState {
        v: vec![0.0; u.len()],
        w: projection_p2(disc, fields, t),
        p: projection_p3(disc, fields, t),
        u,
    };
    let e = field_errors(disc, &state, fields, t);
    Ok(ProjectionErrors {
        u_l2: e.u_l2,
        u_div: e.u_div,
        u_dg: e.u_dg,
        w_l2: e.w_l2,
        w_div: e.w_div,
        p_l2: e.p_l2,
    })
}
