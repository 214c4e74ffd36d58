//! Manufactured solutions whose spatial parts lie in the discrete spaces,
//! so every remaining error is temporal.

use std::sync::Arc;

use crate::error::Result;
use crate::mesh::Point;
use crate::slab_solver::{remove_mean, Discretization, SlabState, SourceLoads, Sources};

use super::mms::{ExactFields, TimeFunction};

/// Fields `u = a(t) U_h`, `v = a'(t) U_h`, `w = b(t) W_h`, `p = c(t) P_h`
/// with fixed finite element profiles. The sources are the discrete
/// residuals, so the semi-discrete solution is exactly this field.
#[derive(Debug, Clone)]
pub struct DiscreteMms {
    pub disc: Arc<Discretization>,
    pub a: TimeFunction,
    pub b: TimeFunction,
    pub c: TimeFunction,
    pub u_profile: Vec<f64>,
    pub w_profile: Vec<f64>,
    pub p_profile: Vec<f64>,
    m_u: Vec<f64>,
    m_w: Vec<f64>,
    a_u: Vec<f64>,
    b_p: Vec<f64>,
    k_w: Vec<f64>,
    mp_p: Vec<f64>,
    bt_u: Vec<f64>,
    bt_w: Vec<f64>,
}

impl DiscreteMms {
    pub fn new(
        disc: Arc<Discretization>,
        a: TimeFunction,
        b: TimeFunction,
        c: TimeFunction,
        u_profile: Vec<f64>,
        w_profile: Vec<f64>,
        p_profile: Vec<f64>,
    ) -> Self {
        let m_u = disc.mass.matvec(&u_profile);
        let m_w = disc.mass.matvec(&w_profile);
        let a_u = disc.elasticity.matvec(&u_profile);
        let b_p = disc.div.matvec(&p_profile);
        let k_w = disc.darcy.matvec(&w_profile);
        let mp_p = disc.p_mass.matvec(&p_profile);
        let bt_u = disc.div_t.matvec(&u_profile);
        let bt_w = disc.div_t.matvec(&w_profile);
        Self {
            disc,
            a,
            b,
            c,
            u_profile,
            w_profile,
            p_profile,
            m_u,
            m_w,
            a_u,
            b_p,
            k_w,
            mp_p,
            bt_u,
            bt_w,
        }
    }

    /// Interpolants of the trigonometric profiles of the default case,
    /// boundary normal DOFs zeroed and the pressure mean removed.
    pub fn trigonometric(disc: Arc<Discretization>, a: TimeFunction, b: TimeFunction, c: TimeFunction) -> Self {
        use std::f64::consts::PI;
        let s = &disc.u_space;
        let mut u = s.interpolate_vector(|x| {
            let v = (PI * x[0]).sin() * (PI * x[1]).sin();
            [v, v]
        });
        let mut w = s.interpolate_vector(|x| {
            [
                (PI * x[0]).sin() * (PI * x[1]).cos(),
                (PI * x[0]).cos() * (PI * x[1]).sin(),
            ]
        });
        s.apply_constraints(&mut u);
        s.apply_constraints(&mut w);
        let mut p = disc.p_space.interpolate_scalar(|x| (PI * x[0]).cos() * (PI * x[1]).cos());
        remove_mean(&disc, &mut p);
        Self::new(disc, a, b, c, u, w, p)
    }

    /// The exact discrete state at time `t`.
    pub fn state(&self, t: f64) -> SlabState {
        let [a, a1, _] = self.a.eval(t);
        let b = self.b.eval(t)[0];
        let c = self.c.eval(t)[0];
        let sc = |v: &[f64], s: f64| v.iter().map(|x| x * s).collect::<Vec<f64>>();
        SlabState {
            u: sc(&self.u_profile, a),
            v: sc(&self.u_profile, a1),
            w: sc(&self.w_profile, b),
            p: sc(&self.p_profile, c),
        }
    }
}

impl Sources for DiscreteMms {
    fn loads(&self, _disc: &Discretization, t: f64) -> Result<SourceLoads> {
        let pr = &self.disc.params;
        let [a, a1, a2] = self.a.eval(t);
        let [b, b1, _] = self.b.eval(t);
        let [c, c1, _] = self.c.eval(t);
        let n = self.m_u.len();
        let f = (0..n)
            .map(|i| {
                pr.rho_bar() * a2 * self.m_u[i] + pr.rho_f * b1 * self.m_w[i] + a * self.a_u[i]
                    - pr.alpha * c * self.b_p[i]
            })
            .collect();
        let g = (0..n)
            .map(|i| pr.rho_f * a2 * self.m_u[i] + pr.rho_w * b1 * self.m_w[i] + b * self.k_w[i] - c * self.b_p[i])
            .collect();
        let q = (0..self.mp_p.len())
            .map(|i| pr.s0 * c1 * self.mp_p[i] + pr.alpha * a1 * self.bt_u[i] + b * self.bt_w[i])
            .collect();
        Ok(SourceLoads { f, g, q })
    }
}

impl ExactFields for DiscreteMms {
    fn u(&self, cell: usize, x: Point, t: f64) -> Point {
        let v = self.disc.u_space.eval_field_vector(&self.u_profile, cell, x).expect("point in cell");
        let a = self.a.eval(t)[0];
        [a * v.val[0], a * v.val[1]]
    }

    fn grad_u(&self, cell: usize, x: Point, t: f64) -> [[f64; 2]; 2] {
        let v = self.disc.u_space.eval_field_vector(&self.u_profile, cell, x).expect("point in cell");
        let a = self.a.eval(t)[0];
        v.grad.map(|r| r.map(|g| a * g))
    }

    fn hess_u(&self, cell: usize, x: Point, t: f64) -> [[[f64; 2]; 2]; 2] {
        let v = self.disc.u_space.eval_field_vector(&self.u_profile, cell, x).expect("point in cell");
        let a = self.a.eval(t)[0];
        v.hess.map(|r| r.map(|h| h.map(|z| a * z)))
    }

    fn v(&self, cell: usize, x: Point, t: f64) -> Point {
        let v = self.disc.u_space.eval_field_vector(&self.u_profile, cell, x).expect("point in cell");
        let a1 = self.a.eval(t)[1];
        [a1 * v.val[0], a1 * v.val[1]]
    }

    fn w(&self, cell: usize, x: Point, t: f64) -> Point {
        let v = self.disc.u_space.eval_field_vector(&self.w_profile, cell, x).expect("point in cell");
        let b = self.b.eval(t)[0];
        [b * v.val[0], b * v.val[1]]
    }

    fn div_w(&self, cell: usize, x: Point, t: f64) -> f64 {
        let v = self.disc.u_space.eval_field_vector(&self.w_profile, cell, x).expect("point in cell");
        self.b.eval(t)[0] * v.div
    }

    fn p(&self, cell: usize, x: Point, t: f64) -> f64 {
        let v = self.disc.p_space.eval_field_scalar(&self.p_profile, cell, x).expect("point in cell");
        self.c.eval(t)[0] * v.val
    }
}
