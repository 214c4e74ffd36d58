//! Error norms of a discrete state against exact fields, and their
//! sampling over a trajectory.

use crate::fem_spaces::{EdgeRule, TriangleRule, VectorValue};
use crate::assembly::form_degree;
use crate::mesh::Point;
use crate::slab_solver::{Discretization, SlabState, Trajectory};
use crate::time_basis::gauss_lobatto_rule;

use super::mms::ExactFields;

/// Error norms of all fields at one time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldErrors {
    pub u_l2: f64,
    /// Broken `H¹` seminorm.
    pub u_grad: f64,
    /// `(Σ_e h_e⁻¹ ‖[tang e]‖²)^{1/2}` over all edges.
    pub u_jump: f64,
    /// `(Σ_K h_K² |e|²_{H²(K)})^{1/2}`.
    pub u_h2: f64,
    pub u_div: f64,
    /// DG norm: gradient, jump and `H²` parts.
    pub u_dg: f64,
    /// DG norm plus divergence.
    pub u_uh: f64,
    pub v_l2: f64,
    pub w_l2: f64,
    pub w_div: f64,
    /// `‖M_ρ^{1/2}(e_v, e_w)‖`.
    pub vw_rho: f64,
    /// `‖K^{-1/2} e_w‖`.
    pub w_kinv: f64,
    pub p_l2: f64,
    /// `√s0 ‖e_p‖`.
    pub p_s0: f64,
    /// `‖e_u‖_{U_h} + ‖M_ρ^{1/2}(e_v, e_w)‖ + √s0 ‖e_p‖`.
    pub combined: f64,
}

impl FieldErrors {
    pub const NAMES: [&'static str; 15] = [
        "u_l2", "u_grad", "u_jump", "u_h2", "u_div", "u_dg", "u_uh", "v_l2", "w_l2", "w_div", "vw_rho",
        "w_kinv", "p_l2", "p_s0", "combined",
    ];

    pub fn to_array(&self) -> [f64; 15] {
        [
            self.u_l2, self.u_grad, self.u_jump, self.u_h2, self.u_div, self.u_dg, self.u_uh, self.v_l2,
            self.w_l2, self.w_div, self.vw_rho, self.w_kinv, self.p_l2, self.p_s0, self.combined,
        ]
    }

    pub fn from_array(a: [f64; 15]) -> Self {
        Self {
            u_l2: a[0],
            u_grad: a[1],
            u_jump: a[2],
            u_h2: a[3],
            u_div: a[4],
            u_dg: a[5],
            u_uh: a[6],
            v_l2: a[7],
            w_l2: a[8],
            w_div: a[9],
            vw_rho: a[10],
            w_kinv: a[11],
            p_l2: a[12],
            p_s0: a[13],
            combined: a[14],
        }
    }

    pub fn max(&self, other: &Self) -> Self {
        let (a, b) = (self.to_array(), other.to_array());
        Self::from_array(std::array::from_fn(|i| a[i].max(b[i])))
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Error norms of `state` against `exact` at time `t`.
pub fn field_errors(disc: &Discretization, state: &SlabState, exact: &dyn ExactFields, t: f64) -> FieldErrors {
    let space = &disc.u_space;
    let pspace = &disc.p_space;
    let mesh = &*disc.mesh;
    let pr = &disc.params;
    let ki = pr.permeability_inverse();
    let deg = form_degree(space) + 4;
    let rule = TriangleRule::new(deg);
    let rv: Vec<Vec<VectorValue>> = rule.points.iter().map(|&p| space.reference().eval_vector(p)).collect();
    let rs: Vec<_> = rule.points.iter().map(|&p| pspace.reference().eval_scalar(p)).collect();

    let eval = |c: usize, phi: &[VectorValue], coeffs: &[f64]| -> VectorValue {
        let mut out = VectorValue::default();
        for (v, &(g, _)) in phi.iter().zip(space.cell_dofs(c)) {
            let s = coeffs[g];
            if s == 0.0 {
                continue;
            }
            for r in 0..2 {
                out.val[r] += s * v.val[r];
                for a in 0..2 {
                    out.grad[r][a] += s * v.grad[r][a];
                    for b in 0..2 {
                        out.hess[r][a][b] += s * v.hess[r][a][b];
                    }
                }
            }
            out.div += s * v.div;
        }
        out
    };

    let mut acc = [0.0f64; 11];
    // 0 u_l2, 1 grad, 2 jump, 3 h2, 4 div, 5 v_l2, 6 w_l2, 7 w_div, 8 rho, 9 kinv, 10 p
    for c in 0..mesh.num_cells() {
        let map = mesh.affine_map(c);
        let hk2 = mesh.h_cell(c).powi(2);
        for ((xh, (r_v, r_s)), &wq) in rule.points.iter().zip(rv.iter().zip(&rs)).zip(&rule.weights) {
            let x = map.to_physical(*xh);
            let w = wq * map.det;
            let phi = space.map_vector_values(c, r_v);
            let uh = eval(c, &phi, &state.u);
            let vh = eval(c, &phi, &state.v);
            let wh = eval(c, &phi, &state.w);
            let ph: f64 = r_s.iter().zip(pspace.cell_dofs(c)).map(|(s, &(g, _))| s.val * state.p[g]).sum();

            let eu = sub(uh.val, exact.u(c, x, t));
            let gu = exact.grad_u(c, x, t);
            let hu = exact.hess_u(c, x, t);
            let mut g2 = 0.0;
            let mut h2 = 0.0;
            for r in 0..2 {
                for a in 0..2 {
                    g2 += (uh.grad[r][a] - gu[r][a]).powi(2);
                }
                h2 += (uh.hess[r][0][0] - hu[r][0][0]).powi(2)
                    + (uh.hess[r][0][1] - hu[r][0][1]).powi(2)
                    + (uh.hess[r][1][1] - hu[r][1][1]).powi(2);
            }
            let ediv = uh.div - (gu[0][0] + gu[1][1]);
            let ev = sub(vh.val, exact.v(c, x, t));
            let ew = sub(wh.val, exact.w(c, x, t));
            let ewdiv = wh.div - exact.div_w(c, x, t);
            let ep = ph - exact.p(c, x, t);
            let kw = [ki[0][0] * ew[0] + ki[0][1] * ew[1], ki[1][0] * ew[0] + ki[1][1] * ew[1]];

            acc[0] += w * dot(eu, eu);
            acc[1] += w * g2;
            acc[3] += w * hk2 * h2;
            acc[4] += w * ediv * ediv;
            acc[5] += w * dot(ev, ev);
            acc[6] += w * dot(ew, ew);
            acc[7] += w * ewdiv * ewdiv;
            acc[8] += w * (pr.rho_bar() * dot(ev, ev) + 2.0 * pr.rho_f * dot(ev, ew) + pr.rho_w * dot(ew, ew));
            acc[9] += w * dot(kw, ew);
            acc[10] += w * ep * ep;
        }
    }

    let erule = EdgeRule::new(deg);
    for e in 0..mesh.num_edges() {
        let f = mesh.facet(e);
        let (c1, c2) = mesh.edge_cells(e);
        let [a, b] = mesh.edge(e);
        let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
        for (&s, &wq) in erule.points.iter().zip(&erule.weights) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let side = |c: usize| -> Point {
                let xh = mesh.affine_map(c).to_reference(x);
                let uh = space.eval_vector_ref(&state.u, c, xh).val;
                sub(uh, exact.u(c, x, t))
            };
            let mut jump = side(c1);
            if let Some(c2) = c2 {
                jump = sub(jump, side(c2));
            }
            let dn = dot(jump, f.normal);
            let tj = [jump[0] - dn * f.normal[0], jump[1] - dn * f.normal[1]];
            // h_e⁻¹ cancels the edge length of the quadrature weight.
            acc[2] += wq * dot(tj, tj);
        }
    }

    let sq = |v: f64| v.max(0.0).sqrt();
    let u_dg = sq(acc[1] + acc[2] + acc[3]);
    let u_uh = sq(acc[1] + acc[2] + acc[3] + acc[4]);
    let vw_rho = sq(acc[8]);
    let p_l2 = sq(acc[10]);
    let p_s0 = pr.s0.sqrt() * p_l2;
    FieldErrors {
        u_l2: sq(acc[0]),
        u_grad: sq(acc[1]),
        u_jump: sq(acc[2]),
        u_h2: sq(acc[3]),
        u_div: sq(acc[4]),
        u_dg,
        u_uh,
        v_l2: sq(acc[5]),
        w_l2: sq(acc[6]),
        w_div: sq(acc[7]),
        vw_rho,
        w_kinv: sq(acc[9]),
        p_l2,
        p_s0,
        combined: u_uh + vw_rho + p_s0,
    }
}

/// Errors of a trajectory sampled at slab endpoints and interior
/// Gauss–Lobatto points.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// `(t, errors)` in increasing time.
    pub samples: Vec<(f64, FieldErrors)>,
    /// Componentwise maximum over all samples.
    pub linf: FieldErrors,
    /// Componentwise maximum over slab endpoints only.
    pub linf_endpoints: FieldErrors,
    /// `L²` in time by the Gauss–Lobatto rule of each slab.
    pub l2_time: FieldErrors,
}

pub fn error_norms(disc: &Discretization, traj: &Trajectory, exact: &dyn ExactFields) -> ErrorReport {
    let grid = traj.grid;
    let gl = gauss_lobatto_rule(traj.k).expect("order validated by the trajectory");
    let mut samples = Vec::new();
    let mut linf = FieldErrors::default();
    let mut linf_end = FieldErrors::default();
    let mut l2 = [0.0; 15];
    let e0 = field_errors(disc, &traj.endpoints[0], exact, 0.0);
    samples.push((0.0, e0));
    linf = linf.max(&e0);
    linf_end = linf_end.max(&e0);
    let mut prev = e0;
    for n in 1..=grid.slabs {
        let slab = grid.slab(n);
        let mut slab_errs = vec![prev];
        for (i, &s) in gl.nodes.iter().enumerate().skip(1) {
            let t = slab.to_physical(s);
            let err = if i == gl.nodes.len() - 1 {
                let e = field_errors(disc, &traj.endpoints[n], exact, grid.t(n));
                linf_end = linf_end.max(&e);
                prev = e;
                e
            } else {
                field_errors(disc, &traj.value_in_slab(n, t), exact, t)
            };
            linf = linf.max(&err);
            samples.push((if i == gl.nodes.len() - 1 { grid.t(n) } else { t }, err));
            slab_errs.push(err);
        }
        for (e, &w) in slab_errs.iter().zip(&gl.weights) {
            for (acc, v) in l2.iter_mut().zip(e.to_array()) {
                *acc += slab.tau * w * v * v;
            }
        }
    }
    ErrorReport {
        samples,
        linf,
        linf_endpoints: linf_end,
        l2_time: FieldErrors::from_array(l2.map(f64::sqrt)),
    }
}
