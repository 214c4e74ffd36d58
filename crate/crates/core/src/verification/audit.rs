//! Pointwise-in-time check of the discrete mass balance.

use crate::assembly::form_degree;
use crate::error::Result;
use crate::fem_spaces::TriangleRule;
use crate::linalg::LuFactorization;
use crate::slab_solver::{remove_mean, Discretization, SlabState, Sources, Trajectory};
use crate::time_basis::{gauss_rule, LagrangeBasis, NodeFamily};
use std::sync::Arc;

/// Largest relative residual of
/// `s0 ∂t p + α div ∂t u + div w − Π_h Q` over all slabs and Gauss points,
/// with the mean of `Π_h Q` removed.
#[derive(Debug, Clone, PartialEq)]
pub struct MassAudit {
    pub max_relative: f64,
    /// `(slab, gauss point, relative residual)` of the worst sample.
    pub worst: (usize, usize, f64),
    pub samples: usize,
}

impl MassAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_relative <= tol
    }
}

pub fn mass_conservation_audit(disc: &Discretization, traj: &Trajectory, sources: &dyn Sources) -> Result<MassAudit> {
    let k = traj.k;
    let grid = traj.grid;
    let gauss = gauss_rule(k)?;
    let gl = LagrangeBasis::new(NodeFamily::GaussLobatto, k)?;
    let mp = LuFactorization::new(Arc::new(disc.p_mass.clone()))?;
    let pr = &disc.params;
    let u_space = &disc.u_space;
    let p_space = &disc.p_space;
    let mesh = &*disc.mesh;
    let rule = TriangleRule::new(form_degree(u_space).max(form_degree(p_space)) + 2);
    let rv: Vec<_> = rule.points.iter().map(|&p| u_space.reference().eval_vector(p)).collect();
    let rs: Vec<_> = rule.points.iter().map(|&p| p_space.reference().eval_scalar(p)).collect();

    let mut audit = MassAudit {
        max_relative: 0.0,
        worst: (0, 0, 0.0),
        samples: 0,
    };
    for n in 1..=grid.slabs {
        let slab = grid.slab(n);
        let q_loads: Vec<Vec<f64>> = gl
            .nodes
            .iter()
            .map(|&s| sources.loads(disc, slab.to_physical(s)).map(|l| l.q))
            .collect::<Result<_>>()?;
        for (m, &s) in gauss.nodes.iter().enumerate() {
            let t = slab.to_physical(s);
            let dstate: SlabState = traj.derivative_in_slab(n, t);
            let state = traj.value_in_slab(n, t);
            let weights = gl.eval_all(s);
            let mut load = vec![0.0; p_space.n_dofs()];
            for (ql, w) in q_loads.iter().zip(&weights) {
                load.iter_mut().zip(ql).for_each(|(a, b)| *a += w * b);
            }
            // The pressure lives in L²₀, so the balance holds modulo
            // constants; quadrature leaves ∫Q_h slightly off zero.
            let mut q_h = mp.solve(&load)?;
            remove_mean(disc, &mut q_h);

            // Squared L² norms of the residual and each of its terms.
            let mut acc = [0.0f64; 5];
            for c in 0..mesh.num_cells() {
                let det = mesh.affine_map(c).det;
                for ((r_v, r_s), &wq) in rv.iter().zip(&rs).zip(&rule.weights) {
                    let phi = u_space.map_vector_values(c, r_v);
                    let mut div_du = 0.0;
                    let mut div_w = 0.0;
                    for (v, &(g, _)) in phi.iter().zip(u_space.cell_dofs(c)) {
                        div_du += dstate.u[g] * v.div;
                        div_w += state.w[g] * v.div;
                    }
                    let mut dp = 0.0;
                    let mut q = 0.0;
                    for (sv, &(g, _)) in r_s.iter().zip(p_space.cell_dofs(c)) {
                        dp += dstate.p[g] * sv.val;
                        q += q_h[g] * sv.val;
                    }
                    let terms = [pr.s0 * dp, pr.alpha * div_du, div_w, q];
                    let r = terms[0] + terms[1] + terms[2] - terms[3];
                    let w = wq * det;
                    acc[0] += w * r * r;
                    for (a, t) in acc[1..].iter_mut().zip(terms) {
                        *a += w * t * t;
                    }
                }
            }
            let scale = acc[1..].iter().cloned().fold(0.0, f64::max).sqrt();
            let rel = if scale > 0.0 { acc[0].sqrt() / scale } else { 0.0 };
            audit.samples += 1;
            if rel > audit.max_relative {
                audit.max_relative = rel;
                audit.worst = (n, m, rel);
            }
        }
    }
    Ok(audit)
}
