mod common;

use std::sync::Arc;

use biot_core::assembly::PhysicalParams;
use biot_core::fem_spaces::TriangleRule;
use biot_core::linalg::{lu_solve, LinearSystem};
use biot_core::slab_solver::Discretization;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random BDM fields have continuous normal traces on distorted meshes.
    #[test]
    fn normal_trace_continuous(
        n in 2..4usize,
        ell in 0..=1usize,
        off in common::offsets(),
        c in prop::collection::vec(-1.0..1.0f64, 400),
    ) {
        let mesh = Arc::new(common::jiggled_square(n, 0.3, &off));
        let disc = Discretization::new(mesh.clone(), ell, PhysicalParams::default()).unwrap();
        let s = &disc.u_space;
        let coeffs: Vec<f64> = (0..s.n_dofs()).map(|i| c[i % c.len()]).collect();
        for e in 0..mesh.num_edges() {
            let (c1, Some(c2)) = mesh.edge_cells(e) else { continue };
            let nrm = mesh.edge_normal(e);
            let [a, b] = mesh.edge(e);
            let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
            for t in [0.13, 0.5, 0.91] {
                let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let v1 = s.eval_field_vector(&coeffs, c1, x).unwrap().val;
                let v2 = s.eval_field_vector(&coeffs, c2, x).unwrap().val;
                let jump = (v1[0] - v2[0]) * nrm[0] + (v1[1] - v2[1]) * nrm[1];
                prop_assert!(jump.abs() < 1e-10, "edge {e} jump {jump:e}");
            }
        }
    }

    /// The divergence of a BDM field lies in the pressure space, so its
    /// `L²` projection reproduces it pointwise.
    #[test]
    fn divergence_in_pressure_space(
        n in 2..4usize,
        ell in 0..=1usize,
        off in common::offsets(),
        c in prop::collection::vec(-1.0..1.0f64, 400),
    ) {
        let mesh = Arc::new(common::jiggled_square(n, 0.3, &off));
        let disc = Discretization::new(mesh.clone(), ell, PhysicalParams::default()).unwrap();
        let s = &disc.u_space;
        let coeffs: Vec<f64> = (0..s.n_dofs()).map(|i| c[i % c.len()]).collect();
        let bt = disc.div_t.matvec(&coeffs);
        let proj = lu_solve(&LinearSystem::new(Arc::new(disc.p_mass.clone()), bt).unwrap()).unwrap();
        let rule = TriangleRule::new(2 * (ell + 2));
        for cell in 0..mesh.num_cells() {
            for &xh in &rule.points {
                let d = s.eval_vector_ref(&coeffs, cell, xh).div;
                let p = disc.p_space.eval_scalar_ref(&proj, cell, xh).val;
                prop_assert!((d - p).abs() < 1e-9 * (1.0 + d.abs()));
            }
        }
    }

    /// `div Π_V q = Π_Q div q` for the canonical interpolants.
    #[test]
    fn interpolation_commutes_with_div(
        n in 2..4usize,
        ell in 0..=1usize,
        off in common::offsets(),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
    ) {
        let mesh = Arc::new(common::jiggled_square(n, 0.3, &off));
        let disc = Discretization::new(mesh.clone(), ell, PhysicalParams::default()).unwrap();
        let q = |x: [f64; 2]| [(a * x[0] + x[1]).sin(), (b * x[1]).cos() * x[0]];
        let div_q = |x: [f64; 2]| a * (a * x[0] + x[1]).cos() - b * (b * x[1]).sin() * x[0];
        let w = disc.u_space.interpolate_vector(q);
        let pd = disc.p_space.interpolate_scalar(div_q);
        let rule = TriangleRule::new(2 * (ell + 2));
        for cell in 0..mesh.num_cells() {
            for &xh in &rule.points {
                let d = disc.u_space.eval_vector_ref(&w, cell, xh).div;
                let p = disc.p_space.eval_scalar_ref(&pd, cell, xh).val;
                prop_assert!((d - p).abs() < 1e-9, "defect {:e}", (d - p).abs());
            }
        }
    }
}
