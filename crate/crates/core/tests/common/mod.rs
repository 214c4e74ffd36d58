#![allow(dead_code)]

use biot_core::assembly::PhysicalParams;
use biot_core::mesh::Mesh;
use proptest::prelude::*;

/// Uniform mesh of the unit square with interior vertices moved by up to
/// `shift * h` in each direction.
pub fn jiggled_square(n: usize, shift: f64, offsets: &[(f64, f64)]) -> Mesh {
    let base = Mesh::unit_square(n).unwrap();
    let h = 1.0 / n as f64;
    let on_boundary = |x: f64| x.abs() < 1e-12 || (x - 1.0).abs() < 1e-12;
    let vertices = base
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, &[x, y])| {
            if on_boundary(x) || on_boundary(y) {
                [x, y]
            } else {
                let (dx, dy) = offsets[i % offsets.len()];
                [x + shift * h * dx, y + shift * h * dy]
            }
        })
        .collect();
    Mesh::from_cells(vertices, base.cells().to_vec()).unwrap()
}

pub fn offsets() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..16)
}

/// Admissible material parameters.
pub fn params(ell: usize) -> impl Strategy<Value = PhysicalParams> {
    (
        (0.5..4.0f64, 0.5..2.0f64, 0.2..0.8f64, 1.0..2.0f64),
        (0.0..1.0f64, 0.05..2.0f64, 0.1..5.0f64, 0.2..3.0f64),
        (0.2..3.0f64, 0.2..3.0f64, -0.9..0.9f64),
    )
        .prop_map(move |((rho_s, rho_f, phi0, wf), (af, s0, lambda, mu), (kx, ky, kc))| {
            let kxy = kc * (kx * ky).sqrt();
            PhysicalParams {
                rho_s,
                rho_f,
                phi0,
                rho_w: wf * rho_f / phi0,
                alpha: phi0 + af * (1.0 - phi0),
                s0,
                lambda,
                mu,
                permeability: [[kx, kxy], [kxy, ky]],
                eta: biot_core::assembly::default_eta(ell),
            }
        })
        .prop_filter("admissible", |p| p.validate().is_ok())
}
