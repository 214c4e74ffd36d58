//! Global degree-of-freedom maps, the contravariant Piola map, pointwise
//! evaluation and interpolation.

use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::linalg::solve_dense;
use crate::mesh::{AffineMap, Mesh, Point};
use crate::time_basis::gauss_legendre;

use super::quadrature::TriangleRule;
use super::reference::{reference_element, Family, ReferenceElement, ScalarValue, VectorValue};

/// Strong boundary treatment of a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    None,
    /// Edge DOFs on the boundary are constrained to zero (`v·n = 0`).
    ZeroNormalTrace,
}

/// Row-major Jacobian and inverse of an affine cell map.
fn matrices(map: &AffineMap) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let j = [[map.jac[0][0], map.jac[1][0]], [map.jac[0][1], map.jac[1][1]]];
    let ji = [[map.inv[0][0], map.inv[1][0]], [map.inv[0][1], map.inv[1][1]]];
    (j, ji)
}

fn piola_unchecked(j: &[[f64; 2]; 2], ji: &[[f64; 2]; 2], det: f64, v: &VectorValue) -> VectorValue {
    let mut out = VectorValue {
        div: v.div / det,
        ..VectorValue::default()
    };
    for r in 0..2 {
        for s in 0..2 {
            out.val[r] += j[r][s] * v.val[s] / det;
        }
        for c in 0..2 {
            let mut g = 0.0;
            for s in 0..2 {
                for t in 0..2 {
                    g += j[r][s] * v.grad[s][t] * ji[t][c];
                }
            }
            out.grad[r][c] = g / det;
        }
        for a in 0..2 {
            for b in 0..2 {
                let mut h = 0.0;
                for s in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            h += j[r][s] * v.hess[s][c][d] * ji[c][a] * ji[d][b];
                        }
                    }
                }
                out.hess[r][a][b] = h / det;
            }
        }
    }
    out
}

/// Contravariant Piola transform `v = J v̂ / det J` with derivatives.
pub fn piola_map(map: &AffineMap, v: &VectorValue) -> Result<VectorValue> {
    if !(map.det > 0.0) {
        return Err(Error::Geometry(format!("non-positive Jacobian determinant {}", map.det)));
    }
    let (j, ji) = matrices(map);
    Ok(piola_unchecked(&j, &ji, map.det, v))
}

fn scalar_to_physical(ji: &[[f64; 2]; 2], v: &ScalarValue) -> ScalarValue {
    ScalarValue {
        val: v.val,
        grad: [
            v.grad[0] * ji[0][0] + v.grad[1] * ji[1][0],
            v.grad[0] * ji[0][1] + v.grad[1] * ji[1][1],
        ],
    }
}

/// A global finite element space on a mesh.
#[derive(Debug, Clone)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    reference: ReferenceElement,
    /// `cell_dofs[c][k] = (global dof, sign)` for reference basis `k`.
    cell_dofs: Vec<Vec<(usize, f64)>>,
    constrained: Vec<bool>,
}

pub fn build_space(
    mesh: Arc<Mesh>,
    family: Family,
    degree: usize,
    bc: BoundaryCondition,
) -> Result<FunctionSpace> {
    let reference = reference_element(family, degree)?;
    let dim = reference.dim();
    let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
    let n_dofs;
    let mut constrained;
    match family {
        Family::Dgp => {
            for c in 0..mesh.num_cells() {
                cell_dofs.push((0..dim).map(|k| (c * dim + k, 1.0)).collect());
            }
            n_dofs = mesh.num_cells() * dim;
            constrained = vec![false; n_dofs];
        }
        Family::Bdm => {
            let npe = reference.dofs_per_edge();
            let nint = reference.interior_dofs();
            let edge_total = mesh.num_edges() * npe;
            n_dofs = edge_total + mesh.num_cells() * nint;
            for c in 0..mesh.num_cells() {
                let mut dofs = Vec::with_capacity(dim);
                for (i, &e) in mesh.cell_edges(c).iter().enumerate() {
                    let (a, b) = mesh.local_edge_vertices(c, i);
                    for j in 0..npe {
                        dofs.push(if a < b {
                            (e * npe + j, 1.0)
                        } else {
                            (e * npe + (npe - 1 - j), -1.0)
                        });
                    }
                }
                dofs.extend((0..nint).map(|m| (edge_total + c * nint + m, 1.0)));
                cell_dofs.push(dofs);
            }
            constrained = vec![false; n_dofs];
            if bc == BoundaryCondition::ZeroNormalTrace {
                for e in mesh.boundary_edges() {
                    constrained[e * npe..(e + 1) * npe].fill(true);
                }
            }
        }
    }
    Ok(FunctionSpace {
        mesh,
        reference,
        cell_dofs,
        constrained,
    })
}

impl FunctionSpace {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn family(&self) -> Family {
        self.reference.family
    }

    pub fn degree(&self) -> usize {
        self.reference.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.constrained.len()
    }

    pub fn n_free(&self) -> usize {
        self.constrained.iter().filter(|&&c| !c).count()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| !self.constrained[d]).collect()
    }

    pub fn constrained_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| self.constrained[d]).collect()
    }

    pub fn cell_dofs(&self, c: usize) -> &[(usize, f64)] {
        &self.cell_dofs[c]
    }

    /// Physical basis functions of cell `c` at reference point `xh`, signs
    /// included.
    pub fn tabulate_vector(&self, c: usize, xh: Point) -> Vec<VectorValue> {
        self.map_vector_values(c, &self.reference.eval_vector(xh))
    }

    /// Maps reference values tabulated at one point to the physical basis of
    /// cell `c`.
    pub fn map_vector_values(&self, c: usize, reference: &[VectorValue]) -> Vec<VectorValue> {
        let map = self.mesh.affine_map(c);
        let (j, ji) = matrices(&map);
        reference
            .iter()
            .zip(&self.cell_dofs[c])
            .map(|(v, &(_, sign))| {
                let mut p = piola_unchecked(&j, &ji, map.det, v);
                scale_vector(&mut p, sign);
                p
            })
            .collect()
    }

    pub fn map_scalar_values(&self, c: usize, reference: &[ScalarValue]) -> Vec<ScalarValue> {
        let map = self.mesh.affine_map(c);
        let (_, ji) = matrices(&map);
        reference.iter().map(|v| scalar_to_physical(&ji, v)).collect()
    }

    pub fn tabulate_scalar(&self, c: usize, xh: Point) -> Vec<ScalarValue> {
        self.map_scalar_values(c, &self.reference.eval_scalar(xh))
    }

    fn locate(&self, c: usize, x: Point) -> Result<Point> {
        if c >= self.mesh.num_cells() {
            return Err(domain(format!("cell {c} out of range")));
        }
        let xh = self.mesh.affine_map(c).to_reference(x);
        const TOL: f64 = 1e-10;
        if xh[0] < -TOL || xh[1] < -TOL || xh[0] + xh[1] > 1.0 + TOL {
            return Err(domain(format!("point {x:?} lies outside cell {c}")));
        }
        Ok(xh)
    }

    pub fn eval_vector_ref(&self, coeffs: &[f64], c: usize, xh: Point) -> VectorValue {
        let mut out = VectorValue::default();
        for (v, &(g, _)) in self.tabulate_vector(c, xh).iter().zip(&self.cell_dofs[c]) {
            add_scaled_vector(&mut out, v, coeffs[g]);
        }
        out
    }

    pub fn eval_scalar_ref(&self, coeffs: &[f64], c: usize, xh: Point) -> ScalarValue {
        let mut out = ScalarValue::default();
        for (v, &(g, _)) in self.tabulate_scalar(c, xh).iter().zip(&self.cell_dofs[c]) {
            out.val += coeffs[g] * v.val;
            out.grad[0] += coeffs[g] * v.grad[0];
            out.grad[1] += coeffs[g] * v.grad[1];
        }
        out
    }

    /// Value, gradient, divergence and Hessian of a vector field at the
    /// physical point `x` inside cell `c`.
    pub fn eval_field_vector(&self, coeffs: &[f64], c: usize, x: Point) -> Result<VectorValue> {
        self.check_len(coeffs)?;
        let xh = self.locate(c, x)?;
        Ok(self.eval_vector_ref(coeffs, c, xh))
    }

    pub fn eval_field_scalar(&self, coeffs: &[f64], c: usize, x: Point) -> Result<ScalarValue> {
        self.check_len(coeffs)?;
        let xh = self.locate(c, x)?;
        Ok(self.eval_scalar_ref(coeffs, c, xh))
    }

    fn check_len(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.n_dofs() {
            return Err(domain(format!(
                "coefficient vector has length {}, space has {} dofs",
                coeffs.len(),
                self.n_dofs()
            )));
        }
        Ok(())
    }

    /// Canonical interpolant: edge normal moments against the Lagrange
    /// polynomials at the edge DOF points, and interior moments of the
    /// pulled-back field.
    pub fn interpolate_vector(&self, f: impl Fn(Point) -> Point) -> Vec<f64> {
        self.interpolate_vector_cellwise(|_, x| f(x))
    }

    /// As [`Self::interpolate_vector`] for fields that are only piecewise
    /// smooth; `f(c, x)` evaluates the restriction to cell `c`. Edge moments
    /// use the lower-index neighbour, so the field's normal trace must be
    /// continuous.
    pub fn interpolate_vector_cellwise(&self, f: impl Fn(usize, Point) -> Point) -> Vec<f64> {
        assert_eq!(self.family(), Family::Bdm);
        let mesh = &*self.mesh;
        let re = &self.reference;
        let npe = re.dofs_per_edge();
        let mut out = vec![0.0; self.n_dofs()];
        let (sq, wq) = gauss_legendre(12);
        let lagrange = |j: usize, s: f64| -> f64 {
            re.edge_points
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &sm)| (s - sm) / (re.edge_points[j] - sm))
                .product()
        };
        for e in 0..mesh.num_edges() {
            let [a, b] = mesh.edge(e);
            let owner = mesh.edge_cells(e).0;
            let (pa, pb) = (mesh.vertex(a), mesh.vertex(b));
            let nu = [pb[1] - pa[1], -(pb[0] - pa[0])];
            for j in 0..npe {
                let moment: f64 = sq
                    .iter()
                    .zip(&wq)
                    .map(|(&s, &w)| {
                        let v = f(owner, [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]);
                        w * (v[0] * nu[0] + v[1] * nu[1]) * lagrange(j, s)
                    })
                    .sum();
                out[e * npe + j] = moment / re.edge_weights[j];
            }
        }
        let nint = re.interior_dofs();
        if nint > 0 {
            let rule = TriangleRule::new(12);
            for c in 0..mesh.num_cells() {
                let map = mesh.affine_map(c);
                let mut local = vec![0.0; re.dim()];
                for (&xh, &w) in rule.points.iter().zip(&rule.weights) {
                    let v = f(c, map.to_physical(xh));
                    let vh = [
                        (map.inv[0][0] * v[0] + map.inv[1][0] * v[1]) * map.det,
                        (map.inv[0][1] * v[0] + map.inv[1][1] * v[1]) * map.det,
                    ];
                    let (x, y) = (xh[0], xh[1]);
                    let tests = [
                        [1.0, 0.0],
                        [0.0, 1.0],
                        [x * (1.0 - x - 2.0 * y), -y * (1.0 - 2.0 * x - y)],
                    ];
                    for (m, t) in tests.iter().enumerate() {
                        local[m] += w * (vh[0] * t[0] + vh[1] * t[1]);
                    }
                }
                for m in 0..nint {
                    out[self.cell_dofs[c][3 * npe + m].0] = local[m];
                }
            }
        }
        out
    }

    /// Cellwise L² projection of a scalar function.
    pub fn interpolate_scalar(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.interpolate_scalar_cellwise(|_, x| f(x))
    }

    pub fn interpolate_scalar_cellwise(&self, f: impl Fn(usize, Point) -> f64) -> Vec<f64> {
        assert_eq!(self.family(), Family::Dgp);
        let rule = TriangleRule::new(12);
        let dim = self.reference.dim();
        let mut out = vec![0.0; self.n_dofs()];
        for c in 0..self.mesh.num_cells() {
            let map = self.mesh.affine_map(c);
            let mut m = vec![vec![0.0; dim]; dim];
            let mut rhs = vec![0.0; dim];
            for (&xh, &w) in rule.points.iter().zip(&rule.weights) {
                let phi = self.reference.eval_scalar(xh);
                let fv = f(c, map.to_physical(xh));
                for i in 0..dim {
                    rhs[i] += w * fv * phi[i].val;
                    for j in 0..dim {
                        m[i][j] += w * phi[i].val * phi[j].val;
                    }
                }
            }
            let local = solve_dense(&m, &rhs).expect("modal mass matrix is nonsingular");
            for (k, &(g, _)) in self.cell_dofs[c].iter().enumerate() {
                out[g] = local[k];
            }
        }
        out
    }

    /// Zeroes the constrained entries of `coeffs`.
    pub fn apply_constraints(&self, coeffs: &mut [f64]) {
        for (v, &c) in coeffs.iter_mut().zip(&self.constrained) {
            if c {
                *v = 0.0;
            }
        }
    }
}

pub(crate) fn scale_vector(v: &mut VectorValue, s: f64) {
    if s == 1.0 {
        return;
    }
    v.val.iter_mut().for_each(|x| *x *= s);
    v.grad.iter_mut().flatten().for_each(|x| *x *= s);
    v.hess.iter_mut().flatten().flatten().for_each(|x| *x *= s);
    v.div *= s;
}

pub(crate) fn add_scaled_vector(out: &mut VectorValue, v: &VectorValue, s: f64) {
    for r in 0..2 {
        out.val[r] += s * v.val[r];
        for c in 0..2 {
            out.grad[r][c] += s * v.grad[r][c];
            for d in 0..2 {
                out.hess[r][c][d] += s * v.hess[r][c][d];
            }
        }
    }
    out.div += s * v.div;
}
