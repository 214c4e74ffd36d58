//! Reference-element bases for BDM_r (vector) and discontinuous P_l (scalar).

use crate::error::{domain, Result};
use crate::linalg::invert_dense;
use crate::mesh::Point;
use crate::time_basis::gauss_legendre;

use super::quadrature::TriangleRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Bdm,
    Dgp,
}

/// Exponents of the monomials spanning `P_degree`, by total degree.
fn monomial_exponents(degree: usize) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for d in 0..=degree as i32 {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Value, gradient and Hessian of `x^a y^b`.
fn monomial(a: i32, b: i32, p: Point) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let pw = |x: f64, n: i32| if n < 0 { 0.0 } else { x.powi(n) };
    let (x, y) = (p[0], p[1]);
    let (fa, fb) = (a as f64, b as f64);
    let v = pw(x, a) * pw(y, b);
    let dx = fa * pw(x, a - 1) * pw(y, b);
    let dy = fb * pw(x, a) * pw(y, b - 1);
    let dxx = fa * (fa - 1.0) * pw(x, a - 2) * pw(y, b);
    let dxy = fa * fb * pw(x, a - 1) * pw(y, b - 1);
    let dyy = fb * (fb - 1.0) * pw(x, a) * pw(y, b - 2);
    (v, [dx, dy], [[dxx, dxy], [dxy, dyy]])
}

/// A vector basis function tabulated at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VectorValue {
    pub val: [f64; 2],
    /// `grad[r][c] = ∂v_r/∂x_c`.
    pub grad: [[f64; 2]; 2],
    pub div: f64,
    /// `hess[r][a][b] = ∂²v_r/∂x_a∂x_b`.
    pub hess: [[[f64; 2]; 2]; 2],
}

/// A scalar basis function tabulated at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScalarValue {
    pub val: f64,
    pub grad: [f64; 2],
}

/// Unnormalized outward normal of reference edge `i` traversed
/// counter-clockwise.
pub fn reference_edge(i: usize) -> (Point, Point) {
    const V: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    (V[(i + 1) % 3], V[(i + 2) % 3])
}

pub fn reference_edge_normal(i: usize) -> Point {
    let (a, b) = reference_edge(i);
    [b[1] - a[1], -(b[0] - a[0])]
}

/// A reference element with its dual basis in monomial coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    pub family: Family,
    pub degree: usize,
    exps: Vec<(i32, i32)>,
    /// `coeffs[m][k]`: coefficient of monomial `m` in basis function `k`.
    coeffs: Vec<Vec<f64>>,
    /// Gauss points on `[0, 1]` carrying the edge DOFs (BDM only).
    pub edge_points: Vec<f64>,
    pub edge_weights: Vec<f64>,
}

pub fn reference_element(family: Family, degree: usize) -> Result<ReferenceElement> {
    match family {
        Family::Bdm => bdm(degree),
        Family::Dgp => dgp(degree),
    }
}

fn dgp(degree: usize) -> Result<ReferenceElement> {
    if degree > 1 {
        return Err(domain(format!("discontinuous P_l supports l in {{0, 1}}, got {degree}")));
    }
    let exps = monomial_exponents(degree);
    let n = exps.len();
    let coeffs = (0..n).map(|m| (0..n).map(|k| f64::from(u8::from(m == k))).collect()).collect();
    Ok(ReferenceElement {
        family: Family::Dgp,
        degree,
        exps,
        coeffs,
        edge_points: Vec::new(),
        edge_weights: Vec::new(),
    })
}

fn bdm(r: usize) -> Result<ReferenceElement> {
    if !(1..=2).contains(&r) {
        return Err(domain(format!("BDM_r supports r in {{1, 2}}, got {r}")));
    }
    let exps = monomial_exponents(r);
    let nm = exps.len();
    let dim = 2 * nm;
    let (edge_points, edge_weights) = gauss_legendre(r + 1);
    let mono_vec = |m: usize, p: Point| -> Point {
        let (v, _, _) = monomial(exps[m % nm].0, exps[m % nm].1, p);
        if m < nm {
            [v, 0.0]
        } else {
            [0.0, v]
        }
    };

    let mut dofs = vec![vec![0.0; dim]; dim];
    let mut row = 0;
    for i in 0..3 {
        let (a, b) = reference_edge(i);
        let nu = reference_edge_normal(i);
        for &s in &edge_points {
            let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
            for (m, d) in dofs[row].iter_mut().enumerate() {
                let v = mono_vec(m, p);
                *d = v[0] * nu[0] + v[1] * nu[1];
            }
            row += 1;
        }
    }
    if r == 2 {
        let rule = TriangleRule::new(4);
        // e_x, e_y, and curl of the cubic bubble x y (1 - x - y).
        let tests = |p: Point| -> [Point; 3] {
            let (x, y) = (p[0], p[1]);
            let bx = y * (1.0 - 2.0 * x - y);
            let by = x * (1.0 - x - 2.0 * y);
            [[1.0, 0.0], [0.0, 1.0], [by, -bx]]
        };
        for t in 0..3 {
            for m in 0..dim {
                dofs[row + t][m] = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&p, w)| {
                        let v = mono_vec(m, p);
                        let q = tests(p)[t];
                        w * (v[0] * q[0] + v[1] * q[1])
                    })
                    .sum();
            }
        }
    }
    let coeffs = invert_dense(&dofs)?;
    Ok(ReferenceElement {
        family: Family::Bdm,
        degree: r,
        exps,
        coeffs,
        edge_points,
        edge_weights,
    })
}

impl ReferenceElement {
    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    /// Edge DOFs per edge (BDM only).
    pub fn dofs_per_edge(&self) -> usize {
        match self.family {
            Family::Bdm => self.degree + 1,
            Family::Dgp => 0,
        }
    }

    pub fn interior_dofs(&self) -> usize {
        self.dim() - 3 * self.dofs_per_edge()
    }

    pub fn eval_vector(&self, p: Point) -> Vec<VectorValue> {
        assert_eq!(self.family, Family::Bdm);
        let nm = self.exps.len();
        let mut out = vec![VectorValue::default(); self.dim()];
        for (m, &(a, b)) in self.exps.iter().enumerate() {
            let (v, g, h) = monomial(a, b, p);
            for comp in 0..2 {
                let row = &self.coeffs[comp * nm + m];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = row[k];
                    if c == 0.0 {
                        continue;
                    }
                    o.val[comp] += c * v;
                    o.grad[comp][0] += c * g[0];
                    o.grad[comp][1] += c * g[1];
                    for x in 0..2 {
                        for y in 0..2 {
                            o.hess[comp][x][y] += c * h[x][y];
                        }
                    }
                }
            }
        }
        for o in &mut out {
            o.div = o.grad[0][0] + o.grad[1][1];
        }
        out
    }

    pub fn eval_scalar(&self, p: Point) -> Vec<ScalarValue> {
        assert_eq!(self.family, Family::Dgp);
        let mut out = vec![ScalarValue::default(); self.dim()];
        for (m, &(a, b)) in self.exps.iter().enumerate() {
            let (v, g, _) = monomial(a, b, p);
            for (k, o) in out.iter_mut().enumerate() {
                let c = self.coeffs[m][k];
                o.val += c * v;
                o.grad[0] += c * g[0];
                o.grad[1] += c * g[1];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_rank;

    #[test]
    fn dimensions() {
        assert_eq!(reference_element(Family::Bdm, 1).unwrap().dim(), 6);
        assert_eq!(reference_element(Family::Bdm, 2).unwrap().dim(), 12);
        assert_eq!(reference_element(Family::Dgp, 0).unwrap().dim(), 1);
        assert_eq!(reference_element(Family::Dgp, 1).unwrap().dim(), 3);
        assert!(reference_element(Family::Bdm, 3).is_err());
        assert!(reference_element(Family::Bdm, 0).is_err());
        assert!(reference_element(Family::Dgp, 2).is_err());
    }

    #[test]
    fn dof_matrix_full_rank() {
        for r in 1..=2 {
            let e = reference_element(Family::Bdm, r).unwrap();
            let inv = invert_dense(&e.coeffs).unwrap();
            assert_eq!(dense_rank(&inv, 1e-12), (r + 1) * (r + 2));
        }
    }

    #[test]
    fn edge_dofs_are_dual() {
        for r in 1..=2 {
            let e = reference_element(Family::Bdm, r).unwrap();
            for i in 0..3 {
                let (a, b) = reference_edge(i);
                let nu = reference_edge_normal(i);
                for (j, &s) in e.edge_points.iter().enumerate() {
                    let p = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                    let vals = e.eval_vector(p);
                    for (k, v) in vals.iter().enumerate() {
                        let got = v.val[0] * nu[0] + v.val[1] * nu[1];
                        let want = f64::from(u8::from(k == i * (r + 1) + j));
                        assert!((got - want).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn bdm1_divergence_constant() {
        let e = reference_element(Family::Bdm, 1).unwrap();
        let pts = [[0.2, 0.2], [0.6, 0.1], [0.1, 0.7]];
        let divs: Vec<Vec<f64>> = pts.iter().map(|&p| e.eval_vector(p).iter().map(|v| v.div).collect()).collect();
        for k in 0..6 {
            assert!((divs[0][k] - divs[1][k]).abs() < 1e-12);
            assert!((divs[0][k] - divs[2][k]).abs() < 1e-12);
        }
    }

    #[test]
    fn dgp_basis_is_monomial() {
        let e = reference_element(Family::Dgp, 1).unwrap();
        let v = e.eval_scalar([0.3, 0.4]);
        assert_eq!([v[0].val, v[1].val, v[2].val], [1.0, 0.3, 0.4]);
    }
}
