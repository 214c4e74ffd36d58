//! Spatial matrices and load vectors: the interior-penalty elasticity form,
//! divergence couplings, weighted mass matrices and source loads.

use crate::error::{domain, Error, Result};
use crate::fem_spaces::{EdgeRule, Family, FunctionSpace, ScalarValue, TriangleRule, VectorValue};
use crate::mesh::Point;

pub use crate::linalg::SparseMatrix;

/// Coefficients of the dynamic Biot system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub rho_s: f64,
    pub rho_f: f64,
    pub phi0: f64,
    pub rho_w: f64,
    pub alpha: f64,
    pub s0: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Symmetric positive definite permeability tensor.
    pub permeability: [[f64; 2]; 2],
    /// Interior penalty parameter.
    pub eta: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            rho_s: 2.0,
            rho_f: 1.0,
            phi0: 0.5,
            rho_w: 2.0,
            alpha: 0.8,
            s0: 1.0,
            lambda: 1.0,
            mu: 1.0,
            permeability: [[1.0, 0.0], [0.0, 1.0]],
            eta: 4.0,
        }
    }
}

/// Default penalty for pressure degree `ell`.
pub fn default_eta(ell: usize) -> f64 {
    let l = ell as f64 + 1.0;
    4.0 * l * l
}

fn check_spd(k: &[[f64; 2]; 2], name: &str) -> Result<()> {
    let scale = k[0][0].abs().max(k[1][1].abs()).max(k[0][1].abs());
    let symmetric = (k[0][1] - k[1][0]).abs() <= 1e-14 * scale;
    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    if !symmetric || !(k[0][0] > 0.0) || !(det > 0.0) || !det.is_finite() {
        return Err(domain(format!("{name} must be symmetric positive definite")));
    }
    Ok(())
}

fn inverse2(k: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    [[k[1][1] / det, -k[0][1] / det], [-k[1][0] / det, k[0][0] / det]]
}

impl PhysicalParams {
    pub fn rho_bar(&self) -> f64 {
        (1.0 - self.phi0) * self.rho_s + self.phi0 * self.rho_f
    }

    pub fn permeability_inverse(&self) -> [[f64; 2]; 2] {
        inverse2(&self.permeability)
    }

    /// Checks every parameter bound; messages name the offending key.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho_s", self.rho_s),
            ("rho_f", self.rho_f),
            ("s0", self.s0),
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("eta", self.eta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive and finite")));
            }
        }
        if !(self.phi0 > 0.0 && self.phi0 < 1.0) {
            return Err(domain("phi0 must lie in (0, 1)"));
        }
        if !(self.rho_w >= self.rho_f / self.phi0) || !self.rho_w.is_finite() {
            return Err(domain("rho_w must be at least rho_f / phi0"));
        }
        if !(self.alpha >= self.phi0 && self.alpha <= 1.0) {
            return Err(domain("alpha must lie in [phi0, 1]"));
        }
        check_spd(&self.permeability, "permeability")?;
        if !(self.rho_bar() * self.rho_w - self.rho_f * self.rho_f > 0.0) {
            return Err(domain("density matrix must be positive definite"));
        }
        Ok(())
    }
}

/// Weight of a mass matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassWeight {
    Scalar(f64),
    /// Tensor weight for vector spaces: `∫ (W φ_j)·φ_i`.
    Tensor([[f64; 2]; 2]),
}

/// Quadrature degree that integrates every bilinear form exactly.
pub fn form_degree(space: &FunctionSpace) -> usize {
    match space.family() {
        Family::Bdm => 2 * (space.degree() + 1),
        Family::Dgp => 2 * (space.degree() + 2),
    }
}

struct Triplets {
    rows: usize,
    cols: usize,
    data: Vec<(usize, usize, f64)>,
}

impl Triplets {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: Vec::new(),
        }
    }

    fn add_local(&mut self, rows: &[(usize, f64)], cols: &[(usize, f64)], local: &[Vec<f64>]) {
        for (a, &(gi, _)) in rows.iter().enumerate() {
            for (b, &(gj, _)) in cols.iter().enumerate() {
                if local[a][b] != 0.0 {
                    self.data.push((gi, gj, local[a][b]));
                }
            }
        }
    }

    fn finish(self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.rows, self.cols, self.data)
    }
}

fn strain(v: &VectorValue) -> [[f64; 2]; 2] {
    let off = 0.5 * (v.grad[0][1] + v.grad[1][0]);
    [[v.grad[0][0], off], [off, v.grad[1][1]]]
}

fn contract(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    a[0][0] * b[0][0] + 2.0 * a[0][1] * b[0][1] + a[1][1] * b[1][1]
}

fn tangential(z: Point, n: Point) -> Point {
    let d = z[0] * n[0] + z[1] * n[1];
    [z[0] - d * n[0], z[1] - d * n[1]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn mat_vec(m: &[[f64; 2]; 2], v: Point) -> Point {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn require_family(space: &FunctionSpace, family: Family, what: &str) -> Result<()> {
    if space.family() != family {
        return Err(Error::Assembly(format!("{what} expects a {family:?} space")));
    }
    Ok(())
}

/// The interior-penalty form
/// `2μ(ε(u), ε(φ)) + λ(div u, div φ) − 2μ⟨{ε(u)}, [φ_t]⟩ − 2μ⟨{ε(φ)}, [u_t]⟩
/// \+ 2μη h_e⁻¹⟨[u_t], [φ_t]⟩` summed over cells and all edges, boundary
/// edges included with one-sided traces.
pub fn assemble_elasticity(space: &FunctionSpace, mu: f64, lambda: f64, eta: f64) -> Result<SparseMatrix> {
    require_family(space, Family::Bdm, "assemble_elasticity")?;
    if !(eta > 0.0) {
        return Err(domain("eta must be positive"));
    }
    let mesh = space.mesh();
    let n = space.n_dofs();
    let dim = space.reference().dim();
    let mut trip = Triplets::new(n, n);
    let rule = TriangleRule::new(form_degree(space));
    let ref_vals: Vec<Vec<VectorValue>> = rule.points.iter().map(|&p| space.reference().eval_vector(p)).collect();

    for c in 0..mesh.num_cells() {
        let det = mesh.affine_map(c).det;
        let mut local = vec![vec![0.0; dim]; dim];
        for (rv, &w) in ref_vals.iter().zip(&rule.weights) {
            let phi = space.map_vector_values(c, rv);
            let eps: Vec<_> = phi.iter().map(strain).collect();
            let wd = w * det;
            for a in 0..dim {
                for b in 0..dim {
                    local[a][b] += wd * (2.0 * mu * contract(&eps[b], &eps[a]) + lambda * phi[b].div * phi[a].div);
                }
            }
        }
        trip.add_local(space.cell_dofs(c), space.cell_dofs(c), &local);
    }

    let erule = EdgeRule::new(form_degree(space));
    for e in 0..mesh.num_edges() {
        let f = mesh.facet(e);
        let (c1, c2) = mesh.edge_cells(e);
        let [va, vb] = mesh.edge(e);
        let (pa, pb) = (mesh.vertex(va), mesh.vertex(vb));
        let mut dofs: Vec<(usize, f64)> = space.cell_dofs(c1).to_vec();
        if let Some(c2) = c2 {
            dofs.extend_from_slice(space.cell_dofs(c2));
        }
        let m = dofs.len();
        let avg_w = if c2.is_some() { 0.5 } else { 1.0 };
        let mut local = vec![vec![0.0; m]; m];
        for (&s, &w) in erule.points.iter().zip(&erule.weights) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let mut jump = Vec::with_capacity(m);
            let mut avg = Vec::with_capacity(m);
            for (side, cell) in [Some(c1), c2].into_iter().flatten().enumerate() {
                let xh = mesh.affine_map(cell).to_reference(x);
                let sign = if side == 0 { 1.0 } else { -1.0 };
                for v in space.tabulate_vector(cell, xh) {
                    let t = tangential(v.val, f.normal);
                    jump.push([sign * t[0], sign * t[1]]);
                    let en = mat_vec(&strain(&v), f.normal);
                    avg.push([avg_w * en[0], avg_w * en[1]]);
                }
            }
            let wl = w * f.length;
            let pen = 2.0 * mu * eta / f.length;
            for a in 0..m {
                for b in 0..m {
                    local[a][b] += wl
                        * (pen * dot(jump[b], jump[a])
                            - 2.0 * mu * dot(avg[b], jump[a])
                            - 2.0 * mu * dot(avg[a], jump[b]));
                }
            }
        }
        trip.add_local(&dofs, &dofs, &local);
    }
    Ok(trip.finish())
}

/// `a_h(y, φ_i)` for every basis function, with `y` given cellwise as
/// `(value, gradient)`; traces on each side of an edge come from that
/// side's cell.
pub fn elasticity_action(
    space: &FunctionSpace,
    mu: f64,
    lambda: f64,
    eta: f64,
    y: &dyn Fn(usize, Point) -> (Point, [[f64; 2]; 2]),
) -> Result<Vec<f64>> {
    require_family(space, Family::Bdm, "elasticity_action")?;
    let mesh = space.mesh();
    let mut out = vec![0.0; space.n_dofs()];
    let deg = form_degree(space) + 4;
    let rule = TriangleRule::new(deg);
    let ref_vals: Vec<Vec<VectorValue>> = rule.points.iter().map(|&p| space.reference().eval_vector(p)).collect();
    let strain_of = |g: &[[f64; 2]; 2]| {
        let off = 0.5 * (g[0][1] + g[1][0]);
        [[g[0][0], off], [off, g[1][1]]]
    };

    for c in 0..mesh.num_cells() {
        let map = mesh.affine_map(c);
        for ((rv, xh), &w) in ref_vals.iter().zip(&rule.points).zip(&rule.weights) {
            let (_, gy) = y(c, map.to_physical(*xh));
            let ey = strain_of(&gy);
            let div_y = gy[0][0] + gy[1][1];
            let phi = space.map_vector_values(c, rv);
            for (v, &(g, _)) in phi.iter().zip(space.cell_dofs(c)) {
                out[g] += w * map.det * (2.0 * mu * contract(&ey, &strain(v)) + lambda * div_y * v.div);
            }
        }
    }

    let erule = EdgeRule::new(deg);
    for e in 0..mesh.num_edges() {
        let f = mesh.facet(e);
        let (c1, c2) = mesh.edge_cells(e);
        let [va, vb] = mesh.edge(e);
        let (pa, pb) = (mesh.vertex(va), mesh.vertex(vb));
        let avg_w = if c2.is_some() { 0.5 } else { 1.0 };
        for (&s, &w) in erule.points.iter().zip(&erule.weights) {
            let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            let mut jump_y = [0.0; 2];
            let mut avg_y = [0.0; 2];
            let mut tabs = Vec::with_capacity(2);
            for (side, cell) in [Some(c1), c2].into_iter().flatten().enumerate() {
                let sign = if side == 0 { 1.0 } else { -1.0 };
                let (vy, gy) = y(cell, x);
                let t = tangential(vy, f.normal);
                let en = mat_vec(&strain_of(&gy), f.normal);
                for r in 0..2 {
                    jump_y[r] += sign * t[r];
                    avg_y[r] += avg_w * en[r];
                }
                tabs.push((cell, sign, space.tabulate_vector(cell, mesh.affine_map(cell).to_reference(x))));
            }
            let wl = w * f.length;
            let pen = 2.0 * mu * eta / f.length;
            for (cell, sign, vals) in tabs {
                for (v, &(g, _)) in vals.iter().zip(space.cell_dofs(cell)) {
                    let t = tangential(v.val, f.normal);
                    let jump_phi = [sign * t[0], sign * t[1]];
                    let en = mat_vec(&strain(v), f.normal);
                    let avg_phi = [avg_w * en[0], avg_w * en[1]];
                    out[g] += wl
                        * (pen * dot(jump_y, jump_phi) - 2.0 * mu * dot(avg_y, jump_phi) - 2.0 * mu * dot(avg_phi, jump_y));
                }
            }
        }
    }
    Ok(out)
}

/// `B[i, j] = c (q_j, div φ_i)`, rows over the vector space.
pub fn assemble_div_coupling(vector: &FunctionSpace, scalar: &FunctionSpace, c: f64) -> Result<SparseMatrix> {
    require_family(vector, Family::Bdm, "assemble_div_coupling")?;
    require_family(scalar, Family::Dgp, "assemble_div_coupling")?;
    let mesh = vector.mesh();
    let mut trip = Triplets::new(vector.n_dofs(), scalar.n_dofs());
    if c == 0.0 {
        return Ok(trip.finish());
    }
    let rule = TriangleRule::new(form_degree(vector).max(form_degree(scalar)));
    let rv: Vec<Vec<VectorValue>> = rule.points.iter().map(|&p| vector.reference().eval_vector(p)).collect();
    let rs: Vec<Vec<ScalarValue>> = rule.points.iter().map(|&p| scalar.reference().eval_scalar(p)).collect();
    let (nv, ns) = (vector.reference().dim(), scalar.reference().dim());
    for cell in 0..mesh.num_cells() {
        let det = mesh.affine_map(cell).det;
        let mut local = vec![vec![0.0; ns]; nv];
        for ((v, s), &w) in rv.iter().zip(&rs).zip(&rule.weights) {
            let phi = vector.map_vector_values(cell, v);
            for a in 0..nv {
                for b in 0..ns {
                    local[a][b] += c * w * det * phi[a].div * s[b].val;
                }
            }
        }
        trip.add_local(vector.cell_dofs(cell), scalar.cell_dofs(cell), &local);
    }
    Ok(trip.finish())
}

/// Weighted mass matrix of a scalar or vector space.
pub fn assemble_mass(space: &FunctionSpace, weight: MassWeight) -> Result<SparseMatrix> {
    let tensor = match weight {
        MassWeight::Scalar(s) => {
            if !(s > 0.0) {
                return Err(domain("mass weight must be positive"));
            }
            [[s, 0.0], [0.0, s]]
        }
        MassWeight::Tensor(t) => {
            require_family(space, Family::Bdm, "tensor-weighted mass")?;
            check_spd(&t, "mass weight")?;
            t
        }
    };
    cross_mass(space, space, tensor)
}

/// `M[i, j] = ∫ (W ψ_j)·φ_i` between two spaces of the same family on the
/// same mesh.
pub fn cross_mass(rows: &FunctionSpace, cols: &FunctionSpace, weight: [[f64; 2]; 2]) -> Result<SparseMatrix> {
    if rows.family() != cols.family() || !std::sync::Arc::ptr_eq(rows.mesh(), cols.mesh()) {
        return Err(Error::Assembly("cross mass needs one family on one mesh".into()));
    }
    let mesh = rows.mesh();
    let mut trip = Triplets::new(rows.n_dofs(), cols.n_dofs());
    let rule = TriangleRule::new(form_degree(rows).max(form_degree(cols)));
    let (nr, nc) = (rows.reference().dim(), cols.reference().dim());
    match rows.family() {
        Family::Bdm => {
            let rr: Vec<_> = rule.points.iter().map(|&p| rows.reference().eval_vector(p)).collect();
            let rc: Vec<_> = rule.points.iter().map(|&p| cols.reference().eval_vector(p)).collect();
            for c in 0..mesh.num_cells() {
                let det = mesh.affine_map(c).det;
                let mut local = vec![vec![0.0; nc]; nr];
                for ((a_ref, b_ref), &w) in rr.iter().zip(&rc).zip(&rule.weights) {
                    let pa = rows.map_vector_values(c, a_ref);
                    let pb = cols.map_vector_values(c, b_ref);
                    for a in 0..nr {
                        for b in 0..nc {
                            local[a][b] += w * det * dot(mat_vec(&weight, pb[b].val), pa[a].val);
                        }
                    }
                }
                trip.add_local(rows.cell_dofs(c), cols.cell_dofs(c), &local);
            }
        }
        Family::Dgp => {
            let s = weight[0][0];
            let rr: Vec<_> = rule.points.iter().map(|&p| rows.reference().eval_scalar(p)).collect();
            let rc: Vec<_> = rule.points.iter().map(|&p| cols.reference().eval_scalar(p)).collect();
            for c in 0..mesh.num_cells() {
                let det = mesh.affine_map(c).det;
                let mut local = vec![vec![0.0; nc]; nr];
                for ((a_ref, b_ref), &w) in rr.iter().zip(&rc).zip(&rule.weights) {
                    for a in 0..nr {
                        for b in 0..nc {
                            local[a][b] += s * w * det * a_ref[a].val * b_ref[b].val;
                        }
                    }
                }
                trip.add_local(rows.cell_dofs(c), cols.cell_dofs(c), &local);
            }
        }
    }
    Ok(trip.finish())
}

/// Block `[[ρ̄ M_uu, ρ_f M_uw], [ρ_f M_wu, ρ_w M_ww]]` over `(v, w)` DOFs.
pub fn assemble_density_block(u: &FunctionSpace, w: &FunctionSpace, params: &PhysicalParams) -> Result<SparseMatrix> {
    let rb = params.rho_bar();
    if !(rb * params.rho_w - params.rho_f * params.rho_f > 0.0) {
        return Err(domain("density matrix must be positive definite"));
    }
    let id = [[1.0, 0.0], [0.0, 1.0]];
    let nu = u.n_dofs();
    let blocks = [
        (cross_mass(u, u, id)?, 0, 0, rb),
        (cross_mass(u, w, id)?, 0, nu, params.rho_f),
        (cross_mass(w, u, id)?, nu, 0, params.rho_f),
        (cross_mass(w, w, id)?, nu, nu, params.rho_w),
    ];
    let n = nu + w.n_dofs();
    let mut data = Vec::new();
    for (m, r0, c0, s) in &blocks {
        if *s == 0.0 {
            continue;
        }
        data.extend(m.triplets().map(|(i, j, v)| (i + r0, j + c0, v * s)));
    }
    Ok(SparseMatrix::from_triplets(n, n, data))
}

/// `∫ f·φ_i` for a vector source.
pub fn assemble_vector_load(space: &FunctionSpace, f: impl Fn(Point) -> Point) -> Result<Vec<f64>> {
    require_family(space, Family::Bdm, "assemble_vector_load")?;
    let mesh = space.mesh();
    let rule = TriangleRule::new(form_degree(space) + 2);
    let rv: Vec<_> = rule.points.iter().map(|&p| space.reference().eval_vector(p)).collect();
    let mut out = vec![0.0; space.n_dofs()];
    for c in 0..mesh.num_cells() {
        let map = mesh.affine_map(c);
        for ((xh, r), &w) in rule.points.iter().zip(&rv).zip(&rule.weights) {
            let fv = f(map.to_physical(*xh));
            if fv == [0.0, 0.0] {
                continue;
            }
            let phi = space.map_vector_values(c, r);
            for (v, &(g, _)) in phi.iter().zip(space.cell_dofs(c)) {
                out[g] += w * map.det * dot(fv, v.val);
            }
        }
    }
    Ok(out)
}

/// `∫ q φ_i` for a scalar source.
pub fn assemble_scalar_load(space: &FunctionSpace, q: impl Fn(Point) -> f64) -> Result<Vec<f64>> {
    require_family(space, Family::Dgp, "assemble_scalar_load")?;
    let mesh = space.mesh();
    let rule = TriangleRule::new(form_degree(space) + 2);
    let rs: Vec<_> = rule.points.iter().map(|&p| space.reference().eval_scalar(p)).collect();
    let mut out = vec![0.0; space.n_dofs()];
    for c in 0..mesh.num_cells() {
        let map = mesh.affine_map(c);
        for ((xh, r), &w) in rule.points.iter().zip(&rs).zip(&rule.weights) {
            let qv = q(map.to_physical(*xh));
            for (v, &(g, _)) in r.iter().zip(space.cell_dofs(c)) {
                out[g] += w * map.det * qv * v.val;
            }
        }
    }
    Ok(out)
}

/// Load of a time-dependent vector source at time `t`.
pub fn assemble_load(space: &FunctionSpace, f: impl Fn(Point, f64) -> Point, t: f64) -> Result<Vec<f64>> {
    assemble_vector_load(space, |x| f(x, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem_spaces::{build_space, BoundaryCondition};
    use crate::linalg::{dense_min_eig_sym, dense_rank};
    use crate::mesh::Mesh;
    use std::sync::Arc;

    fn spaces(n: usize, ell: usize) -> (FunctionSpace, FunctionSpace) {
        let mesh = Arc::new(Mesh::unit_square(n).unwrap());
        let u = build_space(mesh.clone(), Family::Bdm, ell + 1, BoundaryCondition::ZeroNormalTrace).unwrap();
        let p = build_space(mesh, Family::Dgp, ell, BoundaryCondition::None).unwrap();
        (u, p)
    }

    fn free_block(a: &SparseMatrix, s: &FunctionSpace) -> Vec<Vec<f64>> {
        let f = s.free_dofs();
        a.select(&f, &f).to_dense()
    }

    #[test]
    fn params_validation() {
        let p = PhysicalParams::default();
        p.validate().unwrap();
        assert_eq!(p.rho_bar(), 1.5);
        let bad = PhysicalParams { alpha: 1.5, ..p };
        assert_eq!(bad.validate().unwrap_err().to_string(), "domain error: alpha must lie in [phi0, 1]");
        let bad = PhysicalParams { rho_w: 1.0, ..p };
        assert!(bad.validate().is_err());
        let bad = PhysicalParams { permeability: [[1.0, 2.0], [2.0, 1.0]], ..p };
        assert!(bad.validate().is_err());
        let bad = PhysicalParams { permeability: [[1.0, 0.1], [0.0, 1.0]], ..p };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn elasticity_symmetric_and_coercive() {
        for ell in 0..=1 {
            let (u, _) = spaces(2, ell);
            let a = assemble_elasticity(&u, 1.0, 1.0, default_eta(ell)).unwrap();
            assert!(a.asymmetry() <= 1e-12 * a.max_abs());
            assert!(dense_min_eig_sym(&free_block(&a, &u)) > 0.0);
        }
        let (u, _) = spaces(1, 0);
        assert!(assemble_elasticity(&u, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn penalty_difference_is_psd() {
        let (u, _) = spaces(2, 1);
        let a1 = assemble_elasticity(&u, 1.0, 1.0, 16.0).unwrap();
        let a2 = assemble_elasticity(&u, 1.0, 1.0, 32.0).unwrap();
        let d = a2.add(&a1.scaled(-1.0));
        assert!(dense_min_eig_sym(&d.to_dense()) > -1e-10);
    }

    #[test]
    fn div_coupling_properties() {
        for ell in 0..=1 {
            let (u, p) = spaces(2, ell);
            let b = assemble_div_coupling(&u, &p, 1.0).unwrap();
            let one = p.interpolate_scalar(|_| 1.0);
            let bt1 = b.matvec(&one);
            for d in u.free_dofs() {
                assert!(bt1[d].abs() < 1e-12);
            }
            let f = u.free_dofs();
            let all: Vec<usize> = (0..p.n_dofs()).collect();
            let bf = b.select(&f, &all).to_dense();
            assert_eq!(dense_rank(&bf, 1e-10), p.n_dofs() - 1);
            assert_eq!(assemble_div_coupling(&u, &p, 0.0).unwrap().nnz(), 0);
        }
    }

    #[test]
    fn mass_matrices() {
        let (u, p) = spaces(2, 0);
        let m = assemble_mass(&p, MassWeight::Scalar(1.0)).unwrap();
        for c in 0..p.n_dofs() {
            assert!((m.get(c, c) - p.mesh().area(c)).abs() < 1e-15);
        }
        let (_, p1) = spaces(2, 1);
        let m1 = assemble_mass(&p1, MassWeight::Scalar(3.0)).unwrap();
        let one = p1.interpolate_scalar(|_| 1.0);
        let total: f64 = m1.matvec(&one).iter().zip(&one).map(|(a, b)| a * b).sum();
        assert!((total - 3.0).abs() < 1e-12);
        let mu = assemble_mass(&u, MassWeight::Scalar(1.0)).unwrap();
        let mk = assemble_mass(&u, MassWeight::Tensor([[0.25, 0.0], [0.0, 0.25]])).unwrap();
        assert!(mk.add(&mu.scaled(-0.25)).max_abs() < 1e-12);
        assert!(assemble_mass(&u, MassWeight::Tensor([[1.0, 0.0], [0.0, -1.0]])).is_err());
    }

    #[test]
    fn density_block() {
        let (u, _) = spaces(2, 0);
        let p = PhysicalParams::default();
        let m = assemble_density_block(&u, &u, &p).unwrap();
        assert!(m.asymmetry() <= 1e-12 * m.max_abs());
        assert!(dense_min_eig_sym(&m.to_dense()) > 0.0);
        let p0 = PhysicalParams { rho_f: 0.0, ..p };
        let m0 = assemble_density_block(&u, &u, &p0).unwrap();
        let n = u.n_dofs();
        assert!(m0.triplets().all(|(i, j, _)| (i < n) == (j < n)));
        let bad = PhysicalParams { rho_w: 0.5, rho_f: 1.0, ..p };
        assert!(assemble_density_block(&u, &u, &bad).is_err());
    }

    #[test]
    fn constant_load() {
        let (u, _) = spaces(2, 0);
        let b = assemble_vector_load(&u, |_| [1.0, 0.0]).unwrap();
        let i = u.interpolate_vector(|_| [1.0, 0.0]);
        let total: f64 = b.iter().zip(&i).map(|(a, b)| a * b).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(assemble_vector_load(&u, |_| [0.0, 0.0]).unwrap().iter().all(|&v| v == 0.0));
    }
}
