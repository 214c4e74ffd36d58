//! The cGP(k) slab system: trial functions of degree k in time with the
//! left value fixed by continuity, test functions of degree k-1, and the
//! march over equidistant slabs.

use std::sync::Arc;

use crate::assembly::{
    assemble_density_block, assemble_div_coupling, assemble_elasticity, assemble_mass, MassWeight,
    PhysicalParams, SparseMatrix,
};
use crate::error::{domain, Error, Result};
use crate::fem_spaces::{build_space, BoundaryCondition, Family, FunctionSpace};
use crate::linalg::{LinearSystem, LuFactorization};
use crate::mesh::{Mesh, Point};
use crate::time_basis::{gauss_legendre, gauss_lobatto_rule, LagrangeBasis, NodeFamily, TimeSlab};
use crate::verification::ExactFields;

/// Equidistant time grid on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub slabs: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, slabs: usize) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) || slabs == 0 {
            return Err(domain(format!("invalid time grid: T = {t_final}, N = {slabs}")));
        }
        Ok(Self { t_final, slabs })
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.slabs as f64
    }

    /// `t_n`, with `t_N = T` exactly.
    pub fn t(&self, n: usize) -> f64 {
        if n == self.slabs {
            self.t_final
        } else {
            n as f64 * self.t_final / self.slabs as f64
        }
    }

    /// Slab `n` (1-based) as `(t_{n-1}, t_n]`.
    pub fn slab(&self, n: usize) -> TimeSlab {
        let t_start = self.t(n - 1);
        TimeSlab {
            index: n,
            t_start,
            tau: self.t(n) - t_start,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    U,
    V,
    W,
    P,
}

/// Coefficient vectors of all four fields at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub p: Vec<f64>,
}

impl SlabState {
    pub fn zeros(disc: &Discretization) -> Self {
        let (nu, np) = (disc.u_space.n_dofs(), disc.p_space.n_dofs());
        Self {
            u: vec![0.0; nu],
            v: vec![0.0; nu],
            w: vec![0.0; nu],
            p: vec![0.0; np],
        }
    }

    pub fn field(&self, f: Field) -> &[f64] {
        match f {
            Field::U => &self.u,
            Field::V => &self.v,
            Field::W => &self.w,
            Field::P => &self.p,
        }
    }

    fn combine(states: &[&SlabState], weights: &[f64]) -> SlabState {
        let lin = |get: fn(&SlabState) -> &Vec<f64>| -> Vec<f64> {
            let mut out = vec![0.0; get(states[0]).len()];
            for (s, &w) in states.iter().zip(weights) {
                if w != 0.0 {
                    out.iter_mut().zip(get(s)).for_each(|(o, x)| *o += w * x);
                }
            }
            out
        };
        SlabState {
            u: lin(|s| &s.u),
            v: lin(|s| &s.v),
            w: lin(|s| &s.w),
            p: lin(|s| &s.p),
        }
    }
}

/// Spaces and preassembled spatial matrices.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Arc<Mesh>,
    /// BDM space shared by `u`, `v` and `w`.
    pub u_space: FunctionSpace,
    pub p_space: FunctionSpace,
    pub params: PhysicalParams,
    /// Interior-penalty elasticity form.
    pub elasticity: SparseMatrix,
    /// Unweighted vector mass matrix.
    pub mass: SparseMatrix,
    /// `K^{-1}`-weighted vector mass matrix.
    pub darcy: SparseMatrix,
    /// Unweighted pressure mass matrix.
    pub p_mass: SparseMatrix,
    /// `B[i, j] = (q_j, div φ_i)`.
    pub div: SparseMatrix,
    pub div_t: SparseMatrix,
    /// `∫ q_j` for each pressure basis function.
    pub p_mean: Vec<f64>,
}

impl Discretization {
    /// BDM of degree `ell + 1` paired with discontinuous P_ell.
    pub fn new(mesh: Arc<Mesh>, ell: usize, params: PhysicalParams) -> Result<Self> {
        Self::with_degrees(mesh, ell + 1, ell, params)
    }

    /// Arbitrary degree pairing; mismatched pairs break mass conservation
    /// and are only useful as a negative control.
    pub fn with_degrees(mesh: Arc<Mesh>, bdm: usize, dgp: usize, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        let u_space = build_space(mesh.clone(), Family::Bdm, bdm, BoundaryCondition::ZeroNormalTrace)?;
        let p_space = build_space(mesh.clone(), Family::Dgp, dgp, BoundaryCondition::None)?;
        let elasticity = assemble_elasticity(&u_space, params.mu, params.lambda, params.eta)?;
        let mass = assemble_mass(&u_space, MassWeight::Scalar(1.0))?;
        let darcy = assemble_mass(&u_space, MassWeight::Tensor(params.permeability_inverse()))?;
        let p_mass = assemble_mass(&p_space, MassWeight::Scalar(1.0))?;
        let div = assemble_div_coupling(&u_space, &p_space, 1.0)?;
        let div_t = div.transpose();
        let one = p_space.interpolate_scalar(|_| 1.0);
        let p_mean = p_mass.matvec(&one);
        Ok(Self {
            mesh,
            u_space,
            p_space,
            params,
            elasticity,
            mass,
            darcy,
            p_mass,
            div,
            div_t,
            p_mean,
        })
    }

    pub fn ell(&self) -> usize {
        self.p_space.degree()
    }

    pub fn domain_measure(&self) -> f64 {
        self.p_mean.iter().zip(self.p_space.interpolate_scalar(|_| 1.0)).map(|(a, b)| a * b).sum()
    }

    /// `∫_Ω p` for a pressure coefficient vector.
    pub fn pressure_integral(&self, p: &[f64]) -> f64 {
        self.p_mean.iter().zip(p).map(|(a, b)| a * b).sum()
    }

    /// `a_h(u,u) + |M_ρ^{1/2}(v,w)|² + s0 |p|²`.
    pub fn energy(&self, s: &SlabState) -> f64 {
        let q = |m: &SparseMatrix, x: &[f64], y: &[f64]| -> f64 { m.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum() };
        let pr = &self.params;
        q(&self.elasticity, &s.u, &s.u)
            + pr.rho_bar() * q(&self.mass, &s.v, &s.v)
            + 2.0 * pr.rho_f * q(&self.mass, &s.v, &s.w)
            + pr.rho_w * q(&self.mass, &s.w, &s.w)
            + pr.s0 * q(&self.p_mass, &s.p, &s.p)
    }

    pub fn density_block(&self) -> Result<SparseMatrix> {
        assemble_density_block(&self.u_space, &self.u_space, &self.params)
    }
}

/// Load vectors of the right-hand sides at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceLoads {
    /// Momentum source tested against the displacement space.
    pub f: Vec<f64>,
    /// Darcy source tested against the flux space.
    pub g: Vec<f64>,
    /// Mass source tested against the pressure space.
    pub q: Vec<f64>,
}

/// Right-hand side data of the system.
pub trait Sources {
    fn loads(&self, disc: &Discretization, t: f64) -> Result<SourceLoads>;
}

/// Homogeneous sources.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSources;

impl Sources for NoSources {
    fn loads(&self, disc: &Discretization, _t: f64) -> Result<SourceLoads> {
        let (nu, np) = (disc.u_space.n_dofs(), disc.p_space.n_dofs());
        Ok(SourceLoads {
            f: vec![0.0; nu],
            g: vec![0.0; nu],
            q: vec![0.0; np],
        })
    }
}

/// Sources given as functions of space and time.
pub struct FunctionSources<F, G, Q> {
    pub f: F,
    pub g: G,
    pub q: Q,
}

impl<F, G, Q> Sources for FunctionSources<F, G, Q>
where
    F: Fn(Point, f64) -> Point,
    G: Fn(Point, f64) -> Point,
    Q: Fn(Point, f64) -> f64,
{
    fn loads(&self, disc: &Discretization, t: f64) -> Result<SourceLoads> {
        use crate::assembly::{assemble_scalar_load, assemble_vector_load};
        Ok(SourceLoads {
            f: assemble_vector_load(&disc.u_space, |x| (self.f)(x, t))?,
            g: assemble_vector_load(&disc.u_space, |x| (self.g)(x, t))?,
            q: assemble_scalar_load(&disc.p_space, |x| (self.q)(x, t))?,
        })
    }
}

/// Initial state: BDM interpolation of `u, v, w` with boundary normal DOFs
/// zeroed, and `L²` projection of `p` with its mean removed.
pub fn project_initial_data(disc: &Discretization, fields: &dyn ExactFields, t0: f64) -> SlabState {
    let s = &disc.u_space;
    let mut u = s.interpolate_vector_cellwise(|c, x| fields.u(c, x, t0));
    let mut v = s.interpolate_vector_cellwise(|c, x| fields.v(c, x, t0));
    let mut w = s.interpolate_vector_cellwise(|c, x| fields.w(c, x, t0));
    for x in [&mut u, &mut v, &mut w] {
        s.apply_constraints(x);
    }
    let mut p = disc.p_space.interpolate_scalar_cellwise(|c, x| fields.p(c, x, t0));
    remove_mean(disc, &mut p);
    SlabState { u, v, w, p }
}

pub(crate) fn remove_mean(disc: &Discretization, p: &mut [f64]) {
    let mean = disc.pressure_integral(p) / disc.domain_measure();
    let one = disc.p_space.interpolate_scalar(|_| 1.0);
    p.iter_mut().zip(&one).for_each(|(a, b)| *a -= mean * b);
}

/// Time integrals on the reference slab.
#[derive(Debug, Clone)]
pub struct TemporalCoefficients {
    pub k: usize,
    /// `∫ L^G_m ∂_s L^{G,0}_j ds`, independent of τ.
    pub dt: Vec<Vec<f64>>,
    /// `∫ L^G_m L^{G,0}_j ds` (multiply by τ).
    pub mt: Vec<Vec<f64>>,
    /// `∫ L^G_m L^{GL}_i ds` (multiply by τ).
    pub source: Vec<Vec<f64>>,
    /// Gauss–Lobatto nodes on the reference slab.
    pub gl_nodes: Vec<f64>,
}

impl TemporalCoefficients {
    pub fn new(k: usize) -> Result<Self> {
        let g = LagrangeBasis::new(NodeFamily::Gauss, k)?;
        let g0 = LagrangeBasis::new(NodeFamily::GaussZero, k)?;
        let gl = LagrangeBasis::new(NodeFamily::GaussLobatto, k)?;
        // k+1 points integrate the degree 2k-1 products exactly.
        let (x, w) = gauss_legendre(k + 1);
        let integrate = |f: &dyn Fn(f64) -> f64| -> f64 { x.iter().zip(&w).map(|(&s, &wi)| wi * f(s)).sum() };
        let table = |f: &dyn Fn(usize, usize, f64) -> f64, cols: usize| -> Vec<Vec<f64>> {
            (0..k)
                .map(|m| (0..cols).map(|j| integrate(&|s| f(m, j, s))).collect())
                .collect()
        };
        Ok(Self {
            k,
            dt: table(&|m, j, s| g.eval(m, s) * g0.deriv(j, s), k + 1),
            mt: table(&|m, j, s| g.eval(m, s) * g0.eval(j, s), k + 1),
            source: table(&|m, i, s| g.eval(m, s) * gl.eval(i, s), k + 1),
            gl_nodes: gauss_lobatto_rule(k)?.nodes,
        })
    }
}

/// Positions of the unknowns in the slab system.
#[derive(Debug, Clone)]
pub struct SlabLayout {
    pub k: usize,
    pub u_free: Vec<usize>,
    pub w_free: Vec<usize>,
    pub w_constrained: Vec<usize>,
    pub n_w: usize,
    pub n_p: usize,
}

impl SlabLayout {
    fn new(disc: &Discretization, k: usize) -> Self {
        Self {
            k,
            u_free: disc.u_space.free_dofs(),
            w_free: disc.u_space.free_dofs(),
            w_constrained: disc.u_space.constrained_dofs(),
            n_w: disc.u_space.n_dofs(),
            n_p: disc.p_space.n_dofs(),
        }
    }

    pub fn block(&self) -> usize {
        2 * self.u_free.len() + self.n_w + self.n_p
    }

    pub fn len(&self) -> usize {
        self.k * self.block() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offset of field `f` at trial node `j` (1-based) or test index `j`.
    pub fn offset(&self, f: Field, j: usize) -> usize {
        let base = (j - 1) * self.block();
        let nuf = self.u_free.len();
        base + match f {
            Field::U => 0,
            Field::V => nuf,
            Field::W => 2 * nuf,
            Field::P => 2 * nuf + self.n_w,
        }
    }

    pub fn multiplier(&self) -> usize {
        self.k * self.block()
    }
}

struct Builder {
    n: usize,
    data: Vec<(usize, usize, f64)>,
}

impl Builder {
    /// Adds `scale · m` at `(row0, col0)`; `rows` maps matrix rows to
    /// block-local positions when given.
    fn block(&mut self, m: &SparseMatrix, row0: usize, col0: usize, rows: Option<&[usize]>, scale: f64) {
        if scale == 0.0 {
            return;
        }
        for (i, j, v) in m.triplets() {
            let r = rows.map_or(i, |map| map[i]);
            self.data.push((row0 + r, col0 + j, scale * v));
        }
    }
}

/// Spatial blocks restricted to the free rows and columns used by the
/// slab system.
struct Blocks {
    m_uu: SparseMatrix,
    m_uw: SparseMatrix,
    m_wu: SparseMatrix,
    m_ww: SparseMatrix,
    a_uu: SparseMatrix,
    b_up: SparseMatrix,
    k_ww: SparseMatrix,
    b_wp: SparseMatrix,
    bt_pu: SparseMatrix,
    bt_pw: SparseMatrix,
}

impl Blocks {
    fn new(disc: &Discretization, layout: &SlabLayout) -> Self {
        let uf = &layout.u_free;
        let wf = &layout.w_free;
        let all_w: Vec<usize> = (0..layout.n_w).collect();
        let all_p: Vec<usize> = (0..layout.n_p).collect();
        Self {
            m_uu: disc.mass.select(uf, uf),
            m_uw: disc.mass.select(uf, &all_w),
            m_wu: disc.mass.select(wf, uf),
            m_ww: disc.mass.select(wf, &all_w),
            a_uu: disc.elasticity.select(uf, uf),
            b_up: disc.div.select(uf, &all_p),
            k_ww: disc.darcy.select(wf, &all_w),
            b_wp: disc.div.select(wf, &all_p),
            bt_pu: disc.div_t.select(&all_p, uf),
            bt_pw: disc.div_t.clone(),
        }
    }
}

/// The slab matrix for one step size, factored once and reused for every
/// slab of the grid.
pub struct SlabOperator {
    disc: Arc<Discretization>,
    pub layout: SlabLayout,
    pub coeffs: TemporalCoefficients,
    pub tau: f64,
    matrix: Arc<SparseMatrix>,
    lu: Option<LuFactorization>,
}

impl std::fmt::Debug for SlabOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SlabOperator")
            .field("k", &self.layout.k)
            .field("tau", &self.tau)
            .field("unknowns", &self.layout.len())
            .finish()
    }
}

impl SlabOperator {
    /// Assembles the slab matrix without factoring it.
    pub fn assemble(disc: Arc<Discretization>, k: usize, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(domain("slab length must be positive"));
        }
        let coeffs = TemporalCoefficients::new(k)?;
        let layout = SlabLayout::new(&disc, k);
        let blocks = Blocks::new(&disc, &layout);
        let pr = &disc.params;
        let n = layout.len();
        let mut b = Builder { n, data: Vec::new() };
        let w_rows: &[usize] = &layout.w_free;
        for m in 1..=k {
            for j in 1..=k {
                let d = coeffs.dt[m - 1][j];
                let mt = tau * coeffs.mt[m - 1][j];
                let (ru, rv, rw, rp) = (
                    layout.offset(Field::U, m),
                    layout.offset(Field::V, m),
                    layout.offset(Field::W, m),
                    layout.offset(Field::P, m),
                );
                let (cu, cv, cw, cp) = (
                    layout.offset(Field::U, j),
                    layout.offset(Field::V, j),
                    layout.offset(Field::W, j),
                    layout.offset(Field::P, j),
                );
                // Momentum balance.
                b.block(&blocks.m_uu, ru, cv, None, d * pr.rho_bar());
                b.block(&blocks.m_uw, ru, cw, None, d * pr.rho_f);
                b.block(&blocks.a_uu, ru, cu, None, mt);
                b.block(&blocks.b_up, ru, cp, None, -mt * pr.alpha);
                // Kinematics.
                b.block(&blocks.m_uu, rv, cu, None, d);
                b.block(&blocks.m_uu, rv, cv, None, -mt);
                // Darcy law on the free flux rows.
                b.block(&blocks.m_wu, rw, cv, Some(w_rows), d * pr.rho_f);
                b.block(&blocks.m_ww, rw, cw, Some(w_rows), d * pr.rho_w);
                b.block(&blocks.k_ww, rw, cw, Some(w_rows), mt);
                b.block(&blocks.b_wp, rw, cp, Some(w_rows), -mt);
                // Mass balance.
                b.block(&disc.p_mass, rp, cp, None, d * pr.s0);
                b.block(&blocks.bt_pu, rp, cu, None, d * pr.alpha);
                b.block(&blocks.bt_pw, rp, cw, None, mt);
            }
            let rw = layout.offset(Field::W, m);
            for &i in &layout.w_constrained {
                b.data.push((rw + i, rw + i, 1.0));
            }
            let rp = layout.offset(Field::P, m);
            let lam = layout.multiplier();
            for (i, &mean) in disc.p_mean.iter().enumerate() {
                b.data.push((rp + i, lam, mean));
                b.data.push((lam, layout.offset(Field::P, m) + i, mean));
            }
        }
        let matrix = Arc::new(SparseMatrix::from_triplets(b.n, b.n, b.data));
        Ok(Self {
            disc,
            layout,
            coeffs,
            tau,
            matrix,
            lu: None,
        })
    }

    /// Assembles and factors.
    pub fn new(disc: Arc<Discretization>, k: usize, tau: f64) -> Result<Self> {
        let mut op = Self::assemble(disc, k, tau)?;
        op.lu = Some(LuFactorization::new(op.matrix.clone())?);
        Ok(op)
    }

    pub fn matrix(&self) -> &Arc<SparseMatrix> {
        &self.matrix
    }

    pub fn discretization(&self) -> &Arc<Discretization> {
        &self.disc
    }

    /// Right-hand side for the slab starting from `state`.
    pub fn rhs(&self, state: &SlabState, slab: &TimeSlab, sources: &dyn Sources) -> Result<Vec<f64>> {
        let disc = &*self.disc;
        let l = &self.layout;
        let pr = &disc.params;
        let (nu, np) = (disc.u_space.n_dofs(), disc.p_space.n_dofs());
        if state.u.len() != nu || state.v.len() != nu || state.w.len() != nu || state.p.len() != np {
            return Err(Error::Assembly("state dimensions do not match the spaces".into()));
        }
        if (slab.tau - self.tau).abs() > 1e-12 * self.tau {
            return Err(Error::Assembly(format!(
                "slab length {} differs from the operator's {}",
                slab.tau, self.tau
            )));
        }
        let loads: Vec<SourceLoads> = self
            .coeffs
            .gl_nodes
            .iter()
            .map(|&s| sources.loads(disc, slab.to_physical(s)))
            .collect::<Result<_>>()?;
        for ld in &loads {
            if ld.f.len() != nu || ld.g.len() != nu || ld.q.len() != np {
                return Err(Error::Assembly("source load dimensions do not match the spaces".into()));
            }
        }
        let mv = disc.mass.matvec(&state.v);
        let mw = disc.mass.matvec(&state.w);
        let mu = disc.mass.matvec(&state.u);
        let au = disc.elasticity.matvec(&state.u);
        let bp = disc.div.matvec(&state.p);
        let kw = disc.darcy.matvec(&state.w);
        let mpp = disc.p_mass.matvec(&state.p);
        let btu = disc.div_t.matvec(&state.u);
        let btw = disc.div_t.matvec(&state.w);

        let mut rhs = vec![0.0; l.len()];
        for m in 1..=l.k {
            let d0 = self.coeffs.dt[m - 1][0];
            let mt0 = self.tau * self.coeffs.mt[m - 1][0];
            let sw: Vec<f64> = self.coeffs.source[m - 1].iter().map(|c| c * self.tau).collect();
            let src = |get: fn(&SourceLoads) -> &Vec<f64>, i: usize| -> f64 {
                loads.iter().zip(&sw).map(|(ld, w)| w * get(ld)[i]).sum()
            };
            let ru = l.offset(Field::U, m);
            for (r, &i) in l.u_free.iter().enumerate() {
                rhs[ru + r] = src(|s| &s.f, i)
                    - d0 * (pr.rho_bar() * mv[i] + pr.rho_f * mw[i])
                    - mt0 * (au[i] - pr.alpha * bp[i]);
            }
            let rv = l.offset(Field::V, m);
            for (r, &i) in l.u_free.iter().enumerate() {
                rhs[rv + r] = -d0 * mu[i] + mt0 * mv[i];
            }
            let rw = l.offset(Field::W, m);
            for &i in &l.w_free {
                rhs[rw + i] = src(|s| &s.g, i)
                    - d0 * (pr.rho_f * mv[i] + pr.rho_w * mw[i])
                    - mt0 * (kw[i] - bp[i]);
            }
            let rp = l.offset(Field::P, m);
            for i in 0..np {
                rhs[rp + i] = src(|s| &s.q, i) - d0 * (pr.s0 * mpp[i] + pr.alpha * btu[i]) - mt0 * btw[i];
            }
        }
        Ok(rhs)
    }

    pub fn build_system(&self, state: &SlabState, slab: &TimeSlab, sources: &dyn Sources) -> Result<LinearSystem> {
        LinearSystem::new(self.matrix.clone(), self.rhs(state, slab, sources)?)
    }

    /// Solves with the cached factorization.
    pub fn solve(&self, system: &LinearSystem) -> Result<SlabSolution> {
        if !Arc::ptr_eq(&system.matrix, &self.matrix) {
            return Err(Error::Solver("system was not built by this operator".into()));
        }
        let lu = self
            .lu
            .as_ref()
            .ok_or_else(|| Error::Solver("operator was assembled without a factorization".into()))?;
        let x = lu.solve(&system.rhs)?;
        let residual = system.relative_residual(&x);
        Ok(self.unpack(&x, residual))
    }

    /// Splits a solution vector into per-node states.
    pub fn unpack(&self, x: &[f64], residual: f64) -> SlabSolution {
        let l = &self.layout;
        let nu = l.n_w;
        let nodes = (1..=l.k)
            .map(|j| {
                let scatter = |off: usize| {
                    let mut out = vec![0.0; nu];
                    for (r, &i) in l.u_free.iter().enumerate() {
                        out[i] = x[off + r];
                    }
                    out
                };
                let w0 = l.offset(Field::W, j);
                let p0 = l.offset(Field::P, j);
                SlabState {
                    u: scatter(l.offset(Field::U, j)),
                    v: scatter(l.offset(Field::V, j)),
                    w: x[w0..w0 + l.n_w].to_vec(),
                    p: x[p0..p0 + l.n_p].to_vec(),
                }
            })
            .collect();
        SlabSolution {
            nodes,
            multiplier: x[l.multiplier()],
            residual,
        }
    }
}

/// Trial coefficients at the Gauss nodes of one slab.
#[derive(Debug, Clone)]
pub struct SlabSolution {
    pub nodes: Vec<SlabState>,
    pub multiplier: f64,
    pub residual: f64,
}

/// Builds the system of one slab from scratch.
pub fn build_slab_system(
    disc: Arc<Discretization>,
    k: usize,
    state: &SlabState,
    slab: &TimeSlab,
    sources: &dyn Sources,
) -> Result<(SlabOperator, LinearSystem)> {
    let op = SlabOperator::new(disc, k, slab.tau)?;
    let sys = op.build_system(state, slab, sources)?;
    Ok((op, sys))
}

pub fn solve_slab(op: &SlabOperator, system: &LinearSystem) -> Result<SlabSolution> {
    op.solve(system)
}

/// Piecewise polynomial trajectory, continuous in time. Slab `n` is
/// represented in the G0 basis by `endpoints[n-1]` and `interior[n-1]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub k: usize,
    pub endpoints: Vec<SlabState>,
    pub interior: Vec<Vec<SlabState>>,
    pub multipliers: Vec<f64>,
    pub residuals: Vec<f64>,
    basis: LagrangeBasis,
}

impl Trajectory {
    /// G0 coefficients of slab `n`.
    pub fn slab_states(&self, n: usize) -> Vec<&SlabState> {
        let mut out = vec![&self.endpoints[n - 1]];
        out.extend(self.interior[n - 1].iter());
        out
    }

    fn locate(&self, t: f64) -> Result<Located> {
        let g = &self.grid;
        if !(t >= 0.0 && t <= g.t_final) {
            return Err(domain(format!("time {t} lies outside [0, {}]", g.t_final)));
        }
        for n in 0..=g.slabs {
            if t == g.t(n) {
                return Ok(Located::Endpoint(n));
            }
        }
        let n = ((t / g.tau()).ceil() as usize).clamp(1, g.slabs);
        let slab = g.slab(n);
        let n = if t <= slab.t_start { n - 1 } else if t > slab.t_end() { n + 1 } else { n };
        Ok(Located::Inside(n.clamp(1, g.slabs)))
    }

    /// All four fields at time `t`.
    pub fn state_at(&self, t: f64) -> Result<SlabState> {
        match self.locate(t)? {
            Located::Endpoint(n) => Ok(self.endpoints[n].clone()),
            Located::Inside(n) => {
                let slab = self.grid.slab(n);
                let w = self.basis.eval_all(slab.to_reference(t));
                Ok(SlabState::combine(&self.slab_states(n), &w))
            }
        }
    }

    /// Time derivative of all fields at `t`, taken from slab `n`.
    pub fn derivative_in_slab(&self, n: usize, t: f64) -> SlabState {
        let slab = self.grid.slab(n);
        let w: Vec<f64> = self.basis.deriv_all(slab.to_reference(t)).iter().map(|d| d / slab.tau).collect();
        SlabState::combine(&self.slab_states(n), &w)
    }

    /// Value of all fields at `t` evaluated with slab `n`'s polynomial.
    pub fn value_in_slab(&self, n: usize, t: f64) -> SlabState {
        let slab = self.grid.slab(n);
        let w = self.basis.eval_all(slab.to_reference(t));
        SlabState::combine(&self.slab_states(n), &w)
    }
}

enum Located {
    Endpoint(usize),
    Inside(usize),
}

/// Coefficient vector of one field at time `t`.
pub fn eval_trajectory(traj: &Trajectory, field: Field, t: f64) -> Result<Vec<f64>> {
    Ok(traj.state_at(t)?.field(field).to_vec())
}

/// Solves slab after slab with one shared factorization.
pub fn march(
    disc: Arc<Discretization>,
    k: usize,
    grid: TimeGrid,
    initial: SlabState,
    sources: &dyn Sources,
) -> Result<Trajectory> {
    let op = SlabOperator::new(disc, k, grid.tau())?;
    march_with(&op, grid, initial, sources)
}

pub fn march_with(op: &SlabOperator, grid: TimeGrid, initial: SlabState, sources: &dyn Sources) -> Result<Trajectory> {
    let k = op.layout.k;
    let basis = LagrangeBasis::new(NodeFamily::GaussZero, k)?;
    let end_weights = basis.eval_all(1.0);
    let mut endpoints = vec![initial];
    let mut interior = Vec::with_capacity(grid.slabs);
    let mut multipliers = Vec::with_capacity(grid.slabs);
    let mut residuals = Vec::with_capacity(grid.slabs);
    for n in 1..=grid.slabs {
        let slab = grid.slab(n);
        let state = endpoints.last().expect("initial state present");
        let sys = op.build_system(state, &slab, sources)?;
        let sol = op.solve(&sys)?;
        let mut all = vec![state];
        all.extend(sol.nodes.iter());
        let end = SlabState::combine(&all, &end_weights);
        endpoints.push(end);
        interior.push(sol.nodes);
        multipliers.push(sol.multiplier);
        residuals.push(sol.residual);
    }
    Ok(Trajectory {
        grid,
        k,
        endpoints,
        interior,
        multipliers,
        residuals,
        basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_dense;

    fn disc(n: usize, ell: usize) -> Arc<Discretization> {
        let mesh = Arc::new(Mesh::unit_square(n).unwrap());
        Arc::new(Discretization::new(mesh, ell, PhysicalParams::default()).unwrap())
    }

    #[test]
    fn unknown_count_two_cells() {
        let d = disc(1, 0);
        let op = SlabOperator::assemble(d, 1, 0.1).unwrap();
        assert_eq!(op.layout.len(), 17);
    }

    #[test]
    fn grid() {
        let g = TimeGrid::new(0.5, 3).unwrap();
        assert_eq!(g.t(0), 0.0);
        assert_eq!(g.t(3), 0.5);
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn temporal_tables_match_dense_oracle() {
        let (x, w) = gauss_legendre(50);
        for k in 1..=6 {
            let c = TemporalCoefficients::new(k).unwrap();
            let g = LagrangeBasis::new(NodeFamily::Gauss, k).unwrap();
            let g0 = LagrangeBasis::new(NodeFamily::GaussZero, k).unwrap();
            for m in 0..k {
                for j in 0..=k {
                    let dt: f64 = x.iter().zip(&w).map(|(&s, &ww)| ww * g.eval(m, s) * g0.deriv(j, s)).sum();
                    let mt: f64 = x.iter().zip(&w).map(|(&s, &ww)| ww * g.eval(m, s) * g0.eval(j, s)).sum();
                    assert!((dt - c.dt[m][j]).abs() < 1e-13);
                    assert!((mt - c.mt[m][j]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn constant_mode_block_nonsingular() {
        for k in 1..=6 {
            let c = TemporalCoefficients::new(k).unwrap();
            let mut a = vec![vec![0.0; k + 1]; k + 1];
            for m in 0..k {
                for j in 0..k {
                    a[m][j] = c.dt[m][j + 1];
                }
                a[m][k] = 1.0;
                a[k][m] = 1.0;
            }
            assert!(solve_dense(&a, &vec![1.0; k + 1]).is_ok());
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let d = disc(2, 0);
        let state = SlabState::zeros(&d);
        let (op, sys) = build_slab_system(d, 2, &state, &TimeGrid::new(1.0, 4).unwrap().slab(1), &NoSources).unwrap();
        let sol = solve_slab(&op, &sys).unwrap();
        for s in &sol.nodes {
            assert!(s.u.iter().chain(&s.v).chain(&s.w).chain(&s.p).all(|&x| x.abs() <= 1e-12));
        }
    }

    #[test]
    fn rejects_mismatched_state() {
        let d = disc(1, 0);
        let op = SlabOperator::new(d.clone(), 1, 0.1).unwrap();
        let mut s = SlabState::zeros(&d);
        s.p.push(0.0);
        let slab = TimeSlab { index: 1, t_start: 0.0, tau: 0.1 };
        assert!(op.build_system(&s, &slab, &NoSources).is_err());
    }
}
