//! Temporal quadrature, Lagrange bases on time slabs, and the β-weighted
//! polynomial identities used by the cGP(k) scheme.
//!
//! Every basis lives on the reference interval `[0, 1]`. A [`TimeSlab`]
//! carries the affine map `t = t_start + tau * s` to physical time.

use rand::Rng;

use crate::error::{domain, Result};
use crate::linalg::{dense_min_eig_sym, solve_dense};

/// Largest order supported by [`gauss_rule`] and [`gauss_lobatto_rule`].
pub const MAX_ORDER: usize = 6;

const NEWTON_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Gauss,
    GaussLobatto,
}

/// A quadrature rule on the reference interval `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// Integral over a physical slab.
    pub fn integrate_on(&self, slab: &TimeSlab, f: impl Fn(f64) -> f64) -> f64 {
        slab.tau * self.integrate(|s| f(slab.to_physical(s)))
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for m in 1..n {
        let m = m as f64;
        let p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn newton(mut x: f64, f: impl Fn(f64) -> (f64, f64)) -> f64 {
    for _ in 0..100 {
        let (v, d) = f(x);
        let dx = v / d;
        x -= dx;
        if dx.abs() <= NEWTON_TOL {
            break;
        }
    }
    x
}

/// Roots of `P_n` on `[-1, 1]`, ascending.
fn legendre_roots(n: usize) -> Vec<f64> {
    let mut roots: Vec<f64> = (0..n)
        .map(|i| {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            newton(guess, |x| legendre(n, x))
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    symmetrize(&mut roots);
    roots
}

/// Interior Gauss–Lobatto nodes: the roots of `P_n'`, i.e. of the Jacobi
/// polynomial `P^{(1,1)}_{n-1}`.
fn lobatto_interior(n: usize) -> Vec<f64> {
    let nn = n as f64;
    let mut roots: Vec<f64> = (1..n)
        .map(|i| {
            let guess = (std::f64::consts::PI * i as f64 / nn).cos();
            newton(guess, |x| {
                let (p, dp) = legendre(n, x);
                let d2p = (2.0 * x * dp - nn * (nn + 1.0) * p) / (1.0 - x * x);
                (dp, d2p)
            })
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    symmetrize(&mut roots);
    roots
}

fn symmetrize(x: &mut [f64]) {
    let n = x.len();
    for i in 0..n / 2 {
        let a = 0.5 * (x[n - 1 - i] - x[i]);
        x[i] = -a;
        x[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
}

/// Weights on `[0, 1]` from the moment system, written in the centered
/// variable `s = 2t - 1` to keep the Vandermonde matrix well conditioned.
fn moment_weights(centered: &[f64]) -> Vec<f64> {
    let n = centered.len();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|m| centered.iter().map(|&s| s.powi(m as i32)).collect())
        .collect();
    let b: Vec<f64> = (0..n)
        .map(|m| if m % 2 == 0 { 1.0 / (m as f64 + 1.0) } else { 0.0 })
        .collect();
    solve_dense(&a, &b).expect("Vandermonde system with distinct nodes")
}

fn check_order(k: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&k) {
        Ok(())
    } else {
        Err(domain(format!("quadrature order must lie in 1..={MAX_ORDER}, got {k}")))
    }
}

/// The k-point Gauss rule on `[0, 1]`, exact through degree `2k - 1`.
pub fn gauss_rule(k: usize) -> Result<QuadratureRule> {
    check_order(k)?;
    let centered = legendre_roots(k);
    let weights = moment_weights(&centered);
    Ok(QuadratureRule {
        kind: RuleKind::Gauss,
        order: k,
        nodes: centered.iter().map(|s| 0.5 * (s + 1.0)).collect(),
        weights,
    })
}

/// The (k+1)-point Gauss–Lobatto rule on `[0, 1]`, exact through degree
/// `2k - 1`, with both endpoints among the nodes.
pub fn gauss_lobatto_rule(k: usize) -> Result<QuadratureRule> {
    check_order(k)?;
    let mut centered = vec![-1.0];
    centered.extend(lobatto_interior(k));
    centered.push(1.0);
    let weights = moment_weights(&centered);
    Ok(QuadratureRule {
        kind: RuleKind::GaussLobatto,
        order: k,
        nodes: centered.iter().map(|s| 0.5 * (s + 1.0)).collect(),
        weights,
    })
}

/// High-order Gauss–Legendre rule on `[0, 1]` for spatial integration and
/// dense reference integrals. Weights from the classical closed form.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let roots = legendre_roots(n);
    let weights = roots
        .iter()
        .map(|&x| {
            let (_, dp) = legendre(n, x);
            1.0 / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    (roots.iter().map(|x| 0.5 * (x + 1.0)).collect(), weights)
}

/// The interval `(t_start, t_start + tau]` of slab `index` (1-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSlab {
    pub index: usize,
    pub t_start: f64,
    pub tau: f64,
}

impl TimeSlab {
    pub fn reference() -> Self {
        Self {
            index: 1,
            t_start: 0.0,
            tau: 1.0,
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.tau
    }

    pub fn to_physical(&self, s: f64) -> f64 {
        self.t_start + self.tau * s
    }

    pub fn to_reference(&self, t: f64) -> f64 {
        (t - self.t_start) / self.tau
    }
}

/// The three node families used on a slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeFamily {
    /// The k Gauss points; degree k-1.
    Gauss,
    /// The left endpoint followed by the k Gauss points; degree k.
    GaussZero,
    /// The k+1 Gauss–Lobatto points; degree k.
    GaussLobatto,
}

/// Lagrange basis on reference nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    pub family: NodeFamily,
    pub order: usize,
    pub nodes: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(family: NodeFamily, k: usize) -> Result<Self> {
        let nodes = match family {
            NodeFamily::Gauss => gauss_rule(k)?.nodes,
            NodeFamily::GaussZero => {
                let mut n = vec![0.0];
                n.extend(gauss_rule(k)?.nodes);
                n
            }
            NodeFamily::GaussLobatto => gauss_lobatto_rule(k)?.nodes,
        };
        Ok(Self {
            family,
            order: k,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn eval(&self, i: usize, s: f64) -> f64 {
        let ti = self.nodes[i];
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &tj)| (s - tj) / (ti - tj))
            .product()
    }

    /// Derivative with respect to the reference variable, summed term by
    /// term so that it stays exact at the nodes.
    pub fn deriv(&self, i: usize, s: f64) -> f64 {
        let ti = self.nodes[i];
        let mut total = 0.0;
        for (m, &tm) in self.nodes.iter().enumerate() {
            if m == i {
                continue;
            }
            let mut term = 1.0 / (ti - tm);
            for (j, &tj) in self.nodes.iter().enumerate() {
                if j != i && j != m {
                    term *= (s - tj) / (ti - tj);
                }
            }
            total += term;
        }
        total
    }

    pub fn eval_all(&self, s: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.eval(i, s)).collect()
    }

    pub fn deriv_all(&self, s: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.deriv(i, s)).collect()
    }
}

/// `β_0 = 1`, `β_i = 1 / ŝ_i` for the Gauss nodes `ŝ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaWeights {
    pub beta: Vec<f64>,
}

pub fn beta_weights(k: usize) -> Result<BetaWeights> {
    let g = gauss_rule(k)?;
    let mut beta = vec![1.0];
    beta.extend(g.nodes.iter().map(|s| 1.0 / s));
    Ok(BetaWeights { beta })
}

/// A vector-valued polynomial on one slab, stored by its values at the
/// nodes of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabPolynomial {
    pub slab: TimeSlab,
    pub basis: LagrangeBasis,
    pub coeffs: Vec<Vec<f64>>,
}

impl SlabPolynomial {
    pub fn new(slab: TimeSlab, basis: LagrangeBasis, coeffs: Vec<Vec<f64>>) -> Self {
        assert_eq!(basis.len(), coeffs.len());
        Self { slab, basis, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (c, &w) in self.coeffs.iter().zip(weights) {
            out.iter_mut().zip(c).for_each(|(o, ci)| *o += w * ci);
        }
        out
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let s = self.slab.to_reference(t);
        if let Some(i) = self.basis.nodes.iter().position(|&n| n == s) {
            return self.coeffs[i].clone();
        }
        self.combine(&self.basis.eval_all(s))
    }

    /// Time derivative in physical units.
    pub fn deriv(&self, t: f64) -> Vec<f64> {
        let s = self.slab.to_reference(t);
        let w: Vec<f64> = self.basis.deriv_all(s).iter().map(|d| d / self.slab.tau).collect();
        self.combine(&w)
    }

    pub fn physical_nodes(&self) -> Vec<f64> {
        self.basis.nodes.iter().map(|&s| self.slab.to_physical(s)).collect()
    }
}

/// Lagrange interpolation of `f` on the node family of order `k`.
pub fn interpolate(
    f: impl Fn(f64) -> Vec<f64>,
    family: NodeFamily,
    k: usize,
    slab: TimeSlab,
) -> Result<SlabPolynomial> {
    let basis = LagrangeBasis::new(family, k)?;
    let coeffs = basis.nodes.iter().map(|&s| f(slab.to_physical(s))).collect();
    Ok(SlabPolynomial::new(slab, basis, coeffs))
}

/// `x_β(t) = Σ_i Σ_j β_j x_i ∂_t L^{G,0}_i(t_j) L^G_j(t)` for `x` given in
/// the G0 basis; the result is returned in the Gauss basis.
pub fn beta_transform(x: &SlabPolynomial, beta: &BetaWeights) -> Result<SlabPolynomial> {
    if x.basis.family != NodeFamily::GaussZero {
        return Err(domain("beta_transform expects a polynomial in the G0 basis"));
    }
    let k = x.basis.order;
    if beta.beta.len() != k + 1 {
        return Err(domain(format!(
            "expected {} beta weights, got {}",
            k + 1,
            beta.beta.len()
        )));
    }
    let gauss = LagrangeBasis::new(NodeFamily::Gauss, k)?;
    let coeffs = gauss
        .nodes
        .iter()
        .enumerate()
        .map(|(j, &sj)| {
            let d: Vec<f64> = x
                .basis
                .deriv_all(sj)
                .iter()
                .map(|v| beta.beta[j + 1] * v / x.slab.tau)
                .collect();
            x.combine(&d)
        })
        .collect();
    Ok(SlabPolynomial::new(x.slab, gauss, coeffs))
}

/// `r_y = ∂_t I^{GL} y − I^{GL}(∂_t y)`, a degree-k polynomial returned by
/// its values at the Gauss–Lobatto nodes.
pub fn residual_r(
    y: impl Fn(f64) -> Vec<f64>,
    dy: impl Fn(f64) -> Vec<f64>,
    k: usize,
    slab: TimeSlab,
) -> Result<SlabPolynomial> {
    let iy = interpolate(&y, NodeFamily::GaussLobatto, k, slab)?;
    let coeffs = iy
        .physical_nodes()
        .into_iter()
        .map(|t| {
            let a = iy.deriv(t);
            let b = dy(t);
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        })
        .collect();
    Ok(SlabPolynomial::new(slab, iy.basis.clone(), coeffs))
}

/// Dense reference quadrature used by the identity checks.
#[derive(Debug, Clone)]
struct DenseQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl DenseQuadrature {
    fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    /// `∫_slab (a(t), b(t)) dt` for vector-valued closures.
    fn inner(&self, slab: &TimeSlab, a: impl Fn(f64) -> Vec<f64>, b: impl Fn(f64) -> Vec<f64>) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| {
                let t = slab.to_physical(s);
                let (va, vb) = (a(t), b(t));
                w * va.iter().zip(&vb).map(|(x, y)| x * y).sum::<f64>()
            })
            .sum::<f64>()
            * slab.tau
    }

    fn norm(&self, slab: &TimeSlab, a: impl Fn(f64) -> Vec<f64>) -> f64 {
        self.inner(slab, &a, &a).sqrt()
    }
}

/// Points used by the dense quadrature oracle.
pub const DENSE_POINTS: usize = 50;

/// Both sides of an identity and their relative mismatch.
#[derive(Debug, Clone, Copy)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64, scale: f64) -> Self {
        let mut denom = lhs.abs().max(rhs.abs());
        if denom < 1e-3 * scale {
            denom = scale;
        }
        let rel_err = if denom == 0.0 { 0.0 } else { (lhs - rhs).abs() / denom };
        Self { lhs, rhs, rel_err }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.rel_err <= tol
    }
}

/// A measured ratio against the bound it must respect.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BoundCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.ratio >= self.lower * (1.0 - slack) && self.ratio <= self.upper * (1.0 + slack)
    }
}

#[derive(Debug, Clone)]
pub struct WeightedGaussReport {
    pub weighted_pairing: IdentityCheck,
    pub weighted_swap: IdentityCheck,
    pub weighted_norm_bound: BoundCheck,
    pub gauss_part_bound: BoundCheck,
}

#[derive(Debug, Clone)]
pub struct BetaTransformReport {
    pub derivative_pairing: IdentityCheck,
    pub derivative_swap: IdentityCheck,
    /// `∫(∂_t x, x_β) / ‖∂_t x‖²` against `[min β_j, max β_j]`.
    pub positivity_bound: BoundCheck,
    /// `‖x_β‖ / ‖∂_t x‖`.
    pub transform_ratio: f64,
    /// `τ ‖∂_t x‖ / ‖x‖`, bounded independently of τ.
    pub inverse_ratio: f64,
}

const TRIAL_DIM: usize = 3;

fn random_coeffs(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..TRIAL_DIM).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

/// Lower norm-equivalence constant `C_1` with
/// `‖x‖² ≥ C_1² τ Σ |x_i|²` for `x` in the G0 basis.
fn g0_equivalence_lower(k: usize) -> Result<f64> {
    let b = LagrangeBasis::new(NodeFamily::GaussZero, k)?;
    let q = DenseQuadrature::new(DENSE_POINTS);
    let n = b.len();
    let mut m = vec![vec![0.0; n]; n];
    for (&s, &w) in q.nodes.iter().zip(&q.weights) {
        let l = b.eval_all(s);
        for i in 0..n {
            for j in 0..n {
                m[i][j] += w * l[i] * l[j];
            }
        }
    }
    Ok(dense_min_eig_sym(&m).sqrt())
}

/// Evaluates the statements on β-weighted sums of G0 and Gauss Lagrange
/// polynomials for one random trial on `slab`.
pub fn weighted_gauss_identities(k: usize, slab: TimeSlab, rng: &mut impl Rng) -> Result<WeightedGaussReport> {
    if k > 4 {
        return Err(domain("identity checks support k <= 4"));
    }
    let g0 = LagrangeBasis::new(NodeFamily::GaussZero, k)?;
    let g = LagrangeBasis::new(NodeFamily::Gauss, k)?;
    let rule = gauss_rule(k)?;
    let q = DenseQuadrature::new(DENSE_POINTS);

    let x = SlabPolynomial::new(slab, g0.clone(), random_coeffs(rng, k + 1));
    let y = SlabPolynomial::new(slab, g0.clone(), random_coeffs(rng, k + 1));
    let z = SlabPolynomial::new(slab, g.clone(), random_coeffs(rng, k));
    let beta: Vec<f64> = (0..=k).map(|_| rng.random_range(0.25..4.0)).collect();

    let scaled = |p: &SlabPolynomial, from: usize| -> Vec<Vec<f64>> {
        p.coeffs[from..]
            .iter()
            .zip(&beta[from..])
            .map(|(c, b)| c.iter().map(|v| v * b).collect())
            .collect()
    };
    let bx_g0 = SlabPolynomial::new(slab, g0.clone(), scaled(&x, 0));
    let bx_g = SlabPolynomial::new(slab, g.clone(), scaled(&x, 1));
    let by_g = SlabPolynomial::new(slab, g.clone(), scaled(&y, 1));

    let lhs = q.inner(&slab, |t| bx_g0.eval(t), |t| z.eval(t));
    let rhs = q.inner(&slab, |t| bx_g.eval(t), |t| z.eval(t));
    let scale = q.norm(&slab, |t| bx_g0.eval(t)) * q.norm(&slab, |t| z.eval(t));
    let weighted_pairing = IdentityCheck::new(lhs, rhs, scale);

    let lhs = q.inner(&slab, |t| x.eval(t), |t| by_g.eval(t));
    let rhs = q.inner(&slab, |t| bx_g.eval(t), |t| y.eval(t));
    let scale = q.norm(&slab, |t| x.eval(t)) * q.norm(&slab, |t| by_g.eval(t));
    let weighted_swap = IdentityCheck::new(lhs, rhs, scale);

    let c1 = g0_equivalence_lower(k)?;
    let x_norm = q.norm(&slab, |t| x.eval(t));
    let max_wb2 = rule
        .weights
        .iter()
        .zip(&beta[1..])
        .map(|(w, b)| w * b * b)
        .fold(0.0, f64::max);
    let weighted_norm_bound = BoundCheck {
        ratio: q.norm(&slab, |t| bx_g.eval(t)) / x_norm,
        lower: 0.0,
        upper: max_wb2.sqrt() / c1,
    };
    let xbar = SlabPolynomial::new(slab, g, x.coeffs[1..].to_vec());
    let max_w = rule.weights.iter().cloned().fold(0.0, f64::max);
    let gauss_part_bound = BoundCheck {
        ratio: q.norm(&slab, |t| xbar.eval(t)) / x_norm,
        lower: 0.0,
        upper: max_w.sqrt() / c1,
    };
    Ok(WeightedGaussReport { weighted_pairing, weighted_swap, weighted_norm_bound, gauss_part_bound })
}

/// Evaluates the β-transform identities for one random trial. The
/// identities use random β; the norm statements use [`beta_weights`].
pub fn beta_transform_identities(k: usize, slab: TimeSlab, rng: &mut impl Rng) -> Result<BetaTransformReport> {
    if k > 4 {
        return Err(domain("identity checks support k <= 4"));
    }
    let g0 = LagrangeBasis::new(NodeFamily::GaussZero, k)?;
    let q = DenseQuadrature::new(DENSE_POINTS);
    let x = SlabPolynomial::new(slab, g0.clone(), random_coeffs(rng, k + 1));
    let y = SlabPolynomial::new(slab, g0.clone(), random_coeffs(rng, k + 1));
    let beta = BetaWeights {
        beta: (0..=k).map(|_| rng.random_range(0.25..4.0)).collect(),
    };
    let xb = beta_transform(&x, &beta)?;
    let yb = beta_transform(&y, &beta)?;
    let bx_g0 = SlabPolynomial::new(
        slab,
        g0.clone(),
        x.coeffs
            .iter()
            .zip(&beta.beta)
            .map(|(c, b)| c.iter().map(|v| v * b).collect())
            .collect(),
    );

    let lhs = q.inner(&slab, |t| x.eval(t), |t| yb.eval(t));
    let rhs = q.inner(&slab, |t| bx_g0.eval(t), |t| y.deriv(t));
    let scale = q.norm(&slab, |t| x.eval(t)) * q.norm(&slab, |t| yb.eval(t));
    let derivative_pairing = IdentityCheck::new(lhs, rhs, scale);

    let lhs = q.inner(&slab, |t| x.deriv(t), |t| yb.eval(t));
    let rhs = q.inner(&slab, |t| xb.eval(t), |t| y.deriv(t));
    let scale = q.norm(&slab, |t| x.deriv(t)) * q.norm(&slab, |t| yb.eval(t));
    let derivative_swap = IdentityCheck::new(lhs, rhs, scale);

    let canonical = beta_weights(k)?;
    let xl = beta_transform(&x, &canonical)?;
    let dx_norm2 = q.inner(&slab, |t| x.deriv(t), |t| x.deriv(t));
    let bmin = canonical.beta[1..].iter().cloned().fold(f64::INFINITY, f64::min);
    let bmax = canonical.beta[1..].iter().cloned().fold(0.0, f64::max);
    let positivity_bound = BoundCheck {
        ratio: q.inner(&slab, |t| x.deriv(t), |t| xl.eval(t)) / dx_norm2,
        lower: bmin,
        upper: bmax,
    };
    let transform_ratio = q.norm(&slab, |t| xl.eval(t)) / dx_norm2.sqrt();
    let inverse_ratio = slab.tau * dx_norm2.sqrt() / q.norm(&slab, |t| x.eval(t));
    Ok(BetaTransformReport {
        derivative_pairing,
        derivative_swap,
        positivity_bound,
        transform_ratio,
        inverse_ratio,
    })
}

/// `M = (∫ L^G_i ∂_t L^{G,0}_j)_{i,j=1..k}`, its similarity transform
/// `M̃ = D^{-1/2} M D^{1/2}` with `D = diag(Gauss nodes)`, and the smallest
/// eigenvalue of the symmetric part of `M̃`.
#[derive(Debug, Clone)]
pub struct GaussDerivativeMatrix {
    pub m: Vec<Vec<f64>>,
    pub m_tilde: Vec<Vec<f64>>,
    pub min_eig_sym: f64,
}

pub fn gauss_derivative_matrix(k: usize) -> Result<GaussDerivativeMatrix> {
    if k > 4 {
        return Err(domain("gauss_derivative_matrix supports k <= 4"));
    }
    let g = LagrangeBasis::new(NodeFamily::Gauss, k)?;
    let g0 = LagrangeBasis::new(NodeFamily::GaussZero, k)?;
    let rule = gauss_rule(k + 1)?;
    let m: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (1..=k)
                .map(|j| rule.integrate(|s| g.eval(i, s) * g0.deriv(j, s)))
                .collect()
        })
        .collect();
    let d = &g.nodes;
    let m_tilde: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| m[i][j] * (d[j] / d[i]).sqrt()).collect())
        .collect();
    let min_eig_sym = dense_min_eig_sym(&m_tilde);
    Ok(GaussDerivativeMatrix {
        m,
        m_tilde,
        min_eig_sym,
    })
}
