//! Manufactured solutions: the trigonometric default case and the exact
//! field interface shared by initial-data projection and error norms.

use std::f64::consts::PI;

use crate::assembly::PhysicalParams;
use crate::mesh::Point;
use crate::slab_solver::FunctionSources;

/// Exact fields evaluated on a given cell. Smooth fields ignore the cell;
/// piecewise fields need it to pick the right restriction.
pub trait ExactFields {
    fn u(&self, cell: usize, x: Point, t: f64) -> Point;
    /// `grad[r][c] = ∂u_r/∂x_c`.
    fn grad_u(&self, cell: usize, x: Point, t: f64) -> [[f64; 2]; 2];
    /// `hess[r][a][b] = ∂²u_r/∂x_a∂x_b`.
    fn hess_u(&self, cell: usize, x: Point, t: f64) -> [[[f64; 2]; 2]; 2];
    fn v(&self, cell: usize, x: Point, t: f64) -> Point;
    fn w(&self, cell: usize, x: Point, t: f64) -> Point;
    fn div_w(&self, cell: usize, x: Point, t: f64) -> f64;
    fn p(&self, cell: usize, x: Point, t: f64) -> f64;
}

/// A scalar function of time with two derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeFunction {
    /// `Σ c_i t^i`.
    Polynomial(Vec<f64>),
    /// `offset + amplitude · sin(omega t + phase)`.
    Harmonic {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
}

impl TimeFunction {
    /// Value and first two derivatives.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        match self {
            Self::Polynomial(c) => {
                let mut out = [0.0; 3];
                for (i, &ci) in c.iter().enumerate() {
                    let i = i as i32;
                    out[0] += ci * t.powi(i);
                    if i >= 1 {
                        out[1] += ci * f64::from(i) * t.powi(i - 1);
                    }
                    if i >= 2 {
                        out[2] += ci * f64::from(i * (i - 1)) * t.powi(i - 2);
                    }
                }
                out
            }
            Self::Harmonic {
                offset,
                amplitude,
                omega,
                phase,
            } => {
                let arg = omega * t + phase;
                [
                    offset + amplitude * arg.sin(),
                    amplitude * omega * arg.cos(),
                    -amplitude * omega * omega * arg.sin(),
                ]
            }
        }
    }

    pub fn sin(omega: f64, phase: f64) -> Self {
        Self::Harmonic {
            offset: 0.0,
            amplitude: 1.0,
            omega,
            phase,
        }
    }
}

/// Spatial profiles of the default case on the unit square.
#[derive(Debug, Clone, Copy)]
struct Profiles {
    s: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
    syy: f64,
    w1: f64,
    w2: f64,
    c: f64,
}

fn profiles(x: Point) -> Profiles {
    let (sx_, cx) = (PI * x[0]).sin_cos();
    let (sy_, cy) = (PI * x[1]).sin_cos();
    let s = sx_ * sy_;
    Profiles {
        s,
        sx: PI * cx * sy_,
        sy: PI * sx_ * cy,
        sxx: -PI * PI * s,
        sxy: PI * PI * cx * cy,
        syy: -PI * PI * s,
        w1: sx_ * cy,
        w2: cx * sy_,
        c: cx * cy,
    }
}

/// The default manufactured solution on `(0,1)²`:
/// `u = a(t)(S, S)` with `S = sin πx sin πy`,
/// `w = b(t)(sin πx cos πy, cos πx sin πy)`, `p = c(t) cos πx cos πy`.
#[derive(Debug, Clone)]
pub struct MmsCase {
    pub params: PhysicalParams,
    pub a: TimeFunction,
    pub b: TimeFunction,
    pub c: TimeFunction,
}

/// `a = sin(ωt + 0.3)`, `b = cos ωt`, `c = 1 + sin ωt`.
pub fn default_mms(params: PhysicalParams, omega: f64) -> MmsCase {
    MmsCase {
        params,
        a: TimeFunction::sin(omega, 0.3),
        b: TimeFunction::sin(omega, std::f64::consts::FRAC_PI_2),
        c: TimeFunction::Harmonic {
            offset: 1.0,
            amplitude: 1.0,
            omega,
            phase: 0.0,
        },
    }
}

impl MmsCase {
    pub fn u_at(&self, x: Point, t: f64) -> Point {
        let s = profiles(x).s * self.a.eval(t)[0];
        [s, s]
    }

    pub fn v_at(&self, x: Point, t: f64) -> Point {
        let s = profiles(x).s * self.a.eval(t)[1];
        [s, s]
    }

    pub fn dv_dt(&self, x: Point, t: f64) -> Point {
        let s = profiles(x).s * self.a.eval(t)[2];
        [s, s]
    }

    pub fn div_u(&self, x: Point, t: f64) -> f64 {
        let q = profiles(x);
        self.a.eval(t)[0] * (q.sx + q.sy)
    }

    pub fn w_at(&self, x: Point, t: f64) -> Point {
        let q = profiles(x);
        let b = self.b.eval(t)[0];
        [b * q.w1, b * q.w2]
    }

    pub fn dw_dt(&self, x: Point, t: f64) -> Point {
        let q = profiles(x);
        let b = self.b.eval(t)[1];
        [b * q.w1, b * q.w2]
    }

    pub fn div_w_at(&self, x: Point, t: f64) -> f64 {
        2.0 * PI * self.b.eval(t)[0] * profiles(x).c
    }

    pub fn p_at(&self, x: Point, t: f64) -> f64 {
        self.c.eval(t)[0] * profiles(x).c
    }

    pub fn dp_dt(&self, x: Point, t: f64) -> f64 {
        self.c.eval(t)[1] * profiles(x).c
    }

    pub fn grad_p(&self, x: Point, t: f64) -> Point {
        let q = profiles(x);
        let c = self.c.eval(t)[0];
        [-PI * c * q.w1, -PI * c * q.w2]
    }

    pub fn grad_u_at(&self, x: Point, t: f64) -> [[f64; 2]; 2] {
        let q = profiles(x);
        let a = self.a.eval(t)[0];
        [[a * q.sx, a * q.sy], [a * q.sx, a * q.sy]]
    }

    pub fn hess_u_at(&self, x: Point, t: f64) -> [[[f64; 2]; 2]; 2] {
        let q = profiles(x);
        let a = self.a.eval(t)[0];
        let h = [[a * q.sxx, a * q.sxy], [a * q.sxy, a * q.syy]];
        [h, h]
    }

    /// Momentum source, written out in closed form.
    pub fn f(&self, x: Point, t: f64) -> Point {
        let q = profiles(x);
        let pr = &self.params;
        let [a, _, a2] = self.a.eval(t);
        let b1 = self.b.eval(t)[1];
        let c = self.c.eval(t)[0];
        let gd = [q.sxx + q.sxy, q.sxy + q.syy];
        let mut out = [0.0; 2];
        let w = [q.w1, q.w2];
        for r in 0..2 {
            out[r] = pr.rho_bar() * a2 * q.s + pr.rho_f * b1 * w[r] + 2.0 * pr.mu * PI * PI * a * q.s
                - (pr.mu + pr.lambda) * a * gd[r]
                - pr.alpha * PI * c * w[r];
        }
        out
    }

    /// Darcy source.
    pub fn g(&self, x: Point, t: f64) -> Point {
        let q = profiles(x);
        let pr = &self.params;
        let a2 = self.a.eval(t)[2];
        let [b, b1, _] = self.b.eval(t);
        let c = self.c.eval(t)[0];
        let ki = pr.permeability_inverse();
        let w = [q.w1, q.w2];
        let mut out = [0.0; 2];
        for r in 0..2 {
            out[r] = pr.rho_f * a2 * q.s + pr.rho_w * b1 * w[r] + b * (ki[r][0] * w[0] + ki[r][1] * w[1])
                - PI * c * w[r];
        }
        out
    }

    /// Mass source; zero for fields that satisfy the homogeneous balance.
    pub fn q(&self, x: Point, t: f64) -> f64 {
        let q = profiles(x);
        let pr = &self.params;
        let a1 = self.a.eval(t)[1];
        let b = self.b.eval(t)[0];
        let c1 = self.c.eval(t)[1];
        pr.s0 * c1 * q.c + pr.alpha * a1 * (q.sx + q.sy) + 2.0 * PI * b * q.c
    }

    /// Residuals of the three balance laws at `(x, t)`, assembled from the
    /// derivative closures rather than the closed-form sources.
    pub fn strong_residual(&self, x: Point, t: f64) -> [f64; 5] {
        let pr = &self.params;
        let h = self.hess_u_at(x, t);
        let mut div_eps = [0.0; 2];
        let mut grad_div = [0.0; 2];
        for r in 0..2 {
            for c in 0..2 {
                div_eps[r] += 0.5 * (h[r][c][c] + h[c][r][c]);
                grad_div[r] += h[c][c][r];
            }
        }
        let (dv, dw, gp, w) = (self.dv_dt(x, t), self.dw_dt(x, t), self.grad_p(x, t), self.w_at(x, t));
        let (f, g) = (self.f(x, t), self.g(x, t));
        let ki = pr.permeability_inverse();
        let mut out = [0.0; 5];
        for r in 0..2 {
            out[r] = pr.rho_bar() * dv[r] - 2.0 * pr.mu * div_eps[r] - pr.lambda * grad_div[r]
                + pr.alpha * gp[r]
                + pr.rho_f * dw[r]
                - f[r];
            out[2 + r] = pr.rho_f * dv[r] + pr.rho_w * dw[r] + ki[r][0] * w[0] + ki[r][1] * w[1] + gp[r] - g[r];
        }
        let div_du = {
            let q = profiles(x);
            self.a.eval(t)[1] * (q.sx + q.sy)
        };
        out[4] = pr.s0 * self.dp_dt(x, t) + pr.alpha * div_du + self.div_w_at(x, t) - self.q(x, t);
        out
    }

    /// Sources for the slab solver.
    #[allow(clippy::type_complexity)]
    pub fn sources(
        &self,
    ) -> FunctionSources<impl Fn(Point, f64) -> Point + '_, impl Fn(Point, f64) -> Point + '_, impl Fn(Point, f64) -> f64 + '_>
    {
        FunctionSources {
            f: move |x, t| self.f(x, t),
            g: move |x, t| self.g(x, t),
            q: move |x, t| self.q(x, t),
        }
    }
}

impl ExactFields for MmsCase {
    fn u(&self, _: usize, x: Point, t: f64) -> Point {
        self.u_at(x, t)
    }

    fn grad_u(&self, _: usize, x: Point, t: f64) -> [[f64; 2]; 2] {
        self.grad_u_at(x, t)
    }

    fn hess_u(&self, _: usize, x: Point, t: f64) -> [[[f64; 2]; 2]; 2] {
        self.hess_u_at(x, t)
    }

    fn v(&self, _: usize, x: Point, t: f64) -> Point {
        self.v_at(x, t)
    }

    fn w(&self, _: usize, x: Point, t: f64) -> Point {
        self.w_at(x, t)
    }

    fn div_w(&self, _: usize, x: Point, t: f64) -> f64 {
        self.div_w_at(x, t)
    }

    fn p(&self, _: usize, x: Point, t: f64) -> f64 {
        self.p_at(x, t)
    }
}

/// The zero solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFields;

impl ExactFields for ZeroFields {
    fn u(&self, _: usize, _: Point, _: f64) -> Point {
        [0.0; 2]
    }
    fn grad_u(&self, _: usize, _: Point, _: f64) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
    fn hess_u(&self, _: usize, _: Point, _: f64) -> [[[f64; 2]; 2]; 2] {
        [[[0.0; 2]; 2]; 2]
    }
    fn v(&self, _: usize, _: Point, _: f64) -> Point {
        [0.0; 2]
    }
    fn w(&self, _: usize, _: Point, _: f64) -> Point {
        [0.0; 2]
    }
    fn div_w(&self, _: usize, _: Point, _: f64) -> f64 {
        0.0
    }
    fn p(&self, _: usize, _: Point, _: f64) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn case() -> MmsCase {
        let params = PhysicalParams {
            permeability: [[2.0, 0.5], [0.5, 1.0]],
            ..PhysicalParams::default()
        };
        default_mms(params, 1.3)
    }

    #[test]
    fn strong_residual_vanishes() {
        let m = case();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let t = rng.random_range(0.0..2.0);
            let r = m.strong_residual(x, t);
            assert!(r.iter().all(|v| v.abs() <= 1e-9), "{r:?}");
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn derivative_closures_match_finite_differences() {
        let m = case();
        let h = 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)];
            let t = rng.random_range(0.1..1.0);
            let shift = |d: usize, s: f64| {
                let mut y = x;
                y[d] += s;
                y
            };
            let g = m.grad_u_at(x, t);
            let hs = m.hess_u_at(x, t);
            for c in 0..2 {
                let (up, um) = (m.u_at(shift(c, h), t), m.u_at(shift(c, -h), t));
                let (gp, gm) = (m.grad_u_at(shift(c, h), t), m.grad_u_at(shift(c, -h), t));
                for r in 0..2 {
                    assert!(rel(g[r][c], (up[r] - um[r]) / (2.0 * h)) < 1e-6);
                    for a in 0..2 {
                        assert!(rel(hs[r][a][c], (gp[r][a] - gm[r][a]) / (2.0 * h)) < 1e-6);
                    }
                }
            }
            let fd = |f: &dyn Fn(f64) -> f64| (f(t + h) - f(t - h)) / (2.0 * h);
            assert!(rel(m.v_at(x, t)[0], fd(&|s| m.u_at(x, s)[0])) < 1e-6);
            assert!(rel(m.dv_dt(x, t)[1], fd(&|s| m.v_at(x, s)[1])) < 1e-6);
            assert!(rel(m.dw_dt(x, t)[0], fd(&|s| m.w_at(x, s)[0])) < 1e-6);
            assert!(rel(m.dp_dt(x, t), fd(&|s| m.p_at(x, s))) < 1e-6);
            let gp = m.grad_p(x, t);
            let dw = (m.w_at(shift(0, h), t)[0] - m.w_at(shift(0, -h), t)[0]
                + m.w_at(shift(1, h), t)[1]
                - m.w_at(shift(1, -h), t)[1])
                / (2.0 * h);
            assert!(rel(m.div_w_at(x, t), dw) < 1e-6);
            assert!(rel(gp[0], (m.p_at(shift(0, h), t) - m.p_at(shift(0, -h), t)) / (2.0 * h)) < 1e-6);
        }
    }

    #[test]
    fn boundary_traces_vanish() {
        let m = case();
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            for t in [0.0, 0.37, 1.1] {
                for x in [[0.0, s], [1.0, s]] {
                    let u = m.u_at(x, t);
                    assert!(u[0].abs() <= 1e-14 && u[1].abs() <= 1e-14);
                    assert!(m.w_at(x, t)[0].abs() <= 1e-14);
                }
                for x in [[s, 0.0], [s, 1.0]] {
                    let u = m.u_at(x, t);
                    assert!(u[0].abs() <= 1e-14 && u[1].abs() <= 1e-14);
                    assert!(m.w_at(x, t)[1].abs() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn time_function_derivatives() {
        let p = TimeFunction::Polynomial(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), [17.0, 14.0, 6.0]);
        let h = TimeFunction::sin(2.0, 0.0);
        let [v, d, dd] = h.eval(0.0);
        assert_eq!(v, 0.0);
        assert_eq!(d, 2.0);
        assert_eq!(dd, 0.0);
    }
}
