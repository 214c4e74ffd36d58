//! Spatial quadrature on the reference triangle and on edges.

use crate::mesh::Point;
use crate::time_basis::gauss_legendre;

/// A rule on the reference triangle `(0,0), (1,0), (0,1)`; weights sum to 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed tensor Gauss rule, exact for polynomials of total degree `degree`.
    pub fn new(degree: usize) -> Self {
        let n = degree.div_ceil(2) + 1;
        let (x, wx) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in x.iter().zip(&wx) {
            for (&v, &wv) in x.iter().zip(&wx) {
                points.push([u, v * (1.0 - u)]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A rule on `[0, 1]` for edge integrals, exact through `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn new(degree: usize) -> Self {
        let (points, weights) = gauss_legendre((degree + 1).div_ceil(2).max(1));
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn triangle_monomials() {
        for d in 0..=10usize {
            let rule = TriangleRule::new(d);
            for a in 0..=d as u32 {
                for b in 0..=(d as u32 - a) {
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    let got: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    assert!((got - exact).abs() <= 1e-14 * exact.max(1e-3), "d={d} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn edge_monomials() {
        for d in 0..=10 {
            let rule = EdgeRule::new(d);
            for m in 0..=d as i32 {
                let got: f64 = rule.points.iter().zip(&rule.weights).map(|(s, w)| w * s.powi(m)).sum();
                assert!((got - 1.0 / (m as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }
}
