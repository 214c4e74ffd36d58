use biot_core::time_basis::{
    beta_weights, gauss_derivative_matrix, gauss_lobatto_rule, gauss_rule, interpolate, LagrangeBasis, NodeFamily,
    TimeSlab, MAX_ORDER,
};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = NodeFamily> {
    prop_oneof![Just(NodeFamily::Gauss), Just(NodeFamily::GaussZero), Just(NodeFamily::GaussLobatto)]
}

proptest! {
    #[test]
    fn lagrange_partition_of_unity(k in 1..=MAX_ORDER, fam in family(), s in 0.0..1.0f64) {
        let b = LagrangeBasis::new(fam, k).unwrap();
        let sum: f64 = b.eval_all(s).iter().sum();
        let dsum: f64 = b.deriv_all(s).iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(dsum.abs() < 1e-9);
    }

    #[test]
    fn lagrange_cardinality(k in 1..=MAX_ORDER, fam in family()) {
        let b = LagrangeBasis::new(fam, k).unwrap();
        for (j, &x) in b.nodes.iter().enumerate() {
            for i in 0..b.len() {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((b.eval(i, x) - expect).abs() < 1e-12);
            }
        }
    }

    /// Both rules integrate random polynomials of degree 2k−1 exactly.
    #[test]
    fn rules_exact_for_random_polynomials(k in 1..=MAX_ORDER, coeffs in prop::collection::vec(-1.0..1.0f64, 12)) {
        let deg = 2 * k - 1;
        let p = |s: f64| (0..=deg).map(|i| coeffs[i] * s.powi(i as i32)).sum::<f64>();
        let exact: f64 = (0..=deg).map(|i| coeffs[i] / (i as f64 + 1.0)).sum();
        for rule in [gauss_rule(k).unwrap(), gauss_lobatto_rule(k).unwrap()] {
            prop_assert!((rule.integrate(p) - exact).abs() < 1e-13);
        }
    }

    /// Interpolation in any family reproduces polynomials of degree ≤ k on
    /// an arbitrary slab.
    #[test]
    fn interpolation_reproduces_polynomials(
        k in 1..=4usize,
        fam in family(),
        t0 in -2.0..2.0f64,
        tau in 0.01..3.0f64,
        c in prop::collection::vec(-1.0..1.0f64, 5),
        t in 0.0..1.0f64,
    ) {
        let slab = TimeSlab { index: 1, t_start: t0, tau };
        let f = |x: f64| vec![(0..=k).map(|i| c[i] * x.powi(i as i32)).sum::<f64>()];
        if fam == NodeFamily::Gauss {
            // k Gauss nodes only determine degree k−1.
            return Ok(());
        }
        let p = interpolate(f, fam, k, slab).unwrap();
        let x = slab.to_physical(t);
        prop_assert!((p.eval(x)[0] - f(x)[0]).abs() < 1e-9 * (1.0 + f(x)[0].abs()));
    }
}

#[test]
fn beta_weights_at_least_one() {
    for k in 1..=MAX_ORDER {
        let b = beta_weights(k).unwrap();
        assert_eq!(b.beta[0], 1.0);
        assert!(b.beta.iter().all(|&x| x >= 1.0));
    }
}

#[test]
fn derivative_matrix_symmetric_part_positive() {
    for k in 1..=4 {
        assert!(gauss_derivative_matrix(k).unwrap().min_eig_sym > 0.0);
    }
}
