//! Property tests of the structural invariants.

use hyperloc::cone::{polarize, ConvexCone, Weight};
use hyperloc::expr::{Expr, C64};
use hyperloc::fourier::{mixed_partition_2d, orthant_partition};
use hyperloc::hyperfunction::{add, boundary_evaluate, BoundaryOptions, BoundaryValueTerm, Hyperfunction};
use hyperloc::localization::{picken, FixedPointDatum, LocalizationProblem};
use hyperloc::loop_su2::{
    fixed_loop_from_modes, level_weights, regularized_factor, unregularized_factor, verify_fixed_loop,
};
use hyperloc::rational::{int, rat, Rational};
use proptest::prelude::*;

fn weight(dim: usize) -> impl Strategy<Value = Weight> {
    prop::collection::vec(-4i64..=4, dim)
        .prop_filter("nonzero", |v| v.iter().any(|c| *c != 0))
        .prop_map(|v| Weight::from_ints(&v))
}

fn rational_vec(dim: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-9i64..=9, 1i64..=5), dim).prop_map(|v| v.into_iter().map(|(p, q)| rat(p, q)).collect())
}

fn nonvanishing(ws: &[Weight], xi: &[Rational]) -> bool {
    ws.iter().all(|w| !num_traits::Zero::is_zero(&w.pair(xi)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polarized_weights_are_positive_on_xi(ws in prop::collection::vec(weight(3), 1..6), xi in rational_vec(3)) {
        prop_assume!(nonvanishing(&ws, &xi));
        let set = polarize(&ws, &xi).unwrap();
        prop_assert!(set.cone.contains(&xi));
        let expect = if set.flip_count() % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(set.sign, expect);
        prop_assert!(set.cone.is_open_nonempty());
        let w = set.cone.interior_witness().unwrap();
        prop_assert!(set.cone.contains(&w));
    }

    #[test]
    fn polarization_sign_flip_and_scaling(ws in prop::collection::vec(weight(2), 1..6), xi in rational_vec(2), t in 1i64..7) {
        prop_assume!(nonvanishing(&ws, &xi));
        let base = polarize(&ws, &xi).unwrap();
        let neg: Vec<Rational> = xi.iter().map(|q| -q).collect();
        let flipped = polarize(&ws, &neg).unwrap();
        let parity = if ws.len() % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(flipped.sign, base.sign * parity);
        prop_assert!(flipped.cone.same_as(&base.cone.negated()).unwrap());
        let scaled: Vec<Rational> = xi.iter().map(|q| q * int(t)).collect();
        let s = polarize(&ws, &scaled).unwrap();
        prop_assert_eq!(s.sign, base.sign);
        prop_assert_eq!(s.polarized, base.polarized);
    }

    #[test]
    fn intersections_and_duals(a in prop::collection::vec(weight(2), 1..4), b in prop::collection::vec(weight(2), 1..4)) {
        let ca = ConvexCone::new(2, a).unwrap();
        let cb = ConvexCone::new(2, b).unwrap();
        let both = ca.intersect(&cb).unwrap();
        if both.is_open_nonempty() {
            let w = both.interior_witness().unwrap();
            prop_assert!(ca.contains(&w) && cb.contains(&w));
            prop_assert!(both.is_subset_of(&ca).unwrap());
        }
        if ca.is_open_nonempty() {
            let dual = ca.polar_dual().unwrap();
            // The dual is cut out by generators of the closed cone.
            for g in dual.half_spaces() {
                prop_assert!(ca.closure_contains(g.coeffs()));
            }
            if dual.is_open_nonempty() {
                let eta = dual.interior_witness().unwrap();
                let y = ca.interior_witness().unwrap();
                let pairing: Rational = eta.iter().zip(&y).map(|(a, b)| a * b).sum();
                prop_assert!(num_traits::Signed::is_positive(&pairing));
            }
        }
    }

    #[test]
    fn holomorphic_expressions_satisfy_cauchy_riemann(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -1.0f64..1.0, pick in 0usize..4,
        x in -1.5f64..1.5, y in -1.0f64..1.0,
    ) {
        let z = Expr::coord(0);
        let inner = C64::new(a, b) * z.clone() + c;
        let e = match pick {
            0 => inner.exp() * z.clone(),
            1 => inner.sin() + z.clone().powi(3),
            2 => (inner.cos() + 3.0).recip(),
            _ => inner.tanh() * z.clone().exp(),
        };
        let p = C64::new(x, y);
        let h = 1e-5;
        let f = |w: C64| e.evaluate(&[w]);
        let (Ok(xp), Ok(xm), Ok(yp), Ok(ym)) = (f(p + h), f(p - h), f(p + C64::new(0.0, h)), f(p - C64::new(0.0, h))) else {
            return Ok(());
        };
        let dx = (xp - xm) / (2.0 * h);
        let dy = (yp - ym) / (2.0 * h);
        let scale = 1.0 + dx.norm();
        prop_assert!((dx + C64::i() * dy).norm() < 1e-5 * scale, "dx {dx} dy {dy}");
        let (_, d) = e.evaluate_directional(&[p], &[C64::new(1.0, 0.0)]).unwrap();
        prop_assert!((d - dx).norm() < 1e-5 * scale);
    }

    #[test]
    fn partitions_sum_to_one(x1 in -30.0f64..30.0, x2 in -30.0f64..30.0, y1 in -0.5f64..0.5, y2 in -0.5f64..0.5) {
        let z = [C64::new(x1, y1), C64::new(x2, y2)];
        for p in [orthant_partition(2), mixed_partition_2d()] {
            prop_assert!((p.sum_at(&z).unwrap() - 1.0).norm() < 1e-12);
        }
        prop_assert!((orthant_partition(1).sum_at(&z[..1]).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn boundary_values_are_linear(a in -1.0f64..1.0, b in -1.0f64..1.0, cr in -2.0f64..2.0, ci in -2.0f64..2.0, x in -3.0f64..3.0) {
        prop_assume!((x - a).abs() > 0.2 && (x - b).abs() > 0.2);
        let z = Expr::coord(0);
        let f = Hyperfunction::single(BoundaryValueTerm::new((z.clone() - a).recip(), ConvexCone::orthant(&[-1])).unwrap());
        let g = Hyperfunction::single(BoundaryValueTerm::new((z - b).powi(2).recip(), ConvexCone::orthant(&[1])).unwrap());
        let c = C64::new(cr, ci);
        let opts = BoundaryOptions::halving(6, 14, 3);
        let bf = boundary_evaluate(&f, &[x], &opts).unwrap().value;
        let bg = boundary_evaluate(&g, &[x], &opts).unwrap().value;
        let both = boundary_evaluate(&add(&f, &g.scale(c)).unwrap(), &[x], &opts).unwrap().value;
        prop_assert!((both - (bf + c * bg)).norm() < 1e-8);
        prop_assert!((bf - 1.0 / (x - a)).norm() < 1e-8);
    }

    /// `S² × S²`: the Picken function is entire, so it may not depend on the
    /// generic polarization.
    #[test]
    fn product_of_spheres_is_polarization_independent(xi in rational_vec(2), x1 in -2.0f64..2.0, x2 in -2.0f64..2.0) {
        prop_assume!(xi.iter().all(|q| !num_traits::Zero::is_zero(q)));
        let mut points = Vec::new();
        for s1 in [1i64, -1] {
            for s2 in [1i64, -1] {
                points.push(FixedPointDatum::new(
                    format!("{s1}{s2}"),
                    vec![s1 as f64, s2 as f64],
                    vec![Weight::from_ints(&[s1, 0]), Weight::from_ints(&[0, s2])],
                ));
            }
        }
        let problem = LocalizationProblem { rank: 2, polarization: xi, fixed_points: points };
        let l = picken(&problem).unwrap();
        prop_assert_eq!(l.terms().len(), 1);
        let z = [C64::new(x1, 0.01), C64::new(x2, -0.02)];
        let sinc = |w: C64| (C64::i() * w).exp() - (-C64::i() * w).exp();
        let expect = sinc(z[0]) * sinc(z[1]) / (z[0] * z[1]) / C64::new(0.0, 2.0 * std::f64::consts::PI).powi(2);
        let got = l.terms()[0].expr().evaluate(&z).unwrap();
        prop_assert!((got - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }

    /// `λ_h² λ_e λ_f = (k z₂)⁴ (1 − (2(n z₂ + z₁)/(k z₂))²)`.
    #[test]
    fn loop_weight_regularization(n in -5i64..=5, k in 1i64..50, x1 in -2.0f64..2.0, x2 in 0.5f64..2.0, y in -0.3f64..0.3) {
        let z = [C64::new(x1, y), C64::new(x2, 0.5 * y)];
        let product: C64 = level_weights(n, k).iter().map(|w| w.apply(&z)).product();
        let un = unregularized_factor(n).bind_index(k as u64).evaluate(&z).unwrap();
        let reg = regularized_factor(n).bind_index(k as u64).evaluate(&z).unwrap();
        let kz2 = z[1] * k as f64;
        prop_assert!((product - un).norm() < 1e-9 * (1.0 + un.norm()));
        prop_assert!((un - kz2.powi(4) * reg).norm() < 1e-9 * (1.0 + un.norm()));
    }

    #[test]
    fn fixed_loops_have_two_modes_and_solve_the_equations(
        m in 1i64..6, k in -4i64..=4, gap in 1i64..6, phi in 0.1f64..3.0, psi in -3.0f64..3.0,
    ) {
        let k2 = k + gap;
        prop_assume!((m * (k + k2)) % 2 == 0);
        let n = m * (k + k2) / 2;
        prop_assume!(n != 0);
        let l = fixed_loop_from_modes(n, m, k, k2, phi, psi).unwrap();
        prop_assert_eq!(l.nonzero_alpha_modes(), 2);
        prop_assert_eq!(l.modes(), vec![k, k2]);
        let rep = verify_fixed_loop(&l, 64);
        prop_assert!(rep.pass(), "{:?}", rep);
    }
}
