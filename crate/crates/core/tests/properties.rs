use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use ncpsi::algebra::{left_mult_matrix, Mode, MultiIndex, NCElement, Theta, ThetaMatrix, TruncationSpec};
use ncpsi::psido::{build_matrix, PsiDO};
use ncpsi::spectral::{duality_maximizer, lambda_apply, pairing, sobolev_norm};
use ncpsi::symbols::PolynomialSymbol;

const N: usize = 2;

fn element(theta: Theta, radius: i32, max_terms: usize) -> impl Strategy<Value = NCElement> {
    prop::collection::vec(((-radius..=radius), (-radius..=radius), -1.0..1.0f64, -1.0..1.0f64), 1..=max_terms).prop_map(
        move |terms| {
            let coeffs: Vec<(Mode, Complex64)> =
                terms.into_iter().map(|(a, b, re, im)| (Mode::from_slice(&[a, b]), Complex64::new(re, im))).collect();
            let mut u = NCElement::zero(&theta);
            for (k, c) in coeffs {
                u = u.try_add(&NCElement::monomial(k.as_slice(), c, &theta).unwrap()).unwrap();
            }
            u
        },
    )
}

fn theta_and_three() -> impl Strategy<Value = (NCElement, NCElement, NCElement)> {
    (-1.0..1.0f64).prop_flat_map(|t| {
        let th = ThetaMatrix::uniform(N, t).into_shared();
        (element(th.clone(), 5, 6), element(th.clone(), 5, 6), element(th, 5, 6))
    })
}

fn rel(err: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        err
    } else {
        err / scale
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn associativity((u, v, w) in theta_and_three()) {
        let lhs = u.try_mul(&v).unwrap().try_mul(&w).unwrap();
        let rhs = u.try_mul(&v.try_mul(&w).unwrap()).unwrap();
        prop_assert!(rel(lhs.distance(&rhs), u.norm() * v.norm() * w.norm()) <= 1e-12);
    }

    #[test]
    fn involution_reverses_products((u, v, _) in theta_and_three()) {
        let lhs = u.try_mul(&v).unwrap().involution();
        let rhs = v.involution().try_mul(&u.involution()).unwrap();
        prop_assert!(rel(lhs.distance(&rhs), u.norm() * v.norm()) <= 1e-12);
        prop_assert!(u.involution().involution().distance(&u) <= 1e-15 * u.norm());
    }

    #[test]
    fn trace_identities((u, v, _) in theta_and_three()) {
        let scale = u.norm() * v.norm();
        let uv = u.try_mul(&v).unwrap().tau();
        let vu = v.try_mul(&u).unwrap().tau();
        prop_assert!(rel((uv - vu).norm(), scale) <= 1e-12);
        prop_assert!((u.involution().tau() - u.tau().conj()).norm() <= 1e-15 * (1.0 + u.norm()));
        let positive = u.try_mul(&u.involution()).unwrap().tau();
        prop_assert!((positive.re - u.norm().powi(2)).abs() <= 1e-12 * u.norm().powi(2));
        prop_assert!(positive.im.abs() <= 1e-12 * u.norm().powi(2));
        for j in 0..N {
            let e = MultiIndex::unit(N, j);
            prop_assert_eq!(u.delta(&e).tau(), Complex64::new(0.0, 0.0));
            let ibp = u.try_mul(&v.delta(&e)).unwrap().tau() + u.delta(&e).try_mul(&v).unwrap().tau();
            prop_assert!(rel(ibp.norm(), 5.0 * scale) <= 1e-12);
        }
    }

    #[test]
    fn leibniz_rule((u, v, _) in theta_and_three()) {
        for j in 0..N {
            let e = MultiIndex::unit(N, j);
            let lhs = u.try_mul(&v).unwrap().delta(&e);
            let rhs = u.delta(&e).try_mul(&v).unwrap().try_add(&u.try_mul(&v.delta(&e)).unwrap()).unwrap();
            prop_assert!(rel(lhs.distance(&rhs), 5.0 * u.norm() * v.norm()) <= 1e-12);
        }
    }

    #[test]
    fn inner_product_routes_agree((u, v, _) in theta_and_three()) {
        let direct = u.inner(&v).unwrap();
        let routed = u.try_mul(&v.involution()).unwrap().tau();
        prop_assert!((direct - routed).norm() <= 1e-13 * (1.0 + u.norm() * v.norm()));
    }

    #[test]
    fn group_action_preserves_trace((u, _, _) in theta_and_three(), s0 in -3.0..3.0f64, s1 in -3.0..3.0f64) {
        let moved = u.alpha_act(&[s0, s1]);
        prop_assert_eq!(moved.tau(), u.tau());
        prop_assert!((moved.norm() - u.norm()).abs() <= 1e-13 * u.norm());
    }

    #[test]
    fn left_multiplication_is_multiplicative(t in -1.0..1.0f64, seed in 0u64..1000) {
        let th = ThetaMatrix::uniform(N, t).into_shared();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let u = ncpsi::algebra::random_element(&th, 1, 4, &mut rng);
        let v = ncpsi::algebra::random_element(&th, 1, 4, &mut rng);
        let trunc = TruncationSpec::new(5, 2).unwrap();
        let luv = left_mult_matrix(&u.try_mul(&v).unwrap(), &trunc).unwrap();
        let small = TruncationSpec::new(5, 1).unwrap();
        let lu = left_mult_matrix(&u, &small).unwrap();
        let lv = left_mult_matrix(&v, &small).unwrap();
        let prod = lu.mul(&lv).unwrap();
        let idx = trunc.basis(N).window(trunc.radius - 2 * trunc.margin);
        let diff = luv.restrict(&idx, &idx).sub(&prod.restrict(&idx, &idx)).unwrap();
        prop_assert!(diff.max_abs() <= 1e-12 * (1.0 + u.norm() * v.norm()));
    }

    #[test]
    fn sobolev_lambda_and_duality((u, _, _) in theta_and_three(), s in -2.0..2.0f64) {
        let norm = sobolev_norm(&u, s);
        prop_assert!((sobolev_norm(&lambda_apply(s, &u), 0.0) - norm).abs() <= 1e-13 * norm);
        let back = lambda_apply(-s, &lambda_apply(s, &u));
        prop_assert!(back.distance(&u) <= 1e-13 * u.norm());
        let v = duality_maximizer(&u, s);
        prop_assert!((sobolev_norm(&v, s) - 1.0).abs() <= 1e-12);
        let achieved = pairing(&u, &v).unwrap().norm();
        let dual = sobolev_norm(&u, -s);
        prop_assert!((achieved - dual).abs() <= 1e-10 * dual);
    }

    #[test]
    fn holder_bound((u, v, _) in theta_and_three(), s in -2.0..2.0f64) {
        let p = pairing(&u, &v).unwrap().norm();
        prop_assert!(p <= sobolev_norm(&u, -s) * sobolev_norm(&v, s) * (1.0 + 1e-12));
    }

    #[test]
    fn flat_laplacian_matrix_is_theta_independent(t in -1.0..1.0f64) {
        let trunc = TruncationSpec::new(4, 0).unwrap();
        let flat = ThetaMatrix::zero(N).into_shared();
        let twisted = ThetaMatrix::uniform(N, t).into_shared();
        let m0 = build_matrix(&PsiDO::new(Arc::new(PolynomialSymbol::laplacian(&flat))), &trunc).unwrap();
        let m1 = build_matrix(&PsiDO::new(Arc::new(PolynomialSymbol::laplacian(&twisted))), &trunc).unwrap();
        prop_assert_eq!(m0.matrix().diagonal(), m1.matrix().diagonal());
        prop_assert!(m1.matrix().is_diagonal());
    }
}
