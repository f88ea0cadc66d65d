use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use ncpsi::algebra::{shell_modes, Mode, MultiIndex, NCElement, Theta, ThetaMatrix, TruncationSpec};
use ncpsi::elliptic::{laplace_beltrami, weighted_laplacian_matrix, ParametrixJet, RiemannianMetric};
use ncpsi::fit::fit_log_log;
use ncpsi::psido::{
    build_matrix, compress_matrix, derivation_matrix, exact_sharp_at, sharp_expansion, star_expansion, DerivedSymbol, ExactSharp, PsiDO,
};
use ncpsi::symbols::{ClassicalSymbol, DerivativeOptions, OriginConvention, LatticeSymbol, PolynomialSymbol, ProfileSymbol, ScalarProfile, Symbol, SymbolOrder};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn theta3() -> Theta {
    ThetaMatrix::from_rows(&[vec![0.0, 0.31, -0.17], vec![-0.31, 0.0, 0.58], vec![0.17, -0.58, 0.0]])
        .unwrap()
        .into_shared()
}

/// Normal-orders the word `U^k U^l` one adjacent transposition at a time
/// using `U_l^a U_j^b = e^{2πi θ_jl a b} U_j^b U_l^a` for `j < l`, and
/// returns the accumulated phase.
fn reordering_phase(theta: &ThetaMatrix, k: &[i32], l: &[i32]) -> Complex64 {
    let mut word: Vec<(usize, i32)> = Vec::new();
    for m in [k, l] {
        for (j, &e) in m.iter().enumerate() {
            for _ in 0..e.unsigned_abs() {
                word.push((j, e.signum()));
            }
        }
    }
    let mut turns = 0.0;
    for i in 0..word.len() {
        for p in 0..word.len() - 1 - i {
            let (gl, a) = word[p];
            let (gj, b) = word[p + 1];
            if gj < gl {
                turns += theta.get(gj, gl) * (a * b) as f64;
                word.swap(p, p + 1);
            }
        }
    }
    Complex64::from_polar(1.0, 2.0 * PI * turns)
}

#[test]
fn product_phase_matches_reordering_oracle() {
    let th = theta3();
    let range = -2..=2;
    for k0 in range.clone() {
        for k1 in range.clone() {
            for l1 in range.clone() {
                for l2 in range.clone() {
                    let k = [k0, k1, -1];
                    let l = [1, l1, l2];
                    let prod = NCElement::monomial(&k, c(1.0), &th)
                        .unwrap()
                        .try_mul(&NCElement::monomial(&l, c(1.0), &th).unwrap())
                        .unwrap();
                    let sum = Mode::from_slice(&[k[0] + l[0], k[1] + l[1], k[2] + l[2]]);
                    let got = prod.coeff(&sum);
                    assert_eq!(prod.len(), 1);
                    assert!((got - reordering_phase(&th, &k, &l)).norm() < 1e-13, "k={k:?} l={l:?}");
                }
            }
        }
    }
}

#[test]
fn generator_relation_in_two_dimensions() {
    let th = ThetaMatrix::uniform(2, 0.23).into_shared();
    let prod = NCElement::generator(1, &th).try_mul(&NCElement::generator(0, &th)).unwrap();
    let expected = Complex64::from_polar(1.0, 2.0 * PI * 0.23);
    assert!((prod.coeff(&Mode::from_slice(&[1, 1])) - expected).norm() < 1e-15);
}

#[test]
fn monomial_times_its_negative_is_a_unit_phase() {
    let th = theta3();
    let k = [2, -1, 3];
    let p = NCElement::monomial(&k, c(1.0), &th)
        .unwrap()
        .try_mul(&NCElement::monomial(&[-2, 1, -3], c(1.0), &th).unwrap())
        .unwrap();
    assert_eq!(p.len(), 1);
    assert!((p.tau().norm() - 1.0).abs() < 1e-15);
}

#[test]
fn commutative_product_is_convolution() {
    let th = ThetaMatrix::zero(2).into_shared();
    let u = NCElement::from_coeffs(
        &th,
        vec![(Mode::from_slice(&[0, 0]), c(2.0)), (Mode::from_slice(&[1, -1]), Complex64::new(1.0, -3.0))],
    )
    .unwrap();
    let v = NCElement::from_coeffs(
        &th,
        vec![(Mode::from_slice(&[-1, 1]), c(4.0)), (Mode::from_slice(&[2, 0]), Complex64::new(0.0, 0.5))],
    )
    .unwrap();
    let uv = u.try_mul(&v).unwrap();
    assert_eq!(uv.coeff(&Mode::from_slice(&[0, 0])), Complex64::new(4.0, -12.0));
    assert_eq!(uv.coeff(&Mode::from_slice(&[-1, 1])), c(8.0));
    assert_eq!(uv.coeff(&Mode::from_slice(&[2, 0])), Complex64::new(0.0, 1.0));
    assert_eq!(uv.coeff(&Mode::from_slice(&[3, -1])), Complex64::new(1.5, 0.5));
    assert_eq!(uv.len(), 4);
}

#[test]
fn geometric_series_inverse() {
    let th = ThetaMatrix::uniform(2, 0.4).into_shared();
    let eps = 0.2;
    let u = &NCElement::one(&th) + &NCElement::generator(0, &th).scale(c(eps));
    let trunc = TruncationSpec::new(30, 1).unwrap();
    let inv = ncpsi::algebra::inverse_element(&u, &trunc, &Default::default()).unwrap();
    for m in 0..12 {
        let got = inv.coeff(&Mode::from_slice(&[m, 0]));
        assert!((got - c((-eps).powi(m))).norm() < 1e-10, "m = {m}");
    }
}

/// Fourier coefficients of a smooth function on the circle by the
/// trapezoid rule, which is spectrally accurate for periodic data.
fn circle_coeffs(f: impl Fn(f64) -> Complex64, modes: i32) -> Vec<(i32, Complex64)> {
    let m = 512;
    (-modes..=modes)
        .map(|k| {
            let s: Complex64 = (0..m)
                .map(|j| {
                    let x = 2.0 * PI * j as f64 / m as f64;
                    f(x) * Complex64::from_polar(1.0, -(k as f64) * x)
                })
                .sum();
            (k, s / m as f64)
        })
        .collect()
}

#[test]
fn laplace_beltrami_matches_commutative_oracle() {
    let th = ThetaMatrix::zero(2).into_shared();
    let c0 = 0.2;
    let trunc = TruncationSpec::new(30, 2).unwrap();
    let metric = RiemannianMetric::cosine_bump(&th, 0, c0, trunc).unwrap();
    let lb = laplace_beltrami(&metric, 0.0).unwrap();
    let g = move |x: f64| 1.0 + 2.0 * c0 * x.cos();
    let dg = move |x: f64| -2.0 * c0 * x.sin();
    let expect = |alpha: [u32; 2], f: Box<dyn Fn(f64) -> Complex64>| {
        let coeffs = circle_coeffs(f, 20);
        let got = lb.coefficient(&MultiIndex::from_slice(&alpha)).cloned().unwrap_or_else(|| NCElement::zero(&th));
        for (k, v) in coeffs {
            let w = got.coeff(&Mode::from_slice(&[k, 0]));
            assert!((w - v).norm() < 1e-11, "alpha {alpha:?} mode {k}: {w} vs {v}");
        }
    };
    // ξ_1² coefficient g^{11} = 1/g, ξ_2² coefficient 1.
    expect([2, 0], Box::new(move |x| c(1.0 / g(x))));
    expect([0, 2], Box::new(|_| c(1.0)));
    // ξ_1 coefficient ν^{-1} δ_1(ν g^{11}) with δ_1 = −i d/dx and ν = √g.
    expect([1, 0], Box::new(move |x| Complex64::new(0.0, 0.5) * dg(x) / (g(x) * g(x))));
    expect([0, 1], Box::new(|_| c(0.0)));
    expect([1, 1], Box::new(|_| c(0.0)));
}

#[test]
fn commutator_with_derivation_is_derived_symbol() {
    let th = ThetaMatrix::uniform(2, 0.29).into_shared();
    let a = &NCElement::generator(0, &th) + &NCElement::monomial(&[1, -1], c(0.3), &th).unwrap();
    let rho: Arc<dyn Symbol> = Arc::new(ProfileSymbol::scalar_times(ScalarProfile::japanese(-1.0), a, SymbolOrder::real(-1.0)));
    let trunc = TruncationSpec::new(9, 2).unwrap();
    let m = build_matrix(&PsiDO::new(rho.clone()), &trunc).unwrap();
    for j in 0..2 {
        let d = derivation_matrix(&th, &trunc, j);
        let lhs = d.matrix().mul(m.matrix()).unwrap().sub(&m.matrix().mul(d.matrix()).unwrap()).unwrap();
        let derived = PsiDO::new(Arc::new(DerivedSymbol::new(rho.clone(), MultiIndex::unit(2, j))));
        let rhs = build_matrix(&derived, &trunc).unwrap();
        let idx = m.window_indices(trunc.inner_radius());
        let diff = lhs.restrict(&idx, &idx).sub(&rhs.matrix().restrict(&idx, &idx)).unwrap();
        assert!(diff.max_abs() < 1e-14, "j = {j}: {}", diff.max_abs());
    }
}

#[test]
fn lattice_values_determine_the_operator() {
    let th = ThetaMatrix::uniform(2, 0.29).into_shared();
    let b = NCElement::generator(1, &th);
    let lap = PolynomialSymbol::laplacian(&th);
    let lap2 = lap.clone();
    let bb = b.clone();
    let wiggled = LatticeSymbol::new(&th, SymbolOrder::real(2.0), 1, move |xi| {
        let s = (PI * xi[0]).sin() * (PI * xi[1]).sin();
        lap2.eval(xi)?.try_add(&bb.scale(c(s)))
    });
    let trunc = TruncationSpec::new(8, 1).unwrap();
    let m1 = build_matrix(&PsiDO::from_symbol(lap.clone()), &trunc).unwrap();
    let m2 = build_matrix(&PsiDO::from_symbol(wiggled.clone()), &trunc).unwrap();
    assert!(m1.distance_on(&m2, trunc.radius).unwrap() < 1e-12);
    assert!(wiggled.eval(&[0.5, 0.5]).unwrap().distance(&lap.eval(&[0.5, 0.5]).unwrap()) > 0.9);
}

#[test]
fn composition_matches_exact_symbol_in_three_dimensions() {
    let th = theta3();
    let a = &NCElement::generator(2, &th) + &NCElement::monomial(&[1, 0, -1], c(0.5), &th).unwrap();
    let b = NCElement::generator(0, &th).involution();
    let r1: Arc<dyn Symbol> = Arc::new(PolynomialSymbol::laplacian(&th).plus(&PolynomialSymbol::constant(a)).unwrap());
    let r2: Arc<dyn Symbol> = Arc::new(ProfileSymbol::scalar_times(ScalarProfile::japanese(-2.0), b, SymbolOrder::real(-2.0)));
    let trunc = TruncationSpec::new(5, 2).unwrap();
    let m1 = build_matrix(&PsiDO::new(r1.clone()), &trunc).unwrap();
    let m2 = build_matrix(&PsiDO::new(r2.clone()), &trunc).unwrap();
    let prod = m1.compose(&m2).unwrap();
    let exact = build_matrix(&PsiDO::new(Arc::new(ExactSharp::new(r1, r2).unwrap())), &trunc).unwrap();
    assert!(prod.distance_on(&exact, prod.trusted_radius()).unwrap() < 1e-11);
}

#[test]
fn expansion_of_polynomial_symbol_is_exact() {
    let th = ThetaMatrix::uniform(2, 0.41).into_shared();
    let a = &NCElement::generator(0, &th) + &NCElement::generator(1, &th).scale(c(-0.7));
    let mut p = PolynomialSymbol::laplacian(&th);
    p.add_term(MultiIndex::unit(2, 0), a.clone()).unwrap();
    let b = &NCElement::monomial(&[1, 1], c(1.0), &th).unwrap() + &NCElement::generator(0, &th).involution();
    let q = ProfileSymbol::scalar_times(ScalarProfile::japanese(-1.0), b, SymbolOrder::real(-1.0));
    let opts = DerivativeOptions::default();
    for r in [1, 4, 9] {
        for k in shell_modes(2, r) {
            let exact = exact_sharp_at(&p, &q, &k).unwrap();
            let expanded = sharp_expansion(&p, &q, 3, &k.to_f64(), &opts).unwrap();
            assert!(exact.distance(&expanded) < 1e-10 * (1.0 + exact.norm()), "k = {k:?}");
        }
    }
}

#[test]
fn star_expansion_error_decays_at_high_frequency() {
    let th = ThetaMatrix::uniform(2, 0.37).into_shared();
    let a = &NCElement::generator(0, &th) + &NCElement::generator(0, &th).involution();
    let rho = ProfileSymbol::scalar_times(ScalarProfile::japanese(-2.0), a, SymbolOrder::real(-2.0));
    let opts = DerivativeOptions::default();
    let trunc = TruncationSpec::new(40, 1).unwrap();
    let adj = build_matrix(&PsiDO::from_symbol(rho.clone()), &trunc).unwrap().adjoint();
    // Exact adjoint symbol at k: the column of M^† at k, read back as an element times (U^k)^{-1}.
    let exact_star = |k: &Mode| {
        let basis = adj.basis();
        let col = basis.index_of(k).unwrap();
        let v: Vec<Complex64> = (0..basis.len()).map(|i| adj.matrix().get(i, col)).collect();
        basis
            .to_element(&v, &th)
            .try_mul(&ncpsi::algebra::monomial_inverse(k, &th))
            .unwrap()
    };
    let errs: Vec<Vec<f64>> = [8, 16, 32]
        .iter()
        .map(|&r| {
            let k = Mode::from_slice(&[r, 0]);
            let exact = exact_star(&k);
            (1..=3)
                .map(|n| star_expansion(&rho, n, &k.to_f64(), &opts).unwrap().distance(&exact))
                .collect()
        })
        .collect();
    for n in 0..3 {
        let slope = (errs[2][n] / errs[0][n]).log2() / 2.0;
        assert!(slope < -2.0 - (n as f64 + 1.0) + 0.3, "N = {}: slope {slope}, errors {errs:?}", n + 1);
    }
}

#[test]
fn lambda_group_law() {
    let th = ThetaMatrix::uniform(2, 0.29).into_shared();
    let trunc = TruncationSpec::new(7, 1).unwrap();
    let lam = |s: f64| build_matrix(&PsiDO::from_symbol(ProfileSymbol::japanese(&th, s)), &trunc).unwrap();
    let prod = lam(1.5).compose(&lam(-0.5)).unwrap();
    assert!(prod.distance_on(&lam(1.0), trunc.radius).unwrap() < 1e-12);
    let id = lam(0.7).compose(&lam(-0.7)).unwrap();
    assert!(id.distance_on(&lam(0.0), trunc.radius).unwrap() < 1e-13);
}

#[test]
fn weighted_laplacian_is_hermitian_and_equals_nu_times_laplace_beltrami() {
    let theta = ThetaMatrix::uniform(2, 0.37).into_shared();
    let trunc = TruncationSpec::new(20, 2).unwrap();
    let metric = RiemannianMetric::cosine_bump(&theta, 0, 0.2, trunc).unwrap();
    let weighted = weighted_laplacian_matrix(&metric, &trunc).unwrap();
    let scale = weighted.matrix().max_abs();
    assert!(weighted.matrix().hermitian_defect() <= 1e-12 * scale);

    let lb = compress_matrix(&PsiDO::new(Arc::new(laplace_beltrami(&metric, 0.0).unwrap())), &trunc).unwrap();
    let nu = compress_matrix(&PsiDO::new(Arc::new(ProfileSymbol::constant(metric.nu().clone()))), &trunc).unwrap();
    let w = 4;
    let product = nu.compose(&lb).unwrap().restrict(w);
    assert!(product.sub(&weighted.restrict(w)).unwrap().max_abs() <= 1e-9 * scale);
    // The unweighted operator is not symmetric in the flat inner product.
    assert!(lb.restrict(w).hermitian_defect() > 1e-3);
}

#[test]
fn left_and_right_parametrix_residuals_both_decay() {
    let theta = ThetaMatrix::uniform(2, 0.37).into_shared();
    let trunc = TruncationSpec::new(28, 2).unwrap();
    let metric = RiemannianMetric::cosine_bump(&theta, 0, 0.2, trunc).unwrap();
    let rho = ClassicalSymbol::from_polynomial(&laplace_beltrami(&metric, 1e-17).unwrap());
    let jet = Arc::new(ParametrixJet::new(rho.clone(), 2, trunc).unwrap());
    let sigma = jet.truncated(2, OriginConvention::Excise);
    let one = NCElement::one(&theta);
    let (mut right, mut left) = (Vec::new(), Vec::new());
    for r in [4u32, 8, 16, 32] {
        let (mut wr, mut wl): (f64, f64) = (0.0, 0.0);
        for k in shell_modes(2, r) {
            wr = wr.max(exact_sharp_at(&rho, &sigma, &k).unwrap().try_sub(&one).unwrap().norm());
            wl = wl.max(exact_sharp_at(&sigma, &rho, &k).unwrap().try_sub(&one).unwrap().norm());
        }
        right.push((r as f64, wr));
        left.push((r as f64, wl));
    }
    assert!(fit_log_log(&right).unwrap().exponent <= -1.5);
    assert!(fit_log_log(&left).unwrap().exponent <= -1.5);
}
