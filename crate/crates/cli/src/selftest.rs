//! Small fixed-seed invariant suites over every library module.

use std::sync::Arc;
use std::time::Instant;

use anyhow::Result;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ncpsi::algebra::{
    algebra_identities, inverse_element, left_mult_matrix, random_element, shell_modes, Mode, MultiIndex, NCElement,
    Theta, ThetaMatrix, TruncationSpec,
};
use ncpsi::defaults::Defaults;
use ncpsi::elliptic::{is_elliptic, ParametrixJet};
use ncpsi::io::{element_to_string, parse_element};
use ncpsi::psido::{build_matrix, derivation_matrix, exact_sharp_at, sharp_expansion, DerivedSymbol, ExactSharp, PsiDO};
use ncpsi::spectral::{duality_maximizer, lambda_apply, pairing, sobolev_norm, spectrum, SpectrumMode};
use ncpsi::symbols::{sphere_samples, ClassicalSymbol, PolynomialSymbol, ProfileSymbol, ScalarProfile, Symbol, SymbolOrder};
use ncpsi::trace::{trace_lattice, trace_matrix_diag, MeyerWindow};

#[derive(Debug, Clone, Serialize)]
pub struct SelftestEntry {
    pub module: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub wall_ms: f64,
}

struct Ctx {
    theta2: Theta,
    theta3: Theta,
    seed: u64,
    tol: f64,
}

type Outcome = Result<(bool, String)>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn within(name: &str, value: f64, tol: f64) -> (bool, String) {
    (value <= tol, format!("{name} {value:.2e} (tol {tol:.0e})"))
}

fn identities(ctx: &Ctx) -> Result<Vec<(String, bool, String)>> {
    let mut out = Vec::new();
    for th in [&ctx.theta2, &ctx.theta3] {
        for chk in algebra_identities(th, 5, 10, 8, ctx.seed, ctx.tol)? {
            out.push((
                format!("{} (n={})", chk.name, th.dim()),
                chk.passed,
                format!("error {:.2e} (tol {:.0e})", chk.error, chk.tol),
            ));
        }
    }
    Ok(out)
}

fn generator_relation(ctx: &Ctx) -> Outcome {
    let th = &ctx.theta2;
    let prod = NCElement::generator(1, th).try_mul(&NCElement::generator(0, th))?;
    let expected = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * th.get(0, 1));
    Ok(within("phase error", (prod.coeff(&Mode::from_slice(&[1, 1])) - expected).norm(), 1e-15))
}

fn geometric_inverse(ctx: &Ctx) -> Outcome {
    let th = &ctx.theta2;
    let u = &NCElement::one(th) + &NCElement::generator(0, th).scale(c(0.2));
    let inv = inverse_element(&u, &TruncationSpec::new(24, 1)?, &Default::default())?;
    let err = (0..8).map(|m| (inv.coeff(&Mode::from_slice(&[m, 0])) - c((-0.2f64).powi(m))).norm()).fold(0.0, f64::max);
    Ok(within("series error", err, 1e-10))
}

fn matrix_multiplicative(ctx: &Ctx) -> Outcome {
    let th = &ctx.theta2;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let u = random_element(th, 1, 4, &mut rng);
    let v = random_element(th, 1, 4, &mut rng);
    let wide = TruncationSpec::new(5, 2)?;
    let narrow = TruncationSpec::new(5, 1)?;
    let luv = left_mult_matrix(&u.try_mul(&v)?, &wide)?;
    let prod = left_mult_matrix(&u, &narrow)?.mul(&left_mult_matrix(&v, &narrow)?)?;
    let idx = wide.basis(2).window(1);
    let err = luv.restrict(&idx, &idx).sub(&prod.restrict(&idx, &idx))?.max_abs();
    Ok(within("entry error", err, ctx.tol * (1.0 + u.norm() * v.norm())))
}

fn exact_composition(ctx: &Ctx) -> Outcome {
    let th = &ctx.theta2;
    let a = &NCElement::generator(0, th) + &NCElement::generator(0, th).involution();
    let r1: Arc<dyn Symbol> = Arc::new(PolynomialSymbol::laplacian(th).plus(&PolynomialSymbol::constant(a.clone()))?);
    let r2: Arc<dyn Symbol> = Arc::new(ProfileSymbol::scalar_times(ScalarProfile::japanese(-2.0), a, SymbolOrder::real(-2.0)));
    let trunc = TruncationSpec::new(8, 2)?;
    let prod = build_matrix(&PsiDO::new(r1.clone()), &trunc)?.compose(&build_matrix(&PsiDO::new(r2.clone()), &trunc)?)?;
    let exact = build_matrix(&PsiDO::new(Arc::new(ExactSharp::new(r1, r2)?)), &trunc)?;
    Ok(within("distance", prod.distance_on(&exact, prod.trusted_radius())?, 1e-11))
}

fn polynomial_expansion(ctx: &Ctx) -> Outcome {
    let th = &ctx.theta2;
    let mut p = PolynomialSymbol::laplacian(th);
    p.add_term(MultiIndex::unit(2, 0), NCElement::generator(1, th))?;
    let q = ProfileSymbol::constant(&NCElement::generator(0, th) + &NCElement::monomial(&[1, 1], c(0.5), th)?);
    let mut err: f64 = 0.0;
    for k in shell_modes(2, 3) {
        let exact = exact_sharp_at(&p, &q, &k)?;
        err = err.max(exact.distance(&sharp_expansion(&p, &q, 3, &k.to_f64(), &Default::default())?));
    }
    Ok(within("expansion error", err, 1e-10))
}

fn derivation_commutator(ctx: &Ctx) -> Outcome {
    let th = &ctx.theta2;
    let rho: Arc<dyn Symbol> = Arc::new(ProfileSymbol::scalar_times(
        ScalarProfile::japanese(-1.0),
        NCElement::generator(0, th),
        SymbolOrder::real(-1.0),
    ));
    let trunc = TruncationSpec::new(6, 1)?;
    let m = build_matrix(&PsiDO::new(rho.clone()), &trunc)?;
    let d = derivation_matrix(th, &trunc, 0);
    let lhs = d.matrix().mul(m.matrix())?.sub(&m.matrix().mul(d.matrix())?)?;
    let rhs = build_matrix(&PsiDO::new(Arc::new(DerivedSymbol::new(rho, MultiIndex::unit(2, 0)))), &trunc)?;
    let idx = m.window_indices(trunc.inner_radius());
    let err = lhs.restrict(&idx, &idx).sub(&rhs.matrix().restrict(&idx, &idx))?.max_abs();
    Ok(within("commutator error", err, 1e-13))
}

fn flat_parametrix(ctx: &Ctx) -> Outcome {
    let th = &ctx.theta2;
    let jet = ParametrixJet::new(ClassicalSymbol::from_polynomial(&PolynomialSymbol::laplacian(th)), 3, TruncationSpec::new(6, 1)?)?;
    let mut ok = true;
    for k in shell_modes(2, 2) {
        let comps = jet.components_at(&k.to_f64())?;
        ok &= comps[0] == NCElement::scalar(c(1.0 / k.norm_sq()), th) && comps[1..].iter().all(NCElement::is_empty);
    }
    Ok((ok, "jet equals {|ξ|^-2, 0, 0}".to_string()))
}

fn laplacian_elliptic(ctx: &Ctx) -> Outcome {
    let rep = is_elliptic(&PolynomialSymbol::laplacian(&ctx.theta2), &sphere_samples(2, 32, ctx.seed), &TruncationSpec::new(4, 1)?, 1e-8)?;
    Ok((rep.elliptic, format!("min singular value {:.3}", rep.min_singular)))
}

fn flat_spectrum_theta_free(ctx: &Ctx) -> Outcome {
    let trunc = TruncationSpec::new(6, 0)?;
    let zero = ThetaMatrix::zero(2).into_shared();
    let a = spectrum(&PsiDO::from_symbol(PolynomialSymbol::laplacian(&zero)), &trunc, SpectrumMode::Hermitian, false)?;
    let b = spectrum(&PsiDO::from_symbol(PolynomialSymbol::laplacian(&ctx.theta2)), &trunc, SpectrumMode::Hermitian, false)?;
    Ok((a.eigenvalues == b.eigenvalues, format!("{} eigenvalues", a.len())))
}

fn trace_routes(ctx: &Ctx) -> Outcome {
    let th = &ctx.theta2;
    let a = &NCElement::one(th) + &NCElement::generator(1, th).scale(c(0.3));
    let rho = PsiDO::new(Arc::new(ProfileSymbol::scalar_times(ScalarProfile::japanese(-4.0), a, SymbolOrder::real(-4.0))));
    let trunc = TruncationSpec::new(8, 1)?;
    let diag = trace_matrix_diag(&rho, &trunc)?;
    let lattice = trace_lattice(rho.symbol().as_ref(), trunc.inner_radius())?;
    Ok(within("route gap", (diag.value() - lattice.value()).norm(), 1e-13))
}

fn meyer_window(_: &Ctx) -> Outcome {
    let w = MeyerWindow::new(2, 0.05, 1024, 8)?;
    let ch = w.checks();
    let worst = (ch.value_at_zero - 1.0).abs().max(ch.max_at_lattice.abs()).max((ch.integral - 1.0).abs());
    Ok((worst <= 1e-10, format!("φ(0)-1 {:.1e}, max φ(k) {:.1e}, ∫φ-1 {:.1e}", ch.value_at_zero - 1.0, ch.max_at_lattice, ch.integral - 1.0)))
}

fn sobolev(ctx: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let u = random_element(&ctx.theta2, 6, 20, &mut rng);
    let s = 1.25;
    let lam = (sobolev_norm(&lambda_apply(s, &u), 0.0) - sobolev_norm(&u, s)).abs() / sobolev_norm(&u, s);
    let v = duality_maximizer(&u, s);
    let dual = sobolev_norm(&u, -s);
    let gap = (pairing(&u, &v)?.norm() - dual).abs() / dual;
    Ok(within("worst relative error", lam.max(gap), 1e-10))
}

fn element_round_trip(ctx: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let u = random_element(&ctx.theta3, 3, 10, &mut rng);
    let back = parse_element(&element_to_string(&u), &ctx.theta3)?;
    Ok((back == u, format!("{} modes", u.len())))
}

/// Runs every suite. With `phase_fault` the deformation matrices use the
/// corrupted phase hook.
pub fn run(phase_fault: bool) -> Vec<SelftestEntry> {
    let d = Defaults::default();
    let mk = |m: ThetaMatrix| if phase_fault { m.with_phase_fault() } else { m }.into_shared();
    let theta3 = ThetaMatrix::from_rows(&[vec![0.0, 0.31, -0.17], vec![-0.31, 0.0, 0.58], vec![0.17, -0.58, 0.0]])
        .expect("antisymmetric");
    let ctx = Ctx { theta2: mk(ThetaMatrix::uniform(2, 0.37)), theta3: mk(theta3), seed: d.seed, tol: d.algebra_tol };

    let mut out = Vec::new();
    let start = Instant::now();
    match identities(&ctx) {
        Ok(list) => {
            let ms = start.elapsed().as_secs_f64() * 1e3 / list.len().max(1) as f64;
            for (name, passed, detail) in list {
                out.push(SelftestEntry { module: "nc_core", name, passed, detail, wall_ms: ms });
            }
        }
        Err(e) => out.push(SelftestEntry {
            module: "nc_core",
            name: "algebra identities".into(),
            passed: false,
            detail: format!("error: {e}"),
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        }),
    }

    let suites: [(&'static str, &str, fn(&Ctx) -> Outcome); 13] = [
        ("nc_core", "generator relation", generator_relation),
        ("nc_core", "geometric series inverse", geometric_inverse),
        ("nc_core", "left multiplication is multiplicative", matrix_multiplicative),
        ("psido_engine", "matrix product equals exact symbol", exact_composition),
        ("psido_engine", "polynomial expansion is exact", polynomial_expansion),
        ("psido_engine", "derivation commutator", derivation_commutator),
        ("elliptic", "flat parametrix terminates", flat_parametrix),
        ("elliptic", "laplacian is elliptic", laplacian_elliptic),
        ("spectral_sobolev", "flat spectrum is theta-free", flat_spectrum_theta_free),
        ("spectral_sobolev", "Sobolev identities", sobolev),
        ("trace_tools", "matrix diagonal equals lattice sum", trace_routes),
        ("trace_tools", "Meyer window", meyer_window),
        ("cli", "element file round trip", element_round_trip),
    ];
    for (module, name, f) in suites {
        let t = Instant::now();
        let (passed, detail) = f(&ctx).unwrap_or_else(|e| (false, format!("error: {e}")));
        out.push(SelftestEntry { module, name: name.into(), passed, detail, wall_ms: t.elapsed().as_secs_f64() * 1e3 });
    }
    out
}
