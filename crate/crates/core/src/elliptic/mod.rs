//! Ellipticity, parametrices, the Laplace-Beltrami operator of a
//! noncommutative metric and elliptic regularity probes.

mod metric;
mod parametrix;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use metric::{laplace_beltrami, weighted_laplacian_matrix, RiemannianMetric};
pub use parametrix::{ParametrixComponent, ParametrixJet, ParametrixSymbol};

use crate::algebra::{dense_random_element, NCElement, ReachableBlock, TruncationSpec};
use crate::error::{Error, Result};
use crate::fit::SlopeFit;
use crate::linalg::{block_solve, gmres, SparseMatrix};
use crate::psido::{build_matrix, PsiDO};
use crate::spectral::{smoothness_decay, sobolev_norm};
use crate::symbols::Symbol;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipticityReport {
    /// Smallest singular value of `L(ρ_q(ξ))` over the samples.
    pub min_singular: f64,
    pub worst_direction: Vec<f64>,
    /// Smallest eigenvalue over the samples when every value is
    /// self-adjoint.
    pub positivity: Option<f64>,
    pub gap: f64,
    pub elliptic: bool,
}

/// Checks invertibility of the principal symbol on unit-sphere samples,
/// using the reachable block of left multiplication on the box.
pub fn is_elliptic(
    principal: &dyn Symbol,
    samples: &[Vec<f64>],
    trunc: &TruncationSpec,
    gap: f64,
) -> Result<EllipticityReport> {
    let mut min_singular = f64::INFINITY;
    let mut worst_direction = Vec::new();
    let mut positivity = Some(f64::INFINITY);
    for xi in samples {
        let v = principal.eval(xi)?;
        let block = ReachableBlock::new(&v, trunc.radius);
        let smin = block.matrix.clone().singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        if smin < min_singular {
            min_singular = smin;
            worst_direction = xi.clone();
        }
        if v.is_self_adjoint(1e-12) {
            let m = &block.matrix;
            let eig = SymmetricEigen::new((m + m.adjoint()).scale(0.5));
            let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            positivity = positivity.map(|p| p.min(lo));
        } else {
            positivity = None;
        }
    }
    Ok(EllipticityReport {
        min_singular,
        worst_direction,
        positivity,
        gap,
        elliptic: min_singular > gap,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    /// `max ‖u‖_{s+m} / (‖Pu‖_s + ‖u‖_t)` over the samples.
    pub constant: f64,
    pub samples: usize,
    pub seed: u64,
    pub radius: u32,
}

/// Random probe of the elliptic estimate
/// `‖u‖_{s+m} ≤ C (‖Pu‖_s + ‖u‖_t)` with complex Gaussian `u` supported on
/// `|k|_∞ ≤ K/2`.
pub fn elliptic_estimate_probe(
    p: &PsiDO,
    s: f64,
    t: f64,
    samples: usize,
    trunc: &TruncationSpec,
    seed: u64,
) -> Result<ProbeReport> {
    let m = p.order().m;
    if t >= s + m {
        return Err(Error::InvalidSymbol(format!("probe needs t < s + m, got t = {t}, s + m = {}", s + m)));
    }
    let radius = trunc.radius / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constant: f64 = 0.0;
    for _ in 0..samples {
        let u = dense_random_element(p.theta(), radius, &mut rng);
        let lhs = sobolev_norm(&u, s + m);
        let rhs = sobolev_norm(&p.apply(&u)?, s) + sobolev_norm(&u, t);
        if rhs > 0.0 {
            constant = constant.max(lhs / rhs);
        }
    }
    Ok(ProbeReport { constant, samples, seed, radius })
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: NCElement,
    /// `‖P u − f‖` on the inner window.
    pub residual: f64,
}

/// Solves the truncated system `M(P) u = f` on the box.
pub fn truncated_solve(p: &PsiDO, f: &NCElement, trunc: &TruncationSpec) -> Result<SolveReport> {
    let op = build_matrix(p, trunc)?;
    let basis = op.basis();
    let b = basis.to_vector(f);
    let x = block_solve(op.matrix(), &b)?;
    let solution = basis.to_element(&x, p.theta());
    let w = trunc.inner_radius();
    let residual = p.apply(&solution)?.restrict(w).distance(&f.restrict(w));
    Ok(SolveReport { solution, residual })
}

/// Coefficient decay of `f` and of the truncated solution of `P u = f`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub data: SlopeFit,
    pub solution: SlopeFit,
    pub residual: f64,
}

pub fn hypoellipticity_check(p: &PsiDO, f: &NCElement, trunc: &TruncationSpec, min_radius: u32) -> Result<RegularityReport> {
    let solved = truncated_solve(p, f, trunc)?;
    let w = trunc.inner_radius();
    Ok(RegularityReport {
        data: smoothness_decay(&f.restrict(w), min_radius),
        solution: smoothness_decay(&solved.solution.restrict(w), min_radius),
        residual: solved.residual,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmresComparison {
    pub plain: Vec<f64>,
    pub preconditioned: Vec<f64>,
}

impl GmresComparison {
    /// Iterations needed to reach `tol`, if reached.
    pub fn iterations(history: &[f64], tol: f64) -> Option<usize> {
        history.iter().position(|&r| r <= tol)
    }
}

/// GMRES on `A x = b` with and without the right preconditioner `M`.
pub fn compare_preconditioning(
    a: &SparseMatrix,
    b: &[Complex64],
    m: &SparseMatrix,
    tol: f64,
    max_iter: usize,
) -> GmresComparison {
    let (_, plain) = gmres(a, b, None, tol, max_iter);
    let (_, preconditioned) = gmres(a, b, Some(m), tol, max_iter);
    GmresComparison { plain, preconditioned }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{Mode, ThetaMatrix};
    use crate::symbols::{sphere_samples, ClassicalSymbol, PolynomialSymbol, ProfileSymbol};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn laplacian_is_elliptic_and_xi1_is_not() {
        let theta = ThetaMatrix::uniform(2, 0.3).into_shared();
        let trunc = TruncationSpec::new(4, 1).unwrap();
        let samples = sphere_samples(2, 64, 0);
        let lap = PolynomialSymbol::laplacian(&theta);
        let rep = is_elliptic(&lap, &samples, &trunc, 1e-8).unwrap();
        assert!(rep.elliptic);
        assert!((rep.positivity.unwrap() - 1.0).abs() < 1e-12);
        let mut xi1 = PolynomialSymbol::new(&theta);
        xi1.add_term(crate::algebra::MultiIndex::unit(2, 0), NCElement::one(&theta)).unwrap();
        assert!(!is_elliptic(&xi1, &samples, &trunc, 1e-8).unwrap().elliptic);
    }

    #[test]
    fn flat_parametrix_terminates() {
        let theta = ThetaMatrix::uniform(2, 0.3).into_shared();
        let rho = ClassicalSymbol::from_polynomial(&PolynomialSymbol::laplacian(&theta));
        let jet = ParametrixJet::new(rho, 4, TruncationSpec::new(8, 2).unwrap()).unwrap();
        let comps = jet.components_at(&[3.0, -1.0]).unwrap();
        assert_eq!(comps[0], NCElement::scalar(c(0.1), &theta));
        assert!(comps[1..].iter().all(NCElement::is_empty));
    }

    #[test]
    fn order_zero_term_enters_sigma_minus_four() {
        let theta = ThetaMatrix::uniform(2, 0.3).into_shared();
        let a = &NCElement::generator(0, &theta) + &NCElement::generator(1, &theta).scale(c(0.5));
        let p = PolynomialSymbol::laplacian(&theta).plus(&PolynomialSymbol::constant(a.clone())).unwrap();
        let jet = ParametrixJet::new(ClassicalSymbol::from_polynomial(&p), 3, TruncationSpec::new(8, 2).unwrap())
            .unwrap();
        let xi = [2.0, 1.0];
        let comps = jet.components_at(&xi).unwrap();
        assert!(comps[1].is_empty());
        let expected = a.scale(c(-1.0 / 25.0));
        assert!(comps[2].distance(&expected) < 1e-15);
    }

    #[test]
    fn probe_of_lambda_is_one() {
        let theta = ThetaMatrix::uniform(2, 0.1).into_shared();
        let lam = PsiDO::new(Arc::new(ProfileSymbol::japanese(&theta, 2.0)));
        let trunc = TruncationSpec::new(8, 1).unwrap();
        let rep = elliptic_estimate_probe(&lam, 0.5, -3.0, 8, &trunc, 7).unwrap();
        assert!(rep.constant <= 1.0 + 1e-12);
    }

    #[test]
    fn diagonal_solve() {
        let theta = ThetaMatrix::uniform(2, 0.2).into_shared();
        let p = PolynomialSymbol::laplacian(&theta).plus(&PolynomialSymbol::identity(&theta)).unwrap();
        let op = PsiDO::new(Arc::new(p));
        let f = NCElement::monomial(&[2, 1], c(1.0), &theta).unwrap();
        let rep = truncated_solve(&op, &f, &TruncationSpec::new(5, 1).unwrap()).unwrap();
        assert!((rep.solution.coeff(&Mode::from_slice(&[2, 1])) - c(1.0 / 6.0)).norm() < 1e-15);
        assert!(rep.residual < 1e-14);
    }
}
