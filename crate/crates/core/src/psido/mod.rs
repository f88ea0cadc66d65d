//! Pseudodifferential operators acting on the Fourier basis,
//! `P_ρ u = Σ_k u_k ρ(k) U^k`, and their truncated matrices.

mod expansion;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

pub use expansion::{
    compose_classical, exact_sharp_at, remainder_shell_norms, sharp_expansion, star_expansion,
    DerivedSymbol, ExactSharp, RemainderReport, SharpExpansion, StarExpansion,
};

use crate::algebra::{BoxBasis, Mode, NCElement, Theta, TruncationSpec};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::symbols::{Symbol, SymbolOrder};

#[derive(Clone)]
pub struct PsiDO {
    symbol: Arc<dyn Symbol>,
}

impl std::fmt::Debug for PsiDO {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PsiDO(order {:?})", self.symbol.order())
    }
}

impl PsiDO {
    pub fn new(symbol: Arc<dyn Symbol>) -> Self {
        Self { symbol }
    }

    pub fn from_symbol(symbol: impl Symbol + 'static) -> Self {
        Self::new(Arc::new(symbol))
    }

    pub fn symbol(&self) -> &Arc<dyn Symbol> {
        &self.symbol
    }

    pub fn order(&self) -> SymbolOrder {
        self.symbol.order()
    }

    pub fn theta(&self) -> &Theta {
        self.symbol.theta()
    }

    /// `P u = Σ u_k ρ(k) U^k`
    pub fn apply(&self, u: &NCElement) -> Result<NCElement> {
        let terms: Vec<Result<NCElement>> = u
            .iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|(k, c)| Ok(self.symbol.eval_at(k)?.mul_monomial_right(k).scale(**c)))
            .collect();
        let mut acc = NCElement::zero(self.theta());
        for t in terms {
            acc = acc.try_add(&t?)?;
        }
        Ok(acc)
    }
}

/// Matrix of an operator on the box basis `|k|_∞ ≤ K`.
///
/// Every stored entry is exact. Columns with `|l|_∞ ≤ trusted_radius` are
/// complete images of `U^l`: nothing fell outside the box.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    theta: Theta,
    basis: BoxBasis,
    trunc: TruncationSpec,
    trusted: u32,
    matrix: SparseMatrix,
}

impl OperatorMatrix {
    pub fn new(theta: &Theta, trunc: TruncationSpec, trusted: u32, matrix: SparseMatrix) -> Result<Self> {
        let basis = trunc.basis(theta.dim());
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: matrix.nrows() });
        }
        Ok(Self { theta: theta.clone(), basis, trunc, trusted: trusted.min(trunc.radius), matrix })
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn basis(&self) -> &BoxBasis {
        &self.basis
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn trusted_radius(&self) -> u32 {
        self.trusted
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn entry(&self, row: &Mode, col: &Mode) -> Complex64 {
        match (self.basis.index_of(row), self.basis.index_of(col)) {
            (Some(i), Some(j)) => self.matrix.get(i, j),
            _ => Complex64::default(),
        }
    }

    /// Product `self · other`; its trusted window shrinks by the margins of
    /// both factors.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch { expected: self.basis.len(), got: other.basis.len() });
        }
        let k = self.trunc.radius;
        let trusted = (self.trusted + other.trusted).saturating_sub(k);
        Ok(OperatorMatrix {
            theta: self.theta.clone(),
            basis: self.basis,
            trunc: self.trunc,
            trusted,
            matrix: self.matrix.mul(&other.matrix)?,
        })
    }

    /// Conjugate transpose. Entries are exact, so only the trust of the
    /// columns carries over.
    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix { matrix: self.matrix.adjoint(), ..self.clone() }
    }

    pub fn window_indices(&self, w: u32) -> Vec<usize> {
        self.basis.window(w)
    }

    /// Rows and columns with `|k|_∞ ≤ w`.
    pub fn restrict(&self, w: u32) -> SparseMatrix {
        let idx = self.basis.window(w);
        self.matrix.restrict(&idx, &idx)
    }

    pub fn trusted_block(&self) -> SparseMatrix {
        self.restrict(self.trusted)
    }

    /// Frobenius norm of `self − other` on the window `|k|_∞ ≤ w`.
    pub fn distance_on(&self, other: &OperatorMatrix, w: u32) -> Result<f64> {
        Ok(self.restrict(w).sub(&other.restrict(w))?.frobenius_norm())
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        self.matrix.to_dense()
    }
}

/// Matrix of `P` on the box: column `l` holds the coefficients of
/// `ρ(l) U^l`.
pub fn build_matrix(p: &PsiDO, trunc: &TruncationSpec) -> Result<OperatorMatrix> {
    let support = p.symbol().support_radius();
    if support > trunc.margin {
        return Err(Error::MarginViolation { support, margin: trunc.margin });
    }
    let matrix = box_matrix(p, trunc)?;
    OperatorMatrix::new(p.theta(), *trunc, trunc.inner_radius(), matrix)
}

/// Galerkin compression of `P` onto the box for symbols whose support
/// exceeds the margin. Entries are the same as in [`build_matrix`]; the
/// trusted window is `K` minus the support radius.
pub fn compress_matrix(p: &PsiDO, trunc: &TruncationSpec) -> Result<OperatorMatrix> {
    let trusted = trunc.radius.saturating_sub(p.symbol().support_radius());
    let matrix = box_matrix(p, trunc)?;
    OperatorMatrix::new(p.theta(), *trunc, trusted, matrix)
}

fn box_matrix(p: &PsiDO, trunc: &TruncationSpec) -> Result<SparseMatrix> {
    let theta = p.theta().clone();
    let basis = trunc.basis(theta.dim());
    let cols: Vec<Result<Vec<(usize, Complex64)>>> = (0..basis.len())
        .into_par_iter()
        .map(|j| {
            let l = basis.mode_at(j);
            let value = p.symbol().eval_at(&l)?;
            Ok(value
                .iter()
                .filter_map(|(m, c)| {
                    basis
                        .index_of(&(m + &l))
                        .map(|i| (i, c * theta.pair_phase(m.as_slice(), l.as_slice())))
                })
                .collect())
        })
        .collect();
    let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SparseMatrix::from_columns(basis.len(), cols))
}

/// Matrix of the derivation `δ_j`, `diag(k_j)`.
pub fn derivation_matrix(theta: &Theta, trunc: &TruncationSpec, j: usize) -> OperatorMatrix {
    let basis = trunc.basis(theta.dim());
    let d: Vec<Complex64> = basis.modes().map(|k| Complex64::new(k.as_slice()[j] as f64, 0.0)).collect();
    OperatorMatrix::new(theta, *trunc, trunc.radius, SparseMatrix::from_diagonal(&d)).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{left_mult_matrix, ThetaMatrix};
    use crate::symbols::{PolynomialSymbol, ProfileSymbol};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn laplacian_acts_diagonally() {
        let theta = ThetaMatrix::uniform(2, 0.41).into_shared();
        let p = PsiDO::from_symbol(PolynomialSymbol::laplacian(&theta));
        let u = NCElement::monomial(&[3, -2], c(1.0), &theta).unwrap();
        assert_eq!(p.apply(&u).unwrap(), u.scale(c(13.0)));
        let trunc = TruncationSpec::new(4, 0).unwrap();
        let m = build_matrix(&p, &trunc).unwrap();
        assert!(m.matrix().is_diagonal());
        for (i, k) in m.basis().modes().enumerate() {
            assert_eq!(m.matrix().get(i, i), c(k.norm_sq()));
        }
    }

    #[test]
    fn lambda_and_identity() {
        let theta = ThetaMatrix::uniform(2, 0.2).into_shared();
        let lam = PsiDO::from_symbol(ProfileSymbol::japanese(&theta, 1.5));
        let u = NCElement::monomial(&[1, 2], c(1.0), &theta).unwrap();
        let out = lam.apply(&u).unwrap();
        assert!((out.coeff(&Mode::from_slice(&[1, 2])) - c(6f64.powf(0.75))).norm() < 1e-14);
        let id = PsiDO::from_symbol(PolynomialSymbol::identity(&theta));
        let v = &u + &NCElement::generator(0, &theta);
        assert_eq!(id.apply(&v).unwrap(), v);
    }

    #[test]
    fn constant_symbol_is_left_multiplication() {
        let theta = ThetaMatrix::uniform(2, 0.3).into_shared();
        let a = &NCElement::generator(0, &theta) + &NCElement::monomial(&[1, -1], c(0.5), &theta).unwrap();
        let trunc = TruncationSpec::new(3, 1).unwrap();
        let m = build_matrix(&PsiDO::from_symbol(PolynomialSymbol::constant(a.clone())), &trunc).unwrap();
        assert_eq!(*m.matrix(), left_mult_matrix(&a, &trunc).unwrap());
        for (i, k) in m.basis().modes().enumerate() {
            for (j, l) in m.basis().modes().enumerate() {
                assert!((m.matrix().get(i, j).norm() - a.coeff(&(&k - &l)).norm()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn margin_violation() {
        let theta = ThetaMatrix::zero(2).into_shared();
        let a = NCElement::monomial(&[2, 0], c(1.0), &theta).unwrap();
        let trunc = TruncationSpec::new(4, 1).unwrap();
        let err = build_matrix(&PsiDO::from_symbol(PolynomialSymbol::constant(a)), &trunc).unwrap_err();
        assert!(matches!(err, Error::MarginViolation { support: 2, margin: 1 }));
    }
}
