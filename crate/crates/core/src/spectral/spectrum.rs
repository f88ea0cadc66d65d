use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{BoxBasis, NCElement, Theta, TruncationSpec};
use crate::error::{Error, Result};
use crate::fit::{fit_log_log, SlopeFit};
use crate::linalg::SparseMatrix;
use crate::psido::{build_matrix, OperatorMatrix, PsiDO};

/// `Γ(x)` for positive integers and half-integers.
fn gamma(x: f64) -> f64 {
    let twice = (2.0 * x).round();
    assert!((2.0 * x - twice).abs() < 1e-12 && x > 0.0, "gamma needs a positive half-integer");
    let odd = twice as i64 % 2 == 1;
    let mut acc = if odd { std::f64::consts::PI.sqrt() } else { 1.0 };
    let mut y = if odd { 0.5 } else { 1.0 };
    while y < x - 1e-12 {
        acc *= y;
        y += 1.0;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMode {
    /// Symmetric eigensolver on the Hermitian part.
    Hermitian,
    /// Complex Schur form.
    General,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Eigenvalues sorted by real part, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub radius: u32,
    /// Radius of the window whose submatrix was diagonalized.
    pub window: u32,
    /// Eigenvalues above this bound are truncation artifacts.
    pub validity_cut: Option<f64>,
    pub solver: String,
    /// Relative size of `M − M^†` on the window.
    pub hermitian_defect: f64,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<NCElement>>,
}

impl SpectrumResult {
    pub fn real_parts(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Rotates `v` so that its first coefficient above the noise level is real
/// and positive.
fn normalize_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|c| c.norm() > 1e-10 * max) {
        let rot = first.conj() / first.norm();
        for c in v.iter_mut() {
            *c *= rot;
        }
    }
}

/// Validity bound `W^m` for diagonal matrices and `(W/2)^m` otherwise,
/// where `W` is the window radius and `m > 0` the order.
pub fn validity_cut(window: u32, order: f64, diagonal: bool) -> Option<f64> {
    if order <= 0.0 {
        return None;
    }
    let w = if diagonal { window as f64 } else { window as f64 / 2.0 };
    Some(w.powf(order))
}

/// Eigenvalues of the trusted-window submatrix of `P`.
pub fn spectrum(p: &PsiDO, trunc: &TruncationSpec, mode: SpectrumMode, vectors: bool) -> Result<SpectrumResult> {
    let op = build_matrix(p, trunc)?;
    spectrum_of_matrix(&op, p.order().m, mode, vectors)
}

/// Eigenvalues of the trusted-window submatrix of an operator matrix,
/// solved block by block.
pub fn spectrum_of_matrix(op: &OperatorMatrix, order: f64, mode: SpectrumMode, vectors: bool) -> Result<SpectrumResult> {
    let window = op.trusted_radius();
    let idx = op.window_indices(window);
    let m = op.matrix().restrict(&idx, &idx);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let hermitian_defect = m.hermitian_defect() / scale;
    let diagonal = m.is_diagonal();
    let win_basis = BoxBasis::new(op.theta().dim(), window);
    let blocks = m.components();
    let solved: Vec<Result<(Vec<Complex64>, Vec<Vec<(usize, Complex64)>>)>> = blocks
        .par_iter()
        .map(|block| {
            let dense = m.restrict(block, block).to_dense();
            match mode {
                SpectrumMode::Hermitian => {
                    let eig = SymmetricEigen::new((&dense + dense.adjoint()).scale(0.5));
                    let vals = eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                    let vecs = if vectors {
                        (0..block.len())
                            .map(|c| block.iter().copied().zip(eig.eigenvectors.column(c).iter().copied()).collect())
                            .collect()
                    } else {
                        Vec::new()
                    };
                    Ok((vals, vecs))
                }
                SpectrumMode::General => {
                    let vals = nalgebra::linalg::Schur::try_new(dense, f64::EPSILON, 0)
                        .ok_or_else(|| Error::SolverFailure("Schur iteration did not converge".into()))?
                        .eigenvalues()
                        .map(|v| v.iter().copied().collect::<Vec<_>>())
                        .ok_or_else(|| Error::SolverFailure("complex eigenvalues unavailable".into()))?;
                    Ok((vals, Vec::new()))
                }
            }
        })
        .collect();
    let mut pairs: Vec<(Complex64, Option<Vec<(usize, Complex64)>>)> = Vec::new();
    for r in solved {
        let (vals, vecs) = r?;
        if vecs.is_empty() {
            pairs.extend(vals.into_iter().map(|v| (v, None)));
        } else {
            pairs.extend(vals.into_iter().zip(vecs).map(|(v, e)| (v, Some(e))));
        }
    }
    pairs.sort_by(|a, b| cmp_complex(&a.0, &b.0));
    let eigenvectors = if vectors && mode == SpectrumMode::Hermitian {
        Some(
            pairs
                .iter()
                .map(|(_, e)| {
                    let mut dense = vec![Complex64::default(); idx.len()];
                    for &(i, c) in e.as_ref().expect("vectors requested") {
                        dense[i] = c;
                    }
                    normalize_phase(&mut dense);
                    win_basis.to_element(&dense, op.theta())
                })
                .collect(),
        )
    } else {
        None
    };
    let solver = match mode {
        SpectrumMode::Hermitian => "symmetric-eigen",
        SpectrumMode::General => "complex-schur",
    };
    Ok(SpectrumResult {
        eigenvalues: pairs.into_iter().map(|p| p.0).collect(),
        radius: op.trunc().radius,
        window,
        validity_cut: validity_cut(window, order, diagonal),
        solver: solver.into(),
        hermitian_defect,
        eigenvectors,
    })
}

/// Generalized Hermitian problem `A x = λ B x` with `B` positive definite,
/// reduced through the Cholesky factor of `B` on each block.
pub fn generalized_spectrum(
    a: &SparseMatrix,
    b: &SparseMatrix,
    theta: &Theta,
    window_basis: &BoxBasis,
    order: f64,
    vectors: bool,
) -> Result<SpectrumResult> {
    let n = a.nrows();
    let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
    for (i, j, v) in a.triplets().chain(b.triplets()) {
        cols[j].push((i, Complex64::new(v.norm() + 1.0, 0.0)));
    }
    let pattern = SparseMatrix::from_columns(n, cols);
    let blocks = pattern.components();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let hermitian_defect = a.hermitian_defect() / scale;
    let solved: Vec<Result<Vec<(f64, Vec<(usize, Complex64)>)>>> = blocks
        .par_iter()
        .map(|block| {
            let ad = a.restrict(block, block).to_dense();
            let bd = b.restrict(block, block).to_dense();
            let ah = (&ad + ad.adjoint()).scale(0.5);
            let bh = (&bd + bd.adjoint()).scale(0.5);
            let chol = bh
                .cholesky()
                .ok_or_else(|| Error::SolverFailure("weight matrix is not positive definite".into()))?;
            let l = chol.l();
            let linv = l
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::SolverFailure("singular Cholesky factor".into()))?;
            let c: DMatrix<Complex64> = &linv * ah * linv.adjoint();
            let eig = SymmetricEigen::new((&c + c.adjoint()).scale(0.5));
            let out = (0..block.len())
                .map(|j| {
                    let vec = if vectors {
                        let y: DVector<Complex64> = eig.eigenvectors.column(j).into_owned();
                        let x = linv.adjoint() * y;
                        let norm = x.norm();
                        block.iter().copied().zip(x.iter().map(|c| c / norm)).collect()
                    } else {
                        Vec::new()
                    };
                    (eig.eigenvalues[j], vec)
                })
                .collect();
            Ok(out)
        })
        .collect();
    let mut pairs = Vec::with_capacity(n);
    for r in solved {
        pairs.extend(r?);
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let eigenvectors = vectors.then(|| {
        pairs
            .iter()
            .map(|(_, e)| {
                let mut dense = vec![Complex64::default(); n];
                for &(i, c) in e {
                    dense[i] = c;
                }
                normalize_phase(&mut dense);
                window_basis.to_element(&dense, theta)
            })
            .collect()
    });
    Ok(SpectrumResult {
        eigenvalues: pairs.iter().map(|p| Complex64::new(p.0, 0.0)).collect(),
        radius: window_basis.radius(),
        window: window_basis.radius(),
        validity_cut: validity_cut(window_basis.radius(), order, false),
        solver: "cholesky-reduced-symmetric-eigen".into(),
        hermitian_defect,
        eigenvectors,
    })
}

/// `c_n = π^{n/2} / Γ(n/2 + 1)`, the volume of the unit ball.
pub fn weyl_constant(n: usize) -> f64 {
    std::f64::consts::PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0 + 1.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylReport {
    pub lambda_cut: f64,
    pub count: usize,
    /// `N(λ) / (c_n λ^{n/2})`; NaN when `λ = 0`.
    pub ratio: f64,
    pub degenerate: bool,
}

/// Counting function against the Weyl prediction.
pub fn weyl_ratio(spec: &SpectrumResult, n: usize, lambda_cut: f64) -> Result<WeylReport> {
    if let Some(cut) = spec.validity_cut {
        if lambda_cut > cut {
            return Err(Error::TruncationEdge { cut: lambda_cut, limit: cut });
        }
    }
    let count = spec.eigenvalues.iter().filter(|z| z.re <= lambda_cut).count();
    let predicted = weyl_constant(n) * lambda_cut.powf(n as f64 / 2.0);
    let degenerate = predicted == 0.0;
    let ratio = if degenerate { f64::NAN } else { count as f64 / predicted };
    Ok(WeylReport { lambda_cut, count, ratio, degenerate })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchattenReport {
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    /// Fit of `μ_k` against `k` (1-based) over the requested range.
    pub fit: SlopeFit,
}

/// Singular values of the trusted-window matrix of a negative-order
/// operator with a power-law fit over `fit_range` (inclusive, 1-based).
pub fn schatten_slope(p: &PsiDO, trunc: &TruncationSpec, fit_range: (usize, usize)) -> Result<SchattenReport> {
    let m = p.order().m;
    if m >= 0.0 {
        return Err(Error::InvalidSymbol(format!("singular value slope needs negative order, got {m}")));
    }
    let op = build_matrix(p, trunc)?;
    let idx = op.window_indices(op.trusted_radius());
    let mat = op.matrix().restrict(&idx, &idx);
    let blocks = mat.components();
    let per_block: Vec<Vec<f64>> = blocks
        .par_iter()
        .map(|b| mat.restrict(b, b).to_dense().singular_values().iter().copied().collect())
        .collect();
    let mut sv: Vec<f64> = per_block.into_iter().flatten().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let (lo, hi) = fit_range;
    if lo == 0 || hi > sv.len() || lo >= hi {
        return Err(Error::InvalidSymbol(format!(
            "fit range [{lo}, {hi}] outside 1..={}",
            sv.len()
        )));
    }
    let data: Vec<(f64, f64)> = (lo..=hi).map(|k| (k as f64, sv[k - 1])).collect();
    let fit = fit_log_log(&data)?;
    Ok(SchattenReport { singular_values: sv, fit })
}

/// Fit of the shell maxima `max_{|k|_∞ = R} |v_k|` against `R` for
/// `R ≥ min_radius`. Degenerate when fewer than two shells are populated.
pub fn smoothness_decay(v: &NCElement, min_radius: u32) -> SlopeFit {
    let mut shells: std::collections::BTreeMap<u32, f64> = Default::default();
    for (k, c) in v.iter() {
        let r = k.norm_inf();
        if r >= min_radius.max(1) {
            let e = shells.entry(r).or_insert(0.0);
            *e = e.max(c.norm());
        }
    }
    let data: Vec<(f64, f64)> = shells.into_iter().map(|(r, m)| (r as f64, m)).collect();
    fit_log_log(&data).unwrap_or_else(|_| SlopeFit::degenerate(data.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Mode, ThetaMatrix};
    use crate::symbols::{PolynomialSymbol, ProfileSymbol};

    #[test]
    fn gamma_and_weyl_constant() {
        assert!((gamma(3.0) - 2.0).abs() < 1e-15);
        assert!((gamma(2.5) - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((weyl_constant(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((weyl_constant(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn flat_spectrum_is_lattice_norms() {
        let theta = ThetaMatrix::uniform(2, 0.31).into_shared();
        let p = PsiDO::from_symbol(PolynomialSymbol::laplacian(&theta));
        let spec = spectrum(&p, &TruncationSpec::new(10, 0).unwrap(), SpectrumMode::Hermitian, true).unwrap();
        let mut expected: Vec<f64> = BoxBasis::new(2, 10).modes().map(|k| k.norm_sq()).collect();
        expected.sort_by(f64::total_cmp);
        assert_eq!(spec.real_parts(), expected);
        assert_eq!(spec.validity_cut, Some(100.0));
        let rep = weyl_ratio(&spec, 2, 0.0).unwrap();
        assert!(rep.degenerate && rep.count == 1);
        assert!(weyl_ratio(&spec, 2, 200.0).is_err());
        let v0 = &spec.eigenvectors.as_ref().unwrap()[0];
        assert_eq!(v0.coeff(&Mode::zero(2)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn decay_fits() {
        let theta = ThetaMatrix::zero(2).into_shared();
        let u = NCElement::monomial(&[3, 1], Complex64::new(1.0, 0.0), &theta).unwrap();
        assert!(smoothness_decay(&u, 1).degenerate);
        let v = NCElement::from_coeffs(
            &theta,
            BoxBasis::new(2, 40).modes().map(|k| {
                let w = (1.0 + k.norm_sq()).powi(-4);
                (k, Complex64::new(w, 0.0))
            }).collect::<Vec<_>>(),
        )
        .unwrap();
        let fit = smoothness_decay(&v, 4);
        assert!((fit.exponent + 8.0).abs() < 0.2, "{}", fit.exponent);
    }

    #[test]
    fn schatten_scaling_invariance() {
        let theta = ThetaMatrix::zero(2).into_shared();
        let trunc = TruncationSpec::new(12, 0).unwrap();
        let lam = PsiDO::from_symbol(ProfileSymbol::japanese(&theta, -2.0));
        let a = schatten_slope(&lam, &trunc, (10, 100)).unwrap();
        let scaled = PsiDO::from_symbol(crate::symbols::ScaledSymbol::new(
            Complex64::new(0.0, 3.0),
            std::sync::Arc::new(ProfileSymbol::japanese(&theta, -2.0)),
        ));
        let b = schatten_slope(&scaled, &trunc, (10, 100)).unwrap();
        assert!((a.fit.exponent - b.fit.exponent).abs() < 1e-12);
        assert!(schatten_slope(&PsiDO::from_symbol(PolynomialSymbol::laplacian(&theta)), &trunc, (1, 2)).is_err());
    }
}
