use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::basis::{left_mult_on_box, BoxBasis, TruncationSpec};
use super::element::NCElement;
use super::mode::Mode;
use crate::error::{Error, Result};

/// Where a scalar function stops being holomorphic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchCut {
    None,
    /// Singular at zero only.
    Origin,
    /// Principal branch: the closed negative real half-line.
    NegativeAxis,
}

#[derive(Clone)]
pub enum ScalarFn {
    Identity,
    Sqrt,
    Log,
    Exp,
    Inverse,
    Power(Complex64),
    Custom { f: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>, cut: BranchCut },
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Identity => write!(f, "Identity"),
            ScalarFn::Sqrt => write!(f, "Sqrt"),
            ScalarFn::Log => write!(f, "Log"),
            ScalarFn::Exp => write!(f, "Exp"),
            ScalarFn::Inverse => write!(f, "Inverse"),
            ScalarFn::Power(p) => write!(f, "Power({p})"),
            ScalarFn::Custom { cut, .. } => write!(f, "Custom({cut:?})"),
        }
    }
}

impl ScalarFn {
    pub fn power(p: f64) -> Self {
        ScalarFn::Power(Complex64::new(p, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            ScalarFn::Identity => z,
            ScalarFn::Sqrt => z.sqrt(),
            ScalarFn::Log => z.ln(),
            ScalarFn::Exp => z.exp(),
            ScalarFn::Inverse => z.inv(),
            ScalarFn::Power(p) => (p * z.ln()).exp(),
            ScalarFn::Custom { f, .. } => f(z),
        }
    }

    pub fn cut(&self) -> BranchCut {
        match self {
            ScalarFn::Identity | ScalarFn::Exp => BranchCut::None,
            ScalarFn::Inverse => BranchCut::Origin,
            ScalarFn::Sqrt | ScalarFn::Log | ScalarFn::Power(_) => BranchCut::NegativeAxis,
            ScalarFn::Custom { cut, .. } => *cut,
        }
    }

    /// Distance from `z` to the singular set, `+∞` when there is none.
    pub fn distance_to_cut(&self, z: Complex64) -> f64 {
        match self.cut() {
            BranchCut::None => f64::INFINITY,
            BranchCut::Origin => z.norm(),
            BranchCut::NegativeAxis => {
                if z.re >= 0.0 {
                    z.norm()
                } else {
                    z.im.abs()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuncalcOptions {
    /// Minimum distance between the truncated spectrum and a branch cut.
    pub gap: f64,
    /// Acceptable ℓ² residual of `u·u^{-1} − 1` on the inner window.
    pub residual_tol: f64,
    /// Relative size of `L L^† − L^† L` still accepted as normal.
    pub normal_tol: f64,
    /// Relative size of `L − L^†` still accepted as Hermitian.
    pub hermitian_tol: f64,
}

impl Default for FuncalcOptions {
    fn default() -> Self {
        let d = crate::defaults::Defaults::default();
        Self {
            gap: d.delta_gap,
            residual_tol: d.inverse_residual_tol,
            normal_tol: 1e-10,
            hermitian_tol: 1e-12,
        }
    }
}

/// The connected block of the box left-multiplication matrix that contains
/// `U^0`. Powers of `u` and their limits live on this block, so solving on it
/// is the same as solving on the whole box.
pub(crate) struct ReachableBlock {
    pub(crate) basis: BoxBasis,
    pub(crate) indices: Vec<usize>,
    pub(crate) origin: usize,
    pub(crate) matrix: DMatrix<Complex64>,
}

impl ReachableBlock {
    pub(crate) fn new(u: &NCElement, radius: u32) -> Self {
        let basis = BoxBasis::new(u.dim(), radius);
        let full = left_mult_on_box(u, &basis);
        let zero = basis.index_of(&Mode::zero(u.dim())).expect("origin in box");
        let indices = full
            .components()
            .into_iter()
            .find(|c| c.binary_search(&zero).is_ok())
            .expect("origin belongs to a component");
        let origin = indices.binary_search(&zero).expect("origin present");
        let matrix = full.restrict(&indices, &indices).to_dense();
        Self { basis, indices, origin, matrix }
    }

    pub(crate) fn unit(&self) -> DVector<Complex64> {
        let mut e = DVector::zeros(self.indices.len());
        e[self.origin] = Complex64::new(1.0, 0.0);
        e
    }

    pub(crate) fn element(&self, v: &DVector<Complex64>, template: &NCElement, window: u32) -> NCElement {
        let coeffs = self
            .indices
            .iter()
            .zip(v.iter())
            .map(|(&i, &c)| (self.basis.mode_at(i), c))
            .filter(|(k, c)| *c != Complex64::default() && k.norm_inf() <= window);
        NCElement::from_coeffs(template.theta(), coeffs).expect("dimension")
    }
}

/// Applies `f` to a square matrix, returning `f(M)·v`.
///
/// Hermitian matrices use the symmetric eigensolver; other matrices must be
/// normal within `opts.normal_tol` and go through a complex Schur form.
pub(crate) fn apply_matrix_function(
    m: &DMatrix<Complex64>,
    v: &DMatrix<Complex64>,
    f: &ScalarFn,
    opts: &FuncalcOptions,
) -> Result<DMatrix<Complex64>> {
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let herm = (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if herm <= opts.hermitian_tol * scale {
        let sym = (m + m.adjoint()).scale(0.5);
        let eig = nalgebra::linalg::SymmetricEigen::new(sym);
        let mut fvals = Vec::with_capacity(eig.eigenvalues.len());
        for &lam in eig.eigenvalues.iter() {
            let z = Complex64::new(lam, 0.0);
            check_gap(f, z, opts.gap)?;
            fvals.push(f.eval(z));
        }
        let q = &eig.eigenvectors;
        let mut w = q.adjoint() * v;
        for (i, fv) in fvals.iter().enumerate() {
            for c in w.row_mut(i).iter_mut() {
                *c *= fv;
            }
        }
        return Ok(q * w);
    }
    let comm = m * m.adjoint() - m.adjoint() * m;
    let defect = comm.iter().map(|c| c.norm()).fold(0.0, f64::max) / (scale * scale);
    if defect > opts.normal_tol {
        return Err(Error::NonNormal(defect));
    }
    let (q, t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
    let mut w = q.adjoint() * v;
    for i in 0..t.nrows() {
        let z = t[(i, i)];
        check_gap(f, z, opts.gap)?;
        let fv = f.eval(z);
        for c in w.row_mut(i).iter_mut() {
            *c *= fv;
        }
    }
    Ok(q * w)
}

fn check_gap(f: &ScalarFn, z: Complex64, gap: f64) -> Result<()> {
    let d = f.distance_to_cut(z);
    if d <= gap {
        Err(Error::SpectralGap { distance: d, gap })
    } else {
        Ok(())
    }
}

/// `f(u)` at truncation: the coefficients are `⟨f(L_u) e_0, e_k⟩`, kept on
/// the inner window `|k|_∞ ≤ K − M`.
pub fn funcalc(
    f: &ScalarFn,
    u: &NCElement,
    trunc: &TruncationSpec,
    opts: &FuncalcOptions,
) -> Result<NCElement> {
    if matches!(f, ScalarFn::Identity) {
        return Ok(u.restrict(trunc.inner_radius()));
    }
    let block = ReachableBlock::new(u, trunc.radius);
    let e0 = block.unit();
    let e0m = DMatrix::from_column_slice(e0.len(), 1, e0.as_slice());
    let out = apply_matrix_function(&block.matrix, &e0m, f, opts)?;
    let col = out.column(0).into_owned();
    Ok(block.element(&col, u, trunc.inner_radius()))
}

/// `u^{-1}` at truncation by solving `L_u x = e_0`.
pub fn inverse_element(
    u: &NCElement,
    trunc: &TruncationSpec,
    opts: &FuncalcOptions,
) -> Result<NCElement> {
    let block = ReachableBlock::new(u, trunc.radius);
    let smin = block
        .matrix
        .clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(smin > opts.gap) {
        return Err(Error::Singular { value: smin, gap: opts.gap });
    }
    let x = block
        .matrix
        .clone()
        .lu()
        .solve(&block.unit())
        .ok_or(Error::Singular { value: smin, gap: opts.gap })?;
    let inv = block.element(&x, u, trunc.inner_radius());
    let window = trunc.inner_radius().saturating_sub(trunc.margin);
    let residual = (u * &inv).restrict(window).distance(&NCElement::one(u.theta()));
    if residual > opts.residual_tol {
        return Err(Error::SolverFailure(format!(
            "inverse residual {residual:.3e} exceeds {:.1e}",
            opts.residual_tol
        )));
    }
    Ok(inv)
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub coarse_radius: u32,
    pub fine_radius: u32,
    /// ℓ² distance of the two results on the coarse inner window.
    pub difference: f64,
    pub fine: NCElement,
}

/// Recomputes `f(u)` with the box radius doubled and reports the change.
pub fn funcalc_convergence(
    f: &ScalarFn,
    u: &NCElement,
    trunc: &TruncationSpec,
    opts: &FuncalcOptions,
) -> Result<ConvergenceReport> {
    let coarse = funcalc(f, u, trunc, opts)?;
    let fine_trunc = TruncationSpec::new(2 * trunc.radius, trunc.margin)?;
    let fine = funcalc(f, u, &fine_trunc, opts)?;
    let difference = coarse.distance(&fine.restrict(trunc.inner_radius()));
    Ok(ConvergenceReport {
        coarse_radius: trunc.radius,
        fine_radius: fine_trunc.radius,
        difference,
        fine,
    })
}
