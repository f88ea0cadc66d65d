use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::algebra::{
    funcalc, left_mult_on_box, FuncalcOptions, Mode, MultiIndex, NCElement, ScalarFn, Theta,
    TruncationSpec,
};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::psido::{derivation_matrix, OperatorMatrix};
use crate::symbols::PolynomialSymbol;

/// Positive invertible matrix `g = (g_ij)` over the algebra, with the
/// derived quantities `g^{ij}` and powers of `ν(g) = √det g`.
#[derive(Debug, Clone)]
pub struct RiemannianMetric {
    theta: Theta,
    g: Vec<Vec<NCElement>>,
    trunc: TruncationSpec,
    inverse: Vec<Vec<NCElement>>,
    trace_log: NCElement,
    det: NCElement,
    nu: NCElement,
    nu_half: NCElement,
    nu_neg_half: NCElement,
    nu_inv: NCElement,
    min_eigenvalue: f64,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `f(u)` with scalars handled in closed form.
fn apply_fn(f: &ScalarFn, u: &NCElement, trunc: &TruncationSpec, opts: &FuncalcOptions) -> Result<NCElement> {
    if u.is_scalar() {
        let z = u.tau();
        let d = f.distance_to_cut(z);
        if d <= opts.gap {
            return Err(Error::SpectralGap { distance: d, gap: opts.gap });
        }
        return Ok(NCElement::scalar(f.eval(z), u.theta()));
    }
    funcalc(f, u, trunc, opts)
}

impl RiemannianMetric {
    /// Validates the entries and builds every derived quantity on the box
    /// of `trunc`, keeping results on its inner window.
    pub fn new(g: Vec<Vec<NCElement>>, trunc: TruncationSpec, opts: &FuncalcOptions) -> Result<Self> {
        let n = g.len();
        let theta = g
            .first()
            .and_then(|r| r.first())
            .map(|e| e.theta().clone())
            .ok_or_else(|| Error::InvalidSymbol("empty metric".into()))?;
        if theta.dim() != n {
            return Err(Error::DimensionMismatch { expected: theta.dim(), got: n });
        }
        for row in &g {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for e in row {
                if **e.theta() != *theta {
                    return Err(Error::ThetaMismatch);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let defect = g[i][j].distance(&g[j][i].involution());
                if defect > 1e-12 * (1.0 + g[i][j].norm()) {
                    return Err(Error::InvalidSymbol(format!("g_{i}{j} is not the adjoint of g_{j}{i}")));
                }
            }
        }

        let block = MetricBlock::new(&g, trunc.radius);
        let eig = SymmetricEigen::new(block.dense.clone());
        let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_eigenvalue > opts.gap) {
            return Err(Error::Singular { value: min_eigenvalue, gap: opts.gap });
        }
        let q = &eig.eigenvectors;
        let units = block.units();
        let spectral = |f: &dyn Fn(f64) -> f64| {
            let mut w = q.adjoint() * &units;
            for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                let fv = f(lam);
                for c in w.row_mut(i).iter_mut() {
                    *c *= fv;
                }
            }
            q * w
        };
        let inv_cols = spectral(&|x| 1.0 / x);
        let log_cols = spectral(&f64::ln);
        let window = trunc.inner_radius();
        let inverse: Vec<Vec<NCElement>> = (0..n)
            .map(|i| (0..n).map(|j| block.entry(&inv_cols, i, j, &theta, window)).collect())
            .collect();
        let mut trace_log = NCElement::zero(&theta);
        for i in 0..n {
            trace_log = &trace_log + &block.entry(&log_cols, i, i, &theta, window);
        }
        // the trace of a Hermitian log is self-adjoint; drop rounding drift
        let trace_log = hermitian_part(&trace_log);

        let det = apply_fn(&ScalarFn::Exp, &trace_log, &trunc, opts)?;
        let nu = apply_fn(&ScalarFn::Sqrt, &det, &trunc, opts)?;
        let nu_half = apply_fn(&ScalarFn::Sqrt, &nu, &trunc, opts)?;
        let nu_neg_half = apply_fn(&ScalarFn::Inverse, &nu_half, &trunc, opts)?;
        let nu_inv = apply_fn(&ScalarFn::Inverse, &nu, &trunc, opts)?;
        Ok(Self {
            theta,
            g,
            trunc,
            inverse,
            trace_log,
            det,
            nu,
            nu_half,
            nu_neg_half,
            nu_inv,
            min_eigenvalue,
        })
    }

    /// `g_ij = δ_ij`
    pub fn identity(theta: &Theta, trunc: TruncationSpec) -> Result<Self> {
        let n = theta.dim();
        let g = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { NCElement::one(theta) } else { NCElement::zero(theta) })
                    .collect()
            })
            .collect();
        Self::new(g, trunc, &FuncalcOptions::default())
    }

    /// `g = I + c·(U_j + U_j^*)·E_jj`
    pub fn cosine_bump(theta: &Theta, j: usize, c: f64, trunc: TruncationSpec) -> Result<Self> {
        let n = theta.dim();
        let u = NCElement::generator(j, theta);
        let bump = (&u + &u.involution()).scale(real(c));
        let g = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| match (a == b, a == j) {
                        (true, true) => &NCElement::one(theta) + &bump,
                        (true, false) => NCElement::one(theta),
                        _ => NCElement::zero(theta),
                    })
                    .collect()
            })
            .collect();
        Self::new(g, trunc, &FuncalcOptions::default())
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn g(&self, i: usize, j: usize) -> &NCElement {
        &self.g[i][j]
    }

    /// `g^{ij}`
    pub fn inverse(&self, i: usize, j: usize) -> &NCElement {
        &self.inverse[i][j]
    }

    pub fn trace_log(&self) -> &NCElement {
        &self.trace_log
    }

    pub fn det(&self) -> &NCElement {
        &self.det
    }

    /// `ν(g) = √det g`
    pub fn nu(&self) -> &NCElement {
        &self.nu
    }

    pub fn nu_half(&self) -> &NCElement {
        &self.nu_half
    }

    pub fn nu_neg_half(&self) -> &NCElement {
        &self.nu_neg_half
    }

    pub fn nu_inv(&self) -> &NCElement {
        &self.nu_inv
    }

    /// Smallest eigenvalue of the block left-multiplication matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// `h_ij = ν^{1/2} g^{ij} ν^{1/2}`
    pub fn weighted_inverse(&self, i: usize, j: usize) -> NCElement {
        &(&self.nu_half * &self.inverse[i][j]) * &self.nu_half
    }
}

fn hermitian_part(u: &NCElement) -> NCElement {
    (u + &u.involution()).scale(real(0.5))
}

/// Block matrix `[L(g_ij)]` restricted to the components that contain the
/// `U^0` columns.
struct MetricBlock {
    n: usize,
    basis: crate::algebra::BoxBasis,
    len: usize,
    indices: Vec<usize>,
    dense: DMatrix<Complex64>,
}

impl MetricBlock {
    fn new(g: &[Vec<NCElement>], radius: u32) -> Self {
        let n = g.len();
        let basis = crate::algebra::BoxBasis::new(n, radius);
        let len = basis.len();
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n * len];
        for (i, row) in g.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let l = left_mult_on_box(e, &basis);
                for (r, c, v) in l.triplets() {
                    cols[j * len + c].push((i * len + r, v));
                }
            }
        }
        let full = SparseMatrix::from_columns(n * len, cols);
        let zero = basis.index_of(&Mode::zero(n)).expect("origin in box");
        let mut indices: Vec<usize> = full
            .components()
            .into_iter()
            .filter(|c| (0..n).any(|j| c.binary_search(&(j * len + zero)).is_ok()))
            .flatten()
            .collect();
        indices.sort_unstable();
        let sub = full.restrict(&indices, &indices).to_dense();
        let dense = (&sub + sub.adjoint()).scale(0.5);
        Self { n, basis, len, indices, dense }
    }

    fn units(&self) -> DMatrix<Complex64> {
        let zero = self.basis.index_of(&Mode::zero(self.n)).expect("origin in box");
        let mut e = DMatrix::zeros(self.indices.len(), self.n);
        for j in 0..self.n {
            let pos = self.indices.binary_search(&(j * self.len + zero)).expect("unit present");
            e[(pos, j)] = real(1.0);
        }
        e
    }

    /// Block `i` of column `j`.
    fn entry(&self, cols: &DMatrix<Complex64>, i: usize, j: usize, theta: &Theta, window: u32) -> NCElement {
        let coeffs = self
            .indices
            .iter()
            .enumerate()
            .filter(|(_, &g)| g / self.len == i)
            .map(|(p, &g)| (self.basis.mode_at(g % self.len), cols[(p, j)]))
            .filter(|(k, c)| *c != Complex64::default() && k.norm_inf() <= window);
        NCElement::from_coeffs(theta, coeffs).expect("dimension")
    }
}

/// Symbol of `Δ_g u = ν^{-1} Σ δ_i(ν^{1/2} g^{ij} ν^{1/2} δ_j u)`:
/// second-order coefficients `ν^{-1/2} g^{ij} ν^{1/2}`, first-order
/// coefficients `ν^{-1} δ_i(h_ij)`. Coefficients below `prune_tol` are
/// dropped.
pub fn laplace_beltrami(metric: &RiemannianMetric, prune_tol: f64) -> Result<PolynomialSymbol> {
    let n = metric.dim();
    let theta = metric.theta();
    let mut sym = PolynomialSymbol::new(theta);
    for i in 0..n {
        for j in 0..n {
            let second = &(metric.nu_neg_half() * metric.inverse(i, j)) * metric.nu_half();
            sym.add_term(MultiIndex::unit(n, i).add(&MultiIndex::unit(n, j)), second)?;
            let h = metric.weighted_inverse(i, j);
            let first = metric.nu_inv() * &h.delta(&MultiIndex::unit(n, i));
            sym.add_term(MultiIndex::unit(n, j), first)?;
        }
    }
    Ok(sym.prune(prune_tol))
}

/// Matrix of the symmetric form `Σ_ij δ_i L(h_ij) δ_j` on the box, which
/// equals `L(ν)·Δ_g`. It is Hermitian even though `Δ_g` is not.
pub fn weighted_laplacian_matrix(metric: &RiemannianMetric, trunc: &TruncationSpec) -> Result<OperatorMatrix> {
    let n = metric.dim();
    let theta = metric.theta();
    let basis = trunc.basis(n);
    let mut acc = SparseMatrix::zeros(basis.len(), basis.len());
    let ds: Vec<SparseMatrix> = (0..n).map(|j| derivation_matrix(theta, trunc, j).matrix().clone()).collect();
    let mut support = 0;
    for i in 0..n {
        for j in 0..n {
            let h = metric.weighted_inverse(i, j);
            support = support.max(h.support_radius());
            let l = left_mult_on_box(&h, &basis);
            acc = acc.add(&ds[i].mul(&l)?.mul(&ds[j])?)?;
        }
    }
    OperatorMatrix::new(theta, *trunc, trunc.radius.saturating_sub(support), acc)
}
