use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{monomial_inverse, shell_modes, Mode, MultiIndex, NCElement, Theta};
use crate::error::{Error, Result};
use crate::fit::{fit_log_log, SlopeFit};
use crate::symbols::{
    xi_derivative, ClassicalSymbol, DerivativeOptions, HomogeneousComponent, LatticeSymbol, Symbol,
    SymbolOrder,
};

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Exact value of `ρ1♯ρ2` at a lattice point, read off from the operator
/// product applied to `U^k`.
pub fn exact_sharp_at(rho1: &dyn Symbol, rho2: &dyn Symbol, k: &Mode) -> Result<NCElement> {
    let v = rho2.eval_at(k)?.mul_monomial_right(k);
    let mut w = NCElement::zero(rho1.theta());
    for (l, c) in v.iter() {
        w = w.try_add(&rho1.eval_at(l)?.mul_monomial_right(l).scale(*c))?;
    }
    w.try_mul(&monomial_inverse(k, rho1.theta()))
}

/// `ρ1♯ρ2` as a lattice-only symbol.
#[derive(Clone)]
pub struct ExactSharp {
    rho1: Arc<dyn Symbol>,
    rho2: Arc<dyn Symbol>,
}

impl ExactSharp {
    pub fn new(rho1: Arc<dyn Symbol>, rho2: Arc<dyn Symbol>) -> Result<Self> {
        if rho1.theta() != rho2.theta() {
            return Err(Error::ThetaMismatch);
        }
        Ok(Self { rho1, rho2 })
    }
}

impl Symbol for ExactSharp {
    fn theta(&self) -> &Theta {
        self.rho1.theta()
    }

    fn order(&self) -> SymbolOrder {
        self.rho1.order().add(&self.rho2.order())
    }

    fn support_radius(&self) -> u32 {
        self.rho1.support_radius() + self.rho2.support_radius()
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        let k = Mode::from_lattice_point(xi).ok_or(Error::NotLattice)?;
        self.eval_at(&k)
    }

    fn eval_at(&self, k: &Mode) -> Result<NCElement> {
        exact_sharp_at(self.rho1.as_ref(), self.rho2.as_ref(), k)
    }
}

/// `Σ_{|α|<N} (1/α!) ∂^α ρ1(ξ) δ^α ρ2(ξ)`, multi-indices in graded
/// lexicographic order.
pub fn sharp_expansion(
    rho1: &dyn Symbol,
    rho2: &dyn Symbol,
    order: u32,
    xi: &[f64],
    opts: &DerivativeOptions,
) -> Result<NCElement> {
    let b = rho2.eval(xi)?;
    let mut acc = NCElement::zero(rho1.theta());
    for alpha in MultiIndex::graded_below(xi.len(), order) {
        let db = b.delta(&alpha);
        if db.is_empty() {
            // still enforce the derivative cap
            crate::symbols::check_derivative_cap(&alpha, opts.cap)?;
            continue;
        }
        let da = xi_derivative(rho1, &alpha, xi, opts)?;
        acc = acc.try_add(&da.try_mul(&db)?.scale(real(1.0 / alpha.factorial())))?;
    }
    Ok(acc)
}

/// The truncated sharp expansion as a symbol.
#[derive(Clone)]
pub struct SharpExpansion {
    rho1: Arc<dyn Symbol>,
    rho2: Arc<dyn Symbol>,
    terms: u32,
    opts: DerivativeOptions,
}

impl SharpExpansion {
    pub fn new(rho1: Arc<dyn Symbol>, rho2: Arc<dyn Symbol>, terms: u32, opts: DerivativeOptions) -> Self {
        Self { rho1, rho2, terms, opts }
    }
}

impl Symbol for SharpExpansion {
    fn theta(&self) -> &Theta {
        self.rho1.theta()
    }

    fn order(&self) -> SymbolOrder {
        self.rho1.order().add(&self.rho2.order())
    }

    fn support_radius(&self) -> u32 {
        self.rho1.support_radius() + self.rho2.support_radius()
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        sharp_expansion(self.rho1.as_ref(), self.rho2.as_ref(), self.terms, xi, &self.opts)
    }
}

/// `Σ_{|α|<N} (1/α!) δ^α ∂^α [ρ(ξ)*]`
pub fn star_expansion(rho: &dyn Symbol, order: u32, xi: &[f64], opts: &DerivativeOptions) -> Result<NCElement> {
    let mut acc = NCElement::zero(rho.theta());
    for alpha in MultiIndex::graded_below(xi.len(), order) {
        let d = xi_derivative(rho, &alpha, xi, opts)?.involution();
        acc = acc.try_add(&d.delta(&alpha).scale(real(1.0 / alpha.factorial())))?;
    }
    Ok(acc)
}

#[derive(Clone)]
pub struct StarExpansion {
    rho: Arc<dyn Symbol>,
    terms: u32,
    opts: DerivativeOptions,
}

impl StarExpansion {
    pub fn new(rho: Arc<dyn Symbol>, terms: u32, opts: DerivativeOptions) -> Self {
        Self { rho, terms, opts }
    }
}

impl Symbol for StarExpansion {
    fn theta(&self) -> &Theta {
        self.rho.theta()
    }

    fn order(&self) -> SymbolOrder {
        let q = self.rho.order().q;
        SymbolOrder::new(q.conj())
    }

    fn support_radius(&self) -> u32 {
        self.rho.support_radius()
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        star_expansion(self.rho.as_ref(), self.terms, xi, &self.opts)
    }
}

/// `δ^α ρ`, the symbol of the iterated commutator with the derivations.
#[derive(Clone)]
pub struct DerivedSymbol {
    inner: Arc<dyn Symbol>,
    alpha: MultiIndex,
}

impl DerivedSymbol {
    pub fn new(inner: Arc<dyn Symbol>, alpha: MultiIndex) -> Self {
        Self { inner, alpha }
    }
}

impl Symbol for DerivedSymbol {
    fn theta(&self) -> &Theta {
        self.inner.theta()
    }

    fn order(&self) -> SymbolOrder {
        self.inner.order()
    }

    fn support_radius(&self) -> u32 {
        self.inner.support_radius()
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        Ok(self.inner.eval(xi)?.delta(&self.alpha))
    }

    fn eval_at(&self, k: &Mode) -> Result<NCElement> {
        Ok(self.inner.eval_at(k)?.delta(&self.alpha))
    }

    fn analytic_derivative(&self, beta: &MultiIndex, xi: &[f64]) -> Option<Result<NCElement>> {
        self.inner.analytic_derivative(beta, xi).map(|r| r.map(|d| d.delta(&self.alpha)))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemainderReport {
    pub terms: u32,
    /// `(R, max_{|k|_∞ = R} ‖exact − expansion‖)`
    pub points: Vec<(u32, f64)>,
    pub fit: SlopeFit,
}

/// Shell maxima of the Fourier ℓ² norm of the remainder `R_N`, with a
/// log-log slope fit over the radii.
pub fn remainder_shell_norms(
    rho1: &dyn Symbol,
    rho2: &dyn Symbol,
    terms: u32,
    radii: &[u32],
    opts: &DerivativeOptions,
) -> Result<RemainderReport> {
    let n = rho1.theta().dim();
    let mut points = Vec::with_capacity(radii.len());
    for &r in radii {
        let errs: Vec<Result<f64>> = shell_modes(n, r)
            .par_iter()
            .map(|k| {
                let exact = exact_sharp_at(rho1, rho2, k)?;
                let approx = sharp_expansion(rho1, rho2, terms, &k.to_f64(), opts)?;
                Ok(exact.distance(&approx))
            })
            .collect();
        let mut worst: f64 = 0.0;
        for e in errs {
            worst = worst.max(e?);
        }
        points.push((r, worst));
    }
    let data: Vec<(f64, f64)> = points.iter().map(|&(r, e)| (r as f64, e)).collect();
    let fit = fit_log_log(&data).unwrap_or_else(|_| SlopeFit::degenerate(data.len()));
    Ok(RemainderReport { terms, points, fit })
}

/// First `J` homogeneous components of `ρ♯σ`:
/// `(ρ♯σ)_{q1+q2−j} = Σ_{k+l+|α|=j} (1/α!) ∂^α ρ_{q1−k} δ^α σ_{q2−l}`.
pub fn compose_classical(
    rho: &ClassicalSymbol,
    sigma: &ClassicalSymbol,
    count: usize,
    opts: &DerivativeOptions,
) -> Result<ClassicalSymbol> {
    if rho.theta() != sigma.theta() {
        return Err(Error::ThetaMismatch);
    }
    for s in [rho, sigma] {
        if s.len() < count {
            return Err(Error::JetTooShort { available: s.len(), required: count });
        }
    }
    let theta = rho.theta().clone();
    let n = theta.dim();
    let order = rho.order().add(&sigma.order());
    let mut comps = Vec::with_capacity(count);
    for j in 0..count {
        let mut triples: Vec<(HomogeneousComponent, HomogeneousComponent, MultiIndex)> = Vec::new();
        for k in 0..=j {
            for l in 0..=(j - k) {
                let a = (j - k - l) as u32;
                for alpha in MultiIndex::of_degree(n, a) {
                    triples.push((rho.components()[k].clone(), sigma.components()[l].clone(), alpha));
                }
            }
        }
        let support = rho.support_radius() + sigma.support_radius();
        let degree = order.q - j as f64;
        let opts = *opts;
        let th = theta.clone();
        let inner = LatticeSymbol::new(&theta, SymbolOrder::new(degree), support, move |xi| {
            let mut acc = NCElement::zero(&th);
            for (a, b, alpha) in &triples {
                let db = b.eval(xi)?.delta(alpha);
                if db.is_empty() {
                    continue;
                }
                let da = xi_derivative(a, alpha, xi, &opts)?;
                acc = acc.try_add(&da.try_mul(&db)?.scale(real(1.0 / alpha.factorial())))?;
            }
            Ok(acc)
        });
        comps.push(HomogeneousComponent::new(degree, Arc::new(inner)));
    }
    Ok(ClassicalSymbol::new(&theta, order, comps)?.with_origin(rho.origin().clone()))
}
