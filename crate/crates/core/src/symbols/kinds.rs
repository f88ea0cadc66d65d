use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::profile::ScalarProfile;
use super::{xi_derivative, DerivativeOptions, Symbol, SymbolOrder};
use crate::algebra::{Mode, MultiIndex, NCElement, Theta};
use crate::error::{Error, Result};

fn is_origin(xi: &[f64]) -> bool {
    xi.iter().all(|&x| x == 0.0)
}

fn euclid(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Symbol of a differential operator, `ρ(ξ) = Σ_{|α|≤m} a_α ξ^α`.
#[derive(Debug, Clone)]
pub struct PolynomialSymbol {
    theta: Theta,
    coeffs: BTreeMap<MultiIndex, NCElement>,
}

impl PolynomialSymbol {
    pub fn new(theta: &Theta) -> Self {
        Self { theta: theta.clone(), coeffs: BTreeMap::new() }
    }

    pub fn from_terms<I>(theta: &Theta, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, NCElement)>,
    {
        let mut out = Self::new(theta);
        for (alpha, a) in terms {
            out.add_term(alpha, a)?;
        }
        Ok(out)
    }

    /// Symbol `|ξ|²` of the flat Laplacian `Σ δ_j²`.
    pub fn laplacian(theta: &Theta) -> Self {
        let n = theta.dim();
        let mut out = Self::new(theta);
        for j in 0..n {
            let mut a = MultiIndex::zero(n);
            a.0[j] = 2;
            out.coeffs.insert(a, NCElement::one(theta));
        }
        out
    }

    pub fn identity(theta: &Theta) -> Self {
        Self::constant(NCElement::one(theta))
    }

    pub fn constant(a: NCElement) -> Self {
        let theta = a.theta().clone();
        let mut out = Self::new(&theta);
        if !a.is_empty() {
            out.coeffs.insert(MultiIndex::zero(theta.dim()), a);
        }
        out
    }

    pub fn add_term(&mut self, alpha: MultiIndex, a: NCElement) -> Result<()> {
        if alpha.dim() != self.theta.dim() {
            return Err(Error::DimensionMismatch { expected: self.theta.dim(), got: alpha.dim() });
        }
        let sum = match self.coeffs.get(&alpha) {
            Some(prev) => prev.try_add(&a)?,
            None => {
                if **a.theta() != *self.theta {
                    return Err(Error::ThetaMismatch);
                }
                a
            }
        };
        if sum.is_empty() {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, sum);
        }
        Ok(())
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Option<&NCElement> {
        self.coeffs.get(alpha)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &NCElement)> {
        self.coeffs.iter()
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Part of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> PolynomialSymbol {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(a, _)| a.degree() == d)
            .map(|(a, c)| (a.clone(), c.clone()))
            .collect();
        Self { theta: self.theta.clone(), coeffs }
    }

    /// Homogeneous parts from the top degree down to zero, as components of
    /// a classical symbol.
    pub fn homogeneous_components(&self) -> Vec<HomogeneousComponent> {
        let top = self.degree();
        (0..=top)
            .rev()
            .map(|d| {
                HomogeneousComponent::new(Complex64::new(d as f64, 0.0), Arc::new(self.homogeneous_part(d)))
            })
            .collect()
    }

    /// Symbol of `a·P`: every coefficient multiplied by `a` on the left.
    pub fn left_mul(&self, a: &NCElement) -> Result<PolynomialSymbol> {
        let mut out = Self::new(&self.theta);
        for (alpha, c) in &self.coeffs {
            out.add_term(alpha.clone(), a.try_mul(c)?)?;
        }
        Ok(out)
    }

    pub fn plus(&self, other: &PolynomialSymbol) -> Result<PolynomialSymbol> {
        let mut out = self.clone();
        for (alpha, c) in &other.coeffs {
            out.add_term(alpha.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn prune(&self, tol: f64) -> PolynomialSymbol {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, c)| (a.clone(), c.prune(tol)))
            .filter(|(_, c)| !c.is_empty())
            .collect();
        Self { theta: self.theta.clone(), coeffs }
    }
}

impl Symbol for PolynomialSymbol {
    fn theta(&self) -> &Theta {
        &self.theta
    }

    fn order(&self) -> SymbolOrder {
        SymbolOrder::real(self.degree() as f64)
    }

    fn support_radius(&self) -> u32 {
        self.coeffs.values().map(NCElement::support_radius).max().unwrap_or(0)
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        if xi.len() != self.theta.dim() {
            return Err(Error::DimensionMismatch { expected: self.theta.dim(), got: xi.len() });
        }
        let mut acc = NCElement::zero(&self.theta);
        for (alpha, a) in &self.coeffs {
            let m = alpha.monomial(xi);
            if m != 0.0 {
                acc = &acc + &a.scale(Complex64::new(m, 0.0));
            }
        }
        Ok(acc)
    }

    fn analytic_derivative(&self, alpha: &MultiIndex, xi: &[f64]) -> Option<Result<NCElement>> {
        let mut acc = NCElement::zero(&self.theta);
        for (beta, a) in &self.coeffs {
            if let Some(rest) = beta.checked_sub(alpha) {
                let falling: f64 = beta.factorial() / rest.factorial();
                let w = falling * rest.monomial(xi);
                if w != 0.0 {
                    acc = &acc + &a.scale(Complex64::new(w, 0.0));
                }
            }
        }
        Some(Ok(acc))
    }
}

/// `ρ(ξ) = Σ_m f_m(ξ) a_m` with scalar profiles `f_m` and fixed elements
/// `a_m`. Derivatives are exact.
#[derive(Debug, Clone)]
pub struct ProfileSymbol {
    theta: Theta,
    order: SymbolOrder,
    terms: Vec<(ScalarProfile, NCElement)>,
}

impl ProfileSymbol {
    pub fn new(theta: &Theta, order: SymbolOrder) -> Self {
        Self { theta: theta.clone(), order, terms: Vec::new() }
    }

    pub fn with_term(mut self, profile: ScalarProfile, a: NCElement) -> Self {
        self.terms.push((profile, a));
        self
    }

    /// `f(ξ)·a` for a single profile.
    pub fn scalar_times(profile: ScalarProfile, a: NCElement, order: SymbolOrder) -> Self {
        let theta = a.theta().clone();
        Self::new(&theta, order).with_term(profile, a)
    }

    /// `⟨ξ⟩^s·1`, the symbol of `Λ^s = (1 + Δ)^{s/2}`.
    pub fn japanese(theta: &Theta, s: f64) -> Self {
        Self::scalar_times(ScalarProfile::japanese(s), NCElement::one(theta), SymbolOrder::real(s))
    }

    /// A symbol independent of `ξ`.
    pub fn constant(a: NCElement) -> Self {
        Self::scalar_times(ScalarProfile::constant(Complex64::new(1.0, 0.0)), a, SymbolOrder::real(0.0))
    }

    pub fn terms(&self) -> &[(ScalarProfile, NCElement)] {
        &self.terms
    }
}

impl Symbol for ProfileSymbol {
    fn theta(&self) -> &Theta {
        &self.theta
    }

    fn order(&self) -> SymbolOrder {
        self.order
    }

    fn support_radius(&self) -> u32 {
        self.terms.iter().map(|(_, a)| a.support_radius()).max().unwrap_or(0)
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        let mut acc = NCElement::zero(&self.theta);
        for (f, a) in &self.terms {
            acc = &acc + &a.scale(f.value(xi));
        }
        Ok(acc)
    }

    fn analytic_derivative(&self, alpha: &MultiIndex, xi: &[f64]) -> Option<Result<NCElement>> {
        let mut acc = NCElement::zero(&self.theta);
        for (f, a) in &self.terms {
            acc = &acc + &a.scale(f.derivative(alpha, xi));
        }
        Some(Ok(acc))
    }
}

type EvalFn = dyn Fn(&[f64]) -> Result<NCElement> + Send + Sync;
type DerivFn = dyn Fn(&MultiIndex, &[f64]) -> Result<NCElement> + Send + Sync;

/// A symbol given by an evaluation closure.
#[derive(Clone)]
pub struct LatticeSymbol {
    theta: Theta,
    order: SymbolOrder,
    support_radius: u32,
    eval: Arc<EvalFn>,
    derivative: Option<Arc<DerivFn>>,
    excised_radius: Option<f64>,
    lattice_only: bool,
}

impl fmt::Debug for LatticeSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeSymbol")
            .field("order", &self.order)
            .field("support_radius", &self.support_radius)
            .field("excised_radius", &self.excised_radius)
            .field("lattice_only", &self.lattice_only)
            .finish()
    }
}

impl LatticeSymbol {
    pub fn new(
        theta: &Theta,
        order: SymbolOrder,
        support_radius: u32,
        eval: impl Fn(&[f64]) -> Result<NCElement> + Send + Sync + 'static,
    ) -> Self {
        Self {
            theta: theta.clone(),
            order,
            support_radius,
            eval: Arc::new(eval),
            derivative: None,
            excised_radius: None,
            lattice_only: false,
        }
    }

    pub fn with_derivative(
        mut self,
        d: impl Fn(&MultiIndex, &[f64]) -> Result<NCElement> + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Values off the lattice raise [`Error::NotLattice`].
    pub fn lattice_only(mut self) -> Self {
        self.lattice_only = true;
        self
    }

    /// Radius inside which the value was replaced by zero, if any.
    pub fn excised_radius(&self) -> Option<f64> {
        self.excised_radius
    }

    pub fn is_excised(&self, xi: &[f64]) -> bool {
        self.excised_radius.is_some_and(|r| euclid(xi) <= r)
    }
}

impl Symbol for LatticeSymbol {
    fn theta(&self) -> &Theta {
        &self.theta
    }

    fn order(&self) -> SymbolOrder {
        self.order
    }

    fn support_radius(&self) -> u32 {
        self.support_radius
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        if self.lattice_only && Mode::from_lattice_point(xi).is_none() {
            return Err(Error::NotLattice);
        }
        if self.is_excised(xi) {
            return Ok(NCElement::zero(&self.theta));
        }
        (self.eval)(xi)
    }

    fn analytic_derivative(&self, alpha: &MultiIndex, xi: &[f64]) -> Option<Result<NCElement>> {
        if self.is_excised(xi) {
            return Some(Ok(NCElement::zero(&self.theta)));
        }
        self.derivative.as_ref().map(|d| d(alpha, xi))
    }
}

/// Homogeneous component of degree `q − j`, defined away from the origin.
#[derive(Clone)]
pub struct HomogeneousComponent {
    degree: Complex64,
    inner: Arc<dyn Symbol>,
}

impl fmt::Debug for HomogeneousComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomogeneousComponent(degree {})", self.degree)
    }
}

impl HomogeneousComponent {
    pub fn new(degree: Complex64, inner: Arc<dyn Symbol>) -> Self {
        Self { degree, inner }
    }

    /// `f(ξ)·a` for a profile homogeneous of the given degree.
    pub fn from_profile(degree: f64, profile: ScalarProfile, a: NCElement) -> Self {
        let order = SymbolOrder::real(degree);
        Self::new(Complex64::new(degree, 0.0), Arc::new(ProfileSymbol::scalar_times(profile, a, order)))
    }

    pub fn zero(theta: &Theta, degree: Complex64) -> Self {
        Self::new(degree, Arc::new(ProfileSymbol::new(theta, SymbolOrder::new(degree))))
    }

    pub fn degree(&self) -> Complex64 {
        self.degree
    }

    pub fn inner(&self) -> &Arc<dyn Symbol> {
        &self.inner
    }
}

impl Symbol for HomogeneousComponent {
    fn theta(&self) -> &Theta {
        self.inner.theta()
    }

    fn order(&self) -> SymbolOrder {
        SymbolOrder::new(self.degree)
    }

    fn support_radius(&self) -> u32 {
        self.inner.support_radius()
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        if is_origin(xi) {
            return Err(Error::OriginEvaluation);
        }
        self.inner.eval(xi)
    }

    fn analytic_derivative(&self, alpha: &MultiIndex, xi: &[f64]) -> Option<Result<NCElement>> {
        if is_origin(xi) {
            return Some(Err(Error::OriginEvaluation));
        }
        self.inner.analytic_derivative(alpha, xi)
    }
}

/// Value assigned to a classical symbol at `ξ = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum OriginConvention {
    #[default]
    Excise,
    Value(NCElement),
}

/// Classical symbol given by a finite jet of homogeneous components
/// `ρ_q, ρ_{q−1}, …`.
#[derive(Debug, Clone)]
pub struct ClassicalSymbol {
    theta: Theta,
    order: SymbolOrder,
    components: Vec<HomogeneousComponent>,
    origin: OriginConvention,
}

impl ClassicalSymbol {
    pub fn new(theta: &Theta, order: SymbolOrder, components: Vec<HomogeneousComponent>) -> Result<Self> {
        for (j, c) in components.iter().enumerate() {
            let expected = order.q - j as f64;
            if (c.degree() - expected).norm() > 1e-12 {
                return Err(Error::InvalidSymbol(format!(
                    "component {j} has degree {}, expected {expected}",
                    c.degree()
                )));
            }
        }
        Ok(Self { theta: theta.clone(), order, components, origin: OriginConvention::Excise })
    }

    /// Binomial jet of `⟨ξ⟩^s`: component `j` is `C(s/2, j/2) |ξ|^{s−j}` for
    /// even `j` and zero for odd `j`.
    pub fn japanese(theta: &Theta, s: f64, len: usize) -> Self {
        let mut comps = Vec::with_capacity(len);
        let mut binom = 1.0;
        for j in 0..len {
            let deg = s - j as f64;
            if j % 2 == 0 {
                let i = (j / 2) as f64;
                if j > 0 {
                    binom *= (s / 2.0 - (i - 1.0)) / i;
                }
                let profile = ScalarProfile::radial(deg).scaled(Complex64::new(binom, 0.0));
                comps.push(HomogeneousComponent::from_profile(deg, profile, NCElement::one(theta)));
            } else {
                comps.push(HomogeneousComponent::zero(theta, Complex64::new(deg, 0.0)));
            }
        }
        Self::new(theta, SymbolOrder::real(s), comps).expect("degrees are consistent")
    }

    pub fn from_polynomial(p: &PolynomialSymbol) -> Self {
        let comps = p.homogeneous_components();
        Self::new(p.theta(), p.order(), comps).expect("degrees are consistent")
    }

    pub fn with_origin(mut self, origin: OriginConvention) -> Self {
        self.origin = origin;
        self
    }

    pub fn components(&self) -> &[HomogeneousComponent] {
        &self.components
    }

    pub fn component(&self, j: usize) -> Option<&HomogeneousComponent> {
        self.components.get(j)
    }

    pub fn origin(&self) -> &OriginConvention {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The first `n` components.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            theta: self.theta.clone(),
            order: self.order,
            components: self.components.iter().take(n).cloned().collect(),
            origin: self.origin.clone(),
        }
    }
}

impl Symbol for ClassicalSymbol {
    fn theta(&self) -> &Theta {
        &self.theta
    }

    fn order(&self) -> SymbolOrder {
        self.order
    }

    fn support_radius(&self) -> u32 {
        let comps = self.components.iter().map(|c| c.support_radius()).max().unwrap_or(0);
        match &self.origin {
            OriginConvention::Excise => comps,
            OriginConvention::Value(v) => comps.max(v.support_radius()),
        }
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        if is_origin(xi) {
            return Ok(match &self.origin {
                OriginConvention::Excise => NCElement::zero(&self.theta),
                OriginConvention::Value(v) => v.clone(),
            });
        }
        let mut acc = NCElement::zero(&self.theta);
        for c in &self.components {
            acc = &acc + &c.eval(xi)?;
        }
        Ok(acc)
    }

    fn analytic_derivative(&self, alpha: &MultiIndex, xi: &[f64]) -> Option<Result<NCElement>> {
        if is_origin(xi) {
            return Some(Err(Error::OriginEvaluation));
        }
        let mut acc = NCElement::zero(&self.theta);
        for c in &self.components {
            match c.analytic_derivative(alpha, xi)? {
                Ok(d) => acc = &acc + &d,
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(acc))
    }
}

/// `c·ρ`
#[derive(Clone)]
pub struct ScaledSymbol {
    factor: Complex64,
    inner: Arc<dyn Symbol>,
}

impl ScaledSymbol {
    pub fn new(factor: Complex64, inner: Arc<dyn Symbol>) -> Self {
        Self { factor, inner }
    }
}

impl Symbol for ScaledSymbol {
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
        Ok(self.inner.eval(xi)?.scale(self.factor))
    }
    fn eval_at(&self, k: &Mode) -> Result<NCElement> {
        Ok(self.inner.eval_at(k)?.scale(self.factor))
    }
    fn analytic_derivative(&self, alpha: &MultiIndex, xi: &[f64]) -> Option<Result<NCElement>> {
        self.inner.analytic_derivative(alpha, xi).map(|r| r.map(|d| d.scale(self.factor)))
    }
}

/// `Σ ρ_i`
#[derive(Clone)]
pub struct SumSymbol {
    theta: Theta,
    parts: Vec<Arc<dyn Symbol>>,
}

impl SumSymbol {
    pub fn new(theta: &Theta, parts: Vec<Arc<dyn Symbol>>) -> Self {
        Self { theta: theta.clone(), parts }
    }
}

impl Symbol for SumSymbol {
    fn theta(&self) -> &Theta {
        &self.theta
    }
    fn order(&self) -> SymbolOrder {
        let m = self.parts.iter().map(|p| p.order()).fold(None::<SymbolOrder>, |acc, o| match acc {
            Some(a) if a.m >= o.m => Some(a),
            _ => Some(o),
        });
        m.unwrap_or(SymbolOrder::real(f64::NEG_INFINITY))
    }
    fn support_radius(&self) -> u32 {
        self.parts.iter().map(|p| p.support_radius()).max().unwrap_or(0)
    }
    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        let mut acc = NCElement::zero(&self.theta);
        for p in &self.parts {
            acc = acc.try_add(&p.eval(xi)?)?;
        }
        Ok(acc)
    }
    fn eval_at(&self, k: &Mode) -> Result<NCElement> {
        let mut acc = NCElement::zero(&self.theta);
        for p in &self.parts {
            acc = acc.try_add(&p.eval_at(k)?)?;
        }
        Ok(acc)
    }
    fn analytic_derivative(&self, alpha: &MultiIndex, xi: &[f64]) -> Option<Result<NCElement>> {
        let mut acc = NCElement::zero(&self.theta);
        for p in &self.parts {
            match p.analytic_derivative(alpha, xi)? {
                Ok(d) => acc = &acc + &d,
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(acc))
    }
}

/// Lattice symbol equal to `comp` except at points with `|ξ| ≤ cutoff`,
/// where the value is zero. With `cutoff = 0` only the origin is excised.
pub fn excise_origin(comp: &HomogeneousComponent, cutoff_radius: f64) -> LatticeSymbol {
    let inner = comp.clone();
    let deriv = comp.clone();
    let mut sym = LatticeSymbol::new(
        comp.theta(),
        comp.order(),
        comp.support_radius(),
        move |xi| inner.eval(xi),
    )
    .with_derivative(move |alpha, xi| xi_derivative(&deriv, alpha, xi, &DerivativeOptions::default()));
    sym.excised_radius = Some(cutoff_radius.max(0.0));
    sym
}

/// `max ‖ρ(λξ) − λ^q ρ(ξ)‖ / ‖ρ(ξ)‖` over the samples and scalings.
pub fn homogeneity_check(
    comp: &HomogeneousComponent,
    samples: &[Vec<f64>],
    lambdas: &[f64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for xi in samples {
        let base = comp.eval(xi)?;
        let norm = base.norm();
        for &lam in lambdas {
            let scaled: Vec<f64> = xi.iter().map(|x| x * lam).collect();
            let lhs = comp.eval(&scaled)?;
            let q = comp.degree();
            let factor = if q.im == 0.0 && q.re.fract() == 0.0 {
                Complex64::new(lam.powi(q.re as i32), 0.0)
            } else {
                (q * lam.ln()).exp()
            };
            let dev = lhs.distance(&base.scale(factor));
            let rel = if norm > 0.0 { dev / norm } else { dev };
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ThetaMatrix;
    use crate::symbols::{fd_derivative, sphere_samples};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn theta() -> Theta {
        ThetaMatrix::uniform(2, 0.17).into_shared()
    }

    #[test]
    fn laplacian_symbol_value_and_derivative() {
        let t = theta();
        let lap = PolynomialSymbol::laplacian(&t);
        let v = lap.eval(&[3.0, -4.0]).unwrap();
        assert_eq!(v, NCElement::scalar(c(25.0), &t));
        let d = lap.analytic_derivative(&MultiIndex::unit(2, 0), &[3.0, -4.0]).unwrap().unwrap();
        assert_eq!(d, NCElement::scalar(c(6.0), &t));
        assert_eq!(lap.order().m, 2.0);
    }

    #[test]
    fn japanese_at_origin_is_one() {
        let t = theta();
        let s = ProfileSymbol::japanese(&t, -3.0);
        assert_eq!(s.eval(&[0.0, 0.0]).unwrap(), NCElement::one(&t));
    }

    #[test]
    fn component_refuses_origin() {
        let t = theta();
        let comp = HomogeneousComponent::from_profile(-2.0, ScalarProfile::radial(-2.0), NCElement::one(&t));
        assert!(matches!(comp.eval(&[0.0, 0.0]), Err(Error::OriginEvaluation)));
        let ex = excise_origin(&comp, 0.0);
        assert!(ex.eval(&[0.0, 0.0]).unwrap().is_empty());
        assert_eq!(ex.eval(&[1.0, 2.0]).unwrap(), comp.eval(&[1.0, 2.0]).unwrap());
        assert!(ex.is_excised(&[0.0, 0.0]));
        assert!(!ex.is_excised(&[1.0, 0.0]));
    }

    #[test]
    fn homogeneity_examples() {
        let t = theta();
        let samples = sphere_samples(2, 16, 0);
        let lambdas = [0.5, 2.0, 7.0];
        let lap = HomogeneousComponent::new(c(2.0), Arc::new(PolynomialSymbol::laplacian(&t)));
        assert_eq!(homogeneity_check(&lap, &samples, &[0.5, 2.0, 4.0]).unwrap(), 0.0);
        assert!(homogeneity_check(&lap, &samples, &lambdas).unwrap() < 1e-14);
        let a = &NCElement::generator(0, &t) + &NCElement::scalar(c(0.5), &t);
        let inv_sq = HomogeneousComponent::from_profile(-2.0, ScalarProfile::radial(-2.0), a);
        assert!(homogeneity_check(&inv_sq, &samples, &lambdas).unwrap() <= 1e-12);
        let bracket = HomogeneousComponent::new(c(-2.0), Arc::new(ProfileSymbol::japanese(&t, -2.0)));
        let dev = homogeneity_check(&bracket, &[vec![1.0, 0.0]], &[2.0]).unwrap();
        assert!(dev > 0.1, "{dev}");
    }

    #[test]
    fn classical_japanese_jet_degrees_and_origin() {
        let t = theta();
        let j = ClassicalSymbol::japanese(&t, -1.0, 5);
        assert_eq!(j.len(), 5);
        for (i, comp) in j.components().iter().enumerate() {
            assert_eq!(comp.degree(), c(-1.0 - i as f64));
        }
        assert!(j.eval(&[0.0, 0.0]).unwrap().is_empty());
        let j = j.with_origin(OriginConvention::Value(NCElement::one(&t)));
        assert_eq!(j.eval(&[0.0, 0.0]).unwrap(), NCElement::one(&t));
        assert!(ClassicalSymbol::new(&t, SymbolOrder::real(1.0), vec![HomogeneousComponent::zero(&t, c(0.0))]).is_err());
    }

    #[test]
    fn fd_matches_analytic_for_polynomial() {
        let t = theta();
        let u1 = NCElement::generator(0, &t);
        let p = PolynomialSymbol::from_terms(
            &t,
            [
                (MultiIndex::from_slice(&[2, 1]), u1.clone()),
                (MultiIndex::from_slice(&[0, 1]), NCElement::one(&t)),
            ],
        )
        .unwrap();
        let xi = [1.3, -0.7];
        for a in [[1u32, 0], [0, 1], [1, 1], [2, 0]] {
            let alpha = MultiIndex::from_slice(&a);
            let exact = p.analytic_derivative(&alpha, &xi).unwrap().unwrap();
            let fd = fd_derivative(&p, &alpha, &xi, 1e-3).unwrap();
            assert!(exact.distance(&fd) < 1e-8, "{a:?}");
        }
    }
}
