use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::algebra::{inverse_element, FuncalcOptions, Mode, MultiIndex, NCElement, Theta, TruncationSpec};
use crate::error::{Error, Result};
use crate::symbols::{
    xi_derivative, ClassicalSymbol, DerivativeOptions, OriginConvention, Symbol, SymbolOrder,
};

/// Components `σ_{−q−j}`, `j < N`, of the parametrix of an elliptic
/// classical symbol, evaluated pointwise by the recursion
/// `σ_{−q−j} = −ρ_q^{-1} Σ_{k+l+|α|=j, l<j} (1/α!) ∂^α ρ_{q−k} δ^α σ_{−q−l}`.
///
/// Lattice values are cached.
pub struct ParametrixJet {
    rho: ClassicalSymbol,
    len: usize,
    trunc: TruncationSpec,
    funcalc: FuncalcOptions,
    deriv: DerivativeOptions,
    prune_tol: f64,
    cache: Mutex<HashMap<Mode, Arc<Vec<NCElement>>>>,
}

impl std::fmt::Debug for ParametrixJet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametrixJet").field("order", &self.rho.order()).field("len", &self.len).finish()
    }
}

impl ParametrixJet {
    pub fn new(rho: ClassicalSymbol, len: usize, trunc: TruncationSpec) -> Result<Self> {
        if rho.is_empty() {
            return Err(Error::JetTooShort { available: 0, required: 1 });
        }
        Ok(Self {
            rho,
            len,
            trunc,
            funcalc: FuncalcOptions::default(),
            deriv: DerivativeOptions::default(),
            prune_tol: crate::defaults::Defaults::default().prune_tol,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_options(mut self, funcalc: FuncalcOptions, deriv: DerivativeOptions) -> Self {
        self.funcalc = funcalc;
        self.deriv = deriv;
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn symbol(&self) -> &ClassicalSymbol {
        &self.rho
    }

    pub fn order(&self) -> SymbolOrder {
        SymbolOrder::new(-self.rho.order().q)
    }

    /// All `len` components at `ξ ≠ 0`.
    pub fn components_at(&self, xi: &[f64]) -> Result<Arc<Vec<NCElement>>> {
        if xi.iter().all(|&x| x == 0.0) {
            return Err(Error::OriginEvaluation);
        }
        let key = Mode::from_lattice_point(xi);
        if let Some(k) = &key {
            if let Some(v) = self.cache.lock().expect("cache lock").get(k) {
                return Ok(v.clone());
            }
        }
        let out = Arc::new(self.compute(xi)?);
        if let Some(k) = key {
            self.cache.lock().expect("cache lock").insert(k, out.clone());
        }
        Ok(out)
    }

    fn compute(&self, xi: &[f64]) -> Result<Vec<NCElement>> {
        let n = xi.len();
        let theta = self.rho.theta();
        let principal = self.rho.components()[0].eval(xi)?;
        let inv = if principal.is_scalar() {
            let z = principal.tau();
            if z.norm() <= self.funcalc.gap {
                return Err(Error::Singular { value: z.norm(), gap: self.funcalc.gap });
            }
            NCElement::scalar(Complex64::new(1.0, 0.0) / z, theta)
        } else {
            inverse_element(&principal, &self.trunc, &self.funcalc)?.prune(self.prune_tol)
        };
        let mut sigma: Vec<NCElement> = Vec::with_capacity(self.len);
        if self.len == 0 {
            return Ok(sigma);
        }
        sigma.push(inv.clone());
        let mut rho_derivs: HashMap<(usize, MultiIndex), NCElement> = HashMap::new();
        for j in 1..self.len {
            let mut acc = NCElement::zero(theta);
            for l in 0..j {
                for k in 0..=(j - l) {
                    if k >= self.rho.len() {
                        break;
                    }
                    let a = (j - l - k) as u32;
                    for alpha in MultiIndex::of_degree(n, a) {
                        let ds = sigma[l].delta(&alpha);
                        if ds.is_empty() {
                            continue;
                        }
                        let key = (k, alpha.clone());
                        if !rho_derivs.contains_key(&key) {
                            let d = xi_derivative(&self.rho.components()[k], &alpha, xi, &self.deriv)?;
                            rho_derivs.insert(key.clone(), d);
                        }
                        let dr = &rho_derivs[&key];
                        if dr.is_empty() {
                            continue;
                        }
                        let term = dr.try_mul(&ds)?.scale(Complex64::new(1.0 / alpha.factorial(), 0.0));
                        acc = acc.try_add(&term)?;
                    }
                }
            }
            let next = inv.try_mul(&acc)?.scale(Complex64::new(-1.0, 0.0)).prune(self.prune_tol);
            sigma.push(next);
        }
        Ok(sigma)
    }

    /// The sum of the first `terms` components as a symbol.
    pub fn truncated(self: &Arc<Self>, terms: usize, origin: OriginConvention) -> ParametrixSymbol {
        ParametrixSymbol { jet: self.clone(), terms: terms.min(self.len), origin }
    }

    /// A single component `σ_{−q−j}` as a symbol.
    pub fn component(self: &Arc<Self>, j: usize) -> ParametrixComponent {
        ParametrixComponent { jet: self.clone(), j }
    }
}

/// `Σ_{j<N} σ_{−q−j}` with a value at the origin.
#[derive(Clone)]
pub struct ParametrixSymbol {
    jet: Arc<ParametrixJet>,
    terms: usize,
    origin: OriginConvention,
}

impl Symbol for ParametrixSymbol {
    fn theta(&self) -> &Theta {
        self.jet.rho.theta()
    }

    fn order(&self) -> SymbolOrder {
        self.jet.order()
    }

    fn support_radius(&self) -> u32 {
        self.jet.trunc.inner_radius()
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        if xi.iter().all(|&x| x == 0.0) {
            return Ok(match &self.origin {
                OriginConvention::Excise => NCElement::zero(self.theta()),
                OriginConvention::Value(v) => v.clone(),
            });
        }
        let comps = self.jet.components_at(xi)?;
        let mut acc = NCElement::zero(self.theta());
        for c in comps.iter().take(self.terms) {
            acc = acc.try_add(c)?;
        }
        Ok(acc)
    }
}

#[derive(Clone)]
pub struct ParametrixComponent {
    jet: Arc<ParametrixJet>,
    j: usize,
}

impl Symbol for ParametrixComponent {
    fn theta(&self) -> &Theta {
        self.jet.rho.theta()
    }

    fn order(&self) -> SymbolOrder {
        self.jet.order().shift(-(self.j as f64))
    }

    fn support_radius(&self) -> u32 {
        self.jet.trunc.inner_radius()
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        Ok(self.jet.components_at(xi)?[self.j].clone())
    }
}
