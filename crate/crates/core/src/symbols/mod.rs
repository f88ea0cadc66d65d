//! Symbols: `A_θ`-valued functions of the frequency variable `ξ`.
//!
//! Every symbol can be evaluated at real `ξ` (or at least on the lattice) and
//! differentiated in `ξ`. Derivatives are exact when the symbol supplies them
//! (polynomials, profile products) and fall back to Richardson-extrapolated
//! central differences otherwise.

mod jet;
mod kinds;
mod profile;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use jet::{Jet, JetSpace};
pub use kinds::{
    excise_origin, homogeneity_check, ClassicalSymbol, HomogeneousComponent, LatticeSymbol,
    OriginConvention, PolynomialSymbol, ProfileSymbol, ScaledSymbol, SumSymbol,
};
pub use profile::ScalarProfile;

use crate::algebra::{Mode, MultiIndex, NCElement, Theta};
use crate::error::{Error, Result};

/// Degree `q` of a symbol and its real part `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolOrder {
    pub q: Complex64,
    pub m: f64,
}

impl SymbolOrder {
    pub fn new(q: Complex64) -> Self {
        Self { q, m: q.re }
    }

    pub fn real(m: f64) -> Self {
        Self::new(Complex64::new(m, 0.0))
    }

    pub fn shift(&self, by: f64) -> Self {
        Self::new(self.q + by)
    }

    pub fn add(&self, other: &SymbolOrder) -> Self {
        Self::new(self.q + other.q)
    }
}

pub trait Symbol: Send + Sync {
    fn theta(&self) -> &Theta;

    fn order(&self) -> SymbolOrder;

    /// Declared bound on `|k|_∞` over the Fourier support of every value.
    fn support_radius(&self) -> u32;

    fn eval(&self, xi: &[f64]) -> Result<NCElement>;

    /// Value at a lattice point. Lattice-only symbols override this.
    fn eval_at(&self, k: &Mode) -> Result<NCElement> {
        self.eval(&k.to_f64())
    }

    /// Exact `∂_ξ^α ρ(ξ)` when the symbol knows it.
    fn analytic_derivative(&self, _alpha: &MultiIndex, _xi: &[f64]) -> Option<Result<NCElement>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    pub cap: u32,
    /// Base step; the actual step is `h0 · max(1, |ξ|)`.
    pub h0: f64,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        let d = crate::defaults::Defaults::default();
        Self { cap: d.max_derivative_order, h0: d.fd_step }
    }
}

pub fn check_derivative_cap(alpha: &MultiIndex, cap: u32) -> Result<()> {
    let order = alpha.degree();
    if order > cap {
        Err(Error::DerivativeCap { order, cap })
    } else {
        Ok(())
    }
}

/// `∂_ξ^α ρ(ξ)`, analytic when available, finite differences otherwise.
pub fn xi_derivative(
    sym: &dyn Symbol,
    alpha: &MultiIndex,
    xi: &[f64],
    opts: &DerivativeOptions,
) -> Result<NCElement> {
    check_derivative_cap(alpha, opts.cap)?;
    if alpha.is_zero() {
        return sym.eval(xi);
    }
    if let Some(d) = sym.analytic_derivative(alpha, xi) {
        return d;
    }
    fd_derivative(sym, alpha, xi, opts.h0)
}

/// Second-order central differences with one Richardson step, giving an
/// `O(h^4)` truncation error.
pub fn fd_derivative(
    sym: &dyn Symbol,
    alpha: &MultiIndex,
    xi: &[f64],
    h0: f64,
) -> Result<NCElement> {
    let scale = xi.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let h = h0 * scale;
    let coarse = central_difference(sym, alpha, xi, h)?;
    let fine = central_difference(sym, alpha, xi, h / 2.0)?;
    Ok(&fine.scale(Complex64::new(4.0 / 3.0, 0.0)) - &coarse.scale(Complex64::new(1.0 / 3.0, 0.0)))
}

fn central_difference(
    sym: &dyn Symbol,
    alpha: &MultiIndex,
    xi: &[f64],
    h: f64,
) -> Result<NCElement> {
    // tensor product of 1-D stencils: Σ_j (−1)^j C(a,j) f(x + (a/2 − j) h) / h^a
    let mut stencil: Vec<(Vec<f64>, f64)> = vec![(xi.to_vec(), 1.0)];
    for (dim, &a) in alpha.0.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(stencil.len() * (a as usize + 1));
        for (point, w) in &stencil {
            let mut binom = 1.0;
            for j in 0..=a {
                let mut p = point.clone();
                p[dim] += (a as f64 / 2.0 - j as f64) * h;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                next.push((p, w * sign * binom / h.powi(a as i32)));
                binom = binom * (a - j) as f64 / (j + 1) as f64;
            }
        }
        stencil = next;
    }
    let mut acc = NCElement::zero(sym.theta());
    for (p, w) in stencil {
        acc = &acc + &sym.eval(&p)?.scale(Complex64::new(w, 0.0));
    }
    Ok(acc)
}

/// Unit vectors for sphere-sampled checks: an equiangular grid for `n = 2`,
/// normalized seeded Gaussians otherwise.
pub fn sphere_samples(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if n == 2 {
        return (0..count)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-8 {
            out.push(v.into_iter().map(|x| x / r).collect());
        }
    }
    out
}
