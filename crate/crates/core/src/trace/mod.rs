//! Operator traces: the lattice sum `Σ τ[ρ(k)]`, the matrix diagonal, and
//! the integral of a symbol normalized with a Meyer window.

mod meyer;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use meyer::{MeyerChecks, MeyerWindow};

use crate::algebra::{BoxBasis, Mode, NCElement, Theta, TruncationSpec};
use crate::error::{Error, Result};
use crate::psido::{build_matrix, PsiDO};
use crate::symbols::{Symbol, SymbolOrder};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceReport {
    pub method: String,
    pub radius: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    pub re: f64,
    pub im: f64,
    /// Bound on the omitted tail, infinite when the order does not ensure
    /// convergence.
    pub tail_bound: f64,
}

impl TraceReport {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Bound on `Σ_{|k|_∞ > K} (1 + |k|)^m`, finite for `m < −n`.
pub fn lattice_tail_bound(n: usize, order: f64, radius: u32) -> f64 {
    let e = n as f64 + order;
    if e >= 0.0 {
        return f64::INFINITY;
    }
    n as f64 * 2f64.powi(n as i32) * (1.0 + radius as f64).powf(e) / -e
}

/// `Σ_{|k|_∞ ≤ K} τ[ρ(k)]` in basis order, with the tail bound.
pub fn trace_lattice(rho: &dyn Symbol, radius: u32) -> Result<TraceReport> {
    let basis = BoxBasis::new(rho.theta().dim(), radius);
    let mut acc = Complex64::default();
    for k in basis.modes() {
        acc += rho.eval_at(&k)?.tau();
    }
    Ok(TraceReport {
        method: "lattice".into(),
        radius,
        quadrature: None,
        re: acc.re,
        im: acc.im,
        tail_bound: lattice_tail_bound(basis.dim(), rho.order().m, radius),
    })
}

/// Sum of the diagonal of the operator matrix over the trusted window.
pub fn trace_matrix_diag(p: &PsiDO, trunc: &TruncationSpec) -> Result<TraceReport> {
    let op = build_matrix(p, trunc)?;
    let w = op.trusted_radius();
    let mut acc = Complex64::default();
    for i in op.window_indices(w) {
        acc += op.matrix().get(i, i);
    }
    Ok(TraceReport {
        method: "matrix-diagonal".into(),
        radius: w,
        quadrature: None,
        re: acc.re,
        im: acc.im,
        tail_bound: lattice_tail_bound(p.theta().dim(), p.order().m, w),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    Trapezoid,
    Simpson,
}

/// Tensor-product rule on `[−X, X]^n` with step `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub step: f64,
    pub box_radius: f64,
    pub rule: QuadratureRule,
}

impl QuadratureSpec {
    pub fn new(step: f64, box_radius: f64, rule: QuadratureRule) -> Result<Self> {
        if !(step > 0.0) || !(box_radius > 0.0) {
            return Err(Error::InvalidSymbol("quadrature needs positive step and box".into()));
        }
        Ok(Self { step, box_radius, rule })
    }

    /// Nodes and weights of the one-dimensional rule. Simpson needs an even
    /// number of intervals; the count is rounded up.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut m = (2.0 * self.box_radius / self.step).round() as usize;
        if self.rule == QuadratureRule::Simpson && m % 2 == 1 {
            m += 1;
        }
        let h = 2.0 * self.box_radius / m as f64;
        (0..=m)
            .map(|j| {
                let x = -self.box_radius + j as f64 * h;
                let w = match self.rule {
                    QuadratureRule::Trapezoid => {
                        if j == 0 || j == m {
                            h / 2.0
                        } else {
                            h
                        }
                    }
                    QuadratureRule::Simpson => {
                        if j == 0 || j == m {
                            h / 3.0
                        } else if j % 2 == 1 {
                            4.0 * h / 3.0
                        } else {
                            2.0 * h / 3.0
                        }
                    }
                };
                (x, w)
            })
            .collect()
    }
}

/// `ρ̃(ξ) = Σ_{|k|_∞ ≤ K} φ(ξ − k) ρ(k)`, which agrees with `ρ` on the
/// lattice inside the box.
#[derive(Clone)]
pub struct NormalizedSymbol {
    theta: Theta,
    order: SymbolOrder,
    support: u32,
    radius: u32,
    values: Vec<(Mode, NCElement)>,
    window: Arc<MeyerWindow>,
}

impl NormalizedSymbol {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn window(&self) -> &MeyerWindow {
        &self.window
    }

    /// `Σ_k τ[ρ(k)]` over the stored lattice values.
    pub fn lattice_sum(&self) -> Complex64 {
        self.values.iter().map(|(_, v)| v.tau()).sum()
    }
}

pub fn normalize_symbol(rho: &dyn Symbol, window: Arc<MeyerWindow>, radius: u32) -> Result<NormalizedSymbol> {
    let n = rho.theta().dim();
    if window.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: window.dim() });
    }
    let basis = BoxBasis::new(n, radius);
    let mut values = Vec::with_capacity(basis.len());
    for k in basis.modes() {
        let v = rho.eval_at(&k)?;
        if !v.is_empty() {
            values.push((k, v));
        }
    }
    Ok(NormalizedSymbol {
        theta: rho.theta().clone(),
        order: rho.order(),
        support: rho.support_radius(),
        radius,
        values,
        window,
    })
}

impl Symbol for NormalizedSymbol {
    fn theta(&self) -> &Theta {
        &self.theta
    }

    fn order(&self) -> SymbolOrder {
        self.order
    }

    fn support_radius(&self) -> u32 {
        self.support
    }

    fn eval(&self, xi: &[f64]) -> Result<NCElement> {
        let mut acc = NCElement::zero(&self.theta);
        let mut shifted = vec![0.0; xi.len()];
        for (k, v) in &self.values {
            for (i, s) in shifted.iter_mut().enumerate() {
                *s = xi[i] - k.as_slice()[i] as f64;
            }
            let w = self.window.phi(&shifted);
            if w != 0.0 {
                acc = acc.try_add(&v.scale(Complex64::new(w, 0.0)))?;
            }
        }
        Ok(acc)
    }
}

fn check_box(quad: &QuadratureSpec, radius: u32) -> Result<()> {
    if quad.box_radius < radius as f64 {
        return Err(Error::QuadratureBox { box_radius: quad.box_radius, lattice: radius });
    }
    Ok(())
}

/// `∫ τ[ρ̃(ξ)] dξ` by separation of variables: the tensor quadrature
/// of `τ∘ρ̃` equals `Σ_k τ[ρ(k)] Π_i W(k_i)` with
/// `W(k) = Σ_j w_j φ_1(ξ_j − k)`.
pub fn integral_trace(rho: &NormalizedSymbol, quad: &QuadratureSpec) -> Result<TraceReport> {
    check_box(quad, rho.radius)?;
    let nodes = quad.nodes();
    let r = rho.radius as i32;
    let weights: Vec<f64> = (-r..=r)
        .into_par_iter()
        .map(|k| nodes.iter().map(|(x, w)| w * rho.window.phi1(x - k as f64)).sum())
        .collect();
    let mut acc = Complex64::default();
    for (k, v) in &rho.values {
        let f: f64 = k.as_slice().iter().map(|&c| weights[(c + r) as usize]).product();
        acc += v.tau() * f;
    }
    Ok(TraceReport {
        method: "integral-normalized".into(),
        radius: rho.radius,
        quadrature: Some(*quad),
        re: acc.re,
        im: acc.im,
        tail_bound: lattice_tail_bound(rho.theta.dim(), rho.order.m, rho.radius),
    })
}

/// Plain tensor-product quadrature of `τ[ρ(ξ)]` over the box. For a
/// normalized symbol this agrees with [`integral_trace`] up to rounding.
pub fn integral_trace_grid(rho: &dyn Symbol, quad: &QuadratureSpec) -> Result<TraceReport> {
    let n = rho.theta().dim();
    let nodes = quad.nodes();
    let total = nodes.len().pow(n as u32);
    let parts: Vec<Result<Complex64>> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut xi = vec![0.0; n];
            let mut w = 1.0;
            for slot in xi.iter_mut().rev() {
                let (x, wx) = nodes[idx % nodes.len()];
                *slot = x;
                w *= wx;
                idx /= nodes.len();
            }
            Ok(rho.eval(&xi)?.tau() * w)
        })
        .collect();
    let mut acc = Complex64::default();
    for p in parts {
        acc += p?;
    }
    let e = n as f64 + rho.order().m;
    let tail = if e < 0.0 {
        // ∫_{|ξ|_∞ > X} |ξ|^m over the complement of the box
        n as f64 * 2f64.powi(n as i32) * quad.box_radius.powf(e) / -e
    } else {
        f64::INFINITY
    };
    Ok(TraceReport {
        method: "integral-grid".into(),
        radius: quad.box_radius.floor() as u32,
        quadrature: Some(*quad),
        re: acc.re,
        im: acc.im,
        tail_bound: tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ThetaMatrix;
    use crate::symbols::{PolynomialSymbol, ProfileSymbol};

    #[test]
    fn lattice_equals_diagonal() {
        let theta = ThetaMatrix::uniform(2, 0.2).into_shared();
        let rho = ProfileSymbol::japanese(&theta, -6.0);
        let lat = trace_lattice(&rho, 10).unwrap();
        let diag = trace_matrix_diag(&PsiDO::from_symbol(rho), &TruncationSpec::new(10, 0).unwrap()).unwrap();
        assert_eq!(lat.value(), diag.value());
        assert!(lat.tail_bound.is_finite());
    }

    #[test]
    fn off_diagonal_content_has_zero_trace() {
        let theta = ThetaMatrix::uniform(2, 0.2).into_shared();
        let a = NCElement::generator(0, &theta);
        let p = PsiDO::from_symbol(PolynomialSymbol::constant(a));
        let t = trace_matrix_diag(&p, &TruncationSpec::new(5, 1).unwrap()).unwrap();
        assert_eq!(t.value(), Complex64::default());
    }

    #[test]
    fn simpson_and_trapezoid_integrate_polynomials() {
        for rule in [QuadratureRule::Trapezoid, QuadratureRule::Simpson] {
            let q = QuadratureSpec::new(0.5, 2.0, rule).unwrap();
            let total: f64 = q.nodes().iter().map(|(_, w)| w).sum();
            assert!((total - 4.0).abs() < 1e-14);
        }
        let q = QuadratureSpec::new(0.5, 2.0, QuadratureRule::Simpson).unwrap();
        let cubic: f64 = q.nodes().iter().map(|(x, w)| w * x * x).sum();
        assert!((cubic - 16.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn normalized_symbol_matches_on_lattice_and_integrates_to_sum() {
        let theta = ThetaMatrix::zero(2).into_shared();
        let rho = ProfileSymbol::japanese(&theta, -6.0);
        let window = Arc::new(MeyerWindow::from_defaults(2).unwrap());
        let norm = normalize_symbol(&rho, window, 6).unwrap();
        let at = norm.eval(&[1.0, -2.0]).unwrap();
        assert!((at.tau().re - 6f64.powi(-3)).abs() < 1e-8);
        let quad = QuadratureSpec::new(0.25, 22.0, QuadratureRule::Trapezoid).unwrap();
        let fast = integral_trace(&norm, &quad).unwrap();
        let sum = norm.lattice_sum();
        assert!(((fast.value() - sum) / sum).norm() < 1e-4);
        assert!(fast.im.abs() < 1e-12);
        assert!(matches!(
            integral_trace(&norm, &QuadratureSpec::new(0.25, 3.0, QuadratureRule::Trapezoid).unwrap()),
            Err(Error::QuadratureBox { .. })
        ));
    }
}
