use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::jet::{Jet, JetSpace};
use crate::algebra::MultiIndex;

type ProfileFn = dyn Fn(&[Jet]) -> Jet + Send + Sync;

/// A scalar function of `ξ` written against [`Jet`] arithmetic, so that its
/// value and every derivative come out of one evaluation.
#[derive(Clone)]
pub struct ScalarProfile {
    name: String,
    f: Arc<ProfileFn>,
}

impl fmt::Debug for ScalarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarProfile({})", self.name)
    }
}

fn norm_sq(v: &[Jet]) -> Jet {
    v.iter().skip(1).fold(v[0].mul(&v[0]), |acc, x| acc.add(&x.mul(x)))
}

impl ScalarProfile {
    pub fn new(name: impl Into<String>, f: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `⟨ξ⟩^s = (1 + |ξ|²)^{s/2}`
    pub fn japanese(s: f64) -> Self {
        Self::japanese_complex(Complex64::new(s, 0.0))
    }

    pub fn japanese_complex(s: Complex64) -> Self {
        Self::new(format!("japanese({s})"), move |v| {
            norm_sq(v).add_scalar(Complex64::new(1.0, 0.0)).powc(s / 2.0)
        })
    }

    /// `|ξ|^s`, singular at the origin for `Re s ≤ 0`.
    pub fn radial(s: f64) -> Self {
        let s = Complex64::new(s, 0.0);
        Self::new(format!("radial({s})"), move |v| norm_sq(v).powc(s / 2.0))
    }

    /// `ξ^α`
    pub fn monomial(alpha: MultiIndex) -> Self {
        Self::new(format!("monomial({alpha:?})"), move |v| {
            let space = v[0].space().clone();
            let mut out = Jet::constant(&space, Complex64::new(1.0, 0.0));
            for (x, &a) in v.iter().zip(alpha.0.iter()) {
                for _ in 0..a {
                    out = out.mul(x);
                }
            }
            out
        })
    }

    /// `exp(−|ξ|² / w²)`
    pub fn gaussian(width: f64) -> Self {
        let s = Complex64::new(-1.0 / (width * width), 0.0);
        Self::new(format!("gaussian({width})"), move |v| norm_sq(v).scale(s).exp())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(format!("constant({c})"), move |v| Jet::constant(v[0].space(), c))
    }

    pub fn times(&self, other: &ScalarProfile) -> Self {
        let (a, b) = (self.f.clone(), other.f.clone());
        Self::new(format!("{}*{}", self.name, other.name), move |v| a(v).mul(&b(v)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let a = self.f.clone();
        Self::new(format!("{c}*{}", self.name), move |v| a(v).scale(c))
    }

    /// Jet of the profile at `xi` up to the given total degree.
    pub fn jet(&self, xi: &[f64], degree: u32) -> Jet {
        let space = JetSpace::shared(xi.len(), degree);
        (self.f)(&Jet::variables(&space, xi))
    }

    pub fn value(&self, xi: &[f64]) -> Complex64 {
        self.jet(xi, 0).value()
    }

    pub fn derivative(&self, alpha: &MultiIndex, xi: &[f64]) -> Complex64 {
        self.jet(xi, alpha.degree()).derivative(alpha)
    }
}
