//! Truncated multivariate Taylor series, used to get exact ξ-derivatives of
//! scalar profiles without finite differences.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::algebra::MultiIndex;

#[derive(Debug)]
pub struct JetSpace {
    n: usize,
    degree: u32,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `(a, b, c)` with `index[a] + index[b] = index[c]`, within the degree.
    products: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    pub fn shared(n: usize, degree: u32) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("jet cache poisoned");
        guard
            .entry((n, degree))
            .or_insert_with(|| Arc::new(JetSpace::build(n, degree)))
            .clone()
    }

    fn build(n: usize, degree: u32) -> Self {
        let indices = MultiIndex::graded_below(n, degree + 1);
        let lookup: HashMap<_, _> = indices.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let mut products = Vec::new();
        for (a, ia) in indices.iter().enumerate() {
            for (b, ib) in indices.iter().enumerate() {
                if ia.degree() + ib.degree() <= degree {
                    products.push((a, b, lookup[&ia.add(ib)]));
                }
            }
        }
        Self { n, degree, indices, lookup, products }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

/// Taylor coefficients `c_α = ∂^α f(ξ_0) / α!` for `|α| ≤ degree`.
#[derive(Debug, Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::default(); space.len()];
        coeffs[0] = c;
        Self { space: space.clone(), coeffs }
    }

    /// The coordinate function `ξ_j` expanded at `xi`.
    pub fn variable(space: &Arc<JetSpace>, xi: &[f64], j: usize) -> Self {
        let mut out = Self::constant(space, Complex64::new(xi[j], 0.0));
        if space.degree >= 1 {
            let idx = space.index_of(&MultiIndex::unit(space.n, j)).expect("unit index");
            out.coeffs[idx] = Complex64::new(1.0, 0.0);
        }
        out
    }

    pub fn variables(space: &Arc<JetSpace>, xi: &[f64]) -> Vec<Jet> {
        (0..space.n).map(|j| Self::variable(space, xi, j)).collect()
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `∂^α f(ξ_0)`; zero beyond the jet degree is not representable, so
    /// callers must size the space to `|α|`.
    pub fn derivative(&self, alpha: &MultiIndex) -> Complex64 {
        let idx = self.space.index_of(alpha).expect("derivative order exceeds jet degree");
        self.coeffs[idx] * alpha.factorial()
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Jet { space: self.space.clone(), coeffs }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Jet { space: self.space.clone(), coeffs }
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet { space: self.space.clone(), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut coeffs = vec![Complex64::default(); self.space.len()];
        for &(a, b, c) in &self.space.products {
            coeffs[c] += self.coeffs[a] * other.coeffs[b];
        }
        Jet { space: self.space.clone(), coeffs }
    }

    /// `f ∘ self` given `derivs[m] = f^{(m)}(self.value())` for
    /// `m = 0..=degree`.
    pub fn compose(&self, derivs: &[Complex64]) -> Jet {
        let deg = self.space.degree as usize;
        let mut nil = self.clone();
        nil.coeffs[0] = Complex64::default();
        let mut out = Jet::constant(&self.space, derivs[0]);
        let mut power = Jet::constant(&self.space, Complex64::new(1.0, 0.0));
        let mut fact = 1.0;
        for (m, d) in derivs.iter().enumerate().take(deg + 1).skip(1) {
            power = power.mul(&nil);
            fact *= m as f64;
            out = out.add(&power.scale(d / fact));
        }
        out
    }

    /// `self^s` on the principal branch.
    pub fn powc(&self, s: Complex64) -> Jet {
        let a = self.value();
        let deg = self.space.degree as usize;
        let mut derivs = Vec::with_capacity(deg + 1);
        let mut falling = Complex64::new(1.0, 0.0);
        for m in 0..=deg {
            derivs.push(falling * pow_principal(a, s - m as f64));
            falling *= s - m as f64;
        }
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let derivs = vec![e; self.space.degree as usize + 1];
        self.compose(&derivs)
    }

    pub fn recip(&self) -> Jet {
        self.powc(Complex64::new(-1.0, 0.0))
    }
}

fn pow_principal(a: Complex64, s: Complex64) -> Complex64 {
    if a.im == 0.0 && a.re > 0.0 && s.im == 0.0 {
        Complex64::new(a.re.powf(s.re), 0.0)
    } else {
        (s * a.ln()).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn japanese_bracket_derivatives() {
        // f = (1 + x² + y²)^{-1/2} at (1, 0)
        let space = JetSpace::shared(2, 3);
        let v = Jet::variables(&space, &[1.0, 0.0]);
        let r2 = v[0].mul(&v[0]).add(&v[1].mul(&v[1])).add_scalar(Complex64::new(1.0, 0.0));
        let f = r2.powc(Complex64::new(-0.5, 0.0));
        let s2 = 2f64.sqrt();
        assert!((f.value().re - 1.0 / s2).abs() < 1e-15);
        // ∂_x f = -x (1+x²+y²)^{-3/2}
        let dx = f.derivative(&MultiIndex::from_slice(&[1, 0]));
        assert!((dx.re + 1.0 / (2.0 * s2)).abs() < 1e-15);
        // ∂_x² f = (2x² - 1 - y²)(1+x²+y²)^{-5/2}
        let dxx = f.derivative(&MultiIndex::from_slice(&[2, 0]));
        assert!((dxx.re - 1.0 / 2f64.powf(2.5)).abs() < 1e-15);
        // ∂_y² f = (2y² - 1 - x²)(...)^{-5/2} = -2 / 2^{2.5}
        let dyy = f.derivative(&MultiIndex::from_slice(&[0, 2]));
        assert!((dyy.re + 2.0 / 2f64.powf(2.5)).abs() < 1e-15);
    }

    #[test]
    fn exp_of_linear() {
        let space = JetSpace::shared(1, 4);
        let x = Jet::variable(&space, &[0.3], 0);
        let e = x.scale(Complex64::new(2.0, 0.0)).exp();
        for m in 0..=4u32 {
            let d = e.derivative(&MultiIndex::from_slice(&[m]));
            assert!((d.re - 2f64.powi(m as i32) * 0.6f64.exp()).abs() < 1e-13);
        }
    }
}
