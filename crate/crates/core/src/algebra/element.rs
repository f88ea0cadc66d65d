use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::mode::{Mode, MultiIndex};
use super::theta::{same_theta, turns_to_phase, Theta};
use crate::error::{Error, Result};

/// Finitely supported element `u = Σ u_k U^k` of the twisted Fourier algebra.
///
/// Zero coefficients are never stored. Iteration follows the lexicographic
/// order of [`Mode`], so everything derived from an element is reproducible.
#[derive(Debug, Clone)]
pub struct NCElement {
    theta: Theta,
    coeffs: BTreeMap<Mode, Complex64>,
}

impl PartialEq for NCElement {
    fn eq(&self, other: &Self) -> bool {
        same_theta(&self.theta, &other.theta) && self.coeffs == other.coeffs
    }
}

impl NCElement {
    pub fn zero(theta: &Theta) -> Self {
        Self { theta: theta.clone(), coeffs: BTreeMap::new() }
    }

    pub fn one(theta: &Theta) -> Self {
        Self::scalar(Complex64::new(1.0, 0.0), theta)
    }

    pub fn scalar(c: Complex64, theta: &Theta) -> Self {
        let mut out = Self::zero(theta);
        out.insert(Mode::zero(theta.dim()), c);
        out
    }

    /// `c·U^k`
    pub fn monomial(k: &[i32], c: Complex64, theta: &Theta) -> Result<Self> {
        if k.len() != theta.dim() {
            return Err(Error::DimensionMismatch { expected: theta.dim(), got: k.len() });
        }
        let mut out = Self::zero(theta);
        out.insert(Mode::from_slice(k), c);
        Ok(out)
    }

    /// The generator `U_j` (zero based).
    pub fn generator(j: usize, theta: &Theta) -> Self {
        let mut out = Self::zero(theta);
        out.insert(Mode::unit(theta.dim(), j), Complex64::new(1.0, 0.0));
        out
    }

    pub fn from_coeffs<I>(theta: &Theta, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, Complex64)>,
    {
        let mut out = Self::zero(theta);
        for (k, c) in coeffs {
            if k.dim() != theta.dim() {
                return Err(Error::DimensionMismatch { expected: theta.dim(), got: k.dim() });
            }
            out.accumulate(k, c);
        }
        Ok(out)
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn coeff(&self, k: &Mode) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|k|_∞` in the support, zero for the empty element.
    pub fn support_radius(&self) -> u32 {
        self.coeffs.keys().map(Mode::norm_inf).max().unwrap_or(0)
    }

    pub(crate) fn insert(&mut self, k: Mode, c: Complex64) {
        if c == Complex64::default() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub(crate) fn accumulate(&mut self, k: Mode, c: Complex64) {
        use std::collections::btree_map::Entry;
        if c == Complex64::default() {
            return;
        }
        match self.coeffs.entry(k) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == Complex64::default() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_theta(&self.theta, &other.theta) {
            Ok(())
        } else {
            Err(Error::ThetaMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.accumulate(k.clone(), *c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.accumulate(k.clone(), -*c);
        }
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_coeffs(|_, c| c * s)
    }

    /// Twisted convolution `(uv)_m = Σ_{k+l=m} u_k v_l χ(k,l)`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut acc: BTreeMap<Mode, Complex64> = BTreeMap::new();
        for (k, a) in &self.coeffs {
            for (l, b) in &other.coeffs {
                let phase = self.theta.pair_phase(k.as_slice(), l.as_slice());
                *acc.entry(k + l).or_default() += a * b * phase;
            }
        }
        acc.retain(|_, c| *c != Complex64::default());
        Ok(Self { theta: self.theta.clone(), coeffs: acc })
    }

    /// `u·U^k`, computed without a general product.
    pub fn mul_monomial_right(&self, k: &Mode) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, c)| (m + k, c * self.theta.pair_phase(m.as_slice(), k.as_slice())))
            .collect();
        Self { theta: self.theta.clone(), coeffs }
    }

    /// `U^k·u`
    pub fn mul_monomial_left(&self, k: &Mode) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, c)| (k + m, c * self.theta.pair_phase(k.as_slice(), m.as_slice())))
            .collect();
        Self { theta: self.theta.clone(), coeffs }
    }

    /// `u*`, with `(u*)_{-k} = conj(u_k) χ*(k)`.
    pub fn involution(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| (-k, c.conj() * self.theta.involution_phase(k.as_slice())))
            .collect();
        Self { theta: self.theta.clone(), coeffs }
    }

    /// Trace: the coefficient of `U^0`.
    pub fn tau(&self) -> Complex64 {
        self.coeff(&Mode::zero(self.dim()))
    }

    /// `⟨u, v⟩ = Σ u_k conj(v_k)`, which equals `τ(u v*)`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check(other)?;
        Ok(self
            .coeffs
            .iter()
            .filter_map(|(k, a)| other.coeffs.get(k).map(|b| a * b.conj()))
            .sum())
    }

    /// `δ^α u`, multiplying `u_k` by `k^α`.
    pub fn delta(&self, alpha: &MultiIndex) -> Self {
        if alpha.is_zero() {
            return self.clone();
        }
        self.map_coeffs(|k, c| c * k.pow(alpha))
    }

    /// Group action `α_s(U^k) = e^{i s·k} U^k`.
    pub fn alpha_act(&self, s: &[f64]) -> Self {
        self.map_coeffs(|k, c| {
            let arg: f64 = k.as_slice().iter().zip(s).map(|(&ki, &si)| ki as f64 * si).sum();
            c * Complex64::from_polar(1.0, arg)
        })
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(&Mode, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.clone(), f(k, *c)))
            .filter(|(_, c)| *c != Complex64::default())
            .collect();
        Self { theta: self.theta.clone(), coeffs }
    }

    /// Fourier ℓ² norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (k, a) in &self.coeffs {
            acc += (a - other.coeff(k)).norm_sqr();
        }
        for (k, b) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                acc += b.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Keeps modes with `|k|_∞ ≤ radius`.
    pub fn restrict(&self, radius: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| k.norm_inf() <= radius)
            .map(|(k, c)| (k.clone(), *c))
            .collect();
        Self { theta: self.theta.clone(), coeffs }
    }

    /// Drops coefficients with modulus at or below `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(k, c)| (k.clone(), *c))
            .collect();
        Self { theta: self.theta.clone(), coeffs }
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.distance(&self.involution()) <= tol * self.norm().max(1.0)
    }

    /// The element is a multiple of the unit.
    pub fn is_scalar(&self) -> bool {
        self.coeffs.keys().all(Mode::is_zero)
    }
}

/// Complex Gaussian coefficients on up to `count` modes of the box
/// `|k|_∞ ≤ radius`.
pub fn random_element<R: Rng + ?Sized>(
    theta: &Theta,
    radius: u32,
    count: usize,
    rng: &mut R,
) -> NCElement {
    let n = theta.dim();
    let r = radius as i32;
    let mut out = NCElement::zero(theta);
    for _ in 0..count {
        let k: Vec<i32> = (0..n).map(|_| rng.random_range(-r..=r)).collect();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        out.accumulate(Mode::from_slice(&k), Complex64::new(re, im));
    }
    out
}

/// Complex Gaussian coefficients on every mode of the box `|k|_∞ ≤ radius`.
pub fn dense_random_element<R: Rng + ?Sized>(theta: &Theta, radius: u32, rng: &mut R) -> NCElement {
    let basis = super::BoxBasis::new(theta.dim(), radius);
    let mut out = NCElement::zero(theta);
    for k in basis.modes() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        out.accumulate(k, Complex64::new(re, im));
    }
    out
}

/// Phase of `U^k (U^k)^{-1}` bookkeeping: `(U^k)^{-1} = (U^k)* = χ*(k) U^{-k}`.
pub fn monomial_inverse(k: &Mode, theta: &Theta) -> NCElement {
    let mut out = NCElement::zero(theta);
    out.insert(-k, turns_to_phase(theta.pair_exponent(k.as_slice(), k.as_slice())));
    out
}

impl Add for &NCElement {
    type Output = NCElement;
    /// Panics when the deformation matrices differ.
    fn add(self, rhs: &NCElement) -> NCElement {
        self.try_add(rhs).expect("theta mismatch in add")
    }
}

impl Sub for &NCElement {
    type Output = NCElement;
    fn sub(self, rhs: &NCElement) -> NCElement {
        self.try_sub(rhs).expect("theta mismatch in sub")
    }
}

impl Mul for &NCElement {
    type Output = NCElement;
    fn mul(self, rhs: &NCElement) -> NCElement {
        self.try_mul(rhs).expect("theta mismatch in mul")
    }
}

impl Neg for &NCElement {
    type Output = NCElement;
    fn neg(self) -> NCElement {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ThetaMatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn generator_relation_n2() {
        let t = 0.37;
        let theta = ThetaMatrix::uniform(2, t).into_shared();
        let u1 = NCElement::generator(0, &theta);
        let u2 = NCElement::generator(1, &theta);
        let lhs = &u2 * &u1;
        let rhs = NCElement::monomial(&[1, 1], turns_to_phase(t), &theta).unwrap();
        assert!(lhs.distance(&rhs) < 1e-15);
        assert!((&u1 * &u2).distance(&NCElement::monomial(&[1, 1], c(1.0), &theta).unwrap()) == 0.0);
    }

    #[test]
    fn generators_are_unitary() {
        let theta = ThetaMatrix::uniform(3, 0.21).into_shared();
        for j in 0..3 {
            let u = NCElement::generator(j, &theta);
            let star = u.involution();
            let mut k = vec![0; 3];
            k[j] = -1;
            assert_eq!(star, NCElement::monomial(&k, c(1.0), &theta).unwrap());
            assert!((&u * &star).distance(&NCElement::one(&theta)) < 1e-15);
        }
    }

    #[test]
    fn monomial_times_its_negative_is_unimodular_scalar() {
        let theta = ThetaMatrix::uniform(2, 0.123).into_shared();
        let a = NCElement::monomial(&[3, -2], c(1.0), &theta).unwrap();
        let b = NCElement::monomial(&[-3, 2], c(1.0), &theta).unwrap();
        let p = &a * &b;
        assert_eq!(p.len(), 1);
        assert!((p.tau().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_and_theta_checks() {
        let t2 = ThetaMatrix::uniform(2, 0.1).into_shared();
        let t2b = ThetaMatrix::uniform(2, 0.2).into_shared();
        assert!(NCElement::monomial(&[1, 2, 3], c(1.0), &t2).is_err());
        let a = NCElement::one(&t2);
        let b = NCElement::one(&t2b);
        assert!(matches!(a.try_mul(&b), Err(Error::ThetaMismatch)));
        assert!(a.inner(&b).is_err());
    }

    #[test]
    fn cancellation_removes_modes() {
        let theta = ThetaMatrix::zero(2).into_shared();
        let a = NCElement::generator(0, &theta);
        assert!((&a - &a).is_empty());
    }

    #[test]
    fn delta_and_group_action() {
        let theta = ThetaMatrix::uniform(2, 0.3).into_shared();
        let u2 = NCElement::generator(1, &theta);
        assert_eq!(u2.delta(&MultiIndex::unit(2, 1)), u2);
        assert!(u2.delta(&MultiIndex::unit(2, 0)).is_empty());
        assert!(NCElement::one(&theta).delta(&MultiIndex::unit(2, 0)).is_empty());
        let k = NCElement::monomial(&[2, -1], c(1.0), &theta).unwrap();
        let s = [0.4, 1.1];
        let expected = Complex64::from_polar(1.0, 2.0 * 0.4 - 1.1);
        assert!((k.alpha_act(&s).coeff(&Mode::from_slice(&[2, -1])) - expected).norm() < 1e-15);
    }
}
