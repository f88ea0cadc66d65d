use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A Fourier mode `k ∈ Z^n`. Ordered lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode(pub SmallVec<[i32; 4]>);

impl Mode {
    pub fn zero(n: usize) -> Self {
        Mode(SmallVec::from_elem(0, n))
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[j] = 1;
        m
    }

    pub fn from_slice(k: &[i32]) -> Self {
        Mode(SmallVec::from_slice(k))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn norm_inf(&self) -> u32 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&c| (c as f64) * (c as f64)).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&c| c as f64).collect()
    }

    /// `k^α`
    pub fn pow(&self, alpha: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(alpha.0.iter())
            .map(|(&k, &a)| (k as f64).powi(a as i32))
            .product()
    }

    /// Returns the mode if every coordinate of `xi` is an integer.
    pub fn from_lattice_point(xi: &[f64]) -> Option<Self> {
        let mut out = SmallVec::with_capacity(xi.len());
        for &x in xi {
            if x.fract() != 0.0 || x.abs() > i32::MAX as f64 {
                return None;
            }
            out.push(x as i32);
        }
        Some(Mode(out))
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl Add for &Mode {
    type Output = Mode;
    fn add(self, rhs: &Mode) -> Mode {
        Mode(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Mode {
    type Output = Mode;
    fn sub(self, rhs: &Mode) -> Mode {
        Mode(self.0.iter().zip(rhs.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode(self.0.iter().map(|a| -a).collect())
    }
}

/// Multi-order `α ∈ N^n` for derivatives and monomials.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut a = Self::zero(n);
        a.0[j] = 1;
        a
    }

    pub fn from_slice(a: &[u32]) -> Self {
        MultiIndex(SmallVec::from_slice(a))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| (1..=a).map(f64::from).product::<f64>()).product()
    }

    /// `ξ^α`
    pub fn monomial(&self, xi: &[f64]) -> f64 {
        self.0.iter().zip(xi).map(|(&a, &x)| x.powi(a as i32)).product()
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = SmallVec::with_capacity(self.dim());
        for (&a, &b) in self.0.iter().zip(other.0.iter()) {
            out.push(a.checked_sub(b)?);
        }
        Some(MultiIndex(out))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// All multi-orders of total degree exactly `d`, lexicographically
    /// descending in the first coordinate.
    pub fn of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fill(&mut out, &mut cur, 0, d);
        out
    }

    /// Graded lexicographic enumeration of all `|α| < bound`.
    pub fn graded_below(n: usize, bound: u32) -> Vec<MultiIndex> {
        (0..bound).flat_map(|d| Self::of_degree(n, d)).collect()
    }
}

fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    let n = cur.len();
    if pos == n - 1 {
        cur[pos] = left;
        out.push(MultiIndex::from_slice(cur));
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        fill(out, cur, pos + 1, left - a);
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}
