use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real antisymmetric deformation matrix, stored row-major.
///
/// The generators obey `U_l U_j = exp(2πi θ_jl) U_j U_l`. With the
/// normal-ordered monomial `U^k = U_1^{k_1} ··· U_n^{k_n}` the product of two
/// monomials is `U^k U^l = χ(k, l) U^{k+l}` where
///
/// ```text
/// χ(k, l) = exp(2πi Σ_{i>j} θ_ji k_i l_j)
/// ```
///
/// and the adjoint of a monomial is `(U^k)* = χ*(k) U^{-k}` with
///
/// ```text
/// χ*(k) = exp(2πi Σ_{i>j} θ_ji k_i k_j) = 1 / χ(k, -k).
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaMatrix {
    n: usize,
    entries: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    phase_fault: bool,
}

pub type Theta = Arc<ThetaMatrix>;

impl ThetaMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: n });
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        for j in 0..n {
            for l in 0..n {
                if entries[j * n + l] != -entries[l * n + j] {
                    return Err(Error::NotAntisymmetric { row: j, col: l });
                }
            }
        }
        Ok(Self { n, entries, phase_fault: false })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::new(n, entries)
    }

    pub fn zero(n: usize) -> Self {
        Self { n, entries: vec![0.0; n * n], phase_fault: false }
    }

    /// Matrix with `θ_jl = t` for every `j < l`.
    pub fn uniform(n: usize, t: f64) -> Self {
        let mut entries = vec![0.0; n * n];
        for j in 0..n {
            for l in j + 1..n {
                entries[j * n + l] = t;
                entries[l * n + j] = -t;
            }
        }
        Self { n, entries, phase_fault: false }
    }

    /// Debug hook: the resulting matrix produces a phase that is not
    /// bilinear in the modes, which breaks associativity.
    pub fn with_phase_fault(mut self) -> Self {
        self.phase_fault = true;
        self
    }

    pub fn into_shared(self) -> Theta {
        Arc::new(self)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.entries[j * self.n + l]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&t| t == 0.0)
    }

    pub fn has_phase_fault(&self) -> bool {
        self.phase_fault
    }

    /// Exponent `Σ_{i>j} θ_ji k_i l_j` of the pair phase, in turns.
    pub fn pair_exponent(&self, k: &[i32], l: &[i32]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 1..n {
            if k[i] == 0 {
                continue;
            }
            let ki = k[i] as f64;
            for j in 0..i {
                if l[j] != 0 {
                    let lj = l[j] as f64;
                    let w = if self.phase_fault { lj * lj } else { lj };
                    acc += self.entries[j * n + i] * ki * w;
                }
            }
        }
        acc
    }

    pub fn pair_phase(&self, k: &[i32], l: &[i32]) -> Complex64 {
        turns_to_phase(self.pair_exponent(k, l))
    }

    pub fn involution_phase(&self, k: &[i32]) -> Complex64 {
        turns_to_phase(self.pair_exponent(k, k))
    }
}

pub(crate) fn turns_to_phase(x: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let r = x - x.round();
    Complex64::from_polar(1.0, TAU * r)
}

pub(crate) fn same_theta(a: &Theta, b: &Theta) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_antisymmetric() {
        let err = ThetaMatrix::new(2, vec![0.0, 0.3, 0.3, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NotAntisymmetric { .. }));
        assert!(ThetaMatrix::new(2, vec![0.1, 0.0, 0.0, 0.0]).is_err());
        assert!(ThetaMatrix::new(1, vec![0.0]).is_err());
    }

    #[test]
    fn involution_phase_inverts_pair_phase() {
        let t = ThetaMatrix::from_rows(&[
            vec![0.0, 0.31, -0.2],
            vec![-0.31, 0.0, 0.77],
            vec![0.2, -0.77, 0.0],
        ])
        .unwrap();
        let k = [3, -2, 5];
        let mk = [-3, 2, -5];
        let p = t.pair_phase(&k, &mk) * t.involution_phase(&k);
        assert!((p - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
