use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::element::NCElement;
use super::mode::Mode;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Box radius `K` and the margin `M` reserved for product spillover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub radius: u32,
    pub margin: u32,
}

impl TruncationSpec {
    pub fn new(radius: u32, margin: u32) -> Result<Self> {
        if radius <= margin {
            return Err(Error::InvalidTruncation { radius, margin });
        }
        Ok(Self { radius, margin })
    }

    /// Radius `K − M` of the spillover-free window.
    pub fn inner_radius(&self) -> u32 {
        self.radius - self.margin
    }

    pub fn basis(&self, n: usize) -> BoxBasis {
        BoxBasis::new(n, self.radius)
    }
}

/// The modes `|k|_∞ ≤ K` in lexicographic order on `(k_1, …, k_n)`.
///
/// The index of `k` is `Σ_i (k_i + K)·(2K+1)^{n-1-i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxBasis {
    n: usize,
    radius: u32,
    side: usize,
    len: usize,
}

impl BoxBasis {
    pub fn new(n: usize, radius: u32) -> Self {
        let side = 2 * radius as usize + 1;
        Self { n, radius, side, len: side.pow(n as u32) }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index_of(&self, k: &Mode) -> Option<usize> {
        let r = self.radius as i32;
        let mut idx = 0usize;
        for &c in k.as_slice() {
            if c < -r || c > r {
                return None;
            }
            idx = idx * self.side + (c + r) as usize;
        }
        Some(idx)
    }

    pub fn mode_at(&self, mut idx: usize) -> Mode {
        let r = self.radius as i32;
        let mut coords = vec![0i32; self.n];
        for slot in coords.iter_mut().rev() {
            *slot = (idx % self.side) as i32 - r;
            idx /= self.side;
        }
        Mode::from_slice(&coords)
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len).map(|i| self.mode_at(i))
    }

    /// Indices of modes with `|k|_∞ ≤ w`, in basis order.
    pub fn window(&self, w: u32) -> Vec<usize> {
        (0..self.len).filter(|&i| self.mode_at(i).norm_inf() <= w).collect()
    }

    /// Coefficient vector of `u` over the box; modes outside are dropped.
    pub fn to_vector(&self, u: &NCElement) -> Vec<Complex64> {
        let mut v = vec![Complex64::default(); self.len];
        for (k, c) in u.iter() {
            if let Some(i) = self.index_of(k) {
                v[i] = *c;
            }
        }
        v
    }

    pub fn to_element(&self, v: &[Complex64], theta: &super::Theta) -> NCElement {
        let coeffs = v
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::default())
            .map(|(i, c)| (self.mode_at(i), *c));
        NCElement::from_coeffs(theta, coeffs).expect("basis dimension matches theta")
    }
}

/// Modes with `|k|_∞ = r`, in lexicographic order.
pub fn shell_modes(n: usize, r: u32) -> Vec<Mode> {
    BoxBasis::new(n, r).modes().filter(|k| k.norm_inf() == r).collect()
}

/// Matrix of left multiplication by `u` on the box basis:
/// `L[k][l] = ⟨u U^l, U^k⟩ = u_{k-l} χ(k-l, l)`.
pub fn left_mult_matrix(u: &NCElement, trunc: &TruncationSpec) -> Result<SparseMatrix> {
    let support = u.support_radius();
    if support > trunc.margin {
        return Err(Error::MarginViolation { support, margin: trunc.margin });
    }
    Ok(left_mult_on_box(u, &trunc.basis(u.dim())))
}

/// Left multiplication on an arbitrary box, without margin validation.
pub(crate) fn left_mult_on_box(u: &NCElement, basis: &BoxBasis) -> SparseMatrix {
    let theta = u.theta();
    let cols = (0..basis.len())
        .map(|j| {
            let l = basis.mode_at(j);
            u.iter()
                .filter_map(|(m, c)| {
                    let k = m + &l;
                    basis
                        .index_of(&k)
                        .map(|i| (i, c * theta.pair_phase(m.as_slice(), l.as_slice())))
                })
                .collect()
        })
        .collect();
    SparseMatrix::from_columns(basis.len(), cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ThetaMatrix;

    #[test]
    fn index_roundtrip_and_order() {
        let b = BoxBasis::new(3, 2);
        assert_eq!(b.len(), 125);
        for i in 0..b.len() {
            assert_eq!(b.index_of(&b.mode_at(i)), Some(i));
        }
        assert_eq!(b.mode_at(0), Mode::from_slice(&[-2, -2, -2]));
        assert_eq!(b.mode_at(1), Mode::from_slice(&[-2, -2, -1]));
        assert!(b.modes().collect::<Vec<_>>().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.index_of(&Mode::from_slice(&[3, 0, 0])), None);
    }

    #[test]
    fn shell_counts() {
        assert_eq!(shell_modes(2, 0).len(), 1);
        assert_eq!(shell_modes(2, 3).len(), 49 - 25);
        assert_eq!(shell_modes(3, 1).len(), 26);
    }

    #[test]
    fn truncation_requires_margin_below_radius() {
        assert!(TruncationSpec::new(3, 3).is_err());
        assert_eq!(TruncationSpec::new(5, 2).unwrap().inner_radius(), 3);
    }

    #[test]
    fn unit_gives_identity_and_margin_is_checked() {
        let theta = ThetaMatrix::uniform(2, 0.3).into_shared();
        let trunc = TruncationSpec::new(3, 1).unwrap();
        let l = left_mult_matrix(&NCElement::one(&theta), &trunc).unwrap();
        assert_eq!(l, SparseMatrix::identity(49));
        let far = NCElement::monomial(&[2, 0], Complex64::new(1.0, 0.0), &theta).unwrap();
        assert!(matches!(left_mult_matrix(&far, &trunc), Err(Error::MarginViolation { .. })));
    }
}
