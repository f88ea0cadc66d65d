use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{dense_random_element, NCElement};
use crate::error::Result;

fn weight(k_sq: f64, s: f64) -> f64 {
    (1.0 + k_sq).powf(s)
}

/// `‖u‖_s = (Σ (1+|k|²)^s |u_k|²)^{1/2}`
pub fn sobolev_norm(u: &NCElement, s: f64) -> f64 {
    u.iter().map(|(k, c)| weight(k.norm_sq(), s) * c.norm_sqr()).sum::<f64>().sqrt()
}

/// `Λ^s u`, scaling each coefficient by `(1+|k|²)^{s/2}`.
pub fn lambda_apply(s: f64, u: &NCElement) -> NCElement {
    u.map_coeffs(|k, c| c * weight(k.norm_sq(), s / 2.0))
}

/// `⟨u, v⟩ = τ(uv)`
pub fn pairing(u: &NCElement, v: &NCElement) -> Result<Complex64> {
    Ok(u.try_mul(v)?.tau())
}

/// The element `v` with `‖v‖_s = 1` and `τ(uv) = ‖u‖_{-s}`:
/// `v_{−k} = conj(u_k χ(k,−k)) (1+|k|²)^{−s} / ‖u‖_{−s}`.
pub fn duality_maximizer(u: &NCElement, s: f64) -> NCElement {
    let norm = sobolev_norm(u, -s);
    let theta = u.theta();
    let coeffs = u.iter().map(|(k, c)| {
        let phase = theta.pair_phase(k.as_slice(), (-k).as_slice());
        ((-k), (c * phase).conj() * weight(k.norm_sq(), -s) / norm)
    });
    NCElement::from_coeffs(theta, coeffs.collect::<Vec<_>>()).expect("same dimension")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityReport {
    /// `‖u‖_{−s}`
    pub exact_norm: f64,
    /// `|τ(u v*)|` at the constructed maximizer.
    pub maximizer_value: f64,
    /// Largest `|τ(uv)| / ‖v‖_s` over the random trials.
    pub sup_estimate: f64,
    /// Largest `|τ(uv)| / (‖u‖_{−s} ‖v‖_s)` over the trials.
    pub holder_ratio: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Checks `‖u‖_{−s} = sup_{‖v‖_s = 1} |τ(uv)|` with the explicit maximizer
/// and random trial elements supported on the box of `u`.
pub fn duality_gap(u: &NCElement, s: f64, trials: usize, seed: u64) -> Result<DualityReport> {
    let exact_norm = sobolev_norm(u, -s);
    let v = duality_maximizer(u, s);
    let maximizer_value = pairing(u, &v)?.norm() / sobolev_norm(&v, s);
    let radius = u.support_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sup_estimate: f64 = 0.0;
    let mut holder_ratio: f64 = 0.0;
    for _ in 0..trials {
        let w = dense_random_element(u.theta(), radius, &mut rng);
        let ws = sobolev_norm(&w, s);
        let p = pairing(u, &w)?.norm();
        sup_estimate = sup_estimate.max(p / ws);
        holder_ratio = holder_ratio.max(p / (exact_norm * ws));
    }
    Ok(DualityReport { exact_norm, maximizer_value, sup_estimate, holder_ratio, trials, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Mode, ThetaMatrix};

    #[test]
    fn single_mode_norms() {
        let theta = ThetaMatrix::uniform(2, 0.3).into_shared();
        let u = NCElement::monomial(&[2, -1], Complex64::new(1.0, 0.0), &theta).unwrap();
        assert!((sobolev_norm(&u, 1.5) - 6f64.powf(0.75)).abs() < 1e-14);
        assert!((sobolev_norm(&lambda_apply(1.5, &u), 0.0) - sobolev_norm(&u, 1.5)).abs() < 1e-14);
        let v = duality_maximizer(&u, 1.0);
        assert_eq!(v.len(), 1);
        assert!(v.coeff(&Mode::from_slice(&[-2, 1])).norm() > 0.0);
        let rep = duality_gap(&u, 1.0, 20, 3).unwrap();
        assert!((rep.maximizer_value - 6f64.powf(-0.5)).abs() < 1e-14);
        assert!(rep.holder_ratio <= 1.0 + 1e-12);
    }
}
