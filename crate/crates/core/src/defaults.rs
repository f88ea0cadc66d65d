//! Every tunable default of the library in one table.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Defaults {
    /// Relative tolerance for algebraic identities.
    pub algebra_tol: f64,
    /// Minimum spectral distance from a branch cut or from zero.
    pub delta_gap: f64,
    pub inverse_residual_tol: f64,
    /// Base finite-difference step; scaled by `max(1, |ξ|)`.
    pub fd_step: f64,
    pub max_derivative_order: u32,
    pub truncation_radius: u32,
    pub truncation_margin: u32,
    /// Shells used for remainder and residual decay fits.
    pub shell_radii: Vec<u32>,
    /// Number of sphere directions for ellipticity checks in dimension two.
    pub sphere_samples_2d: usize,
    pub sphere_samples_nd: usize,
    pub probe_samples: usize,
    pub seed: u64,
    /// Smallest shell radius used by coefficient-decay fits.
    pub decay_fit_min_radius: u32,
    /// Schatten fit range, inclusive, on the singular value index.
    pub schatten_fit: (usize, usize),
    /// Flat part of the Meyer window, as a fraction of π.
    pub meyer_plateau: f64,
    pub meyer_nodes: usize,
    pub meyer_check_radius: u32,
    pub quadrature_step: f64,
    /// Extra quadrature box beyond the lattice radius.
    pub quadrature_pad: f64,
    /// Coefficients below this modulus are dropped from computed symbols.
    pub prune_tol: f64,
    pub gmres_tol: f64,
    pub gmres_max_iter: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            algebra_tol: 1e-12,
            delta_gap: 1e-8,
            inverse_residual_tol: 1e-8,
            fd_step: 1e-3,
            max_derivative_order: 6,
            truncation_radius: 16,
            truncation_margin: 2,
            shell_radii: vec![4, 8, 16, 32],
            sphere_samples_2d: 64,
            sphere_samples_nd: 128,
            probe_samples: 64,
            seed: 20240917,
            decay_fit_min_radius: 4,
            schatten_fit: (20, 200),
            meyer_plateau: 0.05,
            meyer_nodes: 4096,
            meyer_check_radius: 8,
            quadrature_step: 0.25,
            quadrature_pad: 16.0,
            prune_tol: 1e-17,
            gmres_tol: 1e-10,
            gmres_max_iter: 200,
        }
    }
}
