//! Sobolev norms and duality, truncated spectra, Weyl counting and
//! singular value decay.

mod sobolev;
mod spectrum;

pub use sobolev::{duality_gap, duality_maximizer, lambda_apply, pairing, sobolev_norm, DualityReport};
pub use spectrum::{
    generalized_spectrum, schatten_slope, smoothness_decay, spectrum, spectrum_of_matrix, validity_cut,
    weyl_constant, weyl_ratio, SchattenReport, SpectrumMode, SpectrumResult, WeylReport,
};
