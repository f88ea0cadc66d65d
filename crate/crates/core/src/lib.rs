//! Pseudodifferential calculus on noncommutative tori at finite truncation.
//!
//! Elements of the twisted Fourier algebra are finitely supported
//! coefficient maps on `Z^n`. Operators act on the Fourier basis through
//! their lattice symbol values, `P u = Σ u_k ρ(k) U^k`, so every operator
//! statement reduces to computations with finitely many lattice points.

pub mod algebra;
pub mod defaults;
pub mod elliptic;
pub mod error;
pub mod fit;
pub mod io;
pub mod linalg;
pub mod psido;
pub mod spectral;
pub mod symbols;
pub mod trace;

pub use error::{Error, Result};
