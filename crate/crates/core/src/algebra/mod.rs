//! The twisted Fourier algebra: elements, product, involution, trace,
//! derivations, left-regular matrices and functional calculus.

mod basis;
mod element;
mod funcalc;
mod identities;
mod mode;
mod theta;

pub use basis::{left_mult_matrix, shell_modes, BoxBasis, TruncationSpec};
pub(crate) use basis::left_mult_on_box;
pub use element::{dense_random_element, monomial_inverse, random_element, NCElement};
pub(crate) use funcalc::ReachableBlock;
pub use funcalc::{
    funcalc, funcalc_convergence, inverse_element, BranchCut, ConvergenceReport, FuncalcOptions,
    ScalarFn,
};
pub use identities::{algebra_identities, IdentityCheck};
pub use mode::{Mode, MultiIndex};
pub use theta::{Theta, ThetaMatrix};
