//! Spectrum of the Laplacian on the strip `R × (0, d)` with Robin boundary
//! coupling `α(x)` that is constant outside a rectangular well.
//!
//! * [`transverse`]: cross-sectional Robin modes, their energies and overlaps.
//! * [`modematch`]: bound states of the rectangular well by mode matching.
//! * [`variational`]: the trial-function test for existence of a bound state.
//! * [`fdoracle`]: an independent finite-difference discretization with a
//!   shift-invert Lanczos eigensolver.
//!
//! Units follow `ħ²/2m* = 1`, so energies are in `1/length²`.

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fdoracle;
pub mod modematch;
pub mod quad;
pub mod transverse;
pub mod variational;

pub use error::{Error, Result};
pub use fdoracle::{oracle_bound_states, Closure, FdGrid, OracleLevel, OracleResult, OracleSettings, OracleState};
pub use modematch::{
    axial_stiffness, b_coefficients, bound_state_energies, matching_matrix, matching_residual, minimax_brackets,
    null_vector, wavefunction, BoundState, Bracket, MatchingSystem, ModeMatcher, ModeTables, ParitySector,
    WavefunctionGrid, WellConfig,
};
pub use transverse::{
    dispersion, mode_eval, overlap, transversal_eigenvalues, transversal_mode, transversal_wavenumber,
    RobinCrossSection, TransversalMode,
};
pub use variational::{existence_test, q_form, q_form_direct, trial_scale, BumpProfile, Conclusion, QReport};
