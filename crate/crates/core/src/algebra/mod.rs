//! Finite-dimensional C*-algebras `⊕_b M_{n_b}(ℂ)`: arithmetic, norms, positivity,
//! spectral calculus, states and nested projection chains.

mod chain;
mod element;
mod state;

pub use chain::{chain_differences, ProjectionChain};
pub use element::{
    alg_add, alg_adjoint, alg_mul, alg_norm, is_positive, positive_sqrt, resolvent_regularize,
    AlgebraElement, CStarAlgebra,
};
pub use state::{state_eval, witness_state, State};

pub(crate) use element::spectral_norm;

/// Absolute eigenvalue tolerance for positivity checks.
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-9;
