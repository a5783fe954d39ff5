//! Uniform structures on Hilbert C*-modules over finite-dimensional C*-algebras.
//!
//! The crate realizes the base algebra as a direct sum of complex matrix blocks,
//! Hilbert modules as truncated standard modules `A^n`, and adjointable operators
//! as `A`-valued matrices. On top of that it provides the pseudo-metric family
//! `d_{X,Φ}` built from admissible systems and families of states, ε-net
//! construction, separation certificates, and a certifier that checks, at desk
//! scale, that approximability by θ-operators and total boundedness of the image
//! of the unit ball agree.
//!
//! ```
//! use cstar_compact::algebra::CStarAlgebra;
//! use cstar_compact::hilbert::HilbertModule;
//!
//! let algebra = CStarAlgebra::new(vec![2, 1]).unwrap();
//! let module = HilbertModule::new(algebra, 3).unwrap();
//! let e1 = module.basis(0).unwrap();
//! assert!((e1.norm() - 1.0).abs() < 1e-12);
//! ```

pub mod algebra;
pub mod axioms;
pub mod certifier;
mod error;
pub mod hilbert;
pub mod operators;
pub mod sampling;
pub mod uniformity;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix; every algebra block, module element and operator block is one.
pub type CMatrix = nalgebra::DMatrix<C64>;
