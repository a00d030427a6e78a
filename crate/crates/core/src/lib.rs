//! Exact evaluation of the partition-indexed correlation functional
//! `E_n(f_1, …, f_n) = Σ_{λ⊢n} c_λ E_λ` on finite chains and subset
//! lattices, with brute-force oracles for its monomial coefficients, both
//! routes for the formal-series inequality `1 − ∏(1 − p)^μ ≥ 0`, and a
//! seeded search harness for the FKG lattice case.
//!
//! All verification arithmetic is exact ([`Rational`]).

pub mod algebra;
pub mod coefficients;
mod error;
pub mod explorer;
pub mod functional;
pub mod instance;
pub mod partitions;
pub mod series;
pub mod spaces;

pub use algebra::{IncrementPolynomial, Monomial, Rational, UniPoly};
pub use error::{Error, Result};
pub use functional::{e_delta, e_lambda, e_n, e_sigma, expand_e_n, FunctionalInstance};
pub use instance::InstanceJson;
pub use spaces::{ChainSpace, MonotoneFn, Space, SubsetLattice};
