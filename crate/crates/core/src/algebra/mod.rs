//! Exact scalar and polynomial arithmetic.

mod increment;
mod rational;
mod unipoly;

pub use increment::{IncVar, IncrementPolynomial, Monomial};
pub use rational::{parse_rational_list, Rational};
pub use unipoly::UniPoly;
