//! Linear representations of k-regular sequences and the measures they
//! induce on the unit interval.

pub mod error;
pub mod matrix;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{Scalar, Q};
pub mod classify;
pub mod cli;
pub mod corpus;
pub mod ghost;
pub mod graphfin;
mod intform;
pub mod io;
pub mod linrep;
pub mod semigroup;
pub mod spectral;
pub mod subspace;

pub use linrep::{base_k_digits, DigitString, LinearRepresentation};
