//! Arithmetic differential calculus: p-derivations, arithmetic jet spaces,
//! δ-characters, δ-linear equations, Witt vectors and δ-Hecke operators.

pub mod cli;
pub mod deltapoly;
pub mod dlinear;
pub mod dseries;
pub mod error;
pub mod groebner;
pub mod groups;
pub mod jetspace;
mod linalg;
pub mod padic;
pub mod poly;
#[cfg(test)]
mod proptests;
pub mod text;
pub mod witt;

pub use error::{Error, Result};
pub use padic::{PadicCtx, PadicElem};
