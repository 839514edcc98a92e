//! Exact computation with p-adic semi-algebraic sets.
//!
//! The crate decides membership in the subgroups `P_N` and `Q_{N,M}` of
//! Q_p, normalizes quantifier-free formulas, decomposes univariate
//! definable sets into presented cells, prepares functions as unit times
//! monomial on cells, builds Skolem sections and handles the Presburger
//! value-group layer. Every symbolic result can be checked against a finite
//! brute-force universe in [`oracle`].

pub mod cells;
pub mod error;
pub mod lang;
pub mod oracle;
pub mod padic;
pub mod poly;
pub mod prepare;
pub mod roots;
pub mod scalar;
pub mod skolem;
pub mod valgroup;

pub use error::{Error, Result};
