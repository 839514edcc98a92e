//! Quantifier-free formulas: terms, syntax, normal forms and evaluation.

pub mod ast;
pub mod eval;
pub mod json;
pub mod normalize;
pub mod parse;
pub mod random;
pub mod term;

pub use ast::{Atom, Basic, Formula};
pub use eval::{eval_formula, eval_formula_padic, TermValue};
pub use normalize::{complement_basic, normalize, normalize_at, CosetSet, Conjunct, NormalForm};
pub use parse::{parse_formula, parse_term};
pub use term::{Factored, Term, Vars};
