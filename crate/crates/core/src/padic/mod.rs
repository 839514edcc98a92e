//! Arithmetic in Q_p and the multiplicative subgroups `P_N`, `Q_{N,M}` and
//! `U_e`.

pub mod fast;
mod groups;
mod literal;
mod number;

pub use groups::{
    coset_reps, coset_table, decision_digits, in_pn, in_qnm, in_uen, nth_root, pn_table, root_of,
    roots_of_unity, roots_of_unity_order, vp, CosetTable, SubgroupSpec,
};
pub use literal::{parse_literal, parse_rational, JsonValuation, PadicJson};
pub(crate) use number::mod_inverse;
pub use number::{int_valuation, is_prime, prime_pow, PadicConfig, PadicNumber, Valuation};
