//! Random formulas for property tests.

use num_rational::BigRational;
use rand::Rng;

use super::ast::{Atom, Basic, Formula};
use super::term::Term;
use crate::padic::pn_table;
use crate::poly::Poly;

/// Shape limits for [`random_formula`].
#[derive(Debug, Clone)]
pub struct FormulaShape {
    pub depth: u32,
    pub degree: u32,
    pub powers: Vec<u32>,
    /// Distinct terms drawn per formula.
    pub term_pool: usize,
    pub allow_q: bool,
}

impl Default for FormulaShape {
    fn default() -> Self {
        Self { depth: 4, degree: 3, powers: vec![1, 2, 3, 4], term_pool: 3, allow_q: true }
    }
}

fn small<R: Rng>(rng: &mut R, prime: u32) -> BigRational {
    // mostly small integers, sometimes multiples or quotients of p
    let n: i64 = rng.gen_range(-6..=6);
    let p = prime as i64;
    match rng.gen_range(0..6) {
        0 => BigRational::from_integer((n * p).into()),
        1 => BigRational::new(n.into(), p.into()),
        2 => BigRational::from_integer((n * p * p).into()),
        _ => BigRational::from_integer(n.into()),
    }
}

/// A random univariate term in `t` of degree at most `degree`.
pub fn random_term<R: Rng>(rng: &mut R, prime: u32, degree: u32) -> Term {
    let t = Poly::var(1, 0);
    match rng.gen_range(0..4) {
        0 => {
            // product of rational linear factors
            let d = rng.gen_range(1..=degree.max(1));
            let mut f = Poly::constant(1, small(rng, prime)).add(&Poly::from_int(1, 0));
            if f.is_zero() {
                f = Poly::from_int(1, 1);
            }
            for _ in 0..d {
                f = f.mul(&t.sub(&Poly::constant(1, small(rng, prime))));
            }
            Term::Poly(f)
        }
        1 if degree >= 1 && rng.gen_bool(0.3) => {
            let a = small(rng, prime);
            let b = small(rng, prime);
            let e = rng.gen_range(1..=2);
            let c = BigRational::from_integer(rng.gen_range(1..=3).into());
            Term::factored(1, c, &[(a, 1), (b, -e)])
        }
        _ => {
            let d = rng.gen_range(0..=degree);
            let mut f = Poly::zero(1);
            for k in 0..=d {
                let c = small(rng, prime);
                f = f.add(&Poly::constant(1, c).mul(&t.pow(k)));
            }
            if f.is_zero() {
                f = t.clone();
            }
            Term::Poly(f)
        }
    }
}

fn random_atom<R: Rng>(rng: &mut R, prime: u32, pool: &[Term], shape: &FormulaShape) -> Formula {
    let pick = |rng: &mut R| pool[rng.gen_range(0..pool.len())].clone();
    let n = shape.powers[rng.gen_range(0..shape.powers.len())];
    match rng.gen_range(0..10) {
        0 => Formula::basic(Basic::Zero(pick(rng))),
        1 | 2 => Formula::basic(Basic::NormLe(pick(rng), pick(rng))),
        3 | 4 | 5 => Formula::basic(Basic::in_pn(pick(rng), n)),
        6 if shape.allow_q => {
            let m = if prime == 2 { rng.gen_range(1..=3) } else { 1 };
            Formula::Atom(Atom::InQ { term: pick(rng), n, m })
        }
        _ => {
            let count = pn_table(prime, n).map(|t| t.count()).unwrap_or(1);
            Formula::basic(Basic::coset(pick(rng), n, rng.gen_range(0..count)))
        }
    }
}

fn random_node<R: Rng>(rng: &mut R, prime: u32, pool: &[Term], shape: &FormulaShape, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_atom(rng, prime, pool, shape);
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(random_node(rng, prime, pool, shape, depth - 1)),
        1 | 2 => Formula::and(
            random_node(rng, prime, pool, shape, depth - 1),
            random_node(rng, prime, pool, shape, depth - 1),
        ),
        _ => Formula::or(
            random_node(rng, prime, pool, shape, depth - 1),
            random_node(rng, prime, pool, shape, depth - 1),
        ),
    }
}

/// A random univariate formula in `t`.
pub fn random_formula<R: Rng>(rng: &mut R, prime: u32, shape: &FormulaShape) -> Formula {
    let pool: Vec<Term> = (0..shape.term_pool.max(1)).map(|_| random_term(rng, prime, shape.degree)).collect();
    random_node(rng, prime, &pool, shape, shape.depth)
}
