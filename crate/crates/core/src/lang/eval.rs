//! Evaluation of terms and formulas at points.

use std::sync::Arc;

use num_rational::BigRational;

use super::ast::{Atom, Basic, Formula};
use super::normalize::NormalForm;
use super::term::Term;
use crate::error::{Error, Result};
use crate::padic::fast::{rational_parts, FastRing, Fx};
use crate::padic::{pn_table, CosetTable, PadicConfig, PadicNumber, Valuation};

/// What the predicates need to know about a term value: zero, or the
/// valuation and the first `digits` unit digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermValue {
    Zero,
    Unit { v: i64, res: u64 },
}

impl TermValue {
    pub fn valuation(&self) -> Valuation {
        match self {
            TermValue::Zero => Valuation::Infinity,
            TermValue::Unit { v, .. } => Valuation::Finite(*v),
        }
    }

    pub fn from_rational(q: &BigRational, prime: u32, digits: u32) -> Self {
        match rational_parts(q, prime, digits) {
            None => TermValue::Zero,
            Some((v, res)) => TermValue::Unit { v, res },
        }
    }

    /// Vanishing values count as zero; a nonzero value needs `digits`
    /// tracked digits.
    pub fn from_padic(x: &PadicNumber, digits: u32) -> Result<Self> {
        match x.valuation() {
            Valuation::Infinity => Ok(TermValue::Zero),
            Valuation::Finite(v) => Ok(TermValue::Unit { v, res: x.unit_residue_u64(digits)? }),
        }
    }

    /// `|self| <= |other|`.
    pub fn norm_le(&self, other: &TermValue) -> bool {
        self.valuation() >= other.valuation()
    }

    /// Coset of a nonzero value, `None` for zero.
    pub fn coset(&self, table: &CosetTable) -> Option<usize> {
        match *self {
            TermValue::Zero => None,
            TermValue::Unit { v, res } => Some(table.index_of(v, res)),
        }
    }
}

/// A point with exact rational coordinates and their word-sized images.
#[derive(Debug, Clone)]
pub struct EvalPoint {
    pub exact: Vec<BigRational>,
    pub fast: Vec<Fx>,
}

impl EvalPoint {
    pub fn new(ring: &FastRing, exact: Vec<BigRational>) -> Self {
        let fast = exact.iter().map(|q| ring.from_rational(q)).collect();
        Self { exact, fast }
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Poly(Vec<(Vec<u32>, Fx)>),
    Factored { coeff: Fx, factors: Vec<(Fx, i32)> },
}

/// A term prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledTerm {
    term: Term,
    kernel: Kernel,
}

impl CompiledTerm {
    pub fn new(term: &Term, ring: &FastRing) -> Self {
        let kernel = match term {
            Term::Poly(p) => Kernel::Poly(p.terms().map(|(e, c)| (e.clone(), ring.from_rational(c))).collect()),
            Term::Factored(f) => Kernel::Factored {
                coeff: ring.from_rational(f.coeff()),
                factors: f.factors().iter().map(|(c, e)| (ring.from_rational(c), *e)).collect(),
            },
        };
        Self { term: term.clone(), kernel }
    }

    pub fn term(&self) -> &Term {
        &self.term
    }

    fn fast(&self, ring: &FastRing, x: &[Fx]) -> Option<Fx> {
        match &self.kernel {
            Kernel::Poly(monos) => {
                let mut s = Fx::Zero;
                for (e, c) in monos {
                    let mut m = *c;
                    for (xi, &d) in x.iter().zip(e) {
                        if d > 0 {
                            m = ring.mul(m, ring.pow(*xi, d));
                        }
                    }
                    s = ring.add(s, m);
                }
                Some(s)
            }
            Kernel::Factored { coeff, factors } => {
                let t = *x.last()?;
                let mut acc = *coeff;
                for (c, e) in factors {
                    let d = ring.sub(t, *c);
                    let d = if *e < 0 { ring.inv(d)? } else { d };
                    acc = ring.mul(acc, ring.pow(d, e.unsigned_abs()));
                }
                Some(acc)
            }
        }
    }

    /// Value at an exact point, with `digits` unit digits.
    pub fn eval(&self, ring: &FastRing, point: &EvalPoint, digits: u32) -> TermValue {
        if let Some(fx) = self.fast(ring, &point.fast) {
            match fx {
                Fx::Zero => return TermValue::Zero,
                Fx::Val { v, u, rel } if rel >= digits => {
                    return TermValue::Unit { v, res: u % ring.pow_p(digits) };
                }
                _ => {}
            }
        }
        TermValue::from_rational(&self.term.eval_rational(&point.exact), ring.prime(), digits)
    }

    /// Value at a p-adic point.
    pub fn eval_padic(&self, point: &[PadicNumber], cfg: PadicConfig, digits: u32) -> Result<TermValue> {
        TermValue::from_padic(&self.term.eval_padic(point, cfg)?, digits)
    }
}

/// Distinct terms of a description, evaluated together.
#[derive(Debug, Clone)]
pub struct TermTable {
    ring: FastRing,
    digits: u32,
    terms: Vec<CompiledTerm>,
}

impl TermTable {
    pub fn new(prime: u32, digits: u32) -> Self {
        Self { ring: FastRing::new(prime), digits, terms: Vec::new() }
    }

    pub fn ring(&self) -> &FastRing {
        &self.ring
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn require_digits(&mut self, d: u32) {
        self.digits = self.digits.max(d);
    }

    pub fn intern(&mut self, t: &Term) -> usize {
        if let Some(i) = self.terms.iter().position(|c| c.term() == t) {
            return i;
        }
        self.terms.push(CompiledTerm::new(t, &self.ring));
        self.terms.len() - 1
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.iter().map(|c| c.term())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn values(&self, point: &EvalPoint) -> Vec<TermValue> {
        self.terms.iter().map(|t| t.eval(&self.ring, point, self.digits)).collect()
    }

    pub fn values_padic(&self, point: &[PadicNumber], cfg: PadicConfig) -> Result<Vec<TermValue>> {
        self.terms.iter().map(|t| t.eval_padic(point, cfg, self.digits)).collect()
    }
}

#[derive(Debug, Clone)]
enum Lit {
    Zero(usize),
    NormLe(usize, usize),
    Coset { term: usize, table: Arc<CosetTable>, r: usize, with_zero: bool },
    InQ { term: usize, n: u32, modulus: u64 },
}

impl Lit {
    fn holds(&self, vals: &[TermValue]) -> bool {
        match self {
            Lit::Zero(i) => vals[*i] == TermValue::Zero,
            Lit::NormLe(g, f) => vals[*g].norm_le(&vals[*f]),
            Lit::Coset { term, table, r, with_zero } => match vals[*term].coset(table) {
                None => *with_zero,
                Some(s) => s == *r,
            },
            Lit::InQ { term, n, modulus } => match vals[*term] {
                TermValue::Zero => true,
                TermValue::Unit { v, res } => v.rem_euclid(*n as i64) == 0 && res % modulus == 1 % modulus,
            },
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Lit(Lit),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
}

impl Node {
    fn holds(&self, vals: &[TermValue]) -> bool {
        match self {
            Node::Const(b) => *b,
            Node::Lit(l) => l.holds(vals),
            Node::Not(a) => !a.holds(vals),
            Node::And(a, b) => a.holds(vals) && b.holds(vals),
            Node::Or(a, b) => a.holds(vals) || b.holds(vals),
        }
    }
}

/// A formula compiled against a term table.
#[derive(Debug, Clone)]
pub struct FormulaProgram {
    root: Node,
}

impl FormulaProgram {
    pub fn compile(f: &Formula, table: &mut TermTable) -> Result<Self> {
        Ok(Self { root: compile_node(f, table)? })
    }

    pub fn holds(&self, vals: &[TermValue]) -> bool {
        self.root.holds(vals)
    }
}

fn compile_node(f: &Formula, table: &mut TermTable) -> Result<Node> {
    let prime = table.ring().prime();
    Ok(match f {
        Formula::True => Node::Const(true),
        Formula::False => Node::Const(false),
        Formula::Not(a) => Node::Not(Box::new(compile_node(a, table)?)),
        Formula::And(a, b) => Node::And(Box::new(compile_node(a, table)?), Box::new(compile_node(b, table)?)),
        Formula::Or(a, b) => Node::Or(Box::new(compile_node(a, table)?), Box::new(compile_node(b, table)?)),
        Formula::Atom(Atom::Basic(b)) => Node::Lit(compile_basic(b, table)?),
        Formula::Atom(Atom::InQ { term, n, m }) => {
            if *n == 0 || *m == 0 {
                return Err(Error::Config("Q(N,M) needs N, M >= 1".into()));
            }
            table.require_digits(*m);
            let modulus = (prime as u64)
                .checked_pow(*m)
                .ok_or_else(|| Error::Config(format!("Q({n},{m}) needs too many digits")))?;
            Node::Lit(Lit::InQ { term: table.intern(term), n: *n, modulus })
        }
    })
}

fn compile_basic(b: &Basic, table: &mut TermTable) -> Result<Lit> {
    let prime = table.ring().prime();
    Ok(match b {
        Basic::Zero(f) => Lit::Zero(table.intern(f)),
        Basic::NormLe(g, f) => Lit::NormLe(table.intern(g), table.intern(f)),
        Basic::PowerCoset { term, n, r, with_zero } => {
            let t = pn_table(prime, *n)?;
            t.check_index(*r)?;
            table.require_digits(t.digits());
            Lit::Coset { term: table.intern(term), table: t, r: *r, with_zero: *with_zero }
        }
    })
}

/// A normal form compiled against a term table.
#[derive(Debug, Clone)]
pub struct NormalProgram {
    table: Arc<CosetTable>,
    conjuncts: Vec<(Vec<(usize, super::normalize::CosetSet)>, Vec<(usize, usize)>)>,
}

impl NormalProgram {
    pub fn compile(nf: &NormalForm, table: &mut TermTable) -> Result<Self> {
        let ct = pn_table(table.ring().prime(), nf.power())?;
        table.require_digits(ct.digits());
        let conjuncts = nf
            .conjuncts()
            .iter()
            .map(|c| {
                let sets = c.cosets().iter().map(|(t, s)| (table.intern(t), s.clone())).collect();
                let norms = c.norms().iter().map(|(g, f)| (table.intern(g), table.intern(f))).collect();
                (sets, norms)
            })
            .collect();
        Ok(Self { table: ct, conjuncts })
    }

    pub fn holds(&self, vals: &[TermValue]) -> bool {
        self.first_conjunct(vals).is_some()
    }

    /// Index of the first conjunct that holds.
    pub fn first_conjunct(&self, vals: &[TermValue]) -> Option<usize> {
        self.conjuncts.iter().position(|(sets, norms)| {
            sets.iter().all(|(i, s)| s.contains(vals[*i].coset(&self.table)))
                && norms.iter().all(|(g, f)| vals[*g].norm_le(&vals[*f]))
        })
    }

    /// Pairs `(g, f)` of term indices compared by norm anywhere.
    pub fn norm_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.conjuncts.iter().flat_map(|(_, n)| n.iter().copied())
    }
}

/// Truth value of a formula at an exact point.
pub fn eval_formula(f: &Formula, prime: u32, point: &[BigRational]) -> Result<bool> {
    let mut table = TermTable::new(prime, 1);
    let prog = FormulaProgram::compile(f, &mut table)?;
    let pt = EvalPoint::new(table.ring(), point.to_vec());
    Ok(prog.holds(&table.values(&pt)))
}

/// Truth value of a formula at a p-adic point.
pub fn eval_formula_padic(f: &Formula, cfg: PadicConfig, point: &[PadicNumber]) -> Result<bool> {
    let mut table = TermTable::new(cfg.prime(), 1);
    let prog = FormulaProgram::compile(f, &mut table)?;
    Ok(prog.holds(&table.values_padic(point, cfg)?))
}
