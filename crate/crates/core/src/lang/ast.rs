use std::fmt;

use super::term::{Term, Vars};

/// A basic condition on terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basic {
    /// `f = 0`.
    Zero(Term),
    /// `|g| <= |f|`, stored as `(g, f)`.
    NormLe(Term, Term),
    /// `f ∈ r P_N^*`, where `r` indexes the coset table of `P_N`. With
    /// `with_zero` (only for the identity coset) the condition is `f ∈ P_N`.
    PowerCoset { term: Term, n: u32, r: usize, with_zero: bool },
}

impl Basic {
    pub fn in_pn(term: Term, n: u32) -> Self {
        Basic::PowerCoset { term, n, r: 0, with_zero: true }
    }

    pub fn coset(term: Term, n: u32, r: usize) -> Self {
        Basic::PowerCoset { term, n, r, with_zero: false }
    }

    /// `f ≠ 0`, written as membership in `P_1^* = K^*`.
    pub fn nonzero(term: Term) -> Self {
        Basic::coset(term, 1, 0)
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Basic::Zero(f) => vec![f],
            Basic::NormLe(g, f) => vec![g, f],
            Basic::PowerCoset { term, .. } => vec![term],
        }
    }
}

/// A leaf of a formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Basic(Basic),
    /// `f ∈ Q_{N,M}`; rewritten into cosets by normalization.
    InQ { term: Term, n: u32, m: u32 },
}

/// A quantifier-free formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn basic(b: Basic) -> Self {
        Formula::Atom(Atom::Basic(b))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn any(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a),
            Formula::Not(a) => a.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn contains_not(&self) -> bool {
        match self {
            Formula::Not(_) => true,
            Formula::And(a, b) | Formula::Or(a, b) => a.contains_not() || b.contains_not(),
            _ => false,
        }
    }

    pub fn display<'a>(&'a self, vars: &'a Vars) -> FormulaDisplay<'a> {
        FormulaDisplay { formula: self, vars }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    vars: &'a Vars,
}

fn write_basic(b: &Basic, vars: &Vars, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match b {
        Basic::Zero(t) => write!(f, "{} = 0", t.display(vars)),
        Basic::NormLe(g, h) => write!(f, "|{}| <= |{}|", g.display(vars), h.display(vars)),
        Basic::PowerCoset { term, n, r, with_zero } => {
            if *with_zero {
                write!(f, "({}) in P_{n}", term.display(vars))
            } else {
                write!(f, "({}) in coset({r}, P_{n})", term.display(vars))
            }
        }
    }
}

fn write_formula(x: &Formula, vars: &Vars, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    // precedence: || < && < ! < atom
    fn prec(x: &Formula) -> u8 {
        match x {
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            _ => 3,
        }
    }
    fn child(x: &Formula, min: u8, vars: &Vars, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if prec(x) < min {
            write!(f, "(")?;
            write_formula(x, vars, f)?;
            write!(f, ")")
        } else {
            write_formula(x, vars, f)
        }
    }
    match x {
        Formula::True => write!(f, "true"),
        Formula::False => write!(f, "false"),
        Formula::Atom(Atom::Basic(b)) => write_basic(b, vars, f),
        Formula::Atom(Atom::InQ { term, n, m }) => write!(f, "({}) in Q({n},{m})", term.display(vars)),
        Formula::Not(a) => {
            write!(f, "!")?;
            match **a {
                Formula::Not(_) | Formula::True | Formula::False => write_formula(a, vars, f),
                _ => {
                    write!(f, "(")?;
                    write_formula(a, vars, f)?;
                    write!(f, ")")
                }
            }
        }
        Formula::And(a, b) => {
            child(a, 2, vars, f)?;
            write!(f, " && ")?;
            child(b, 3, vars, f)
        }
        Formula::Or(a, b) => {
            child(a, 1, vars, f)?;
            write!(f, " || ")?;
            child(b, 2, vars, f)
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self.formula, self.vars, f)
    }
}

impl Basic {
    pub fn display<'a>(&'a self, vars: &'a Vars) -> BasicDisplay<'a> {
        BasicDisplay { basic: self, vars }
    }
}

pub struct BasicDisplay<'a> {
    basic: &'a Basic,
    vars: &'a Vars,
}

impl fmt::Display for BasicDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_basic(self.basic, self.vars, f)
    }
}
