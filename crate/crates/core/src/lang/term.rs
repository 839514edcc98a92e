use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::{PadicConfig, PadicNumber};
use crate::poly::{fmt_rational, Poly, UniPoly};

/// Variable names of a formula; the last one is the fibre variable `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vars(Vec<String>);

impl Vars {
    pub fn new(names: &[&str]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Config("at least one variable is needed".into()));
        }
        for (i, n) in names.iter().enumerate() {
            let ok = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok || names[..i].contains(n) || RESERVED.contains(n) {
                return Err(Error::Config(format!("bad variable name `{n}`")));
            }
        }
        Ok(Vars(names.iter().map(|s| s.to_string()).collect()))
    }

    /// The single variable `t`.
    pub fn univariate() -> Self {
        Vars(vec!["t".into()])
    }

    /// Base variable `x` and fibre variable `t`.
    pub fn fibred() -> Self {
        Vars(vec!["x".into(), "t".into()])
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// Index of the fibre variable.
    pub fn main(&self) -> usize {
        self.0.len() - 1
    }
}

pub(crate) const RESERVED: &[&str] = &["in", "coset", "true", "false", "P", "Q"];

/// `coeff * prod (t - c)^e` with at least one negative exponent, centers
/// sorted and distinct, exponents nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factored {
    coeff: BigRational,
    factors: Vec<(BigRational, i32)>,
}

impl Factored {
    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    pub fn factors(&self) -> &[(BigRational, i32)] {
        &self.factors
    }

    /// Sum of the exponents.
    pub fn degree(&self) -> i32 {
        self.factors.iter().map(|(_, e)| e).sum()
    }
}

/// A function of the formula variables: a polynomial, or a quotient of
/// products of linear factors in `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Poly(Poly),
    Factored(Factored),
}

impl Term {
    pub fn poly(p: Poly) -> Self {
        Term::Poly(p)
    }

    /// Canonical factored term; becomes a polynomial when no exponent is
    /// negative or the coefficient is zero.
    pub fn factored(nvars: usize, coeff: BigRational, factors: &[(BigRational, i32)]) -> Self {
        let mut fs: Vec<(BigRational, i32)> = Vec::new();
        let mut sorted = factors.to_vec();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (c, e) in sorted {
            match fs.last_mut() {
                Some((c0, e0)) if *c0 == c => *e0 += e,
                _ => fs.push((c, e)),
            }
        }
        fs.retain(|(_, e)| *e != 0);
        if coeff.is_zero() || fs.iter().all(|(_, e)| *e > 0) {
            let t = nvars - 1;
            let mut p = Poly::constant(nvars, coeff);
            for (c, e) in &fs {
                let lin = Poly::var(nvars, t).sub(&Poly::constant(nvars, c.clone()));
                p = p.mul(&lin.pow(*e as u32));
            }
            return Term::Poly(p);
        }
        Term::Factored(Factored { coeff, factors: fs })
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        match self {
            Term::Poly(p) => Some(p),
            Term::Factored(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Term::Poly(p) => p.as_constant().is_some(),
            Term::Factored(_) => false,
        }
    }

    /// The constant value, when the term does not depend on any variable.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self {
            Term::Poly(p) => p.as_constant(),
            Term::Factored(_) => None,
        }
    }

    /// Whether the term only involves the last variable `t`.
    pub fn is_univariate(&self, nvars: usize) -> bool {
        match self {
            Term::Poly(p) => p.only_uses(nvars - 1),
            Term::Factored(_) => true,
        }
    }

    /// Multiplies by a rational constant.
    pub fn scale(&self, k: &BigRational, nvars: usize) -> Term {
        match self {
            Term::Poly(p) => Term::Poly(p.scale(k)),
            Term::Factored(f) => Term::factored(nvars, &f.coeff * k, &f.factors),
        }
    }

    /// Exact value at a rational point; poles evaluate to 0.
    pub fn eval_rational(&self, point: &[BigRational]) -> BigRational {
        match self {
            Term::Poly(p) => p.eval(point),
            Term::Factored(f) => {
                let t = point.last().expect("a point has coordinates");
                let mut acc = f.coeff.clone();
                for (c, e) in &f.factors {
                    let d = t - c;
                    if d.is_zero() {
                        return BigRational::zero();
                    }
                    let pw = num_traits::pow(d, e.unsigned_abs() as usize);
                    acc = if *e > 0 { acc * pw } else { acc / pw };
                }
                acc
            }
        }
    }

    /// p-adic value at a point; poles evaluate to 0.
    pub fn eval_padic(&self, point: &[PadicNumber], cfg: PadicConfig) -> Result<PadicNumber> {
        match self {
            Term::Poly(p) => Ok(p.eval_padic(point, cfg)),
            Term::Factored(f) => {
                let t = point.last().expect("a point has coordinates");
                let mut acc = cfg.rational(&f.coeff);
                for (c, e) in &f.factors {
                    let d = t - &cfg.rational(c);
                    if d.is_zero() {
                        return Ok(cfg.zero());
                    }
                    acc = &acc * &d.pow(*e as i64)?;
                }
                Ok(acc)
            }
        }
    }

    /// The term as numerator and denominator in `t`, for univariate terms.
    pub fn to_uni_fraction(&self, nvars: usize) -> Option<(UniPoly, UniPoly)> {
        match self {
            Term::Poly(p) => Some((p.to_uni(nvars - 1)?, UniPoly::constant(BigRational::one()))),
            Term::Factored(f) => {
                let mut num = UniPoly::constant(f.coeff.clone());
                let mut den = UniPoly::constant(BigRational::one());
                for (c, e) in &f.factors {
                    let lin = UniPoly::linear(c);
                    for _ in 0..e.unsigned_abs() {
                        if *e > 0 {
                            num = num.mul(&lin);
                        } else {
                            den = den.mul(&lin);
                        }
                    }
                }
                Some((num, den))
            }
        }
    }

    pub fn display<'a>(&'a self, vars: &'a Vars) -> TermDisplay<'a> {
        TermDisplay { term: self, vars }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    vars: &'a Vars,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Poly(p) => write!(f, "{}", p.display(self.vars.names())),
            Term::Factored(fa) => {
                let t = &self.vars.names()[self.vars.main()];
                let c = &fa.coeff;
                if c.is_negative() {
                    write!(f, "-")?;
                }
                let a = c.abs();
                let mut parts = Vec::new();
                if !a.is_one() {
                    let s = fmt_rational(&a);
                    parts.push(if a.is_integer() { s } else { format!("({s})") });
                }
                for (c, e) in &fa.factors {
                    let base = if c.is_zero() {
                        t.clone()
                    } else if c.is_negative() {
                        format!("({t} + {})", fmt_rational(&-c))
                    } else {
                        format!("({t} - {})", fmt_rational(c))
                    };
                    parts.push(match e {
                        1 => base,
                        e if *e < 0 => format!("{base}^({e})"),
                        e => format!("{base}^{e}"),
                    });
                }
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}
