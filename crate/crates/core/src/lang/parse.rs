//! Text syntax.
//!
//! ```text
//! formula := conj ("||" conj)*
//! conj    := unary ("&&" unary)*
//! unary   := "!" unary | "true" | "false" | atom | "(" formula ")"
//! atom    := expr "=" expr
//!          | "|" expr "|" ("<=" | "<" | ">=" | ">") "|" expr "|"
//!          | expr "in" set
//! set     := "P_" int | "coset" "(" int "," "P_" int ")" | "Q" "(" int "," int ")"
//! expr    := ["-"] prod (("+" | "-") prod)*
//! prod    := power (("*" | "/") power)*
//! power   := primary ["^" ["-"] int | "^" "(" ["-"] int ")"]
//! primary := int | var | "(" expr ")"
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};


use super::ast::{Atom, Basic, Formula};
use super::term::{Term, Vars, RESERVED};
use crate::error::{Error, Result};
use crate::padic::PadicConfig;
use crate::poly::{Poly, UniPoly};

const MAX_EXPONENT: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    const SYMS: &[&str] = &["&&", "||", "<=", ">=", "<", ">", "=", "!", "+", "-", "*", "/", "^", "(", ")", "|", ","];
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Int(text[s..i].parse().unwrap()), s));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let s = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[s..i].to_string()), s));
            continue;
        }
        for sym in SYMS {
            if text[i..].starts_with(sym) {
                out.push((Tok::Sym(sym), i));
                i += sym.len();
                continue 'outer;
            }
        }
        return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{c}`") });
    }
    Ok(out)
}

/// Intermediate value of an arithmetic expression.
#[derive(Debug, Clone)]
enum Val {
    Poly(Poly),
    /// Reduced quotient in the fibre variable, monic denominator of
    /// positive degree.
    Frac(UniPoly, UniPoly),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    vars: &'a Vars,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let pos = self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end);
        Err(Error::Syntax { pos, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn at_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_int(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn small_int(&mut self, what: &str, min: u64) -> Result<u64> {
        let n = self.expect_int()?;
        match u64::try_from(&n) {
            Ok(v) if v >= min && v <= u32::MAX as u64 => Ok(v),
            _ => {
                self.pos -= 1;
                self.err(format!("{what} must be an integer >= {min}"))
            }
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.conj()?;
        while self.eat_sym("||") {
            let g = self.conj()?;
            f = Formula::or(f, g);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat_sym("&&") {
            let g = self.unary()?;
            f = Formula::and(f, g);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.at_ident("true") {
            self.pos += 1;
            return Ok(Formula::True);
        }
        if self.at_ident("false") {
            self.pos += 1;
            return Ok(Formula::False);
        }
        if self.at_sym("(") {
            let save = self.pos;
            match self.atom() {
                Ok(a) => return Ok(a),
                Err(e_atom) => {
                    let atom_pos = self.pos;
                    self.pos = save + 1;
                    match self.formula().and_then(|f| self.expect_sym(")").map(|_| f)) {
                        Ok(f) => return Ok(f),
                        Err(e) => {
                            // report whichever reading got further
                            if self.pos >= atom_pos {
                                return Err(e);
                            }
                            return Err(e_atom);
                        }
                    }
                }
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        if self.eat_sym("|") {
            let g = self.expr()?;
            self.expect_sym("|")?;
            let op = match self.peek() {
                Some(Tok::Sym(s)) if ["<=", "<", ">=", ">"].contains(s) => *s,
                _ => return self.err("expected a norm comparison"),
            };
            self.pos += 1;
            self.expect_sym("|")?;
            let f = self.expr()?;
            self.expect_sym("|")?;
            let (g, f) = (self.finish(g)?, self.finish(f)?);
            return Ok(match op {
                "<=" => Formula::basic(Basic::NormLe(g, f)),
                ">=" => Formula::basic(Basic::NormLe(f, g)),
                "<" => Formula::not(Formula::basic(Basic::NormLe(f, g))),
                _ => Formula::not(Formula::basic(Basic::NormLe(g, f))),
            });
        }
        let lhs = self.expr()?;
        if self.eat_sym("=") {
            let rhs = self.expr()?;
            let d = self.sub(lhs, rhs)?;
            return Ok(Formula::basic(Basic::Zero(self.finish(d)?)));
        }
        if self.at_ident("in") {
            self.pos += 1;
            let term = self.finish(lhs)?;
            return self.set(term);
        }
        self.err("expected `=`, `in` or a connective")
    }

    fn set(&mut self, term: Term) -> Result<Formula> {
        let name = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return self.err("expected P_N, coset(r, P_N) or Q(N,M)"),
        };
        if let Some(n) = name.strip_prefix("P_") {
            let n = self.parse_power(n)?;
            self.pos += 1;
            return Ok(Formula::basic(Basic::in_pn(term, n)));
        }
        self.pos += 1;
        match name.as_str() {
            "coset" => {
                self.expect_sym("(")?;
                let r = self.small_int("coset index", 0)? as usize;
                self.expect_sym(",")?;
                let n = match self.peek() {
                    Some(Tok::Ident(s)) if s.starts_with("P_") => {
                        let s = s.clone();
                        self.parse_power(&s[2..])?
                    }
                    _ => return self.err("expected P_N"),
                };
                self.pos += 1;
                self.expect_sym(")")?;
                Ok(Formula::basic(Basic::coset(term, n, r)))
            }
            "Q" => {
                self.expect_sym("(")?;
                let n = self.small_int("N", 1)? as u32;
                self.expect_sym(",")?;
                let m = self.small_int("M", 1)? as u32;
                self.expect_sym(")")?;
                Ok(Formula::Atom(Atom::InQ { term, n, m }))
            }
            _ => {
                self.pos -= 1;
                self.err("expected P_N, coset(r, P_N) or Q(N,M)")
            }
        }
    }

    fn parse_power(&self, digits: &str) -> Result<u32> {
        match digits.parse::<u32>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => self.err("the power N must be an integer >= 1"),
        }
    }

    fn expr(&mut self) -> Result<Val> {
        let mut acc = if self.eat_sym("-") {
            let p = self.prod()?;
            self.neg(p)
        } else {
            self.prod()?
        };
        loop {
            if self.eat_sym("+") {
                let b = self.prod()?;
                acc = self.add(acc, b)?;
            } else if self.eat_sym("-") {
                let b = self.prod()?;
                acc = self.sub(acc, b)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn prod(&mut self) -> Result<Val> {
        let mut acc = self.power()?;
        loop {
            if self.eat_sym("*") {
                let b = self.power()?;
                acc = self.mul(acc, b)?;
            } else if self.eat_sym("/") {
                let b = self.power()?;
                acc = self.div(acc, b)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Val> {
        let base = self.primary()?;
        if !self.eat_sym("^") {
            return Ok(base);
        }
        let paren = self.eat_sym("(");
        let neg = self.eat_sym("-");
        let k = self.expect_int()?;
        let k = match u64::try_from(&k) {
            Ok(k) if k <= MAX_EXPONENT => k as i64,
            _ => {
                self.pos -= 1;
                return self.err(format!("exponents are limited to {MAX_EXPONENT}"));
            }
        };
        if paren {
            self.expect_sym(")")?;
        }
        self.pow(base, if neg { -k } else { k })
    }

    fn primary(&mut self) -> Result<Val> {
        let n = self.vars.len();
        match self.peek().cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                Ok(Val::Poly(Poly::constant(n, BigRational::from_integer(k))))
            }
            Some(Tok::Ident(name)) => match self.vars.index(&name) {
                Some(i) => {
                    self.pos += 1;
                    Ok(Val::Poly(Poly::var(n, i)))
                }
                None if RESERVED.contains(&name.as_str()) || name.starts_with("P_") => {
                    self.err(format!("unexpected keyword `{name}`"))
                }
                None => Err(Error::Arity(name)),
            },
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect_sym(")")?;
                Ok(v)
            }
            _ => self.err("expected a number, a variable or `(`"),
        }
    }

    fn frac(&self, v: Val) -> Result<(UniPoly, UniPoly)> {
        match v {
            Val::Frac(a, b) => Ok((a, b)),
            Val::Poly(p) => match p.to_uni(self.vars.main()) {
                Some(u) => Ok((u, UniPoly::constant(BigRational::one()))),
                None => self.err("quotients may only involve the last variable"),
            },
        }
    }

    fn make_frac(&self, num: UniPoly, den: UniPoly) -> Val {
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g).unwrap();
        let (den, _) = den.div_rem(&g).unwrap();
        let l = den.lead();
        let (num, den) = (num.scale(&l.recip()), den.scale(&l.recip()));
        if den.degree() == 0 {
            Val::Poly(Poly::from_uni(&num, self.vars.len(), self.vars.main()))
        } else {
            Val::Frac(num, den)
        }
    }

    fn neg(&self, a: Val) -> Val {
        match a {
            Val::Poly(p) => Val::Poly(p.neg()),
            Val::Frac(n, d) => Val::Frac(n.scale(&-BigRational::one()), d),
        }
    }

    fn add(&self, a: Val, b: Val) -> Result<Val> {
        if let (Val::Poly(x), Val::Poly(y)) = (&a, &b) {
            return Ok(Val::Poly(x.add(y)));
        }
        let (an, ad) = self.frac(a)?;
        let (bn, bd) = self.frac(b)?;
        Ok(self.make_frac(an.mul(&bd).add(&bn.mul(&ad)), ad.mul(&bd)))
    }

    fn sub(&self, a: Val, b: Val) -> Result<Val> {
        let nb = self.neg(b);
        self.add(a, nb)
    }

    fn mul(&self, a: Val, b: Val) -> Result<Val> {
        if let (Val::Poly(x), Val::Poly(y)) = (&a, &b) {
            return Ok(Val::Poly(x.mul(y)));
        }
        let (an, ad) = self.frac(a)?;
        let (bn, bd) = self.frac(b)?;
        Ok(self.make_frac(an.mul(&bn), ad.mul(&bd)))
    }

    fn div(&self, a: Val, b: Val) -> Result<Val> {
        if let Val::Poly(y) = &b {
            if let Some(c) = y.as_constant() {
                if c.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                return Ok(match a {
                    Val::Poly(x) => Val::Poly(x.scale(&c.recip())),
                    Val::Frac(n, d) => Val::Frac(n.scale(&c.recip()), d),
                });
            }
        }
        let (an, ad) = self.frac(a)?;
        let (bn, bd) = self.frac(b)?;
        if bn.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.make_frac(an.mul(&bd), ad.mul(&bn)))
    }

    fn pow(&self, a: Val, k: i64) -> Result<Val> {
        if k >= 0 {
            return Ok(match a {
                Val::Poly(p) => Val::Poly(p.pow(k as u32)),
                Val::Frac(n, d) => {
                    let (mut nn, mut dd) = (UniPoly::constant(BigRational::one()), UniPoly::constant(BigRational::one()));
                    for _ in 0..k {
                        nn = nn.mul(&n);
                        dd = dd.mul(&d);
                    }
                    Val::Frac(nn, dd)
                }
            });
        }
        let one = Val::Poly(Poly::from_int(self.vars.len(), 1));
        let pos = self.pow(a, -k)?;
        self.div(one, pos)
    }

    /// Turns an expression value into a term.
    fn finish(&self, v: Val) -> Result<Term> {
        match v {
            Val::Poly(p) => Ok(Term::Poly(p)),
            Val::Frac(num, den) => {
                let nv = self.vars.len();
                let (ln, rn) = rational_linear_factors(&num)
                    .ok_or_else(|| self.err::<()>("quotients must factor into rational linear factors").unwrap_err())?;
                let (ld, rd) = rational_linear_factors(&den)
                    .ok_or_else(|| self.err::<()>("quotients must factor into rational linear factors").unwrap_err())?;
                let mut fs: Vec<(BigRational, i32)> = rn;
                fs.extend(rd.into_iter().map(|(c, e)| (c, -e)));
                Ok(Term::factored(nv, ln / ld, &fs))
            }
        }
    }
}

/// `f = lead * prod (t - c)^e` with rational `c`, when such a
/// factorization exists.
pub fn rational_linear_factors(f: &UniPoly) -> Option<(BigRational, Vec<(BigRational, i32)>)> {
    if f.is_zero() {
        return None;
    }
    let cfg = PadicConfig::new(3, 8).unwrap();
    let mut out = Vec::new();
    for (i, g) in f.squarefree().iter().enumerate() {
        let roots = crate::roots::distinct_roots(g, cfg).ok()?;
        let exact: Vec<BigRational> = roots.into_iter().filter_map(|r| r.as_rational().cloned()).collect();
        if exact.len() != g.degree() {
            return None;
        }
        out.extend(exact.into_iter().map(|c| (c, i as i32 + 1)));
    }
    Some((f.lead(), out))
}

fn run<T>(text: &str, vars: &Vars, f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), vars };
    let out = f(&mut p)?;
    if p.pos < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(out)
}

/// Parses a formula over the given variables.
pub fn parse_formula(text: &str, vars: &Vars) -> Result<Formula> {
    run(text, vars, |p| p.formula())
}

/// Parses a single term.
pub fn parse_term(text: &str, vars: &Vars) -> Result<Term> {
    run(text, vars, |p| {
        let v = p.expr()?;
        p.finish(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Vars {
        Vars::univariate()
    }

    #[test]
    fn parses_power_conditions() {
        let f = parse_formula("(t^2 - 1) in P_2", &t()).unwrap();
        assert_eq!(f.atoms().len(), 1);
        assert!(matches!(f, Formula::Atom(Atom::Basic(Basic::PowerCoset { n: 2, r: 0, with_zero: true, .. }))));
        let g = parse_formula("t in coset(3, P_2) || t in Q(2,1)", &t()).unwrap();
        assert_eq!(g.atoms().len(), 2);
    }

    #[test]
    fn rejects_zero_power_and_unknown_names() {
        assert!(matches!(parse_formula("t in P_0", &t()), Err(Error::Syntax { .. })));
        assert!(matches!(parse_formula("y = 0", &t()), Err(Error::Arity(_))));
        match parse_formula("t + = 0", &t()) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quotients_become_factored_terms() {
        let x = parse_term("(t - 1)/(t^2 - 4)", &t()).unwrap();
        match &x {
            Term::Factored(f) => {
                assert_eq!(f.degree(), -1);
                assert_eq!(f.factors().len(), 3);
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_term("1/(t^2 - 2)", &t()).is_err());
        assert!(matches!(parse_term("t/0", &t()), Err(Error::DivisionByZero)));
        assert!(matches!(parse_term("(t^2 - 1)/(t - 1)", &t()).unwrap(), Term::Poly(_)));
    }

    #[test]
    fn printing_round_trips() {
        let vars = Vars::fibred();
        for text in [
            "|x*t - 1| <= |25| && !(t in P_3)",
            "(t - x) in coset(2, P_2) || t = 0 && |t| < |x|",
            "!(t^2 + (3/2)*x = 0 || false) && (t) in Q(2,3)",
        ] {
            let f = parse_formula(text, &vars).unwrap();
            let printed = f.display(&vars).to_string();
            assert_eq!(parse_formula(&printed, &vars).unwrap(), f, "{printed}");
        }
        let u = t();
        let f = parse_formula("((t - 1)/(t + 2)^2) in P_2", &u).unwrap();
        assert_eq!(parse_formula(&f.display(&u).to_string(), &u).unwrap(), f);
    }
}
