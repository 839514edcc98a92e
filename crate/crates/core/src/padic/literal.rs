//! Text and JSON forms of p-adic numbers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::number::{PadicConfig, PadicNumber, Valuation};
use crate::error::{Error, Result};

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

/// Parses `a`, `a/b`, `O(p^a)` or a digit string `p^v * (d0 + d1*p + ...)`.
pub fn parse_literal(text: &str, cfg: PadicConfig) -> Result<PadicNumber> {
    let s = text.trim();
    if let Some(inner) = s.strip_prefix("O(").and_then(|r| r.strip_suffix(')')) {
        let (p, a) = parse_power(inner.trim(), 2)?;
        check_prime(p, cfg, 0)?;
        return Ok(PadicNumber::vanishing(cfg.prime(), a));
    }
    if let Some(star) = s.find('*') {
        let head = s[..star].trim();
        if head.contains('^') && !head.contains('(') {
            return parse_digit_string(s, star, cfg);
        }
    }
    Ok(PadicNumber::from_rational(&parse_rational(s)?, cfg))
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| syntax(0, format!("bad integer `{num}`")))?;
    let d: BigInt = den.parse().map_err(|_| syntax(0, format!("bad integer `{den}`")))?;
    if d.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(BigRational::new(n, d))
}

fn parse_power(s: &str, offset: usize) -> Result<(u32, i64)> {
    let (b, e) = s.split_once('^').ok_or_else(|| syntax(offset, "expected p^k"))?;
    let p = b.trim().parse().map_err(|_| syntax(offset, "bad prime"))?;
    let e = e.trim().trim_start_matches('(').trim_end_matches(')');
    let k = e.trim().parse().map_err(|_| syntax(offset, "bad exponent"))?;
    Ok((p, k))
}

fn check_prime(p: u32, cfg: PadicConfig, pos: usize) -> Result<()> {
    if p != cfg.prime() {
        return Err(syntax(pos, format!("literal uses prime {p}, expected {}", cfg.prime())));
    }
    Ok(())
}

fn parse_digit_string(s: &str, star: usize, cfg: PadicConfig) -> Result<PadicNumber> {
    let (p, v) = parse_power(s[..star].trim(), 0)?;
    check_prime(p, cfg, 0)?;
    let body = s[star + 1..].trim();
    let open = star + 1 + s[star + 1..].find('(').ok_or_else(|| syntax(star + 1, "expected `(`"))?;
    let inner = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .ok_or_else(|| syntax(open, "expected parenthesised digits"))?;
    let mut digits: Vec<Option<u32>> = Vec::new();
    for term in inner.split('+') {
        let term = term.trim();
        let (d, pos) = match term.split_once('*') {
            None => (term, 0usize),
            Some((d, rest)) => {
                let rest = rest.trim();
                let i = if rest == p.to_string() {
                    1
                } else {
                    let (q, i) = parse_power(rest, open)?;
                    check_prime(q, cfg, open)?;
                    usize::try_from(i).map_err(|_| syntax(open, "negative digit position"))?
                };
                (d.trim(), i)
            }
        };
        let d: u32 = d.parse().map_err(|_| syntax(open, format!("bad digit `{d}`")))?;
        if d >= p {
            return Err(syntax(open, format!("digit {d} is not below {p}")));
        }
        if digits.len() <= pos {
            digits.resize(pos + 1, None);
        }
        if digits[pos].replace(d).is_some() {
            return Err(syntax(open, format!("digit position {pos} given twice")));
        }
    }
    let digits: Vec<u32> = digits.into_iter().map(|d| d.unwrap_or(0)).collect();
    if digits.first().copied().unwrap_or(0) == 0 {
        return Err(syntax(open, "leading digit must be nonzero"));
    }
    Ok(PadicNumber::from_digits(p, v, &digits))
}

/// JSON form `{"v": int | "inf", "unit": "decimal", "prec": int}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicJson {
    pub v: JsonValuation,
    pub unit: String,
    pub prec: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonValuation {
    Finite(i64),
    Inf(String),
}

impl PadicJson {
    /// Zero is written with `v = "inf"`; a vanishing `O(p^a)` keeps `a` as
    /// its precision.
    pub fn from_number(x: &PadicNumber) -> Self {
        match x.valuation() {
            Valuation::Finite(v) => PadicJson {
                v: JsonValuation::Finite(v),
                unit: x.unit().unwrap().to_string(),
                prec: x.precision().unwrap(),
            },
            Valuation::Infinity => PadicJson {
                v: JsonValuation::Inf("inf".into()),
                unit: "0".into(),
                prec: x.absolute_precision().map(|a| a.max(0) as u32).unwrap_or(0),
            },
        }
    }

    pub fn to_number(&self, prime: u32) -> Result<PadicNumber> {
        match &self.v {
            JsonValuation::Inf(s) if s == "inf" => Ok(if self.prec == 0 {
                PadicNumber::zero(prime)
            } else {
                PadicNumber::vanishing(prime, self.prec as i64)
            }),
            JsonValuation::Inf(s) => Err(syntax(0, format!("bad valuation `{s}`"))),
            JsonValuation::Finite(v) => {
                let u: BigUint = self.unit.parse().map_err(|_| syntax(0, "bad unit"))?;
                if self.prec == 0 || (&u % prime).is_zero() {
                    return Err(syntax(0, "unit must be prime to p with prec >= 1"));
                }
                Ok(PadicNumber::from_parts(prime, *v, u, self.prec))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_and_digit_forms_agree() {
        let cfg = PadicConfig::new(5, 3).unwrap();
        let a = parse_literal("7", cfg).unwrap();
        let b = parse_literal("5^0 * (2 + 1*5 + 0*5^2)", cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_literal(&a.to_string(), cfg).unwrap(), a);
        let c = parse_literal("3/10", cfg).unwrap();
        assert_eq!(c.valuation(), Valuation::Finite(-1));
        assert!(parse_literal("O(5^4)", cfg).unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_literals() {
        let cfg = PadicConfig::new(5, 3).unwrap();
        assert!(parse_literal("1/0", cfg).is_err());
        assert!(parse_literal("3^0 * (1)", cfg).is_err());
        assert!(parse_literal("5^0 * (7)", cfg).is_err());
        assert!(parse_literal("x", cfg).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = PadicConfig::new(3, 6).unwrap();
        for x in [cfg.integer(-18), cfg.zero(), cfg.rational(&BigRational::new(1.into(), 9.into()))] {
            let j = PadicJson::from_number(&x);
            let text = serde_json::to_string(&j).unwrap();
            let back: PadicJson = serde_json::from_str(&text).unwrap();
            assert_eq!(back.to_number(3).unwrap(), x);
        }
    }
}
