use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::{int_valuation, parse_literal, parse_rational, PadicConfig, PadicNumber, Valuation};
use crate::poly::fmt_rational;

/// A constant of Q_p: an exact rational or a p-adic approximation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Exact(BigRational),
    Approx(PadicNumber),
}

impl Scalar {
    pub fn int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Scalar::int(0)
    }

    pub fn to_padic(&self, cfg: PadicConfig) -> PadicNumber {
        match self {
            Scalar::Exact(q) => cfg.rational(q),
            Scalar::Approx(x) => x.clone(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Approx(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Approx(x) => x.is_zero(),
        }
    }

    pub fn valuation(&self, prime: u32) -> Valuation {
        match self {
            Scalar::Exact(q) if q.is_zero() => Valuation::Infinity,
            Scalar::Exact(q) => Valuation::Finite(
                int_valuation(q.numer(), prime) as i64 - int_valuation(q.denom(), prime) as i64,
            ),
            Scalar::Approx(x) => x.valuation(),
        }
    }

    /// Reads a rational (kept exact) or a p-adic digit string.
    pub fn parse(text: &str, cfg: PadicConfig) -> Result<Self> {
        match parse_rational(text) {
            Ok(q) => Ok(Scalar::Exact(q)),
            Err(_) => Ok(Scalar::Approx(parse_literal(text, cfg)?)),
        }
    }

    /// `p^k` exactly.
    pub fn prime_power(prime: u32, k: i64) -> Self {
        let pk = num_traits::pow(BigInt::from(prime), k.unsigned_abs() as usize);
        Scalar::Exact(if k >= 0 { BigRational::from_integer(pk) } else { BigRational::new(1.into(), pk) })
    }

    pub fn is_negative_rational(&self) -> bool {
        matches!(self, Scalar::Exact(q) if q.is_negative())
    }

    fn lift(&self, other: &Scalar, cfg: PadicConfig, exact: impl Fn(&BigRational, &BigRational) -> BigRational, approx: impl Fn(&PadicNumber, &PadicNumber) -> PadicNumber) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(exact(a, b)),
            _ => Scalar::Approx(approx(&self.to_padic(cfg), &other.to_padic(cfg))),
        }
    }

    pub fn add(&self, other: &Scalar, cfg: PadicConfig) -> Scalar {
        self.lift(other, cfg, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Scalar, cfg: PadicConfig) -> Scalar {
        self.lift(other, cfg, |a, b| a - b, |a, b| a - b)
    }

    pub fn mul(&self, other: &Scalar, cfg: PadicConfig) -> Scalar {
        self.lift(other, cfg, |a, b| a * b, |a, b| a * b)
    }

    pub fn div(&self, other: &Scalar, cfg: PadicConfig) -> Result<Scalar> {
        match (self, other) {
            (_, o) if o.is_zero() => Err(Error::DivisionByZero),
            (Scalar::Exact(a), Scalar::Exact(b)) => Ok(Scalar::Exact(a / b)),
            _ => Ok(Scalar::Approx(self.to_padic(cfg).checked_div(&other.to_padic(cfg))?)),
        }
    }

    /// Integer power; `x^0 = 1` even for approximations.
    pub fn powi(&self, e: i64) -> Result<Scalar> {
        match self {
            _ if e == 0 => Ok(Scalar::int(1)),
            Scalar::Exact(q) if q.is_zero() && e < 0 => Err(Error::DivisionByZero),
            Scalar::Exact(q) => {
                let r = num_traits::pow(q.clone(), e.unsigned_abs() as usize);
                Ok(Scalar::Exact(if e < 0 { r.recip() } else { r }))
            }
            Scalar::Approx(x) => Ok(Scalar::Approx(x.pow(e)?)),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{}", fmt_rational(q)),
            Scalar::Approx(x) => write!(f, "{x}"),
        }
    }
}
