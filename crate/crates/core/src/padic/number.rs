use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Prime and working precision shared by every number of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicConfig {
    prime: u32,
    work_precision: u32,
}

impl PadicConfig {
    pub fn new(prime: u32, work_precision: u32) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::Config(format!("{prime} is not a prime")));
        }
        if work_precision == 0 {
            return Err(Error::Config("work precision must be at least 1".into()));
        }
        Ok(Self { prime, work_precision })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn work_precision(&self) -> u32 {
        self.work_precision
    }

    pub fn with_work_precision(&self, work_precision: u32) -> Result<Self> {
        Self::new(self.prime, work_precision)
    }

    pub fn zero(&self) -> PadicNumber {
        PadicNumber::zero(self.prime)
    }

    pub fn one(&self) -> PadicNumber {
        self.integer(1)
    }

    pub fn integer(&self, n: i64) -> PadicNumber {
        PadicNumber::from_bigint(&BigInt::from(n), *self)
    }

    pub fn rational(&self, q: &BigRational) -> PadicNumber {
        PadicNumber::from_rational(q, *self)
    }

    /// `p^k` as an exact element.
    pub fn prime_power(&self, k: i64) -> PadicNumber {
        PadicNumber::from_parts(self.prime, k, BigUint::one(), self.work_precision)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `p^k` as a big integer.
pub fn prime_pow(p: u32, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

/// The p-adic valuation of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u32) -> u32 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

pub(crate) fn mod_inverse(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    if modulus.is_one() {
        return Some(BigUint::zero());
    }
    let a = BigInt::from_biguint(Sign::Plus, a % modulus);
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let g = a.extended_gcd(&m);
    if !g.gcd.is_one() {
        return None;
    }
    g.x.mod_floor(&m).to_biguint()
}

/// Valuation of a field element; zero has valuation `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinity)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Exact zero.
    Zero,
    /// Known only to lie in `p^abs Z_p`. Predicates treat it as zero.
    Vanishing { abs: i64 },
    /// `p^val * unit` with `p ∤ unit < p^prec`; `prec` digits are known.
    Unit { val: i64, unit: BigUint, prec: u32 },
}

/// An element of Q_p stored as `p^v · u` with the unit `u` known modulo
/// `p^k`.
///
/// Arithmetic never increases the relative precision `k`. A result whose
/// tracked digits all cancel becomes a vanishing value `O(p^a)`; such values
/// compare equal to zero in every predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicNumber {
    prime: u32,
    repr: Repr,
}

impl PadicNumber {
    pub fn zero(prime: u32) -> Self {
        Self { prime, repr: Repr::Zero }
    }

    pub fn vanishing(prime: u32, abs: i64) -> Self {
        Self { prime, repr: Repr::Vanishing { abs } }
    }

    /// Builds `p^val · unit` at relative precision `prec`, moving any factors
    /// of `p` in `unit` into the valuation.
    pub fn from_parts(prime: u32, val: i64, unit: BigUint, prec: u32) -> Self {
        let modulus = prime_pow(prime, prec);
        let mut unit = unit % &modulus;
        if unit.is_zero() {
            return Self::vanishing(prime, val + prec as i64);
        }
        let pb = BigUint::from(prime);
        let mut val = val;
        let mut prec = prec;
        loop {
            let (q, r) = unit.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            unit = q;
            val += 1;
            prec -= 1;
        }
        Self { prime, repr: Repr::Unit { val, unit, prec } }
    }

    pub fn from_bigint(n: &BigInt, cfg: PadicConfig) -> Self {
        Self::from_rational(&BigRational::from_integer(n.clone()), cfg)
    }

    /// Exact rational input expanded to the working precision.
    pub fn from_rational(q: &BigRational, cfg: PadicConfig) -> Self {
        let p = cfg.prime;
        if q.is_zero() {
            return Self::zero(p);
        }
        let num = q.numer();
        let den = q.denom();
        let vn = int_valuation(num, p);
        let vd = int_valuation(den, p);
        let pn = BigInt::from(p).pow(vn);
        let pd = BigInt::from(p).pow(vd);
        let a = num / pn;
        let b = (den / pd).abs();
        let k = cfg.work_precision;
        let modulus = BigInt::from_biguint(Sign::Plus, prime_pow(p, k));
        let b_inv = mod_inverse(&b.to_biguint().unwrap(), modulus.magnitude()).unwrap();
        let u = (a * BigInt::from_biguint(Sign::Plus, b_inv)).mod_floor(&modulus);
        Self::from_parts(p, vn as i64 - vd as i64, u.to_biguint().unwrap(), k)
    }

    /// Digits `d0 + d1 p + ...` of the unit, least significant first.
    pub fn from_digits(prime: u32, val: i64, digits: &[u32]) -> Self {
        let mut unit = BigUint::zero();
        for &d in digits.iter().rev() {
            unit = unit * prime + d;
        }
        Self::from_parts(prime, val, unit, digits.len() as u32)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    /// True for exact zero and for values that vanish to their tracked
    /// precision.
    pub fn is_zero(&self) -> bool {
        !matches!(self.repr, Repr::Unit { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero)
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            Repr::Unit { val, .. } => Valuation::Finite(*val),
            _ => Valuation::Infinity,
        }
    }

    /// Relative precision of a nonzero value; `None` for zero.
    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Unit { prec, .. } => Some(*prec),
            _ => None,
        }
    }

    /// Absolute precision `v + k`; `None` for exact zero.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero => None,
            Repr::Vanishing { abs } => Some(*abs),
            Repr::Unit { val, prec, .. } => Some(val + *prec as i64),
        }
    }

    pub fn unit(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Unit { unit, .. } => Some(unit),
            _ => None,
        }
    }

    /// The unit modulo `p^digits`.
    pub fn unit_residue(&self, digits: u32) -> Result<BigUint> {
        match &self.repr {
            Repr::Unit { unit, prec, .. } => {
                if *prec < digits {
                    return Err(Error::InsufficientPrecision { needed: digits, available: *prec });
                }
                Ok(unit % prime_pow(self.prime, digits))
            }
            _ => Err(Error::Domain("zero has no unit part".into())),
        }
    }

    pub fn unit_residue_u64(&self, digits: u32) -> Result<u64> {
        self.unit_residue(digits)?
            .to_u64()
            .ok_or_else(|| Error::Config(format!("p^{digits} does not fit a machine word")))
    }

    /// Unit digits, least significant first.
    pub fn digits(&self) -> Vec<u32> {
        match &self.repr {
            Repr::Unit { unit, prec, .. } => {
                let pb = BigUint::from(self.prime);
                let mut out = Vec::with_capacity(*prec as usize);
                let mut u = unit.clone();
                for _ in 0..*prec {
                    let (q, r) = u.div_rem(&pb);
                    out.push(r.to_u32().unwrap());
                    u = q;
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// The rational `p^v · u` denoted by the stored digits.
    pub fn to_rational(&self) -> BigRational {
        match &self.repr {
            Repr::Unit { val, unit, .. } => {
                let u = BigInt::from_biguint(Sign::Plus, unit.clone());
                let pv = BigInt::from(self.prime).pow(val.unsigned_abs() as u32);
                if *val >= 0 {
                    BigRational::from_integer(u * pv)
                } else {
                    BigRational::new(u, pv)
                }
            }
            _ => BigRational::zero(),
        }
    }

    /// Drops digits so that at most `prec` remain.
    pub fn truncate(&self, prec: u32) -> Self {
        match &self.repr {
            Repr::Unit { val, unit, prec: k } if *k > prec => {
                if prec == 0 {
                    return Self::vanishing(self.prime, *val);
                }
                Self::from_parts(self.prime, *val, unit.clone(), prec)
            }
            _ => self.clone(),
        }
    }

    /// Multiplication by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        match &self.repr {
            Repr::Zero => self.clone(),
            Repr::Vanishing { abs } => Self::vanishing(self.prime, abs + k),
            Repr::Unit { val, unit, prec } => Self {
                prime: self.prime,
                repr: Repr::Unit { val: val + k, unit: unit.clone(), prec: *prec },
            },
        }
    }

    /// The same value with valuation moved to zero (`u` itself).
    pub fn unit_part(&self) -> Option<Self> {
        match &self.repr {
            Repr::Unit { val, .. } => Some(self.shift(-val)),
            _ => None,
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.repr {
            Repr::Unit { val, unit, prec } => {
                let m = prime_pow(self.prime, *prec);
                let inv = mod_inverse(unit, &m).ok_or_else(|| Error::Internal("unit not invertible".into()))?;
                Ok(Self { prime: self.prime, repr: Repr::Unit { val: -val, unit: inv, prec: *prec } })
            }
            _ => Err(Error::DivisionByZero),
        }
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.inv()?)
    }

    /// Integer power; negative exponents need a nonzero base. `x^0 = 1`.
    pub fn pow(&self, exp: i64) -> Result<Self> {
        if exp < 0 {
            return self.inv()?.pow(-exp);
        }
        match &self.repr {
            Repr::Unit { prec, .. } if exp == 0 => Ok(Self::from_parts(self.prime, 0, BigUint::one(), *prec)),
            _ if exp == 0 => Err(Error::Domain("0^0 has no precision".into())),
            Repr::Zero => Ok(self.clone()),
            Repr::Vanishing { abs } => Ok(Self::vanishing(self.prime, abs * exp)),
            Repr::Unit { val, unit, prec } => {
                let m = prime_pow(self.prime, *prec);
                let e = BigUint::from(exp as u64);
                Ok(Self {
                    prime: self.prime,
                    repr: Repr::Unit { val: val * exp, unit: unit.modpow(&e, &m), prec: *prec },
                })
            }
        }
    }

    /// Compares norms: `Less` when `|self| < |other|`.
    pub fn cmp_norm(&self, other: &Self) -> Ordering {
        // larger valuation means smaller norm
        other.valuation().cmp(&self.valuation())
    }

    fn add_impl(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.prime, rhs.prime);
        let p = self.prime;
        match (&self.repr, &rhs.repr) {
            (Repr::Zero, _) => rhs.clone(),
            (_, Repr::Zero) => self.clone(),
            (Repr::Vanishing { abs: a }, Repr::Vanishing { abs: b }) => Self::vanishing(p, *a.min(b)),
            (Repr::Vanishing { abs }, Repr::Unit { val, unit, prec })
            | (Repr::Unit { val, unit, prec }, Repr::Vanishing { abs }) => {
                let a = (*abs).min(val + *prec as i64);
                if *val < a {
                    Self::from_parts(p, *val, unit.clone(), (a - val) as u32)
                } else {
                    Self::vanishing(p, a)
                }
            }
            (
                Repr::Unit { val: v1, unit: u1, prec: k1 },
                Repr::Unit { val: v2, unit: u2, prec: k2 },
            ) => {
                let abs = (v1 + *k1 as i64).min(v2 + *k2 as i64);
                let vmin = (*v1).min(*v2);
                let width = (abs - vmin) as u32;
                let s = u1 * prime_pow(p, (v1 - vmin) as u32) + u2 * prime_pow(p, (v2 - vmin) as u32);
                Self::from_parts(p, vmin, s, width)
            }
        }
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.prime, rhs.prime);
        let p = self.prime;
        match (&self.repr, &rhs.repr) {
            (Repr::Zero, _) | (_, Repr::Zero) => Self::zero(p),
            (Repr::Vanishing { abs: a }, Repr::Vanishing { abs: b }) => Self::vanishing(p, a + b),
            (Repr::Vanishing { abs }, Repr::Unit { val, .. })
            | (Repr::Unit { val, .. }, Repr::Vanishing { abs }) => Self::vanishing(p, abs + val),
            (
                Repr::Unit { val: v1, unit: u1, prec: k1 },
                Repr::Unit { val: v2, unit: u2, prec: k2 },
            ) => {
                let prec = (*k1).min(*k2);
                let m = prime_pow(p, prec);
                Self { prime: p, repr: Repr::Unit { val: v1 + v2, unit: (u1 * u2) % m, prec } }
            }
        }
    }

    fn neg_impl(&self) -> Self {
        match &self.repr {
            Repr::Unit { val, unit, prec } => {
                let m = prime_pow(self.prime, *prec);
                Self { prime: self.prime, repr: Repr::Unit { val: *val, unit: &m - unit, prec: *prec } }
            }
            _ => self.clone(),
        }
    }
}

impl Add<&PadicNumber> for &PadicNumber {
    type Output = PadicNumber;
    fn add(self, rhs: &PadicNumber) -> PadicNumber {
        self.add_impl(rhs)
    }
}

impl Sub<&PadicNumber> for &PadicNumber {
    type Output = PadicNumber;
    fn sub(self, rhs: &PadicNumber) -> PadicNumber {
        self.add_impl(&rhs.neg_impl())
    }
}

impl Mul<&PadicNumber> for &PadicNumber {
    type Output = PadicNumber;
    fn mul(self, rhs: &PadicNumber) -> PadicNumber {
        self.mul_impl(rhs)
    }
}

impl Neg for &PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        self.neg_impl()
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<PadicNumber> for PadicNumber {
            type Output = PadicNumber;
            fn $m(self, rhs: PadicNumber) -> PadicNumber {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&PadicNumber> for PadicNumber {
            type Output = PadicNumber;
            fn $m(self, rhs: &PadicNumber) -> PadicNumber {
                (&self).$m(rhs)
            }
        }
    };
}
owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        self.neg_impl()
    }
}

/// Prints `p^v * (d0 + d1*p + ...)` with one term per tracked digit.
impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prime;
        match &self.repr {
            Repr::Zero => write!(f, "0"),
            Repr::Vanishing { abs } => write!(f, "O({p}^{abs})"),
            Repr::Unit { val, .. } => {
                write!(f, "{p}^{val} * (")?;
                for (i, d) in self.digits().iter().enumerate() {
                    match i {
                        0 => write!(f, "{d}")?,
                        1 => write!(f, " + {d}*{p}")?,
                        _ => write!(f, " + {d}*{p}^{i}")?,
                    }
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn valuation_examples() {
        let cfg = PadicConfig::new(5, 10).unwrap();
        assert_eq!(cfg.integer(50).valuation(), Valuation::Finite(2));
        assert_eq!(cfg.zero().valuation(), Valuation::Infinity);
        assert_eq!(cfg.rational(&q(3, 10)).valuation(), Valuation::Finite(-1));
    }

    #[test]
    fn config_rejects_composites() {
        assert!(PadicConfig::new(6, 4).is_err());
        assert!(PadicConfig::new(1, 4).is_err());
        assert!(PadicConfig::new(7, 0).is_err());
    }

    #[test]
    fn rational_round_trip_through_digits() {
        let cfg = PadicConfig::new(7, 12).unwrap();
        let x = cfg.rational(&q(-3, 49));
        assert_eq!(x.valuation(), Valuation::Finite(-2));
        let back = &x * &cfg.integer(49);
        assert_eq!(back, cfg.integer(-3));
    }

    #[test]
    fn cancellation_loses_digits() {
        let cfg = PadicConfig::new(5, 6).unwrap();
        let a = cfg.integer(1);
        let b = cfg.integer(1 + 5 * 5 * 5);
        let d = &b - &a;
        assert_eq!(d.valuation(), Valuation::Finite(3));
        assert_eq!(d.precision(), Some(3));
        let z = &a - &a;
        assert!(z.is_zero());
        assert!(!z.is_exact_zero());
        assert_eq!(z.absolute_precision(), Some(6));
    }

    #[test]
    fn inverse_and_power() {
        let cfg = PadicConfig::new(3, 8).unwrap();
        let x = cfg.rational(&q(2, 9));
        let y = x.inv().unwrap();
        assert_eq!(&x * &y, cfg.one());
        assert_eq!(x.pow(-2).unwrap(), cfg.rational(&q(81, 4)));
        assert!(cfg.zero().inv().is_err());
    }

    #[test]
    fn display_digit_string() {
        let cfg = PadicConfig::new(5, 3).unwrap();
        assert_eq!(cfg.integer(7).to_string(), "5^0 * (2 + 1*5 + 0*5^2)");
        assert_eq!(cfg.zero().to_string(), "0");
    }
}
