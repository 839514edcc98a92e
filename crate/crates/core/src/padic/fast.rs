//! Machine-word p-adic arithmetic for bulk evaluation.
//!
//! Values carry their unit modulo `p^rel` with `p^R < 2^62`, so products fit
//! in `u128`. Anything that cancels below the needed digits is recomputed by
//! the caller with exact arithmetic.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::number::PadicNumber;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fx {
    Zero,
    /// Known to be divisible by `p^abs`, nothing more.
    Vanish(i64),
    /// `p^v u` with `u` a unit known mod `p^rel`, `rel >= 1`.
    Val { v: i64, u: u64, rel: u32 },
}

/// Precomputed powers of `p` for [`Fx`] arithmetic.
#[derive(Debug, Clone)]
pub struct FastRing {
    p: u64,
    r: u32,
    pw: Vec<u64>,
}

fn mulm(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn inv_mod(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(m as i128) as u64
}

impl FastRing {
    pub fn new(prime: u32) -> Self {
        let p = prime as u64;
        let mut pw = vec![1u64];
        while let Some(next) = pw.last().unwrap().checked_mul(p).filter(|x| *x < (1u64 << 62)) {
            pw.push(next);
        }
        let r = (pw.len() - 1) as u32;
        Self { p, r, pw }
    }

    pub fn prime(&self) -> u32 {
        self.p as u32
    }

    /// Digits carried by exact inputs.
    pub fn digits(&self) -> u32 {
        self.r
    }

    pub fn pow_p(&self, k: u32) -> u64 {
        self.pw[k as usize]
    }

    fn abs_prec(x: &Fx) -> i64 {
        match *x {
            Fx::Zero => i64::MAX,
            Fx::Vanish(a) => a,
            Fx::Val { v, rel, .. } => v + rel as i64,
        }
    }

    /// Normalizes `p^v s` with `s` known mod `p^rel`.
    fn make(&self, v: i64, s: u64, rel: u32) -> Fx {
        if rel == 0 {
            return Fx::Vanish(v);
        }
        let s = s % self.pw[rel as usize];
        if s == 0 {
            return Fx::Vanish(v + rel as i64);
        }
        let mut s = s;
        let mut w = 0;
        while s % self.p == 0 {
            s /= self.p;
            w += 1;
        }
        Fx::Val { v: v + w as i64, u: s, rel: rel - w }
    }

    pub fn from_rational(&self, q: &BigRational) -> Fx {
        if q.is_zero() {
            return Fx::Zero;
        }
        let pb = BigInt::from(self.p);
        let (mut n, mut d) = (q.numer().clone(), q.denom().clone());
        let mut v = 0i64;
        while n.is_multiple_of(&pb) {
            n /= &pb;
            v += 1;
        }
        while d.is_multiple_of(&pb) {
            d /= &pb;
            v -= 1;
        }
        let m = BigInt::from(self.pw[self.r as usize]);
        let nu = n.mod_floor(&m).to_u64().unwrap();
        let du = d.mod_floor(&m).to_u64().unwrap();
        let u = mulm(nu, inv_mod(du, self.pw[self.r as usize]), self.pw[self.r as usize]);
        Fx::Val { v, u, rel: self.r }
    }

    /// `p^v u` exactly, for `u < p^R`.
    pub fn from_parts(&self, v: i64, u: u64) -> Fx {
        self.make(v, u, self.r)
    }

    pub fn from_padic(&self, x: &PadicNumber) -> Fx {
        match (x.valuation().finite(), x.precision()) {
            (None, _) if x.is_exact_zero() => Fx::Zero,
            (None, _) => Fx::Vanish(x.absolute_precision().unwrap_or(i64::MAX)),
            (Some(v), Some(k)) => {
                let rel = k.min(self.r);
                let u = x.unit_residue_u64(rel).unwrap_or(0);
                self.make(v, u, rel)
            }
            (Some(_), None) => unreachable!("nonzero numbers track precision"),
        }
    }

    pub fn mul(&self, a: Fx, b: Fx) -> Fx {
        match (a, b) {
            (Fx::Zero, _) | (_, Fx::Zero) => Fx::Zero,
            (Fx::Vanish(x), Fx::Vanish(y)) => Fx::Vanish(x + y),
            (Fx::Vanish(x), Fx::Val { v, .. }) | (Fx::Val { v, .. }, Fx::Vanish(x)) => Fx::Vanish(x + v),
            (Fx::Val { v: v1, u: u1, rel: r1 }, Fx::Val { v: v2, u: u2, rel: r2 }) => {
                let rel = r1.min(r2);
                Fx::Val { v: v1 + v2, u: mulm(u1, u2, self.pw[rel as usize]), rel }
            }
        }
    }

    pub fn neg(&self, a: Fx) -> Fx {
        match a {
            Fx::Val { v, u, rel } => Fx::Val { v, u: self.pw[rel as usize] - u, rel },
            x => x,
        }
    }

    pub fn add(&self, a: Fx, b: Fx) -> Fx {
        match (a, b) {
            (Fx::Zero, x) | (x, Fx::Zero) => return x,
            _ => {}
        }
        let abs = Self::abs_prec(&a).min(Self::abs_prec(&b));
        let v = match (a, b) {
            (Fx::Val { v: v1, .. }, Fx::Val { v: v2, .. }) => v1.min(v2),
            (Fx::Val { v, .. }, _) | (_, Fx::Val { v, .. }) => v,
            _ => return Fx::Vanish(abs),
        };
        if v >= abs {
            return Fx::Vanish(abs);
        }
        let rel = (abs - v) as u32;
        let m = self.pw[rel as usize];
        let mut s = 0u64;
        for x in [a, b] {
            if let Fx::Val { v: vx, u, .. } = x {
                let shift = vx - v;
                if shift < rel as i64 {
                    s = (s + mulm(u % m, self.pw[shift as usize], m)) % m;
                }
            }
        }
        self.make(v, s, rel)
    }

    pub fn sub(&self, a: Fx, b: Fx) -> Fx {
        self.add(a, self.neg(b))
    }

    /// Inverse of a value with known valuation; `None` otherwise.
    pub fn inv(&self, a: Fx) -> Option<Fx> {
        match a {
            Fx::Val { v, u, rel } => Some(Fx::Val { v: -v, u: inv_mod(u, self.pw[rel as usize]), rel }),
            _ => None,
        }
    }

    pub fn pow(&self, a: Fx, k: u32) -> Fx {
        let mut r = Fx::Val { v: 0, u: 1, rel: self.r };
        for _ in 0..k {
            r = self.mul(r, a);
        }
        r
    }
}

/// Valuation and unit residue of an exact nonzero rational.
pub fn rational_parts(q: &BigRational, prime: u32, digits: u32) -> Option<(i64, u64)> {
    if q.is_zero() {
        return None;
    }
    let pb = BigInt::from(prime);
    let (mut n, mut d) = (q.numer().clone(), q.denom().clone());
    let mut v = 0i64;
    while n.is_multiple_of(&pb) {
        n /= &pb;
        v += 1;
    }
    while d.is_multiple_of(&pb) {
        d /= &pb;
        v -= 1;
    }
    let m = pb.pow(digits);
    let nu = n.mod_floor(&m);
    let du = d.abs().mod_floor(&m);
    let sign_neg = d.is_negative();
    let inv = super::number::mod_inverse(du.magnitude(), m.magnitude())?;
    let mut u = (nu * BigInt::from_biguint(Sign::Plus, inv)).mod_floor(&m);
    if sign_neg {
        u = (&m - u).mod_floor(&m);
    }
    Some((v, u.to_u64()?))
}
