use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::number::{prime_pow, PadicConfig, PadicNumber, Valuation};
use crate::error::{Error, Result};

/// Largest residue table we are willing to build.
const MAX_TABLE: u64 = 1 << 24;

/// p-adic valuation of a positive machine integer.
pub fn vp(n: u64, p: u32) -> u32 {
    assert!(n > 0);
    let mut n = n;
    let mut v = 0;
    while n % p as u64 == 0 {
        n /= p as u64;
        v += 1;
    }
    v
}

/// Number of unit digits that decide membership in `P_N`: `2 v_p(N) + 1`.
pub fn decision_digits(p: u32, n: u32) -> u32 {
    2 * vp(n as u64, p) + 1
}

/// A multiplicative subgroup of `K^*` with finite index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SubgroupSpec {
    #[serde(rename = "FULL")]
    Full,
    #[serde(rename = "PN")]
    Pn {
        #[serde(rename = "N")]
        n: u32,
    },
    #[serde(rename = "QNM")]
    Qnm {
        #[serde(rename = "N")]
        n: u32,
        #[serde(rename = "M")]
        m: u32,
    },
    #[serde(rename = "UNIT_BALL_Ue")]
    UnitBall { e: u32, n: u32 },
}

impl SubgroupSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SubgroupSpec::Pn { n } | SubgroupSpec::Qnm { n, .. } if n == 0 => {
                Err(Error::Config("subgroup power must be at least 1".into()))
            }
            SubgroupSpec::Qnm { m, .. } if m == 0 => Err(Error::Config("Q(N,M) needs M >= 1".into())),
            SubgroupSpec::UnitBall { e, n } if e == 0 || n == 0 => {
                Err(Error::Config("U(e,n) needs e, n >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// The period of the valuation: members have valuation divisible by it.
    pub fn period(&self) -> u32 {
        match *self {
            SubgroupSpec::Pn { n } | SubgroupSpec::Qnm { n, .. } => n,
            _ => 1,
        }
    }
}

/// Residue classes of `K^* / G` for a subgroup `G` of finite index.
///
/// A nonzero `x = p^v u` lies in the coset numbered
/// `(v mod period) * classes + class(u mod p^digits)`. Index 0 is `G` itself.
#[derive(Debug)]
pub struct CosetTable {
    prime: u32,
    spec: SubgroupSpec,
    period: u32,
    digits: u32,
    modulus: u64,
    class_of: Vec<u32>,
    class_reps: Vec<u64>,
    /// For `P_N` tables: smallest `w` with `w^N = u (mod p^digits)`, or 0.
    roots: Vec<u64>,
}

impl CosetTable {
    fn build(prime: u32, spec: SubgroupSpec) -> Result<Self> {
        spec.validate()?;
        let (period, digits) = match spec {
            SubgroupSpec::Full => (1, 1),
            SubgroupSpec::Pn { n } => (n, decision_digits(prime, n)),
            SubgroupSpec::Qnm { n, m } => (n, m),
            SubgroupSpec::UnitBall { .. } => {
                return Err(Error::Config("U(e,n) is not a subgroup of finite index in K^*".into()))
            }
        };
        let modulus = (prime as u64)
            .checked_pow(digits)
            .filter(|m| *m <= MAX_TABLE)
            .ok_or_else(|| Error::Config(format!("residue table {prime}^{digits} is too large")))?;
        let p = prime as u64;
        let mut class_of = vec![u32::MAX; modulus as usize];
        let mut class_reps = Vec::new();
        let mut roots = Vec::new();
        match spec {
            SubgroupSpec::Full => {
                for u in 1..modulus {
                    if u % p != 0 {
                        class_of[u as usize] = 0;
                    }
                }
                class_reps.push(1);
            }
            SubgroupSpec::Qnm { .. } => {
                for u in 1..modulus {
                    if u % p != 0 {
                        class_of[u as usize] = class_reps.len() as u32;
                        class_reps.push(u);
                    }
                }
            }
            SubgroupSpec::Pn { n } => {
                roots = vec![0u64; modulus as usize];
                let mut powers = Vec::new();
                for w in 1..modulus {
                    if w % p == 0 {
                        continue;
                    }
                    let r = pow_mod(w, n as u64, modulus);
                    if roots[r as usize] == 0 {
                        roots[r as usize] = w;
                        powers.push(r);
                    }
                }
                for u in 1..modulus {
                    if u % p != 0 && class_of[u as usize] == u32::MAX {
                        let id = class_reps.len() as u32;
                        class_reps.push(u);
                        for &h in &powers {
                            class_of[mul_mod(u, h, modulus) as usize] = id;
                        }
                    }
                }
            }
            SubgroupSpec::UnitBall { .. } => unreachable!(),
        }
        Ok(Self { prime, spec, period, digits, modulus, class_of, class_reps, roots })
    }

    pub fn spec(&self) -> SubgroupSpec {
        self.spec
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    /// Unit digits needed to place an element in its coset.
    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn classes(&self) -> usize {
        self.class_reps.len()
    }

    /// The index `[K^* : G]`.
    pub fn count(&self) -> usize {
        self.period as usize * self.class_reps.len()
    }

    /// Coset of `p^v u` given `u mod p^digits`.
    pub fn index_of(&self, v: i64, unit_residue: u64) -> usize {
        let c = self.class_of[(unit_residue % self.modulus) as usize];
        debug_assert!(c != u32::MAX, "residue {unit_residue} is not a unit");
        v.rem_euclid(self.period as i64) as usize * self.class_reps.len() + c as usize
    }

    /// Coset of a nonzero number; `None` for zero.
    pub fn index(&self, x: &PadicNumber) -> Result<Option<usize>> {
        match x.valuation() {
            Valuation::Infinity => Ok(None),
            Valuation::Finite(v) => {
                let u = x.unit_residue_u64(self.digits)?;
                Ok(Some(self.index_of(v, u)))
            }
        }
    }

    /// Valuation offset `i` and unit `u` of the representative `p^i u`.
    pub fn rep_parts(&self, index: usize) -> (u32, u64) {
        let k = self.class_reps.len();
        ((index / k) as u32, self.class_reps[index % k])
    }

    /// Representative `p^i u` carried to `prec` digits.
    pub fn rep(&self, index: usize, prec: u32) -> PadicNumber {
        let (i, u) = self.rep_parts(index);
        PadicNumber::from_parts(self.prime, i as i64, BigUint::from(u), prec)
    }

    /// Exact representative as a rational.
    pub fn rep_rational(&self, index: usize) -> num_rational::BigRational {
        let (i, u) = self.rep_parts(index);
        let v = BigUint::from(self.prime).pow(i) * u;
        num_rational::BigRational::from_integer(v.into())
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.count() {
            Ok(())
        } else {
            Err(Error::InvalidCoset { index, power: self.period, count: self.count() })
        }
    }

    /// Product of two cosets.
    pub fn mul_index(&self, a: usize, b: usize) -> usize {
        let (ia, ua) = self.rep_parts(a);
        let (ib, ub) = self.rep_parts(b);
        self.index_of(ia as i64 + ib as i64, mul_mod(ua, ub, self.modulus))
    }

    /// Inverse coset.
    pub fn inv_index(&self, a: usize) -> usize {
        let (ia, ua) = self.rep_parts(a);
        let inv = super::number::mod_inverse(&BigUint::from(ua), &BigUint::from(self.modulus))
            .and_then(|x| x.to_u64())
            .expect("coset representative is a unit");
        self.index_of(-(ia as i64), inv)
    }

    /// Smallest `w` with `w^N = u (mod p^digits)` for a `P_N` table.
    fn residue_root(&self, u: u64) -> Option<u64> {
        match self.roots.get((u % self.modulus) as usize) {
            Some(&w) if w != 0 => Some(w),
            _ => None,
        }
    }
}

fn table_cache() -> &'static Mutex<HashMap<(u32, SubgroupSpec), Arc<CosetTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, SubgroupSpec), Arc<CosetTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared residue table for `K^* / G`.
pub fn coset_table(prime: u32, spec: SubgroupSpec) -> Result<Arc<CosetTable>> {
    let key = (prime, spec);
    if let Some(t) = table_cache().lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let t = Arc::new(CosetTable::build(prime, spec)?);
    table_cache().lock().unwrap().insert(key, t.clone());
    Ok(t)
}

pub fn pn_table(prime: u32, n: u32) -> Result<Arc<CosetTable>> {
    coset_table(prime, SubgroupSpec::Pn { n })
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

fn require_precision(x: &PadicNumber, needed: u32) -> Result<()> {
    match x.precision() {
        Some(k) if k < needed => Err(Error::InsufficientPrecision { needed, available: k }),
        _ => Ok(()),
    }
}

/// Whether `x` is an `N`-th power in Q_p (zero included).
pub fn in_pn(x: &PadicNumber, n: u32) -> Result<bool> {
    if n == 0 {
        return Err(Error::Config("P_0 is undefined".into()));
    }
    if x.is_zero() {
        return Ok(true);
    }
    require_precision(x, decision_digits(x.prime(), n))?;
    Ok(pn_table(x.prime(), n)?.index(x)? == Some(0))
}

/// Whether `x` lies in `Q_{N,M} = {0} ∪ p^{kN}(1 + p^M Z_p)`.
pub fn in_qnm(x: &PadicNumber, n: u32, m: u32) -> Result<bool> {
    if n == 0 || m == 0 {
        return Err(Error::Config("Q(N,M) needs N, M >= 1".into()));
    }
    let v = match x.valuation() {
        Valuation::Infinity => return Ok(true),
        Valuation::Finite(v) => v,
    };
    require_precision(x, m)?;
    Ok(v.rem_euclid(n as i64) == 0 && x.unit_residue(m)?.is_one())
}

/// The unique `y` in `Q_{1, v_p(N)+1}` with `y^N = x`, for `x` in
/// `Q_{N, 2 v_p(N)+1}`.
pub fn nth_root(x: &PadicNumber, n: u32) -> Result<PadicNumber> {
    let p = x.prime();
    if n == 0 {
        return Err(Error::Config("0-th roots are undefined".into()));
    }
    let v = match x.valuation() {
        Valuation::Infinity => return Ok(x.clone()),
        Valuation::Finite(v) => v,
    };
    let a = vp(n as u64, p);
    let k = x.precision().unwrap();
    if k < 2 * a + 1 {
        return Err(Error::InsufficientPrecision { needed: 2 * a + 1, available: k });
    }
    if !in_qnm(x, n, 2 * a + 1)? {
        return Err(Error::Domain(format!("{x} is not in Q({n},{})", 2 * a + 1)));
    }
    let out_prec = k - a;
    let u = x.unit().unwrap().clone();
    let y = hensel_root(&u, n, p, k)?;
    Ok(PadicNumber::from_parts(p, v / n as i64, y, out_prec))
}

/// Newton iteration for `y^n = u` starting at 1, with `u = 1 mod p^{2a+1}`
/// and `a = v_p(n)`. Returns `y mod p^{k-a}`.
fn hensel_root(u: &BigUint, n: u32, p: u32, k: u32) -> Result<BigUint> {
    let a = vp(n as u64, p);
    let full = prime_pow(p, k);
    let out = prime_pow(p, k - a);
    let pa = prime_pow(p, a);
    let n_unit = BigUint::from(n) / &pa;
    let n_inv = super::number::mod_inverse(&n_unit, &out).expect("unit part of n is invertible");
    let mut y = BigUint::one();
    for _ in 0..(2 * k + 8) {
        let yn = y.modpow(&BigUint::from(n), &full);
        // f(y) = y^n - u, computed mod p^k
        let f = (&yn + &full - (u % &full)) % &full;
        if f.is_zero() {
            return Ok(y % &out);
        }
        let (q, r) = f.div_rem(&pa);
        if !r.is_zero() {
            return Err(Error::Internal("Newton step left the convergence region".into()));
        }
        let y_pow = y.modpow(&BigUint::from(n - 1), &out);
        let y_inv = super::number::mod_inverse(&y_pow, &out)
            .ok_or_else(|| Error::Internal("Newton iterate is not a unit".into()))?;
        let corr = (q * &n_inv % &out) * y_inv % &out;
        if corr.is_zero() {
            return Ok(y % &out);
        }
        y = (&y % &out + &out - corr) % &out;
    }
    Err(Error::Internal("Newton iteration did not converge".into()))
}

/// Some `N`-th root of `x ∈ P_N`: the smallest residue root times the
/// Hensel root of the remaining principal unit.
pub fn root_of(x: &PadicNumber, n: u32) -> Result<PadicNumber> {
    let p = x.prime();
    let v = match x.valuation() {
        Valuation::Infinity => return Ok(x.clone()),
        Valuation::Finite(v) => v,
    };
    if n == 1 {
        return Ok(x.clone());
    }
    let table = pn_table(p, n)?;
    let d = table.digits();
    require_precision(x, d)?;
    if v.rem_euclid(n as i64) != 0 {
        return Err(Error::RootExtraction(format!("{x} has valuation prime to {n}")));
    }
    let u = x.unit_residue_u64(d)?;
    let w0 = table
        .residue_root(u)
        .ok_or_else(|| Error::RootExtraction(format!("{x} is not an {n}-th power")))?;
    let k = x.precision().unwrap();
    let w0 = PadicNumber::from_parts(p, 0, BigUint::from(w0), k);
    let unit = x.unit_part().unwrap();
    let rest = unit.checked_div(&w0.pow(n as i64)?)?;
    let y = nth_root(&rest, n)?;
    Ok((&w0 * &y).shift(v / n as i64))
}

/// Representatives of `K^* / P_N^*`, starting with 1.
pub fn coset_reps(cfg: &PadicConfig, n: u32) -> Result<Vec<PadicNumber>> {
    let t = pn_table(cfg.prime(), n)?;
    Ok((0..t.count()).map(|i| t.rep(i, cfg.work_precision())).collect())
}

/// Order of the group `U_e` of `e`-th roots of unity in Q_p.
pub fn roots_of_unity_order(prime: u32, e: u32) -> u32 {
    if prime == 2 {
        if e % 2 == 0 {
            2
        } else {
            1
        }
    } else {
        (e as u64).gcd(&(prime as u64 - 1)) as u32
    }
}

/// The `e`-th roots of unity of Q_p to `digits` digits.
pub fn roots_of_unity(prime: u32, e: u32, digits: u32) -> Vec<PadicNumber> {
    let g = roots_of_unity_order(prime, e);
    if prime == 2 {
        let mut out = vec![PadicNumber::from_parts(2, 0, BigUint::one(), digits)];
        if g == 2 {
            out.push(-PadicNumber::from_parts(2, 0, BigUint::one(), digits));
        }
        return out;
    }
    let m = prime_pow(prime, digits);
    let teich = prime_pow(prime, digits - 1);
    let mut out = Vec::new();
    for r in 1..prime {
        if BigUint::from(r).modpow(&BigUint::from(g), &BigUint::from(prime)).is_one() {
            // r^(p^(k-1)) is the Teichmüller lift of r modulo p^k
            let w = BigUint::from(r).modpow(&teich, &m);
            out.push(PadicNumber::from_parts(prime, 0, w, digits));
        }
    }
    out
}

/// Whether `x` lies in `(1 + p^n Z_p) U_e`.
pub fn in_uen(x: &PadicNumber, e: u32, n: u32) -> Result<bool> {
    if e == 0 || n == 0 {
        return Err(Error::Config("U(e,n) needs e, n >= 1".into()));
    }
    if x.valuation() != Valuation::Finite(0) {
        return Ok(false);
    }
    require_precision(x, n)?;
    let p = x.prime();
    let u = x.unit_residue(n)?;
    let m = prime_pow(p, n);
    if p == 2 {
        let minus_one = &m - 1u32;
        return Ok(u.is_one() || (roots_of_unity_order(2, e) == 2 && u == minus_one % &m));
    }
    let g = roots_of_unity_order(p, e);
    let pb = BigUint::from(p);
    if !(&u % &pb).modpow(&BigUint::from(g), &pb).is_one() {
        return Ok(false);
    }
    Ok(u.modpow(&prime_pow(p, n - 1), &m) == u)
}
