//! Roots in Q_p of polynomials with rational coefficients.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::padic::{prime_pow, PadicConfig, PadicNumber, Valuation};
use crate::poly::UniPoly;
use crate::scalar::Scalar;

/// Largest prime for which residue roots are found by enumeration.
const MAX_ROOT_PRIME: u32 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    pub value: Scalar,
    pub multiplicity: u32,
}

/// `f = lead * prod (t - c)^m` over Q_p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splitting {
    pub lead: BigRational,
    pub roots: Vec<Root>,
}

impl Splitting {
    pub fn degree(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

/// Splits `f` into linear factors over Q_p, or reports the factor that
/// does not split.
pub fn split(f: &UniPoly, cfg: PadicConfig) -> Result<Splitting> {
    if f.is_zero() {
        return Err(Error::Domain("the zero polynomial has no splitting".into()));
    }
    let mut roots = Vec::new();
    for (i, g) in f.squarefree().iter().enumerate() {
        let rs = distinct_roots(g, cfg)?;
        if rs.len() < g.degree() {
            return Err(Error::UnsupportedSplitting(format!(
                "a factor of degree {} has only {} roots in Q_{}",
                g.degree(),
                rs.len(),
                cfg.prime()
            )));
        }
        roots.extend(rs.into_iter().map(|value| Root { value, multiplicity: i as u32 + 1 }));
    }
    roots.sort_by(|a, b| cmp_scalar(&a.value, &b.value));
    Ok(Splitting { lead: f.lead(), roots })
}

/// Exact values first, in numeric order; approximations by digit string.
pub fn cmp_scalar(a: &Scalar, b: &Scalar) -> std::cmp::Ordering {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => x.cmp(y),
        (Scalar::Exact(_), Scalar::Approx(_)) => std::cmp::Ordering::Less,
        (Scalar::Approx(_), Scalar::Exact(_)) => std::cmp::Ordering::Greater,
        (Scalar::Approx(x), Scalar::Approx(y)) => x.to_string().cmp(&y.to_string()),
    }
}

/// Distinct roots of a square-free polynomial; exact when rational.
pub fn distinct_roots(g: &UniPoly, cfg: PadicConfig) -> Result<Vec<Scalar>> {
    let p = cfg.prime();
    if p > MAX_ROOT_PRIME {
        return Err(Error::Config(format!("root isolation is limited to primes below {MAX_ROOT_PRIME}")));
    }
    let mut f = g.primitive();
    let mut out = Vec::new();
    if f.is_empty() || f.len() == 1 {
        return Ok(out);
    }
    if f[0].is_zero() {
        out.push(Scalar::zero());
        f.remove(0);
    }
    if f.len() == 1 {
        return Ok(out);
    }
    let a0 = f[0].clone();
    let ad = f.last().unwrap().clone();
    let v0 = crate::padic::int_valuation(&a0, p);
    let vd = crate::padic::int_valuation(&ad, p);
    let log_p = (p as f64).log2();
    let rec_bits = a0.bits() + ad.bits() + 2;
    let rel = cfg.work_precision().max((rec_bits as f64 / log_p).ceil() as u32 + 1);

    let mut found: Vec<PadicNumber> = Vec::new();
    for r in zp_roots(&f, rel + v0, p) {
        found.push(PadicNumber::from_parts(p, 0, r, rel + v0));
    }
    let rev: Vec<BigInt> = f.iter().rev().cloned().collect();
    for r in zp_roots(&rev, rel + vd, p) {
        let u = PadicNumber::from_parts(p, 0, r, rel + vd);
        if matches!(u.valuation(), Valuation::Finite(v) if v >= 1) {
            found.push(u.inv()?);
        }
    }
    for x in found {
        out.push(recognize(&x, g, cfg));
    }
    Ok(out)
}

/// Returns the exact rational equal to `x` when one of small height is a
/// root of `g`.
fn recognize(x: &PadicNumber, g: &UniPoly, cfg: PadicConfig) -> Scalar {
    let (v, k) = match (x.valuation(), x.precision()) {
        (Valuation::Finite(v), Some(k)) => (v, k),
        _ => return Scalar::zero(),
    };
    let m = BigInt::from_biguint(Sign::Plus, prime_pow(cfg.prime(), k));
    let u = BigInt::from_biguint(Sign::Plus, x.unit().unwrap().clone());
    if let Some((a, b)) = rational_reconstruction(&u, &m) {
        let pv = num_traits::pow(BigInt::from(cfg.prime()), v.unsigned_abs() as usize);
        let q = if v >= 0 { BigRational::new(a * pv, b) } else { BigRational::new(a, b * pv) };
        if g.eval(&q).is_zero() {
            return Scalar::Exact(q);
        }
    }
    Scalar::Approx(x.truncate(cfg.work_precision()))
}

/// `a/b = u (mod m)` with `|a|, b < sqrt(m/2)`.
fn rational_reconstruction(u: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound || !r1.gcd(&s1).is_one() {
        return None;
    }
    if s1.is_negative() {
        Some((-r1, -s1))
    } else {
        Some((r1, s1))
    }
}

fn eval_int(f: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in f.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn derivative_int(f: &[BigInt]) -> Vec<BigInt> {
    f.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Roots in Z_p of a square-free integer polynomial, each known modulo at
/// least `p^prec`, returned modulo `p^prec`.
fn zp_roots(f: &[BigInt], prec: u32, p: u32) -> Vec<BigUint> {
    let mut out = Vec::new();
    search(f, prec.max(1), p, &mut out);
    let m = prime_pow(p, prec.max(1));
    out.into_iter().map(|r| r % &m).collect()
}

fn search(f: &[BigInt], prec: u32, p: u32, out: &mut Vec<BigUint>) {
    let pb = BigInt::from(p);
    // strip the common power of p
    let vmin = f
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| crate::padic::int_valuation(c, p))
        .min()
        .unwrap_or(0);
    let scale = num_traits::pow(pb.clone(), vmin as usize);
    let f: Vec<BigInt> = f.iter().map(|c| c / &scale).collect();
    let df = derivative_int(&f);
    for r in 0..p {
        let r = BigInt::from(r);
        if !eval_int(&f, &r).mod_floor(&pb).is_zero() {
            continue;
        }
        if !eval_int(&df, &r).mod_floor(&pb).is_zero() {
            out.push(hensel(&f, &df, r, prec, p));
            continue;
        }
        // multiple residue root: recurse on f(r + p s)
        let shifted = taylor_shift(&f, &r);
        let mut pk = BigInt::one();
        let g: Vec<BigInt> = shifted
            .into_iter()
            .map(|c| {
                let c = c * &pk;
                pk *= &pb;
                c
            })
            .collect();
        let mut sub = Vec::new();
        search(&g, prec.saturating_sub(1).max(1), p, &mut sub);
        let rb = r.to_biguint().unwrap();
        for s in sub {
            out.push(&rb + s * p);
        }
    }
}

/// Coefficients of `f(x + r)`.
fn taylor_shift(f: &[BigInt], r: &BigInt) -> Vec<BigInt> {
    let mut c = f.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = &c[j + 1] * r;
            c[j] += t;
        }
    }
    c
}

fn hensel(f: &[BigInt], df: &[BigInt], r: BigInt, prec: u32, p: u32) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, prime_pow(p, prec));
    let mut x = r;
    for _ in 0..(2 * prec + 4) {
        let fx = eval_int(f, &x).mod_floor(&m);
        if fx.is_zero() {
            break;
        }
        let d = eval_int(df, &x).mod_floor(&m);
        let dinv = crate::padic::mod_inverse(&d.to_biguint().unwrap(), m.magnitude()).expect("simple root");
        x = (x - fx * BigInt::from_biguint(Sign::Plus, dinv)).mod_floor(&m);
    }
    x.to_biguint().unwrap()
}

/// Whether `f` has a root in Q_p counted with multiplicity equal to its
/// degree; cheap test used by generators.
pub fn splits(f: &UniPoly, cfg: PadicConfig) -> bool {
    split(f, cfg).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: u32) -> PadicConfig {
        PadicConfig::new(p, 12).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_roots_are_exact() {
        let f = UniPoly::from_ints(&[-1, 0, 1]);
        let s = split(&f, cfg(5)).unwrap();
        let vals: Vec<_> = s.roots.iter().map(|r| r.value.clone()).collect();
        assert_eq!(vals, vec![Scalar::Exact(q(-1, 1)), Scalar::Exact(q(1, 1))]);
        // 50 t^2 - 7 t - 3/5 has roots 3/10 and -1/25... check via product
        let g = UniPoly::linear(&q(3, 10)).mul(&UniPoly::linear(&q(-1, 25))).scale(&q(50, 1));
        let s = split(&g, cfg(5)).unwrap();
        assert_eq!(s.roots.len(), 2);
        assert!(s.roots.iter().all(|r| matches!(r.value, Scalar::Exact(_))));
    }

    #[test]
    fn irrational_roots_and_failures() {
        let f = UniPoly::from_ints(&[-6, 0, 1]);
        let s = split(&f, cfg(5)).unwrap();
        assert_eq!(s.roots.len(), 2);
        let c = cfg(5);
        for r in &s.roots {
            let x = r.value.to_padic(c);
            assert!(f.eval_padic(&x, c).is_zero());
        }
        let g = UniPoly::from_ints(&[-2, 0, 1]);
        assert!(matches!(split(&g, cfg(5)), Err(Error::UnsupportedSplitting(_))));
    }

    #[test]
    fn repeated_and_close_roots() {
        // (t - 1)^2 (t - 26) (t - 1/125)
        let f = UniPoly::linear(&q(1, 1))
            .mul(&UniPoly::linear(&q(1, 1)))
            .mul(&UniPoly::linear(&q(26, 1)))
            .mul(&UniPoly::linear(&q(1, 125)));
        let s = split(&f, cfg(5)).unwrap();
        assert_eq!(s.degree(), 4);
        assert!(s.roots.iter().any(|r| r.value == Scalar::Exact(q(1, 1)) && r.multiplicity == 2));
        assert!(s.roots.iter().any(|r| r.value == Scalar::Exact(q(1, 125))));
        assert!(s.roots.iter().any(|r| r.value == Scalar::Exact(q(26, 1))));
    }

    #[test]
    fn dyadic_squares() {
        let f = UniPoly::from_ints(&[-17, 0, 1]);
        let s = split(&f, cfg(2)).unwrap();
        assert_eq!(s.roots.len(), 2);
        assert!(split(&UniPoly::from_ints(&[-3, 0, 1]), cfg(2)).is_err());
    }
}
