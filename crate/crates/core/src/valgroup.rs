//! The value group: Presburger cells in `Z^d`, their translation into
//! conditions on field elements, and valuation images of cells.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cells::{CellIndex, PresentedCell};
use crate::error::{Error, Result};
use crate::lang::Term;
use crate::poly::UniPoly;
use crate::oracle::{Membership, SamplePoint, TruncatedSample};
use crate::padic::{PadicConfig, Valuation};
use crate::scalar::Scalar;

/// `zeta[slot] + sum_j coeffs[j] (X_j - c_j) / n_j` over the earlier
/// coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Affine {
    pub slot: usize,
    pub coeffs: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub lower: Option<Affine>,
    pub upper: Option<Affine>,
    /// `X_i = c mod n`.
    pub cong: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresburgerCell {
    pub d: usize,
    pub rows: Vec<Row>,
}

impl PresburgerCell {
    pub fn new(rows: Vec<Row>) -> Result<Self> {
        let d = rows.len();
        for (i, r) in rows.iter().enumerate() {
            let (c, n) = r.cong;
            if n < 1 || !(0..n).contains(&c) {
                return Err(Error::Config(format!("row {i}: need n >= 1 and 0 <= c < n, got ({c}, {n})")));
            }
            for b in r.lower.iter().chain(&r.upper) {
                if b.coeffs.len() > i {
                    return Err(Error::Config(format!("row {i} refers to later coordinates")));
                }
                if b.slot >= 2 * d {
                    return Err(Error::Config(format!("row {i}: parameter slot {} out of range", b.slot)));
                }
            }
        }
        Ok(Self { d, rows })
    }

    fn bound(&self, b: &Affine, zeta: &[i64], x: &[i64]) -> i64 {
        let mut s = zeta[b.slot];
        for (j, a) in b.coeffs.iter().enumerate() {
            let (c, n) = self.rows[j].cong;
            s += a * (x[j] - c) / n;
        }
        s
    }
}

/// Membership of `x` for parameters `zeta`.
pub fn pres_member(cell: &PresburgerCell, zeta: &[i64], x: &[i64]) -> Result<bool> {
    if x.len() != cell.d || zeta.len() != 2 * cell.d {
        return Err(Error::Arity(format!("cell of dimension {} needs {} coordinates and {} parameters", cell.d, cell.d, 2 * cell.d)));
    }
    // congruences first, so every divided term below is exact
    if cell.rows.iter().zip(x).any(|(r, xi)| (xi - r.cong.0).rem_euclid(r.cong.1) != 0) {
        return Ok(false);
    }
    for (i, r) in cell.rows.iter().enumerate() {
        if r.lower.as_ref().is_some_and(|b| x[i] < cell.bound(b, zeta, x)) {
            return Ok(false);
        }
        if r.upper.as_ref().is_some_and(|b| x[i] > cell.bound(b, zeta, x)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `pi^pi_exp prod t_i^t[i] prod z_k^z[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub pi: i64,
    pub t: Vec<i64>,
    pub z: Vec<i64>,
}

impl Monomial {
    fn unit(d: usize) -> Self {
        Self { pi: 0, t: vec![0; d], z: vec![0; 2 * d] }
    }

    /// Value at field elements.
    pub fn eval(&self, t: &[Scalar], z: &[Scalar], cfg: PadicConfig) -> Result<Scalar> {
        let mut acc = Scalar::prime_power(cfg.prime(), self.pi);
        for (x, e) in t.iter().zip(&self.t).chain(z.iter().zip(&self.z)) {
            if *e != 0 {
                acc = acc.mul(&x.powi(*e)?, cfg);
            }
        }
        Ok(acc)
    }
}

/// A condition on `(t, z)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RingCondition {
    /// `|g| <= |f|`.
    #[serde(rename = "NORM_LE")]
    NormLe { g: Monomial, f: Monomial },
    /// `v(f) = c mod n`.
    #[serde(rename = "CONG")]
    Cong { f: Monomial, c: i64, n: i64 },
}

impl RingCondition {
    pub fn holds(&self, t: &[Scalar], z: &[Scalar], cfg: PadicConfig) -> Result<bool> {
        let v = |m: &Monomial| -> Result<i64> {
            match m.eval(t, z, cfg)?.valuation(cfg.prime()) {
                Valuation::Finite(v) => Ok(v),
                Valuation::Infinity => Err(Error::Domain("ring conditions are evaluated at nonzero points".into())),
            }
        };
        Ok(match self {
            RingCondition::NormLe { g, f } => v(g)? >= v(f)?,
            RingCondition::Cong { f, c, n } => (v(f)? - c).rem_euclid(*n) == 0,
        })
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / num_integer::gcd(a, b) * b
}

/// `L X_i` against the cleared bound, as `(L, monomial)`.
fn cleared(cell: &PresburgerCell, b: &Affine) -> (i64, Monomial) {
    let l = b.coeffs.iter().enumerate().filter(|(_, a)| **a != 0).fold(1, |l, (j, _)| lcm(l, cell.rows[j].cong.1));
    let mut m = Monomial::unit(cell.d);
    m.z[b.slot] = l;
    for (j, a) in b.coeffs.iter().enumerate() {
        let (c, n) = cell.rows[j].cong;
        let k = l * a / n;
        m.t[j] += k;
        m.pi -= k * c;
    }
    (l, m)
}

/// Conditions on `(t, z)` equivalent to membership of `(v(t), v(z))`.
pub fn translate(cell: &PresburgerCell) -> Vec<RingCondition> {
    let mut out = Vec::new();
    for (i, r) in cell.rows.iter().enumerate() {
        let (c, n) = r.cong;
        if n > 1 {
            let mut f = Monomial::unit(cell.d);
            f.t[i] = 1;
            f.pi = -c;
            out.push(RingCondition::Cong { f, c: 0, n });
        }
        for (b, is_lower) in r.lower.iter().map(|b| (b, true)).chain(r.upper.iter().map(|b| (b, false))) {
            let (l, m) = cleared(cell, b);
            let mut ti = Monomial::unit(cell.d);
            ti.t[i] = l;
            out.push(if is_lower { RingCondition::NormLe { g: ti, f: m } } else { RingCondition::NormLe { g: m, f: ti } });
        }
    }
    out
}

/// A one-dimensional cell with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationImage {
    pub cell: PresburgerCell,
    pub zeta: Vec<i64>,
}

impl ValuationImage {
    pub fn contains(&self, w: i64) -> bool {
        pres_member(&self.cell, &self.zeta, &[w]).expect("dimension one")
    }
}

/// The set of `v(t - c)` over a type-1 cell over a point: bounds
/// `v(mu) <= w <= v(nu)` and `w = v(lambda) mod N`.
pub fn image_valuation(a: &PresentedCell, prime: u32) -> Result<ValuationImage> {
    if a.is_type_zero() {
        return Err(Error::TypeZeroCell);
    }
    let lo = a.mu.const_valuation(prime)?;
    let hi = a.nu.const_valuation(prime)?;
    let n = a.group.period() as i64;
    let vl = a.lambda.valuation(prime).finite().ok_or(Error::TypeZeroCell)?;
    let row = Row {
        lower: lo.map(|_| Affine { slot: 0, coeffs: Vec::new() }),
        upper: hi.map(|_| Affine { slot: 1, coeffs: Vec::new() }),
        cong: (vl.rem_euclid(n), n),
    };
    Ok(ValuationImage { cell: PresburgerCell::new(vec![row])?, zeta: vec![lo.unwrap_or(0), hi.unwrap_or(0)] })
}

/// The least member.
pub fn zmin(img: &ValuationImage) -> Result<i64> {
    let r = &img.cell.rows[0];
    let (c, n) = r.cong;
    let lo = img.zeta[r.lower.as_ref().ok_or(Error::Unbounded)?.slot];
    let x = lo + (c - lo).rem_euclid(n);
    if r.upper.as_ref().is_some_and(|u| x > img.zeta[u.slot]) {
        return Err(Error::Empty);
    }
    Ok(x)
}

/// The greatest member.
pub fn zmax(img: &ValuationImage) -> Result<i64> {
    let r = &img.cell.rows[0];
    let (c, n) = r.cong;
    let hi = img.zeta[r.upper.as_ref().ok_or(Error::Unbounded)?.slot];
    let x = hi - (hi - c).rem_euclid(n);
    if r.lower.as_ref().is_some_and(|l| x < img.zeta[l.slot]) {
        return Err(Error::Empty);
    }
    Ok(x)
}

/// The valuation of the norm immediately above `|pi^w|`.
pub fn succ_norm(w: i64) -> i64 {
    w - 1
}

/// Whether `v(g)` is constant on `t + p^depth Z_p`: every Taylor term of
/// `g` at `t` is smaller than `g(t)`.
fn class_stable(g: &UniPoly, t: &BigRational, depth: i64, p: u32) -> bool {
    let v = |q: &BigRational| Scalar::Exact(q.clone()).valuation(p);
    let c = g.coeffs();
    let Valuation::Finite(v0) = v(&g.eval(t)) else { return false };
    for i in 1..c.len() {
        let mut b = BigRational::zero();
        let mut binom = BigInt::one();
        for (k, a) in c.iter().enumerate().skip(i) {
            if k > i {
                binom = binom * k / (k - i);
            }
            b += a * BigRational::from_integer(binom.clone()) * num_traits::pow(t.clone(), k - i);
        }
        if let Valuation::Finite(vb) = v(&b) {
            if vb + i as i64 * depth <= v0 {
                return false;
            }
        }
    }
    true
}

/// A minimum of `|f|` over a domain: the largest `v(f)` and a point
/// attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvpMin {
    pub valuation: i64,
    pub point: SamplePoint,
    pub scanned: u64,
}

/// Scans the sample points of a closed bounded domain, given as a union
/// of cells over a point, for the least `|f|`. Every point's class must be
/// fine enough that `v(f)` is constant on it. The sample point 0 stands
/// for `p^(B+1) Z_p`.
pub fn evp_min(f: &Term, domain: &[PresentedCell], sample: &TruncatedSample) -> Result<EvpMin> {
    let cfg = sample.config();
    let p = cfg.prime();
    let b = sample.window() as i64;
    for c in domain.iter().filter(|c| !c.is_type_zero()) {
        let lo = c.mu.const_valuation(p)?.ok_or_else(|| Error::UnboundedDomain("mu is infinite".into()))?;
        let vc = c.center_const().and_then(|x| x.valuation(p).finite()).unwrap_or(i64::MAX);
        if lo.min(vc) < -b {
            return Err(Error::Config(format!("the domain reaches valuation {} outside the window {b}", lo.min(vc))));
        }
    }
    let index = CellIndex::new(domain, cfg)?;
    let (num, den) = f.to_uni_fraction(1).ok_or_else(|| Error::Arity("the function must be univariate".into()))?;
    let k = sample.digits() as i64;
    let stable = |q: &BigRational, depth: i64| class_stable(&num, q, depth, p) && class_stable(&den, q, depth, p);
    let mut best: Option<EvpMin> = None;
    let mut scanned = 0;
    for pt in sample.points() {
        let deep = pt.is_zero() && index.member(&SamplePoint::new(b + 1, 1))?;
        if !index.member(&pt)? && !deep {
            continue;
        }
        scanned += 1;
        let q = pt.to_rational(p);
        let v = match Scalar::Exact(f.eval_rational(std::slice::from_ref(&q))).valuation(p) {
            Valuation::Finite(v) => v,
            Valuation::Infinity => return Err(Error::VanishingFunction(pt.display(p))),
        };
        let depth = match pt.v {
            Some(vt) => vt + k,
            None => b + 1,
        };
        if !stable(&q, depth) {
            return Err(Error::InsufficientPrecision { needed: k as u32 + 1, available: k as u32 });
        }
        if best.as_ref().is_none_or(|m| v > m.valuation) {
            best = Some(EvpMin { valuation: v, point: pt, scanned: 0 });
        }
    }
    let mut best = best.ok_or(Error::EmptyCell)?;
    best.scanned = scanned;
    Ok(best)
}
