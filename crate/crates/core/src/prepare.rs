//! Preparation: on each cell a function is a unit times a monomial in the
//! distance to the center.
//!
//! A piece asserts `theta(t) = U h [lambda^-1 (t - c)]^(alpha/e)` with
//! `U in (1 + p^n Z_p) U_e`. For type-0 pieces the bracket is 1.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cells::decompose::Centers;
use crate::cells::tree::{Region, Tree};
use crate::cells::{Bound, CellFn, CellIndex, PresentedCell};
use crate::error::{Error, Result};
use crate::lang::eval::{CompiledTerm, EvalPoint};
use crate::lang::{parse_term, Term, TermValue};
use crate::oracle::{Membership, TruncatedSample};
use crate::padic::fast::{FastRing, Fx};
use crate::padic::{in_pn, in_uen, nth_root, root_of, vp, PadicConfig, SubgroupSpec, Valuation};
use crate::scalar::Scalar;

/// A univariate term `F` standing for a function `theta` with
/// `theta^e = F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rooted {
    pub term: Term,
    pub e: u32,
}

impl Rooted {
    pub fn new(term: Term, e: u32) -> Result<Self> {
        if e == 0 {
            return Err(Error::Config("the root index must be positive".into()));
        }
        Ok(Self { term, e })
    }

    pub fn plain(term: Term) -> Self {
        Self { term, e: 1 }
    }

    /// `F` at a point; poles give 0.
    pub fn power_at(&self, t: &Scalar, cfg: PadicConfig) -> Result<Scalar> {
        match t {
            Scalar::Exact(q) => Ok(Scalar::Exact(self.term.eval_rational(std::slice::from_ref(q)))),
            Scalar::Approx(x) => Ok(Scalar::Approx(self.term.eval_padic(std::slice::from_ref(x), cfg)?)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedPiece {
    pub cell: PresentedCell,
    pub h: CellFn,
    pub alpha: i32,
    pub e: u32,
    pub n: u32,
}

impl PreparedPiece {
    pub fn h_const(&self) -> Result<&Scalar> {
        self.h.as_const().ok_or_else(|| Error::Arity("h depends on the base".into()))
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.cell.to_json();
        v["h"] = json!(self.h.text());
        v["alpha"] = json!(self.alpha);
        v["e"] = json!(self.e);
        v["n"] = json!(self.n);
        v
    }

    pub fn from_json(v: &Value, cfg: PadicConfig) -> Result<Self> {
        let bad = |m: &str| Error::Syntax { pos: 0, msg: m.into() };
        let cell = PresentedCell::from_json(v, cfg)?;
        let h = match v.get("h") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => return Err(bad("piece needs an `h` field")),
        };
        let h = if cell.arity() == 1 {
            CellFn::Const(Scalar::parse(&h, cfg)?)
        } else {
            let t = parse_term(&h, &crate::cells::base_vars())?;
            match t.as_constant() {
                Some(q) => CellFn::Const(Scalar::Exact(q)),
                None => CellFn::Term(t),
            }
        };
        let int = |k: &str| v.get(k).and_then(Value::as_i64).ok_or_else(|| bad(&format!("piece needs an integer `{k}`")));
        let alpha = i32::try_from(int("alpha")?).map_err(|_| bad("alpha out of range"))?;
        let e = u32::try_from(int("e")?).ok().filter(|e| *e > 0).ok_or_else(|| bad("e must be positive"))?;
        let n = u32::try_from(int("n")?).ok().filter(|n| *n > 0).ok_or_else(|| bad("n must be positive"))?;
        Ok(Self { cell, h, alpha, e, n })
    }
}

/// A rational `e`-th root of `q`, if there is one.
fn rational_root(q: &BigRational, e: u32) -> Option<BigRational> {
    let root = |z: &BigInt| -> Option<BigInt> {
        if z.is_negative() && e % 2 == 0 {
            return None;
        }
        let r = z.nth_root(e);
        (num_traits::pow(r.clone(), e as usize) == *z).then_some(r)
    };
    Some(BigRational::new(root(q.numer())?, root(q.denom())?))
}

/// Some `e`-th root of `g`, or `None` when `g` is not an `e`-th power.
fn eth_root(g: &Scalar, e: u32, cfg: PadicConfig) -> Result<Option<Scalar>> {
    if e == 1 || g.is_zero() {
        return Ok(Some(g.clone()));
    }
    if let Some(r) = g.as_rational().and_then(|q| rational_root(q, e)) {
        return Ok(Some(Scalar::Exact(r)));
    }
    let x = g.to_padic(cfg);
    if !in_pn(&x, e)? {
        return Ok(None);
    }
    Ok(Some(Scalar::Approx(root_of(&x, e)?)))
}

fn bounds(prime: u32, lo: Option<i64>, hi: Option<i64>) -> (Bound, Bound) {
    let nu = hi.map_or(Bound::Zero, |h| Bound::power(prime, h));
    let mu = lo.map_or(Bound::Infinity, |l| Bound::power(prime, l));
    (nu, mu)
}

/// Smallest value `>= x` (or largest `<= x`) congruent to `r` mod `m`.
fn round_up(x: i64, r: i64, m: i64) -> i64 {
    x + (r - x).rem_euclid(m)
}

fn round_down(x: i64, r: i64, m: i64) -> i64 {
    x - (x - r).rem_euclid(m)
}

fn prepare(theta: &Rooted, n: u32, cfg: PadicConfig) -> Result<Vec<PreparedPiece>> {
    if n == 0 {
        return Err(Error::Config("the unit level must be positive".into()));
    }
    let p = cfg.prime();
    let e = theta.e;
    let a = vp(e as u64, p);
    let m = 2 * a + 1;
    let level = n + 3 * a;
    let centers = Centers::of_terms([&theta.term], 1, cfg)?;
    let regions = Tree::new(&centers.values, level, cfg)?.regions()?;
    let mut out = Vec::new();
    let piece = |cell, h: Scalar, alpha| PreparedPiece { cell, h: CellFn::Const(h), alpha, e, n };
    for r in regions {
        match r {
            Region::Point(j) => {
                let c = centers.values[j].clone();
                if let Some(h) = eth_root(&centers.at_center(0, j, cfg)?, e, cfg)? {
                    out.push(piece(PresentedCell::point(c), h, 0));
                }
            }
            Region::Ball { center, radius } => {
                let b = Scalar::Exact(center);
                let Some(h) = eth_root(&theta.power_at(&b, cfg)?, e, cfg)? else { continue };
                out.push(piece(PresentedCell::point(b.clone()), h.clone(), 0));
                let mu = radius.map_or(Bound::Infinity, |r| Bound::power(p, r));
                out.push(piece(PresentedCell::over_point(b, Bound::Zero, mu, Scalar::int(1), SubgroupSpec::Full), h, 0));
            }
            Region::Annulus { center, inside, lo, hi } => {
                let c = centers.values[center].clone();
                let (big_h, alpha) = centers.outer_constant(0, &c, &inside, cfg)?;
                if e == 1 || alpha == 0 {
                    if let Some(h) = eth_root(&big_h, e, cfg)? {
                        let (nu, mu) = bounds(p, lo, hi);
                        out.push(piece(PresentedCell::over_point(c, nu, mu, Scalar::int(1), SubgroupSpec::Full), h, alpha));
                    }
                    continue;
                }
                let modulus = (p as u64).checked_pow(m).ok_or_else(|| Error::Config("Q(e,M) modulus overflows".into()))?;
                let group = SubgroupSpec::Qnm { n: e, m };
                for i in 0..e as i64 {
                    let lo_i = lo.map(|l| round_up(l, i, e as i64));
                    let hi_i = hi.map(|h| round_down(h, i, e as i64));
                    if matches!((lo_i, hi_i), (Some(l), Some(h)) if l > h) {
                        continue;
                    }
                    for u in (1..modulus).filter(|u| u % p as u64 != 0) {
                        let lambda = Scalar::prime_power(p, i).mul(&Scalar::int(u as i64), cfg);
                        let g = big_h.mul(&lambda.powi(alpha as i64)?, cfg);
                        if let Some(h) = eth_root(&g, e, cfg)? {
                            let (nu, mu) = bounds(p, lo_i, hi_i);
                            out.push(piece(PresentedCell::over_point(c.clone(), nu, mu, lambda, group), h, alpha));
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::RootExtraction(format!("the function is nowhere an {e}-th power")));
    }
    Ok(out)
}

/// Integral preparation of a univariate function. The pieces partition `K`.
pub fn prepare_poly(f: &Term, n: u32, cfg: PadicConfig) -> Result<Vec<PreparedPiece>> {
    prepare(&Rooted::plain(f.clone()), n, cfg)
}

/// Preparation of `theta` with `theta^e = F`. Cells where `F` is not an
/// `e`-th power are left out, so the pieces cover the domain of `theta`.
pub fn prepare_param(theta: &Rooted, n: u32, cfg: PadicConfig) -> Result<Vec<PreparedPiece>> {
    prepare(theta, n, cfg)
}

/// Sample points that break a prepared piece.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ResidualReport {
    pub checked: u64,
    pub failures: Vec<(String, String)>,
    /// Points where the digits ran out.
    pub imprecise: Vec<(String, String)>,
}

impl ResidualReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, o: ResidualReport) {
        self.checked += o.checked;
        self.failures.extend(o.failures);
        self.imprecise.extend(o.imprecise);
    }
}

/// Whether `r` lies in `(1 + p^n Z_p)^e`, for `p` prime to `e`.
fn principal(r: &Scalar, n: u32, cfg: PadicConfig) -> Result<bool> {
    let x = r.to_padic(cfg);
    if x.valuation() != Valuation::Finite(0) {
        return Ok(false);
    }
    Ok(x.unit_residue(n)? == num_bigint::BigUint::from(1u32) % crate::padic::prime_pow(cfg.prime(), n))
}

fn check_point(piece: &PreparedPiece, theta: &Rooted, t: &Scalar, cfg: PadicConfig) -> Result<Option<String>> {
    let p = cfg.prime();
    let e = piece.e;
    let h = piece.h_const()?;
    let f = theta.power_at(t, cfg)?;
    let (y, alpha) = if piece.cell.is_type_zero() {
        (Scalar::int(1), 0)
    } else {
        let c = piece.cell.center_const().ok_or_else(|| Error::Arity("piece over a base".into()))?;
        (t.sub(c, cfg).div(&piece.cell.lambda, cfg)?, piece.alpha)
    };
    if f.is_zero() || h.is_zero() {
        return Ok((f.is_zero() != h.is_zero()).then(|| format!("theta^e = {f} but h = {h}")));
    }
    let vf = f.valuation(p).finite().ok_or(Error::InsufficientPrecision { needed: 1, available: 0 })?;
    let vh = h.valuation(p).finite().unwrap_or(0);
    let vy = y.valuation(p).finite().ok_or(Error::InsufficientPrecision { needed: 1, available: 0 })?;
    if let Some(why) = identity_fails(vf, e, vh, alpha, vy) {
        return Ok(Some(why));
    }
    let good = if vp(e as u64, p) == 0 {
        let r = f.div(&h.powi(e as i64)?.mul(&y.powi(alpha as i64)?, cfg), cfg)?;
        principal(&r, piece.n, cfg)?
    } else {
        let fx = f.to_padic(cfg);
        if !in_pn(&fx, e)? {
            return Ok(Some(format!("theta is undefined: {f} is not an {e}-th power")));
        }
        let th = root_of(&fx, e)?;
        let mut den = h.to_padic(cfg);
        if alpha != 0 {
            den = &den * &nth_root(&y.to_padic(cfg), e)?.pow(alpha as i64)?;
        }
        in_uen(&th.checked_div(&den)?, e, piece.n)?
    };
    Ok((!good).then(residual_message))
}

fn identity_fails(vf: i64, e: u32, vh: i64, alpha: i32, vy: i64) -> Option<String> {
    let rhs = e as i64 * vh + alpha as i64 * vy;
    (vf != rhs).then(|| format!("valuation identity fails: v(theta^e) = {vf}, e v(h) + alpha v(y) = {rhs}"))
}

fn residual_message() -> String {
    "residual unit is outside (1 + p^n Z_p) U_e".to_string()
}

/// Word-sized data for checking one piece when `p` is prime to `e`. Any
/// loss of digits sends the point to the exact check.
struct FastCheck {
    ring: FastRing,
    f: CompiledTerm,
    h_e: Fx,
    center: Option<Fx>,
    lam_inv: Fx,
}

impl FastCheck {
    fn new(piece: &PreparedPiece, theta: &Rooted, cfg: PadicConfig) -> Option<Self> {
        let p = cfg.prime();
        if vp(piece.e as u64, p) != 0 {
            return None;
        }
        let ring = FastRing::new(p);
        let fx = |s: &Scalar| match s {
            Scalar::Exact(q) => ring.from_rational(q),
            Scalar::Approx(x) => ring.from_padic(x),
        };
        let h = fx(piece.h.as_const()?);
        if !matches!(h, Fx::Val { .. }) {
            return None;
        }
        let center = if piece.cell.is_type_zero() { None } else { Some(fx(piece.cell.center_const()?)) };
        let lam_inv = if piece.cell.is_type_zero() { Fx::Val { v: 0, u: 1, rel: ring.digits() } } else { ring.inv(fx(&piece.cell.lambda))? };
        let h_e = ring.pow(h, piece.e);
        let f = CompiledTerm::new(&theta.term, &ring);
        Some(Self { ring, f, h_e, center, lam_inv })
    }

    /// `None` when the digits ran out.
    fn check(&self, piece: &PreparedPiece, t: &BigRational) -> Option<Option<String>> {
        let r = &self.ring;
        let n = piece.n;
        let pt = EvalPoint::new(r, vec![t.clone()]);
        let (vf, uf) = match self.f.eval(r, &pt, n) {
            TermValue::Zero => return None,
            TermValue::Unit { v, res } => (v, res),
        };
        let (y, alpha) = match self.center {
            None => (Fx::Val { v: 0, u: 1, rel: r.digits() }, 0),
            Some(c) => (r.mul(r.sub(pt.fast[0], c), self.lam_inv), piece.alpha),
        };
        let Fx::Val { v: vy, .. } = y else { return None };
        let Fx::Val { v: vhe, .. } = self.h_e else { return None };
        if let Some(why) = identity_fails(vf, piece.e, vhe / piece.e as i64, alpha, vy) {
            return Some(Some(why));
        }
        let yy = if alpha < 0 { r.pow(r.inv(y)?, alpha.unsigned_abs()) } else { r.pow(y, alpha as u32) };
        match r.inv(r.mul(self.h_e, yy))? {
            Fx::Val { u, rel, .. } if rel >= n => {
                let m = r.pow_p(n);
                let res = ((uf as u128 * (u % m) as u128) % m as u128) as u64;
                Some((res != 1 % m).then(residual_message))
            }
            _ => None,
        }
    }
}

/// Checks a piece at the given points of its cell.
pub fn verify_unit_residual_at(piece: &PreparedPiece, theta: &Rooted, points: &[Scalar], cfg: PadicConfig) -> ResidualReport {
    let mut rep = ResidualReport::default();
    if piece.e != theta.e {
        rep.failures.push(("-".into(), format!("piece has e = {}, function has e = {}", piece.e, theta.e)));
        return rep;
    }
    let fast = FastCheck::new(piece, theta, cfg);
    for t in points {
        rep.checked += 1;
        let quick = match (&fast, t) {
            (Some(fc), Scalar::Exact(q)) => fc.check(piece, q),
            _ => None,
        };
        let verdict = match quick {
            Some(v) => Ok(v),
            None => check_point(piece, theta, t, cfg),
        };
        match verdict {
            Ok(None) => {}
            Ok(Some(why)) => rep.failures.push((t.to_string(), why)),
            Err(err @ Error::InsufficientPrecision { .. }) => rep.imprecise.push((t.to_string(), err.to_string())),
            Err(err) => rep.failures.push((t.to_string(), err.to_string())),
        }
    }
    rep
}

/// Checks a piece at the sample points inside its cell.
pub fn verify_unit_residual(piece: &PreparedPiece, theta: &Rooted, sample: &TruncatedSample) -> Result<ResidualReport> {
    let cfg = sample.config();
    let index = CellIndex::new(std::slice::from_ref(&piece.cell), cfg)?;
    let p = cfg.prime();
    let mut pts = Vec::new();
    for pt in sample.points() {
        if index.member(&pt)? {
            pts.push(Scalar::Exact(pt.to_rational(p)));
        }
    }
    Ok(verify_unit_residual_at(piece, theta, &pts, cfg))
}

/// `|f|^e = |p_A / q_A|` on the region `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormWitness {
    pub e: u32,
    pub p: Term,
    pub q: Term,
    pub region: PresentedCell,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NormReport {
    pub checked: u64,
    pub violations: Vec<(String, String)>,
    pub q_zeros: Vec<String>,
}

impl NormReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.q_zeros.is_empty()
    }
}

fn valuation(s: &Scalar, p: u32) -> Option<i64> {
    match s.valuation(p) {
        Valuation::Finite(v) => Some(v),
        Valuation::Infinity => None,
    }
}

/// Checks `e v(f) = v(p_A) - v(q_A)` and `q_A != 0` at the given points.
pub fn verify_norm_factor_at(f: &Rooted, w: &NormWitness, points: &[Scalar], cfg: PadicConfig) -> NormReport {
    let p = cfg.prime();
    let mut rep = NormReport::default();
    for t in points {
        rep.checked += 1;
        let at = |term: &Term| Rooted::plain(term.clone()).power_at(t, cfg);
        let (fv, pv, qv) = match (f.power_at(t, cfg), at(&w.p), at(&w.q)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            (Err(err), _, _) | (_, Err(err), _) | (_, _, Err(err)) => {
                rep.violations.push((t.to_string(), err.to_string()));
                continue;
            }
        };
        if qv.is_zero() {
            rep.q_zeros.push(t.to_string());
            continue;
        }
        // e v(theta) with theta^e_f = F is e v(F) / e_f
        let lhs = valuation(&fv, p).map(|v| w.e as i64 * v);
        let rhs = valuation(&pv, p).map(|v| f.e as i64 * (v - valuation(&qv, p).unwrap_or(0)));
        if lhs != rhs {
            let show = |x: Option<i64>| x.map_or("inf".to_string(), |v| v.to_string());
            rep.violations.push((t.to_string(), format!("{} != {}", show(lhs), show(rhs))));
        }
    }
    rep
}

/// Checks a norm witness at the sample points inside its region.
pub fn verify_norm_factor(f: &Rooted, w: &NormWitness, sample: &TruncatedSample) -> Result<NormReport> {
    let cfg = sample.config();
    let index = CellIndex::new(std::slice::from_ref(&w.region), cfg)?;
    let mut pts = Vec::new();
    for pt in sample.points() {
        if index.member(&pt)? {
            pts.push(Scalar::Exact(pt.to_rational(cfg.prime())));
        }
    }
    Ok(verify_norm_factor_at(f, w, &pts, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Vars;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> PadicConfig {
        PadicConfig::new(5, 16).unwrap()
    }

    fn term(s: &str) -> Term {
        parse_term(s, &Vars::univariate()).unwrap()
    }

    fn check_all(pieces: &[PreparedPiece], theta: &Rooted) -> ResidualReport {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rep = ResidualReport::default();
        for pc in pieces {
            let pts: Vec<Scalar> = pc.cell.sample(cfg(), 4, 50, &mut rng).unwrap().into_iter().map(|mut v| v.pop().unwrap()).collect();
            rep.merge(verify_unit_residual_at(pc, theta, &pts, cfg()));
        }
        rep
    }

    #[test]
    fn square_minus_one_near_one() {
        let f = term("t^2 - 1");
        let pieces = prepare_poly(&f, 1, cfg()).unwrap();
        let near = pieces
            .iter()
            .find(|pc| pc.cell.center_const() == Some(&Scalar::int(1)) && pc.alpha == 1)
            .expect("a piece around 1");
        assert_eq!(near.h, CellFn::Const(Scalar::int(2)));
        assert_eq!(near.cell.mu.const_valuation(5).unwrap(), Some(1));
        assert!(check_all(&pieces, &Rooted::plain(f)).ok());
    }

    #[test]
    fn constants_and_monomials() {
        let seven = prepare_poly(&term("7"), 2, cfg()).unwrap();
        assert!(seven.iter().all(|pc| pc.alpha == 0 && pc.h == CellFn::Const(Scalar::int(7))));
        let cube = prepare_poly(&term("(t - 3)^3"), 2, cfg()).unwrap();
        assert!(cube.iter().any(|pc| pc.alpha == 3 && pc.h == CellFn::Const(Scalar::int(1))));
        let inv = Rooted::plain(term("(t - 3)^-1"));
        let pieces = prepare_param(&inv, 2, cfg()).unwrap();
        assert!(pieces.iter().any(|pc| pc.alpha == -1 && pc.h == CellFn::Const(Scalar::int(1))));
        assert!(check_all(&pieces, &inv).ok());
    }

    #[test]
    fn square_root_of_t() {
        let theta = Rooted::new(term("t"), 2).unwrap();
        let pieces = prepare_param(&theta, 2, cfg()).unwrap();
        assert!(pieces.iter().all(|pc| pc.cell.is_type_zero() || (pc.alpha == 1 && pc.e == 2)));
        // t in 2 Q(2,1) is not a square, so that coset is left out
        assert!(!pieces.iter().any(|pc| pc.cell.lambda == Scalar::int(2)));
        assert!(check_all(&pieces, &theta).ok());
    }

    #[test]
    fn doubled_h_fails_everywhere() {
        let f = term("t^2 - 1");
        let mut pc = prepare_poly(&f, 1, cfg()).unwrap().into_iter().find(|pc| pc.alpha == 1).unwrap();
        pc.h = CellFn::Const(pc.h_const().unwrap().mul(&Scalar::int(2), cfg()));
        let rep = check_all(std::slice::from_ref(&pc), &Rooted::plain(f));
        assert_eq!(rep.failures.len() as u64, rep.checked);
    }

    #[test]
    fn norm_witness_for_square_root() {
        let theta = Rooted::new(term("t"), 2).unwrap();
        let region = PresentedCell::over_point(Scalar::zero(), Bound::Zero, Bound::Infinity, Scalar::int(1), SubgroupSpec::Full);
        let w = NormWitness { e: 2, p: term("t"), q: term("1"), region: region.clone() };
        let s = TruncatedSample::new(cfg(), 3, 3).unwrap();
        assert!(verify_norm_factor(&theta, &w, &s).unwrap().ok());
        let bad = NormWitness { e: 2, p: term("t"), q: term("t - 1"), region };
        let rep = verify_norm_factor(&theta, &bad, &s).unwrap();
        assert!(!rep.q_zeros.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let pieces = prepare_param(&Rooted::new(term("t"), 2).unwrap(), 1, cfg()).unwrap();
        for pc in pieces {
            assert_eq!(PreparedPiece::from_json(&pc.to_json(), cfg()).unwrap(), pc);
        }
    }
}
