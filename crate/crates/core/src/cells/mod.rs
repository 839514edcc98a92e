//! Presented cells over a point or over a one-dimensional base.
//!
//! A cell is `{ (x, t) : x in base, |nu(x)| <= |t - c(x)| <= |mu(x)|,
//! t - c(x) in lambda G }`, or the graph `t = c(x)` when `lambda = 0`.

pub(crate) mod decompose;
mod index;
pub(crate) mod tree;

use num_rational::BigRational;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lang::{parse_term, Term, Vars};
use crate::padic::{decision_digits, in_pn, in_qnm, prime_pow, PadicConfig, SubgroupSpec, Valuation};
use crate::scalar::Scalar;

pub use decompose::{decompose1, CellList};
pub use index::{check_partition, CellIndex, PartitionReport};

/// A coordinate function on the base: a constant, or a term in the base
/// variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellFn {
    Const(Scalar),
    Term(Term),
}

impl CellFn {
    pub fn zero() -> Self {
        CellFn::Const(Scalar::zero())
    }

    pub fn as_const(&self) -> Option<&Scalar> {
        match self {
            CellFn::Const(c) => Some(c),
            CellFn::Term(_) => None,
        }
    }

    /// Value at a base point; constants ignore it.
    pub fn eval(&self, base: &[Scalar], cfg: PadicConfig) -> Result<Scalar> {
        match self {
            CellFn::Const(c) => Ok(c.clone()),
            CellFn::Term(t) => {
                let exact: Option<Vec<BigRational>> = base.iter().map(|s| s.as_rational().cloned()).collect();
                match exact {
                    Some(q) => Ok(Scalar::Exact(t.eval_rational(&q))),
                    None => {
                        let pts: Vec<_> = base.iter().map(|s| s.to_padic(cfg)).collect();
                        Ok(Scalar::Approx(t.eval_padic(&pts, cfg)?))
                    }
                }
            }
        }
    }

    pub(crate) fn text(&self) -> String {
        match self {
            CellFn::Const(c) => c.to_string(),
            CellFn::Term(t) => t.display(&base_vars()).to_string(),
        }
    }
}

/// A bound on `|t - c|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Zero,
    Infinity,
    Fn(CellFn),
}

impl Bound {
    pub fn power(prime: u32, k: i64) -> Self {
        Bound::Fn(CellFn::Const(Scalar::prime_power(prime, k)))
    }

    fn eval(&self, base: &[Scalar], cfg: PadicConfig) -> Result<Option<Scalar>> {
        match self {
            Bound::Zero | Bound::Infinity => Ok(None),
            Bound::Fn(f) => {
                let v = f.eval(base, cfg)?;
                Ok(if v.is_zero() { None } else { Some(v) })
            }
        }
    }

    /// Valuation of a constant bound; `None` for `0` and `inf`.
    pub fn const_valuation(&self, prime: u32) -> Result<Option<i64>> {
        match self {
            Bound::Zero | Bound::Infinity => Ok(None),
            Bound::Fn(CellFn::Const(c)) => Ok(c.valuation(prime).finite()),
            Bound::Fn(CellFn::Term(_)) => Err(Error::Arity("the bound depends on the base".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Base {
    Point,
    Cell(Box<PresentedCell>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresentedCell {
    pub base: Base,
    pub center: CellFn,
    pub nu: Bound,
    pub mu: Bound,
    pub lambda: Scalar,
    pub group: SubgroupSpec,
}

/// The variable name used for the base coordinate.
pub fn base_vars() -> Vars {
    Vars::new(&["x"]).expect("valid name")
}

fn ratio_in_group(q: &Scalar, group: SubgroupSpec, cfg: PadicConfig) -> Result<bool> {
    let x = q.to_padic(cfg);
    match group {
        SubgroupSpec::Full => Ok(true),
        SubgroupSpec::Pn { n } => in_pn(&x, n),
        SubgroupSpec::Qnm { n, m } => in_qnm(&x, n, m),
        SubgroupSpec::UnitBall { .. } => Err(Error::Config("cells are taken modulo P_N, Q(N,M) or K^*".into())),
    }
}

impl PresentedCell {
    /// The single point `{c}`.
    pub fn point(c: Scalar) -> Self {
        Self {
            base: Base::Point,
            center: CellFn::Const(c),
            nu: Bound::Zero,
            mu: Bound::Infinity,
            lambda: Scalar::zero(),
            group: SubgroupSpec::Full,
        }
    }

    /// `{t : |nu| <= |t - c| <= |mu|, t - c in lambda G}` over a point.
    pub fn over_point(c: Scalar, nu: Bound, mu: Bound, lambda: Scalar, group: SubgroupSpec) -> Self {
        Self { base: Base::Point, center: CellFn::Const(c), nu, mu, lambda, group }
    }

    pub fn is_type_zero(&self) -> bool {
        self.lambda.is_zero()
    }

    /// Number of coordinates of a point of the cell.
    pub fn arity(&self) -> usize {
        match &self.base {
            Base::Point => 1,
            Base::Cell(b) => b.arity() + 1,
        }
    }

    /// The center as a constant, for cells over a point.
    pub fn center_const(&self) -> Option<&Scalar> {
        match (&self.base, &self.center) {
            (Base::Point, CellFn::Const(c)) => Some(c),
            _ => None,
        }
    }

    /// Membership of `t - c` given the base coordinates.
    fn fibre_holds(&self, base: &[Scalar], t: &Scalar, cfg: PadicConfig) -> Result<bool> {
        let c = self.center.eval(base, cfg)?;
        let d = t.sub(&c, cfg);
        if self.is_type_zero() {
            return Ok(d.is_zero());
        }
        let vd = match d.valuation(cfg.prime()) {
            Valuation::Finite(v) => v,
            Valuation::Infinity => {
                if let Scalar::Approx(_) = d {
                    return Err(Error::InsufficientPrecision { needed: cfg.work_precision() + 1, available: cfg.work_precision() });
                }
                return Ok(false);
            }
        };
        if let Some(nu) = self.nu.eval(base, cfg)? {
            if let Valuation::Finite(vn) = nu.valuation(cfg.prime()) {
                if vd > vn {
                    return Ok(false);
                }
            }
        }
        if let Some(mu) = self.mu.eval(base, cfg)? {
            if let Valuation::Finite(vm) = mu.valuation(cfg.prime()) {
                if vd < vm {
                    return Ok(false);
                }
            }
        }
        ratio_in_group(&d.div(&self.lambda, cfg)?, self.group, cfg)
    }

    /// Membership of a point `(x.., t)`.
    pub fn contains(&self, point: &[Scalar], cfg: PadicConfig) -> Result<bool> {
        if point.len() != self.arity() {
            return Err(Error::Arity(format!("cell points have {} coordinates, got {}", self.arity(), point.len())));
        }
        let (t, base) = point.split_last().expect("nonempty");
        if let Base::Cell(b) = &self.base {
            if !b.contains(base, cfg)? {
                return Ok(false);
            }
        }
        self.fibre_holds(base, t, cfg)
    }

    /// Random points of the cell. Unbounded valuation ranges are clipped to
    /// a span of `2 window` around the finite end.
    pub fn sample(&self, cfg: PadicConfig, window: i64, count: usize, rng: &mut impl Rng) -> Result<Vec<Vec<Scalar>>> {
        let mut out = Vec::with_capacity(count);
        let mut tries = 0;
        while out.len() < count {
            tries += 1;
            if tries > 20 * count + 100 {
                if out.is_empty() {
                    return Err(Error::EmptyCell);
                }
                break;
            }
            let mut pt = match &self.base {
                Base::Point => Vec::new(),
                Base::Cell(b) => match b.sample(cfg, window, 1, rng)?.pop() {
                    Some(x) => x,
                    None => continue,
                },
            };
            if let Some(t) = self.sample_fibre(&pt, cfg, window, rng)? {
                pt.push(t);
                out.push(pt);
            }
            if self.is_type_zero() && matches!(self.base, Base::Point) {
                break;
            }
        }
        Ok(out)
    }

    fn sample_fibre(&self, base: &[Scalar], cfg: PadicConfig, window: i64, rng: &mut impl Rng) -> Result<Option<Scalar>> {
        let p = cfg.prime();
        let c = self.center.eval(base, cfg)?;
        if self.is_type_zero() {
            return Ok(Some(c));
        }
        let vb = |b: Option<Scalar>| b.and_then(|x| x.valuation(p).finite());
        let hi = vb(self.nu.eval(base, cfg)?);
        let lo = vb(self.mu.eval(base, cfg)?);
        let (lo, hi) = match (lo, hi) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, a + 2 * window),
            (None, Some(b)) => (b - 2 * window, b),
            (None, None) => (-window, window),
        };
        let vl = self.lambda.valuation(p).finite().ok_or(Error::EmptyCell)?;
        let period = self.group.period() as i64;
        let ws: Vec<i64> = (lo..=hi).filter(|w| (w - vl).rem_euclid(period) == 0).collect();
        if ws.is_empty() {
            return Ok(None);
        }
        let w = ws[rng.gen_range(0..ws.len())];
        let digits = cfg.work_precision().min(12);
        let modulus = (p as u64).pow(digits);
        let mut unit = || loop {
            let u = rng.gen_range(1..modulus);
            if u % p as u64 != 0 {
                return u;
            }
        };
        let j = w - vl;
        let g = match self.group {
            SubgroupSpec::Full => Scalar::int(unit() as i64),
            SubgroupSpec::Pn { n } => {
                // an N-th power mod p^k stays one while k covers the decision digits
                let k = cfg.work_precision();
                let u = num_bigint::BigUint::from(unit());
                if decision_digits(p, n) <= k {
                    let r = u.modpow(&n.into(), &prime_pow(p, k));
                    Scalar::Exact(BigRational::from_integer(r.into()))
                } else {
                    Scalar::Exact(BigRational::from_integer(u.pow(n).into()))
                }
            }
            SubgroupSpec::Qnm { m, .. } => {
                let s = rng.gen_range(0..modulus);
                Scalar::int(1).add(&Scalar::prime_power(p, m as i64).mul(&Scalar::int(s as i64), cfg), cfg)
            }
            SubgroupSpec::UnitBall { .. } => return Err(Error::Config("unsupported cell group".into())),
        };
        let g = g.mul(&Scalar::prime_power(p, j), cfg);
        Ok(Some(c.add(&self.lambda.mul(&g, cfg), cfg)))
    }

    pub fn to_json(&self) -> Value {
        let bound = |b: &Bound| match b {
            Bound::Zero => json!("0"),
            Bound::Infinity => json!("inf"),
            Bound::Fn(f) => json!(f.text()),
        };
        let mut v = json!({
            "center": self.center.text(),
            "nu": bound(&self.nu),
            "mu": bound(&self.mu),
            "lambda": self.lambda.to_string(),
            "group": serde_json::to_value(self.group).expect("serializable"),
            "type": if self.is_type_zero() { 0 } else { 1 },
        });
        if let Base::Cell(b) = &self.base {
            v["base"] = b.to_json();
        }
        v
    }

    pub fn from_json(v: &Value, cfg: PadicConfig) -> Result<Self> {
        let bad = |m: &str| Error::Syntax { pos: 0, msg: m.into() };
        let text = |k: &str| -> Result<String> {
            match v.get(k) {
                Some(Value::String(s)) => Ok(s.clone()),
                Some(Value::Number(n)) => Ok(n.to_string()),
                _ => Err(bad(&format!("cell needs a `{k}` field"))),
            }
        };
        let base = match v.get("base") {
            None | Some(Value::Null) => Base::Point,
            Some(b) => Base::Cell(Box::new(Self::from_json(b, cfg)?)),
        };
        let over_point = matches!(base, Base::Point);
        let func = |s: &str| -> Result<CellFn> {
            if over_point {
                Ok(CellFn::Const(Scalar::parse(s, cfg)?))
            } else {
                let t = parse_term(s, &base_vars())?;
                Ok(match t.as_constant() {
                    Some(q) => CellFn::Const(Scalar::Exact(q)),
                    None => CellFn::Term(t),
                })
            }
        };
        let bound = |k: &str, inf_ok: bool| -> Result<Bound> {
            let s = text(k)?;
            match s.trim() {
                "0" => Ok(Bound::Zero),
                "inf" if inf_ok => Ok(Bound::Infinity),
                s => Ok(Bound::Fn(func(s)?)),
            }
        };
        let lambda = Scalar::parse(&text("lambda")?, cfg)?;
        let group: SubgroupSpec = match v.get("group") {
            Some(g) => serde_json::from_value(g.clone()).map_err(|e| bad(&format!("bad group: {e}")))?,
            None => SubgroupSpec::Full,
        };
        group.validate()?;
        if let Some(ty) = v.get("type").and_then(Value::as_u64) {
            if (ty == 0) != lambda.is_zero() {
                return Err(bad("`type` disagrees with `lambda`"));
            }
        }
        Ok(Self { base, center: func(&text("center")?)?, nu: bound("nu", false)?, mu: bound("mu", true)?, lambda, group })
    }
}

/// The translation `(x, s) -> (x, c(x) + s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub shift: CellFn,
}

impl Translation {
    pub fn apply(&self, point: &[Scalar], cfg: PadicConfig) -> Result<Vec<Scalar>> {
        let (s, base) = point.split_last().ok_or_else(|| Error::Arity("empty point".into()))?;
        let c = self.shift.eval(base, cfg)?;
        let mut out = base.to_vec();
        out.push(c.add(s, cfg));
        Ok(out)
    }

    pub fn is_identity(&self) -> bool {
        matches!(&self.shift, CellFn::Const(c) if c.is_zero())
    }
}

/// The same cell centered at zero, and the map carrying it back.
pub fn untwist(cell: &PresentedCell) -> (PresentedCell, Translation) {
    let mut std = cell.clone();
    std.center = CellFn::zero();
    (std, Translation { shift: cell.center.clone() })
}

impl From<BigRational> for CellFn {
    fn from(q: BigRational) -> Self {
        CellFn::Const(Scalar::Exact(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> PadicConfig {
        PadicConfig::new(5, 16).unwrap()
    }

    fn annulus() -> PresentedCell {
        PresentedCell::over_point(Scalar::int(1), Bound::power(5, 3), Bound::power(5, 1), Scalar::int(2), SubgroupSpec::Pn { n: 2 })
    }

    #[test]
    fn membership_follows_the_definition() {
        let c = annulus();
        let pt = |x: i64| vec![Scalar::int(x)];
        // t - 1 = 2 * 5^2
        assert!(c.contains(&pt(51), cfg()).unwrap());
        // t - 1 = 5^2 is a square, not 2 times one
        assert!(!c.contains(&pt(26), cfg()).unwrap());
        // too close to the center
        assert!(!c.contains(&pt(1 + 2 * 625), cfg()).unwrap());
        assert!(!c.contains(&pt(1), cfg()).unwrap());
        assert!(PresentedCell::point(Scalar::int(1)).contains(&pt(1), cfg()).unwrap());
    }

    #[test]
    fn samples_lie_in_the_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = annulus();
        for pt in c.sample(cfg(), 4, 50, &mut rng).unwrap() {
            assert!(c.contains(&pt, cfg()).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let c = annulus();
        let back = PresentedCell::from_json(&c.to_json(), cfg()).unwrap();
        assert_eq!(back, c);
        let fib = PresentedCell {
            base: Base::Cell(Box::new(c.clone())),
            center: CellFn::Term(parse_term("x^2 + 1", &base_vars()).unwrap()),
            nu: Bound::Zero,
            mu: Bound::Fn(CellFn::Term(parse_term("x", &base_vars()).unwrap())),
            lambda: Scalar::int(1),
            group: SubgroupSpec::Qnm { n: 2, m: 1 },
        };
        assert_eq!(PresentedCell::from_json(&fib.to_json(), cfg()).unwrap(), fib);
    }

    #[test]
    fn untwisting_commutes_with_membership() {
        let c = annulus();
        let (s, map) = untwist(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let q = vec![Scalar::int(rng.gen_range(-3000..3000))];
            let moved = map.apply(&q, cfg()).unwrap();
            assert_eq!(c.contains(&moved, cfg()).unwrap(), s.contains(&q, cfg()).unwrap());
        }
        assert!(untwist(&s).1.is_identity());
    }
}
