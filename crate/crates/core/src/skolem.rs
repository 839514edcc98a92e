//! Definable sections of presented cells.
//!
//! Over each piece of the base the section is one of `t = c`, `t = c + lambda`,
//! `t = c + nu / a` or `t = c + mu a`, with `a` an exact constant of
//! valuation in `[0, N)`.

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cells::{base_vars, Base, Bound, CellFn, PresentedCell};
use crate::error::{Error, Result};
use crate::lang::{eval_formula, parse_formula, Atom, Basic, Formula, Term};
use crate::oracle::TruncatedSample;
use crate::padic::{coset_table, PadicConfig, SubgroupSpec, Valuation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SectionFormula {
    /// `tau = c`.
    Center,
    /// `tau = c + lambda`.
    Lambda,
    /// `tau = c + nu / a`.
    Nu(BigRational),
    /// `tau = c + mu a`.
    Mu(BigRational),
}

impl SectionFormula {
    fn text(&self) -> &'static str {
        match self {
            SectionFormula::Center => "c",
            SectionFormula::Lambda => "c + lambda",
            SectionFormula::Nu(_) => "c + nu/a",
            SectionFormula::Mu(_) => "c + mu*a",
        }
    }

    pub fn constant(&self) -> Option<&BigRational> {
        match self {
            SectionFormula::Nu(a) | SectionFormula::Mu(a) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionPiece {
    /// Condition on the base variable; `None` is the whole base.
    pub condition: Option<Formula>,
    pub formula: SectionFormula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionDescriptor {
    pub pieces: Vec<SectionPiece>,
}

impl SectionDescriptor {
    pub fn to_json(&self) -> Value {
        let vars = base_vars();
        let pieces: Vec<Value> = self
            .pieces
            .iter()
            .map(|pc| {
                json!({
                    "condition": pc.condition.as_ref().map_or(Value::Null, |f| json!(f.display(&vars).to_string())),
                    "formula": pc.formula.text(),
                    "a": pc.formula.constant().map_or(Value::Null, |a| json!(Scalar::Exact(a.clone()).to_string())),
                })
            })
            .collect();
        json!({ "pieces": pieces })
    }

    pub fn from_json(v: &Value, cfg: PadicConfig) -> Result<Self> {
        let bad = |m: &str| Error::Syntax { pos: 0, msg: m.into() };
        let list = v.get("pieces").and_then(Value::as_array).ok_or_else(|| bad("section needs a `pieces` array"))?;
        let mut pieces = Vec::new();
        for pc in list {
            let condition = match pc.get("condition") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) => Some(parse_formula(s, &base_vars())?),
                _ => return Err(bad("`condition` must be a formula string")),
            };
            let a = || -> Result<BigRational> {
                let s = match pc.get("a") {
                    Some(Value::String(s)) => s.clone(),
                    Some(Value::Number(n)) => n.to_string(),
                    _ => return Err(bad("this formula needs a constant `a`")),
                };
                match Scalar::parse(&s, cfg)? {
                    Scalar::Exact(q) => Ok(q),
                    Scalar::Approx(_) => Err(bad("`a` must be exact")),
                }
            };
            let formula = match pc.get("formula").and_then(Value::as_str) {
                Some("c") => SectionFormula::Center,
                Some("c + lambda") => SectionFormula::Lambda,
                Some("c + nu/a") => SectionFormula::Nu(a()?),
                Some("c + mu*a") => SectionFormula::Mu(a()?),
                _ => return Err(bad("unknown section formula")),
            };
            pieces.push(SectionPiece { condition, formula });
        }
        Ok(Self { pieces })
    }

    /// The piece whose condition holds at a base point.
    pub fn piece_at(&self, base: &[Scalar], prime: u32) -> Result<Option<&SectionPiece>> {
        let exact: Option<Vec<BigRational>> = base.iter().map(|s| s.as_rational().cloned()).collect();
        for pc in &self.pieces {
            match &pc.condition {
                None => return Ok(Some(pc)),
                Some(f) => {
                    let pt = exact.as_ref().ok_or_else(|| Error::Domain("piece conditions need exact base points".into()))?;
                    if eval_formula(f, prime, pt)? {
                        return Ok(Some(pc));
                    }
                }
            }
        }
        Ok(None)
    }

    /// `tau(x)`.
    pub fn eval(&self, cell: &PresentedCell, base: &[Scalar], cfg: PadicConfig) -> Result<Option<Scalar>> {
        let Some(pc) = self.piece_at(base, cfg.prime())? else { return Ok(None) };
        let c = cell.center.eval(base, cfg)?;
        let bound = |b: &Bound| match b {
            Bound::Fn(f) => f.eval(base, cfg),
            _ => Err(Error::Domain("the section formula needs a finite bound".into())),
        };
        Ok(Some(match &pc.formula {
            SectionFormula::Center => c,
            SectionFormula::Lambda => c.add(&cell.lambda, cfg),
            SectionFormula::Nu(a) => c.add(&bound(&cell.nu)?.div(&Scalar::Exact(a.clone()), cfg)?, cfg),
            SectionFormula::Mu(a) => c.add(&bound(&cell.mu)?.mul(&Scalar::Exact(a.clone()), cfg), cfg),
        }))
    }
}

/// Representative of the coset of `q` modulo the cell group, of
/// valuation in `[0, N)`.
fn coset_rep(q: &Scalar, group: SubgroupSpec, cfg: PadicConfig) -> Result<BigRational> {
    let table = coset_table(cfg.prime(), group)?;
    let idx = table.index(&q.to_padic(cfg))?.ok_or(Error::DivisionByZero)?;
    let a = table.rep_rational(idx);
    debug_assert!(matches!(Scalar::Exact(a.clone()).valuation(cfg.prime()), Valuation::Finite(v) if (0..group.period() as i64).contains(&v)));
    Ok(a)
}

/// All representatives of the cell group's cosets.
fn all_reps(group: SubgroupSpec, cfg: PadicConfig) -> Result<Vec<BigRational>> {
    let table = coset_table(cfg.prime(), group)?;
    Ok((0..table.count()).map(|i| table.rep_rational(i)).collect())
}

/// `f in G`, for `f` a term in the base variable.
fn in_group(f: Term, group: SubgroupSpec) -> Result<Formula> {
    Ok(match group {
        SubgroupSpec::Full => Formula::basic(Basic::nonzero(f)),
        SubgroupSpec::Pn { n } => Formula::basic(Basic::coset(f, n, 0)),
        SubgroupSpec::Qnm { n, m } => Formula::Atom(Atom::InQ { term: f, n, m }),
        SubgroupSpec::UnitBall { .. } => return Err(Error::Config("unsupported cell group".into())),
    })
}

fn base_term(f: &CellFn) -> Term {
    match f {
        CellFn::Term(t) => t.clone(),
        CellFn::Const(Scalar::Exact(q)) => Term::poly(crate::poly::Poly::constant(1, q.clone())),
        CellFn::Const(Scalar::Approx(_)) => unreachable!("checked by the caller"),
    }
}

/// A section of a nonempty cell.
pub fn section(cell: &PresentedCell, cfg: PadicConfig) -> Result<SectionDescriptor> {
    let one = |formula| Ok(SectionDescriptor { pieces: vec![SectionPiece { condition: None, formula }] });
    if cell.is_type_zero() {
        return one(SectionFormula::Center);
    }
    let lambda = &cell.lambda;
    let g = cell.group;
    match (&cell.nu, &cell.mu) {
        (Bound::Fn(CellFn::Const(nu)), _) => one(SectionFormula::Nu(coset_rep(&nu.div(lambda, cfg)?, g, cfg)?)),
        (Bound::Zero | Bound::Infinity, Bound::Infinity) => one(SectionFormula::Lambda),
        (Bound::Zero | Bound::Infinity, Bound::Fn(CellFn::Const(mu))) => {
            one(SectionFormula::Mu(coset_rep(&lambda.div(mu, cfg)?, g, cfg)?))
        }
        (nu, mu) => {
            let lam = lambda.as_rational().ok_or_else(|| Error::Domain("sections over a base need a rational lambda".into()))?;
            let exact = |f: &CellFn| !matches!(f, CellFn::Const(Scalar::Approx(_)));
            let mut pieces = Vec::new();
            let mut nu_zero = Formula::True;
            if let Bound::Fn(f) = nu {
                if !exact(f) {
                    return Err(Error::Domain("sections over a base need exact bounds".into()));
                }
                let t = base_term(f);
                for a in all_reps(g, cfg)? {
                    // nu / (lambda a) in G
                    let cond = in_group(t.scale(&(BigRational::from_integer(1.into()) / (lam * &a)), 1), g)?;
                    pieces.push(SectionPiece { condition: Some(cond), formula: SectionFormula::Nu(a) });
                }
                nu_zero = Formula::basic(Basic::Zero(t));
            }
            match mu {
                Bound::Infinity => pieces.push(SectionPiece { condition: Some(nu_zero), formula: SectionFormula::Lambda }),
                Bound::Fn(f) => {
                    if !exact(f) {
                        return Err(Error::Domain("sections over a base need exact bounds".into()));
                    }
                    let t = base_term(f);
                    for b in all_reps(g, cfg)? {
                        // mu b / lambda in G, equivalently lambda / (mu b) in G
                        let cond = in_group(t.scale(&(&b / lam), 1), g)?;
                        pieces.push(SectionPiece { condition: Some(Formula::and(nu_zero.clone(), cond)), formula: SectionFormula::Mu(b) });
                    }
                }
                Bound::Zero => return Err(Error::Domain("mu cannot be 0".into())),
            }
            Ok(SectionDescriptor { pieces })
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SectionReport {
    pub checked: u64,
    /// Base points whose section value misses the cell.
    pub failures: Vec<(String, String)>,
}

impl SectionReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Whether the fibre over a base point is nonempty.
fn fibre_nonempty(cell: &PresentedCell, base: &[Scalar], cfg: PadicConfig) -> Result<bool> {
    if cell.is_type_zero() {
        return Ok(true);
    }
    let p = cfg.prime();
    let val = |b: &Bound| -> Result<Option<Option<i64>>> {
        match b {
            Bound::Zero | Bound::Infinity => Ok(None),
            Bound::Fn(f) => Ok(Some(f.eval(base, cfg)?.valuation(p).finite())),
        }
    };
    let hi = match val(&cell.nu)? {
        Some(None) | None => None,
        Some(Some(v)) => Some(v),
    };
    let lo = match val(&cell.mu)? {
        // mu(x) = 0 leaves only t = c, which is not in lambda G
        Some(None) => return Ok(false),
        Some(Some(v)) => Some(v),
        None => None,
    };
    let vl = cell.lambda.valuation(p).finite().ok_or(Error::EmptyCell)?;
    let n = cell.group.period() as i64;
    Ok(match (lo, hi) {
        (Some(l), Some(h)) => l + (vl - l).rem_euclid(n) <= h,
        _ => true,
    })
}

/// Checks the section at the given base points.
pub fn verify_section_at(cell: &PresentedCell, s: &SectionDescriptor, bases: &[Vec<Scalar>], cfg: PadicConfig) -> SectionReport {
    let mut rep = SectionReport::default();
    for x in bases {
        let show = || x.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ");
        let in_base = match &cell.base {
            Base::Point => Ok(true),
            Base::Cell(b) => b.contains(x, cfg),
        };
        match in_base.and_then(|ok| Ok(ok && fibre_nonempty(cell, x, cfg)?)) {
            Ok(true) => {}
            Ok(false) => continue,
            Err(e) => {
                rep.failures.push((show(), e.to_string()));
                continue;
            }
        }
        rep.checked += 1;
        let verdict = s.eval(cell, x, cfg).and_then(|tau| match tau {
            None => Ok(Some("no piece covers the point".to_string())),
            Some(tau) => {
                let mut pt = x.clone();
                pt.push(tau.clone());
                Ok((!cell.contains(&pt, cfg)?).then(|| format!("tau = {tau} is outside the cell")))
            }
        });
        match verdict {
            Ok(None) => {}
            Ok(Some(why)) => rep.failures.push((show(), why)),
            Err(e) => rep.failures.push((show(), e.to_string())),
        }
    }
    rep
}

/// Points of the cell lie no deeper than the section:
/// `v(nu) - v(a) >= v(t - c)` at sampled `t`, for cells over a point.
pub fn valuation_chain(cell: &PresentedCell, s: &SectionDescriptor, cfg: PadicConfig, count: usize) -> Result<Vec<String>> {
    let p = cfg.prime();
    let mut bad = Vec::new();
    let (Base::Point, Some(SectionPiece { formula: SectionFormula::Nu(a), .. })) = (&cell.base, s.pieces.first()) else {
        return Ok(bad);
    };
    let Bound::Fn(CellFn::Const(nu)) = &cell.nu else { return Ok(bad) };
    let top = nu.div(&Scalar::Exact(a.clone()), cfg)?.valuation(p);
    let c = cell.center_const().ok_or(Error::EmptyCell)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for mut pt in cell.sample(cfg, 6, count, &mut rng)? {
        let t = pt.pop().expect("one coordinate");
        let vt = t.sub(c, cfg).valuation(p);
        if vt > top {
            bad.push(t.to_string());
        }
    }
    Ok(bad)
}

/// Checks the section over the base: the single point for cells over a
/// point, the sample points otherwise.
pub fn verify_section(cell: &PresentedCell, s: &SectionDescriptor, sample: &TruncatedSample) -> SectionReport {
    let cfg = sample.config();
    let bases: Vec<Vec<Scalar>> = match cell.base {
        Base::Point => vec![Vec::new()],
        Base::Cell(_) => sample.points().map(|pt| vec![Scalar::Exact(pt.to_rational(cfg.prime()))]).collect(),
    };
    verify_section_at(cell, s, &bases, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_term;

    fn cfg() -> PadicConfig {
        PadicConfig::new(5, 16).unwrap()
    }

    fn check(cell: &PresentedCell) -> SectionDescriptor {
        let s = section(cell, cfg()).unwrap();
        let sample = TruncatedSample::new(cfg(), 3, 2).unwrap();
        let rep = verify_section(cell, &s, &sample);
        assert!(rep.ok() && rep.checked > 0, "{rep:?}");
        s
    }

    #[test]
    fn point_cell() {
        let s = check(&PresentedCell::point(Scalar::int(3)));
        assert_eq!(s.pieces[0].formula, SectionFormula::Center);
    }

    #[test]
    fn annulus_with_squares() {
        let cell = PresentedCell::over_point(Scalar::zero(), Bound::power(5, 1), Bound::power(5, -1), Scalar::int(1), SubgroupSpec::Pn { n: 2 });
        let s = check(&cell);
        let a = s.pieces[0].formula.constant().unwrap().clone();
        assert_eq!(a, BigRational::from_integer(5.into()));
        assert!(valuation_chain(&cell, &s, cfg(), 50).unwrap().is_empty());
    }

    #[test]
    fn whole_coset() {
        let cell = PresentedCell::over_point(Scalar::zero(), Bound::Zero, Bound::Infinity, Scalar::int(7), SubgroupSpec::Pn { n: 2 });
        let s = check(&cell);
        assert_eq!(s.eval(&cell, &[], cfg()).unwrap(), Some(Scalar::int(7)));
    }

    #[test]
    fn ball_side() {
        let cell = PresentedCell::over_point(Scalar::int(1), Bound::Zero, Bound::power(5, 3), Scalar::int(2), SubgroupSpec::Pn { n: 2 });
        check(&cell);
    }

    #[test]
    fn broken_descriptors_are_caught() {
        let cell = PresentedCell::over_point(Scalar::zero(), Bound::power(5, 1), Bound::power(5, -1), Scalar::int(1), SubgroupSpec::Pn { n: 2 });
        let sample = TruncatedSample::new(cfg(), 2, 2).unwrap();
        let s = section(&cell, cfg()).unwrap();
        let a = s.pieces[0].formula.constant().unwrap();
        let shifted = SectionDescriptor { pieces: vec![SectionPiece { condition: None, formula: SectionFormula::Nu(a * BigRational::from_integer(25.into())) }] };
        assert!(!verify_section(&cell, &shifted, &sample).ok());
        let wrong = SectionDescriptor { pieces: vec![SectionPiece { condition: None, formula: SectionFormula::Nu(a * BigRational::from_integer(2.into())) }] };
        assert!(!verify_section(&cell, &wrong, &sample).ok());
    }

    #[test]
    fn over_a_base() {
        let base = PresentedCell::over_point(Scalar::zero(), Bound::Zero, Bound::Infinity, Scalar::int(1), SubgroupSpec::Full);
        let x = parse_term("x", &base_vars()).unwrap();
        let cell = PresentedCell {
            base: Base::Cell(Box::new(base)),
            center: CellFn::Term(parse_term("x^2", &base_vars()).unwrap()),
            nu: Bound::Fn(CellFn::Term(x)),
            mu: Bound::Infinity,
            lambda: Scalar::int(1),
            group: SubgroupSpec::Pn { n: 2 },
        };
        let s = check(&cell);
        let back = SectionDescriptor::from_json(&s.to_json(), cfg()).unwrap();
        assert_eq!(back, s);
    }
}
