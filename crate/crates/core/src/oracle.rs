//! Brute-force universe of residue-class representatives.
//!
//! A sample with window `B` and digit precision `k` holds 0 and every
//! `p^v u` with `-B <= v <= B`, `1 <= u < p^k` and `p ∤ u`, in order of
//! `v` then `u`. Every description that can decide membership at exact
//! rational points can be compared over it.

use std::cell::RefCell;
use std::collections::HashMap;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lang::eval::{EvalPoint, FormulaProgram, NormalProgram, TermTable, TermValue};
use crate::lang::{Formula, NormalForm};
use crate::padic::fast::FastRing;
use crate::padic::{PadicConfig, PadicNumber};

/// Default cap on the number of sample points.
pub const DEFAULT_CAP: u128 = 20_000_000;

/// One representative: zero, or `p^v u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SamplePoint {
    /// `None` for zero.
    pub v: Option<i64>,
    pub u: u64,
}

impl SamplePoint {
    pub const ZERO: SamplePoint = SamplePoint { v: None, u: 0 };

    pub fn new(v: i64, u: u64) -> Self {
        SamplePoint { v: Some(v), u }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_none()
    }

    pub fn to_rational(&self, prime: u32) -> BigRational {
        match self.v {
            None => BigRational::from_integer(0.into()),
            Some(v) => {
                let pk = num_traits::pow(BigInt::from(prime), v.unsigned_abs() as usize);
                let u = BigInt::from(self.u);
                if v >= 0 {
                    BigRational::from_integer(u * pk)
                } else {
                    BigRational::new(u, pk)
                }
            }
        }
    }

    /// The exact value carried to the working precision.
    pub fn to_padic(&self, cfg: PadicConfig) -> PadicNumber {
        cfg.rational(&self.to_rational(cfg.prime()))
    }

    pub fn eval_point(&self, ring: &FastRing) -> EvalPoint {
        let exact = vec![self.to_rational(ring.prime())];
        let fast = vec![match self.v {
            None => crate::padic::fast::Fx::Zero,
            Some(v) => ring.from_parts(v, self.u),
        }];
        EvalPoint { exact, fast }
    }

    pub fn display(&self, prime: u32) -> String {
        match self.v {
            None => "0".into(),
            Some(0) => self.u.to_string(),
            Some(v) => format!("{}*{prime}^{v}", self.u),
        }
    }
}

/// The enumerated universe.
#[derive(Debug, Clone)]
pub struct TruncatedSample {
    cfg: PadicConfig,
    window: u32,
    digits: u32,
}

impl TruncatedSample {
    pub fn new(cfg: PadicConfig, window: u32, digits: u32) -> Result<Self> {
        Self::with_cap(cfg, window, digits, DEFAULT_CAP)
    }

    pub fn with_cap(cfg: PadicConfig, window: u32, digits: u32, cap: u128) -> Result<Self> {
        if digits == 0 {
            return Err(Error::Config("sample digit precision must be at least 1".into()));
        }
        if digits > cfg.work_precision() {
            return Err(Error::Config(format!(
                "sample digits {digits} exceed the work precision {}",
                cfg.work_precision()
            )));
        }
        let size = Self::size_of(cfg.prime(), window, digits);
        if size > cap || (cfg.prime() as u128).pow(digits) > u64::MAX as u128 {
            return Err(Error::SizeCap { size, cap });
        }
        Ok(Self { cfg, window, digits })
    }

    /// `(2B+1)(p^k - p^(k-1)) + 1`.
    pub fn size_of(prime: u32, window: u32, digits: u32) -> u128 {
        let p = prime as u128;
        let units = p.saturating_pow(digits) - p.saturating_pow(digits - 1);
        (2 * window as u128 + 1).saturating_mul(units).saturating_add(1)
    }

    pub fn config(&self) -> PadicConfig {
        self.cfg
    }

    pub fn prime(&self) -> u32 {
        self.cfg.prime()
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn size(&self) -> u128 {
        Self::size_of(self.prime(), self.window, self.digits)
    }

    /// Units `1 <= u < p^k` prime to `p`, ascending.
    pub fn units(&self) -> impl Iterator<Item = u64> + Clone {
        let p = self.prime() as u64;
        (1..p.pow(self.digits)).filter(move |u| u % p != 0)
    }

    /// 0 first, then `v` ascending and `u` ascending.
    pub fn points(&self) -> impl Iterator<Item = SamplePoint> + '_ {
        let b = self.window as i64;
        std::iter::once(SamplePoint::ZERO)
            .chain((-b..=b).flat_map(move |v| self.units().map(move |u| SamplePoint::new(v, u))))
    }

    /// Points with valuation in `[lo, hi]` (clipped to the window).
    pub fn points_between(&self, lo: i64, hi: i64) -> impl Iterator<Item = SamplePoint> + '_ {
        let b = self.window as i64;
        (lo.max(-b)..=hi.min(b)).flat_map(move |v| self.units().map(move |u| SamplePoint::new(v, u)))
    }

    /// Writes one JSON object per point.
    pub fn export_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for pt in self.points() {
            let line = match pt.v {
                None => serde_json::json!({ "v": "inf", "u": "0" }),
                Some(v) => serde_json::json!({ "v": v, "u": pt.u.to_string() }),
            };
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Anything that decides membership of exact univariate points.
pub trait Membership {
    fn member(&self, pt: &SamplePoint) -> Result<bool>;
}

/// Formula membership, memoized on the values of its terms.
pub struct FormulaDecider {
    table: TermTable,
    prog: FormulaProgram,
    memo: RefCell<HashMap<Vec<TermValue>, bool>>,
}

impl FormulaDecider {
    pub fn new(f: &Formula, prime: u32) -> Result<Self> {
        let mut table = TermTable::new(prime, 1);
        let prog = FormulaProgram::compile(f, &mut table)?;
        Ok(Self { table, prog, memo: RefCell::new(HashMap::new()) })
    }
}

impl Membership for FormulaDecider {
    fn member(&self, pt: &SamplePoint) -> Result<bool> {
        let vals = self.table.values(&pt.eval_point(self.table.ring()));
        if let Some(b) = self.memo.borrow().get(&vals) {
            return Ok(*b);
        }
        let b = self.prog.holds(&vals);
        self.memo.borrow_mut().insert(vals, b);
        Ok(b)
    }
}

/// Normal form membership, memoized on the values of its terms.
pub struct NormalDecider {
    table: TermTable,
    prog: NormalProgram,
    memo: RefCell<HashMap<Vec<TermValue>, bool>>,
}

impl NormalDecider {
    pub fn new(nf: &NormalForm) -> Result<Self> {
        let mut table = TermTable::new(nf.prime(), 1);
        let prog = NormalProgram::compile(nf, &mut table)?;
        Ok(Self { table, prog, memo: RefCell::new(HashMap::new()) })
    }
}

impl Membership for NormalDecider {
    fn member(&self, pt: &SamplePoint) -> Result<bool> {
        let vals = self.table.values(&pt.eval_point(self.table.ring()));
        if let Some(b) = self.memo.borrow().get(&vals) {
            return Ok(*b);
        }
        let b = self.prog.holds(&vals);
        self.memo.borrow_mut().insert(vals, b);
        Ok(b)
    }
}

/// Truth of a formula at a sample point.
pub fn decide(f: &Formula, prime: u32, pt: &SamplePoint) -> Result<bool> {
    FormulaDecider::new(f, prime)?.member(pt)
}

/// Truth of a normal form at a sample point.
pub fn decide_normal(nf: &NormalForm, pt: &SamplePoint) -> Result<bool> {
    NormalDecider::new(nf)?.member(pt)
}

/// A point where two descriptions disagree; `None` marks an undecided
/// verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub point: SamplePoint,
    pub a: Option<bool>,
    pub b: Option<bool>,
}

/// Every sample point where the verdicts of `a` and `b` differ.
pub fn equiv(a: &dyn Membership, b: &dyn Membership, sample: &TruncatedSample) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for pt in sample.points() {
        let x = a.member(&pt).ok();
        let y = b.member(&pt).ok();
        if x.is_none() || x != y {
            out.push(Mismatch { point: pt, a: x, b: y });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{normalize, parse_formula, Vars};

    fn cfg(p: u32) -> PadicConfig {
        PadicConfig::new(p, 16).unwrap()
    }

    #[test]
    fn sizes_follow_the_counting_formula() {
        for (p, b, k, n) in [(3, 0, 1, 3), (5, 1, 1, 13), (2, 2, 3, 21)] {
            let s = TruncatedSample::new(cfg(p), b, k).unwrap();
            assert_eq!(s.size(), n);
            assert_eq!(s.points().count() as u128, n);
        }
        let s = TruncatedSample::new(cfg(3), 0, 1).unwrap();
        let pts: Vec<_> = s.points().map(|x| x.display(3)).collect();
        assert_eq!(pts, ["0", "1", "2"]);
    }

    #[test]
    fn size_cap_is_enforced() {
        assert!(matches!(TruncatedSample::with_cap(cfg(5), 4, 6, 1000), Err(Error::SizeCap { .. })));
        assert!(TruncatedSample::new(cfg(5), 1, 17).is_err());
    }

    #[test]
    fn decides_simple_formulas() {
        let v = Vars::univariate();
        let f = parse_formula("t in P_1", &v).unwrap();
        assert!(decide(&f, 5, &SamplePoint::new(3, 7)).unwrap());
        let z = parse_formula("t = 0", &v).unwrap();
        assert!(decide(&z, 5, &SamplePoint::ZERO).unwrap());
        assert!(!decide(&z, 5, &SamplePoint::new(0, 1)).unwrap());
        let sq = parse_formula("t in P_2", &v).unwrap();
        assert!(!decide(&sq, 5, &SamplePoint::new(0, 2)).unwrap());
        assert!(decide(&sq, 5, &SamplePoint::new(0, 4)).unwrap());
    }

    #[test]
    fn squares_and_fourth_powers_differ() {
        let v = Vars::univariate();
        let s = TruncatedSample::new(cfg(5), 2, 2).unwrap();
        let a = FormulaDecider::new(&parse_formula("t in P_2", &v).unwrap(), 5).unwrap();
        let b = FormulaDecider::new(&parse_formula("t in P_4", &v).unwrap(), 5).unwrap();
        assert!(!equiv(&a, &b, &s).is_empty());
        let nf = normalize(&parse_formula("t in P_2 && t in P_3", &v).unwrap(), &v, cfg(5)).unwrap();
        let c = NormalDecider::new(&nf).unwrap();
        let d = FormulaDecider::new(&parse_formula("t in P_6", &v).unwrap(), 5).unwrap();
        assert!(equiv(&c, &d, &s).is_empty());
    }

    #[test]
    fn jsonl_has_one_line_per_point() {
        let s = TruncatedSample::new(cfg(3), 1, 1).unwrap();
        let mut buf = Vec::new();
        s.export_jsonl(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }
}
