//! Cell decomposition of a univariate normal form.

use std::sync::Arc;

use num_rational::BigRational;
use serde_json::{json, Value};

use super::tree::{Region, Tree};
use super::{Bound, PresentedCell};
use crate::error::{Error, Result};
use crate::lang::eval::{EvalPoint, NormalProgram, TermTable, TermValue};
use crate::lang::{NormalForm, Term};
use crate::padic::{decision_digits, pn_table, CosetTable, PadicConfig, SubgroupSpec};
use crate::roots::split;
use crate::scalar::Scalar;

/// Cells whose union is the set defined by a normal form, each inside
/// one of its conjuncts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellList {
    pub prime: u32,
    pub power: u32,
    pub cells: Vec<PresentedCell>,
    /// Index of a conjunct containing each cell.
    pub conjunct: Vec<usize>,
}

impl CellList {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .zip(&self.conjunct)
            .map(|(c, k)| {
                let mut v = c.to_json();
                v["conjunct"] = json!(k);
                v
            })
            .collect();
        json!({ "prime": self.prime, "N": self.power, "cells": cells })
    }

    pub fn from_json(v: &Value, cfg: PadicConfig) -> Result<Self> {
        let bad = |m: &str| Error::Syntax { pos: 0, msg: m.into() };
        let arr = v.get("cells").and_then(Value::as_array).ok_or_else(|| bad("cell list needs `cells`"))?;
        let mut cells = Vec::new();
        let mut conjunct = Vec::new();
        for c in arr {
            cells.push(PresentedCell::from_json(c, cfg)?);
            conjunct.push(c.get("conjunct").and_then(Value::as_u64).unwrap_or(0) as usize);
        }
        let power = v.get("N").and_then(Value::as_u64).unwrap_or(1) as u32;
        Ok(Self { prime: cfg.prime(), power, cells, conjunct })
    }
}

/// `f = lead * prod (t - c_j)^m_j` over the shared list of centers.
#[derive(Debug, Clone)]
pub(crate) struct Factorization {
    pub lead: BigRational,
    pub mults: Vec<i32>,
}

/// Shared centers of a family of univariate terms and the exponent of
/// each term at each center.
#[derive(Debug, Clone)]
pub(crate) struct Centers {
    pub values: Vec<Scalar>,
    pub factors: Vec<Factorization>,
}

fn same_center(a: &Scalar, b: &Scalar, cfg: PadicConfig) -> bool {
    match (a, b) {
        (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
        (Scalar::Exact(_), _) | (_, Scalar::Exact(_)) => false,
        _ => a.sub(b, cfg).is_zero(),
    }
}

impl Centers {
    pub fn of_terms<'a>(terms: impl IntoIterator<Item = &'a Term>, nvars: usize, cfg: PadicConfig) -> Result<Self> {
        let mut values: Vec<Scalar> = Vec::new();
        let mut raw: Vec<(BigRational, Vec<(usize, i32)>)> = Vec::new();
        let slot = |c: Scalar, values: &mut Vec<Scalar>| -> usize {
            match values.iter().position(|x| same_center(x, &c, cfg)) {
                Some(i) => i,
                None => {
                    values.push(c);
                    values.len() - 1
                }
            }
        };
        for t in terms {
            match t {
                Term::Poly(p) => {
                    if let Some(c) = p.as_constant() {
                        raw.push((c, Vec::new()));
                        continue;
                    }
                    let u = p
                        .to_uni(nvars - 1)
                        .filter(|_| p.only_uses(nvars - 1))
                        .ok_or_else(|| Error::Arity("cell decomposition needs terms in the last variable only".into()))?;
                    let s = split(&u, cfg)?;
                    let ms = s.roots.into_iter().map(|r| (slot(r.value, &mut values), r.multiplicity as i32)).collect();
                    raw.push((s.lead, ms));
                }
                Term::Factored(f) => {
                    let ms = f.factors().iter().map(|(c, e)| (slot(Scalar::Exact(c.clone()), &mut values), *e)).collect();
                    raw.push((f.coeff().clone(), ms));
                }
            }
        }
        let factors = raw
            .into_iter()
            .map(|(lead, ms)| {
                let mut mults = vec![0; values.len()];
                for (i, m) in ms {
                    mults[i] += m;
                }
                Factorization { lead, mults }
            })
            .collect();
        Ok(Self { values, factors })
    }

    /// `lead * prod_{j not in inside} (a - c_j)^m_j` and the summed
    /// exponent over `inside`.
    pub fn outer_constant(&self, term: usize, a: &Scalar, inside: &[usize], cfg: PadicConfig) -> Result<(Scalar, i32)> {
        let f = &self.factors[term];
        let mut h = Scalar::Exact(f.lead.clone());
        let mut alpha = 0;
        for (j, &m) in f.mults.iter().enumerate() {
            if m == 0 {
                continue;
            }
            if inside.contains(&j) {
                alpha += m;
            } else {
                h = h.mul(&a.sub(&self.values[j], cfg).powi(m as i64)?, cfg);
            }
        }
        Ok((h, alpha))
    }

    /// Value of a term at one of the centers; zeros and poles give 0.
    pub fn at_center(&self, term: usize, j: usize, cfg: PadicConfig) -> Result<Scalar> {
        if self.factors[term].mults[j] != 0 {
            return Ok(Scalar::zero());
        }
        let all: Vec<usize> = Vec::new();
        Ok(self.outer_constant(term, &self.values[j], &all, cfg)?.0)
    }
}

pub(crate) fn term_value(s: &Scalar, prime: u32, digits: u32) -> Result<TermValue> {
    match s {
        Scalar::Exact(q) => Ok(TermValue::from_rational(q, prime, digits)),
        Scalar::Approx(x) => TermValue::from_padic(x, digits),
    }
}

/// Valuations and cosets of a term on an annulus: `v = v0 + alpha w`,
/// coset `coset0 * lambda^alpha`.
#[derive(Debug, Clone, Copy)]
struct Linear {
    v0: i64,
    coset0: usize,
    alpha: i32,
}

fn coset_pow(table: &CosetTable, c: usize, e: i32) -> usize {
    let base = if e < 0 { table.inv_index(c) } else { c };
    let mut acc = 0;
    for _ in 0..e.unsigned_abs() {
        acc = table.mul_index(acc, base);
    }
    acc
}

fn value_of(table: &CosetTable, coset: usize, v: i64) -> TermValue {
    TermValue::Unit { v, res: table.rep_parts(coset).1 }
}

/// Splits the integers `w` in `[lo, hi]` with `w = class (mod step)` into
/// maximal runs on which `label` is constant and `Some`. `breaks` bounds
/// the region where `label` may change.
pub(crate) fn runs<T: Copy + PartialEq>(
    lo: Option<i64>,
    hi: Option<i64>,
    step: i64,
    class: i64,
    breaks: Option<(i64, i64)>,
    mut label: impl FnMut(i64) -> Option<T>,
) -> Vec<(Option<i64>, Option<i64>, T)> {
    let congruent_up = |x: i64| x + (class - x).rem_euclid(step);
    let congruent_down = |x: i64| x - (x - class).rem_euclid(step);
    let (wl, wh) = match breaks {
        Some((a, b)) => (a - step - 1, b + step + 1),
        None => {
            let anchor = lo.or(hi).unwrap_or(0);
            (anchor - step, anchor + step)
        }
    };
    let from = lo.map_or(wl, |l| l.max(wl));
    let to = hi.map_or(wh, |h| h.min(wh));
    let mut pts: Vec<i64> = if from <= to {
        // one extra period on each side keeps every class inside the range
        let from = lo.map_or(from - step, |l| l.max(from - step));
        let to = hi.map_or(to + step, |h| h.min(to + step));
        (congruent_up(from)..=to).step_by(step as usize).collect()
    } else if let Some(h) = hi.filter(|h| *h < wl) {
        let w = congruent_down(h);
        if lo.is_some_and(|l| w < l) { vec![] } else { vec![w] }
    } else {
        let Some(l) = lo.filter(|l| hi.is_none_or(|h| *l <= h)) else { return Vec::new() };
        let w = congruent_up(l);
        if hi.is_some_and(|h| w > h) { vec![] } else { vec![w] }
    };
    pts.retain(|w| lo.is_none_or(|l| *w >= l) && hi.is_none_or(|h| *w <= h));
    let mut out: Vec<(Option<i64>, Option<i64>, T)> = Vec::new();
    let mut cur: Option<(usize, usize, T)> = None;
    let labels: Vec<Option<T>> = pts.iter().map(|w| label(*w)).collect();
    for (i, l) in labels.iter().enumerate() {
        match (cur, l) {
            (Some((s, _, t)), Some(x)) if t == *x => cur = Some((s, i, t)),
            (c, l) => {
                if let Some(c) = c {
                    out.push(close(&pts, c, lo, hi, step, class));
                }
                cur = l.map(|x| (i, i, x));
            }
        }
    }
    if let Some(c) = cur {
        out.push(close(&pts, c, lo, hi, step, class));
    }
    out
}

fn close<T>(pts: &[i64], (s, e, t): (usize, usize, T), lo: Option<i64>, hi: Option<i64>, step: i64, class: i64) -> (Option<i64>, Option<i64>, T) {
    let start = if s == 0 { lo.map(|l| l + (class - l).rem_euclid(step)) } else { Some(pts[s]) };
    let end = if e + 1 == pts.len() { hi.map(|h| h - (h - class).rem_euclid(step)) } else { Some(pts[e]) };
    (start, end, t)
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// Levels that show every verdict an annulus can produce: the window
/// around the thresholds, padded so that each unbounded side keeps `3n`
/// levels past the last threshold.
fn probe_levels(lo: Option<i64>, hi: Option<i64>, breaks: Option<(i64, i64)>, n: i64) -> Vec<i64> {
    let (l, h) = match breaks {
        Some((a, b)) => (a - 3 * n - 1, b + 3 * n + 1),
        None => {
            let anchor = lo.or(hi).unwrap_or(0);
            (anchor, anchor)
        }
    };
    let h_in = hi.map_or(h, |x| x.min(h));
    let l_in = lo.map_or(l, |x| x.max(l));
    let lower = lo.map_or(l.min(h_in - 3 * n), |x| x.max(l.min(h_in - 3 * n)));
    let upper = hi.map_or(h.max(l_in + 3 * n), |x| x.min(h.max(l_in + 3 * n)));
    (lower..=upper).collect()
}

struct Decomposer<'a> {
    cfg: PadicConfig,
    centers: Centers,
    table: TermTable,
    prog: NormalProgram,
    ct: Arc<CosetTable>,
    digits: u32,
    out: &'a mut CellList,
}

impl Decomposer<'_> {
    fn eval_at(&self, vals: &[TermValue]) -> Option<usize> {
        self.prog.first_conjunct(vals)
    }

    fn point_values(&self, j: usize) -> Result<Vec<TermValue>> {
        let p = self.cfg.prime();
        match &self.centers.values[j] {
            Scalar::Exact(q) => Ok(self.table.values(&EvalPoint::new(self.table.ring(), vec![q.clone()]))),
            Scalar::Approx(_) => (0..self.table.len())
                .map(|i| term_value(&self.centers.at_center(i, j, self.cfg)?, p, self.digits))
                .collect(),
        }
    }

    fn push(&mut self, cell: PresentedCell, k: usize) {
        self.out.cells.push(cell);
        self.out.conjunct.push(k);
    }

    fn region(&mut self, r: &Region) -> Result<()> {
        let p = self.cfg.prime();
        match r {
            Region::Point(j) => {
                if let Some(k) = self.eval_at(&self.point_values(*j)?) {
                    self.push(PresentedCell::point(self.centers.values[*j].clone()), k);
                }
            }
            Region::Ball { center, radius } => {
                let vals = self.table.values(&EvalPoint::new(self.table.ring(), vec![center.clone()]));
                if let Some(k) = self.eval_at(&vals) {
                    let c = Scalar::Exact(center.clone());
                    self.push(PresentedCell::point(c.clone()), k);
                    let mu = radius.map_or(Bound::Infinity, |r| Bound::power(p, r));
                    self.push(PresentedCell::over_point(c, Bound::Zero, mu, Scalar::int(1), SubgroupSpec::Full), k);
                }
            }
            Region::Annulus { center, inside, lo, hi } => self.annulus(*center, inside, *lo, *hi)?,
        }
        Ok(())
    }

    fn annulus(&mut self, a: usize, inside: &[usize], lo: Option<i64>, hi: Option<i64>) -> Result<()> {
        let p = self.cfg.prime();
        let ca = self.centers.values[a].clone();
        let mut lin = Vec::with_capacity(self.table.len());
        for i in 0..self.table.len() {
            let (h, alpha) = self.centers.outer_constant(i, &ca, inside, self.cfg)?;
            let hv = term_value(&h, p, self.digits)?;
            let (v0, coset0) = match hv {
                TermValue::Unit { v, res } => (v, self.ct.index_of(v, res)),
                TermValue::Zero => return Err(Error::Internal("a term vanishes identically on an annulus".into())),
            };
            lin.push(Linear { v0, coset0, alpha });
        }
        let mut thresholds: Vec<(i64, i64)> = Vec::new();
        for (g, f) in self.prog.norm_pairs() {
            let (lg, lf) = (lin[g], lin[f]);
            let den = (lg.alpha - lf.alpha) as i64;
            if den != 0 {
                let num = lf.v0 - lg.v0;
                let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
                let fl = floor_div(num, den);
                thresholds.push((fl, fl + 1));
            }
        }
        let breaks = if thresholds.is_empty() {
            None
        } else {
            Some((thresholds.iter().map(|x| x.0).min().unwrap(), thresholds.iter().map(|x| x.1).max().unwrap()))
        };
        let n = self.ct.period() as i64;
        let count = self.ct.count();
        let ct = self.ct.clone();
        let truth = |lam: usize, w: i64, this: &Self| -> Option<usize> {
            let vals: Vec<TermValue> = lin
                .iter()
                .map(|l| {
                    let c = ct.mul_index(l.coset0, coset_pow(&ct, lam, l.alpha));
                    value_of(&ct, c, l.v0 + l.alpha as i64 * w)
                })
                .collect();
            this.eval_at(&vals)
        };
        let lam_v = |lam: usize| ct.rep_parts(lam).0 as i64;
        // coset-blind when every level sees the same verdict from all cosets
        let ws = probe_levels(lo, hi, breaks, n);
        let mut verdicts = Vec::with_capacity(ws.len());
        let mut blind = count > 1 && !ws.is_empty();
        for &w in &ws {
            let mut seen: Option<Option<usize>> = None;
            for lam in (0..count).filter(|l| (lam_v(*l) - w).rem_euclid(n) == 0) {
                let t = truth(lam, w, self);
                match seen {
                    None => seen = Some(t),
                    Some(s) if s != t => blind = false,
                    _ => {}
                }
            }
            verdicts.push(seen.flatten());
            if !blind {
                break;
            }
        }
        if blind {
            // beyond the probed levels only the class of w can matter
            let m = (n as usize).min(verdicts.len());
            let flat = |xs: &[Option<usize>]| xs.windows(2).all(|x| x[0] == x[1]);
            if lo.is_none_or(|l| l < ws[0]) && !flat(&verdicts[..m]) {
                blind = false;
            }
            if hi.is_none_or(|h| h > *ws.last().unwrap()) && !flat(&verdicts[verdicts.len() - m..]) {
                blind = false;
            }
        }
        if count == 1 || blind {
            let pick = |w: i64| (0..count).find(|l| (lam_v(*l) - w).rem_euclid(n) == 0).unwrap();
            let span = match (ws.first(), ws.last()) {
                (Some(a), Some(b)) => Some((a + 2, b - 2)),
                _ => breaks,
            };
            let rs = runs(lo, hi, 1, 0, span, |w| truth(pick(w), w, self));
            for (s, e, k) in rs {
                let cell = PresentedCell::over_point(
                    ca.clone(),
                    e.map_or(Bound::Zero, |e| Bound::power(p, e)),
                    s.map_or(Bound::Infinity, |s| Bound::power(p, s)),
                    Scalar::int(1),
                    SubgroupSpec::Full,
                );
                self.push(cell, k);
            }
            return Ok(());
        }
        for lam in 0..count {
            let class = lam_v(lam);
            let rs = runs(lo, hi, n, class, breaks, |w| truth(lam, w, self));
            for (s, e, k) in rs {
                if let (Some(s), Some(e)) = (s, e) {
                    if s > e {
                        continue;
                    }
                }
                let cell = PresentedCell::over_point(
                    ca.clone(),
                    e.map_or(Bound::Zero, |e| Bound::power(p, e)),
                    s.map_or(Bound::Infinity, |s| Bound::power(p, s)),
                    Scalar::Exact(ct.rep_rational(lam)),
                    SubgroupSpec::Pn { n: n as u32 },
                );
                self.push(cell, k);
            }
        }
        Ok(())
    }
}

/// Cells whose disjoint union is the set a univariate normal form
/// defines.
pub fn decompose1(nf: &NormalForm, cfg: PadicConfig) -> Result<CellList> {
    if nf.prime() != cfg.prime() {
        return Err(Error::Config(format!("normal form over Q_{} used with p = {}", nf.prime(), cfg.prime())));
    }
    if nf.vars().len() != 1 {
        return Err(Error::Arity(format!("decompose1 needs one variable, got {}", nf.vars().len())));
    }
    let mut out = CellList { prime: cfg.prime(), power: nf.power(), cells: Vec::new(), conjunct: Vec::new() };
    if nf.is_false() {
        return Ok(out);
    }
    let mut table = TermTable::new(cfg.prime(), 1);
    let prog = NormalProgram::compile(nf, &mut table)?;
    let ct = pn_table(cfg.prime(), nf.power())?;
    let digits = table.digits();
    let centers = Centers::of_terms(table.terms(), 1, cfg)?;
    let level = decision_digits(cfg.prime(), nf.power());
    let regions = Tree::new(&centers.values, level, cfg)?.regions()?;
    let mut d = Decomposer { cfg, centers, table, prog, ct, digits, out: &mut out };
    for r in &regions {
        d.region(r)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::check_partition;
    use crate::lang::{normalize, parse_formula, Vars};
    use crate::oracle::TruncatedSample;

    fn run(text: &str, p: u32, b: u32, k: u32) -> CellList {
        let cfg = PadicConfig::new(p, 24).unwrap();
        let v = Vars::univariate();
        let nf = normalize(&parse_formula(text, &v).unwrap(), &v, cfg).unwrap();
        let cells = decompose1(&nf, cfg).unwrap();
        let s = TruncatedSample::new(cfg, b, k).unwrap();
        let rep = check_partition(&cells, &nf, &s).unwrap();
        assert!(rep.ok(), "{text} at p={p}: {:?}", (rep.overlaps.len(), rep.uncovered.first(), rep.spurious.first(), rep.undecided.first()));
        cells
    }

    #[test]
    fn squares_form_two_cells() {
        assert_eq!(run("t in P_2", 5, 3, 3).len(), 2);
    }

    #[test]
    fn small_norm_near_two_roots() {
        assert_eq!(run("|t^2 - 1| <= |25|", 5, 3, 4).len(), 4);
    }

    #[test]
    fn assorted_formulas_partition() {
        for (f, p) in [
            ("t^2 - 2 in P_2", 7),
            ("t^2 - 1 in P_3 && |t| < |t - 1|", 2),
            ("!(t*(t-1) in P_2) || t = 3", 3),
            ("|t - 1/3| <= |t^2|", 5),
            ("t^2 + 1 in Q(2, 2)", 5),
            ("(t - 2)/(t + 1) in P_2", 3),
            ("t in P_4", 2),
            ("true", 3),
            ("t^2 - 7 = 0", 3),
        ] {
            run(f, p, 3, 4);
        }
    }
}
