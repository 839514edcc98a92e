//! Negation normal form, a common power, and disjunctive normal form.
//!
//! Inside a conjunct all conditions on one term are merged into the set of
//! `P_N^*` cosets (plus possibly zero) the term may take. Expanding such a
//! set into one coset condition per conjunct is done by
//! [`NormalForm::expanded`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use super::ast::{Atom, Basic, Formula};
use super::eval::TermValue;
use super::term::{Term, Vars};
use crate::error::{Error, Result};
use crate::padic::{pn_table, PadicConfig};

/// Largest number of conjuncts a normal form may reach.
pub const MAX_CONJUNCTS: usize = 50_000;

/// A set of `P_N^*` cosets, optionally with zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetSet {
    zero: bool,
    count: usize,
    bits: Vec<u64>,
}

impl CosetSet {
    pub fn empty(count: usize) -> Self {
        Self { zero: false, count, bits: vec![0; count.div_ceil(64)] }
    }

    pub fn full(count: usize) -> Self {
        let mut s = Self::nonzero(count);
        s.zero = true;
        s
    }

    pub fn nonzero(count: usize) -> Self {
        let mut s = Self::empty(count);
        for i in 0..count {
            s.insert(i);
        }
        s
    }

    pub fn zero_only(count: usize) -> Self {
        let mut s = Self::empty(count);
        s.zero = true;
        s
    }

    pub fn single(count: usize, r: usize) -> Self {
        let mut s = Self::empty(count);
        s.insert(r);
        s
    }

    pub fn insert(&mut self, r: usize) {
        self.bits[r / 64] |= 1 << (r % 64);
    }

    pub fn set_zero(&mut self, z: bool) {
        self.zero = z;
    }

    pub fn has_zero(&self) -> bool {
        self.zero
    }

    pub fn has(&self, r: usize) -> bool {
        r < self.count && self.bits[r / 64] >> (r % 64) & 1 == 1
    }

    /// Membership of a value given by its coset, `None` meaning zero.
    pub fn contains(&self, coset: Option<usize>) -> bool {
        match coset {
            None => self.zero,
            Some(r) => self.has(r),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn cosets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.count).filter(|r| self.has(*r))
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() + self.zero as usize
    }

    pub fn is_empty(&self) -> bool {
        !self.zero && self.bits.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.count + 1
    }

    pub fn union(&self, o: &Self) -> Self {
        Self {
            zero: self.zero || o.zero,
            count: self.count,
            bits: self.bits.iter().zip(&o.bits).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersect(&self, o: &Self) -> Self {
        Self {
            zero: self.zero && o.zero,
            count: self.count,
            bits: self.bits.iter().zip(&o.bits).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn complement(&self) -> Self {
        let mut s = Self::empty(self.count);
        s.zero = !self.zero;
        for r in 0..self.count {
            if !self.has(r) {
                s.insert(r);
            }
        }
        s
    }
}

/// One disjunct of a normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conjunct {
    cosets: BTreeMap<Term, CosetSet>,
    norms: BTreeSet<(Term, Term)>,
}

impl Conjunct {
    pub fn truth() -> Self {
        Self { cosets: BTreeMap::new(), norms: BTreeSet::new() }
    }

    /// Allowed cosets of each constrained term.
    pub fn cosets(&self) -> &BTreeMap<Term, CosetSet> {
        &self.cosets
    }

    /// Pairs `(g, f)` with `|g| <= |f|`.
    pub fn norms(&self) -> &BTreeSet<(Term, Term)> {
        &self.norms
    }

    pub fn is_true(&self) -> bool {
        self.cosets.is_empty() && self.norms.is_empty()
    }

    /// Adds a coset constraint; `false` when the conjunct became empty.
    fn restrict(&mut self, t: Term, s: CosetSet) -> bool {
        let merged = match self.cosets.get(&t) {
            Some(old) => old.intersect(&s),
            None => s,
        };
        if merged.is_empty() {
            return false;
        }
        if merged.is_full() {
            self.cosets.remove(&t);
        } else {
            self.cosets.insert(t, merged);
        }
        true
    }

    fn meet(&self, o: &Self) -> Option<Self> {
        let mut c = self.clone();
        for (t, s) in &o.cosets {
            if !c.restrict(t.clone(), s.clone()) {
                return None;
            }
        }
        c.norms.extend(o.norms.iter().cloned());
        Some(c)
    }

    /// Whether the conjunct holds for the given term values.
    pub fn holds(&self, value: &dyn Fn(&Term) -> TermValue, table: &crate::padic::CosetTable) -> bool {
        self.cosets.iter().all(|(t, s)| s.contains(value(t).coset(table)))
            && self.norms.iter().all(|(g, f)| value(g).norm_le(&value(f)))
    }
}

/// A disjunction of conjuncts over a single power `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    prime: u32,
    power: u32,
    vars: Vars,
    conjuncts: Vec<Conjunct>,
}

impl NormalForm {
    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn conjuncts(&self) -> &[Conjunct] {
        &self.conjuncts
    }

    pub fn is_false(&self) -> bool {
        self.conjuncts.is_empty()
    }

    /// All terms that occur, in order of first appearance.
    pub fn terms(&self) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        for c in &self.conjuncts {
            for t in c.cosets.keys().chain(c.norms.iter().flat_map(|(g, f)| [g, f])) {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
        }
        out
    }

    /// Basic conditions of a coset set on `t`, one per alternative.
    fn alternatives(&self, t: &Term, s: &CosetSet) -> Vec<Basic> {
        let mut out = Vec::new();
        let mut skip_identity = false;
        if s.has_zero() {
            if s.has(0) {
                out.push(Basic::in_pn(t.clone(), self.power));
                skip_identity = true;
            } else {
                out.push(Basic::Zero(t.clone()));
            }
        }
        for r in s.cosets() {
            if r == 0 && skip_identity {
                continue;
            }
            out.push(Basic::coset(t.clone(), self.power, r));
        }
        out
    }

    /// Every conjunct written as a set of basic conditions; coset sets are
    /// multiplied out. Fails with `SizeCap` past `cap` conjuncts.
    pub fn expanded(&self, cap: usize) -> Result<Vec<BTreeSet<Basic>>> {
        let mut out = Vec::new();
        for c in &self.conjuncts {
            let mut partial: Vec<BTreeSet<Basic>> =
                vec![c.norms.iter().map(|(g, f)| Basic::NormLe(g.clone(), f.clone())).collect()];
            for (t, s) in &c.cosets {
                let alts = self.alternatives(t, s);
                let mut next = Vec::with_capacity(partial.len() * alts.len());
                for p in &partial {
                    for a in &alts {
                        let mut q = p.clone();
                        q.insert(a.clone());
                        next.push(q);
                    }
                }
                partial = next;
                if out.len() + partial.len() > cap {
                    return Err(Error::SizeCap { size: (out.len() + partial.len()) as u128, cap: cap as u128 });
                }
            }
            out.extend(partial);
        }
        Ok(out)
    }

    /// The normal form as a negation-free formula.
    pub fn to_formula(&self) -> Formula {
        Formula::any(self.conjuncts.iter().map(|c| {
            let sets = c.cosets.iter().map(|(t, s)| {
                Formula::any(self.alternatives(t, s).into_iter().map(Formula::basic))
            });
            let norms = c.norms.iter().map(|(g, f)| Formula::basic(Basic::NormLe(g.clone(), f.clone())));
            Formula::all(sets.chain(norms))
        }))
    }
}

impl std::fmt::Display for NormalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_formula().display(&self.vars))
    }
}

/// Exponent of the unit group `(Z/p^M)^*`.
pub fn unit_group_exponent(prime: u32, m: u32) -> u64 {
    if prime == 2 {
        match m {
            1 => 1,
            2 => 2,
            _ => 1u64 << (m - 2),
        }
    } else {
        (prime as u64 - 1) * (prime as u64).pow(m - 1)
    }
}

/// Power whose cosets refine `Q_{N,M}`.
pub fn q_power(prime: u32, n: u32, m: u32) -> Result<u32> {
    let e = (n as u64).lcm(&unit_group_exponent(prime, m));
    u32::try_from(e).map_err(|_| Error::Config(format!("Q({n},{m}) needs too large a power")))
}

/// Formula for `not c`, free of negation.
pub fn complement_basic(c: &Basic, cfg: PadicConfig) -> Result<Formula> {
    let p = cfg.prime();
    Ok(match c {
        Basic::Zero(f) => Formula::basic(Basic::nonzero(f.clone())),
        Basic::NormLe(g, f) => {
            // v(g) < v(f) iff g != 0 and v(p g) <= v(f)
            let pg = g.scale(&BigRational::from_integer(p.into()), nvars_of(g, f));
            Formula::and(Formula::basic(Basic::NormLe(f.clone(), pg)), Formula::basic(Basic::nonzero(g.clone())))
        }
        Basic::PowerCoset { term, n, r, with_zero } => {
            let t = pn_table(p, *n)?;
            t.check_index(*r)?;
            let mut parts = Vec::new();
            if !*with_zero {
                if *r == 0 {
                    parts.push(Formula::basic(Basic::Zero(term.clone())));
                } else {
                    parts.push(Formula::basic(Basic::in_pn(term.clone(), *n)));
                }
            }
            for s in 1..t.count() {
                if s != *r {
                    parts.push(Formula::basic(Basic::coset(term.clone(), *n, s)));
                }
            }
            Formula::any(parts)
        }
    })
}

fn nvars_of(g: &Term, f: &Term) -> usize {
    for t in [g, f] {
        if let Term::Poly(p) = t {
            return p.nvars();
        }
    }
    1
}

/// Least common multiple of every power in the formula, after rewriting
/// `Q(N,M)` conditions.
pub fn common_power(f: &Formula, prime: u32) -> Result<u32> {
    let mut n: u64 = 1;
    for a in f.atoms() {
        let k = match a {
            Atom::Basic(Basic::PowerCoset { n, .. }) => *n,
            Atom::InQ { n, m, .. } => q_power(prime, *n, *m)?,
            _ => 1,
        };
        if k == 0 {
            return Err(Error::Config("powers must be at least 1".into()));
        }
        n = n.lcm(&(k as u64));
    }
    u32::try_from(n).map_err(|_| Error::Config("common power overflows".into()))
}

/// Negation-free formula over literals.
enum Nnf {
    Const(bool),
    Set(Term, CosetSet),
    Norm(Term, Term),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

struct Ctx {
    prime: u32,
    power: u32,
    nvars: usize,
    count: usize,
    /// Lifting maps from `P_{N0}` cosets to `P_N` cosets.
    lifts: HashMap<u32, Vec<usize>>,
}

impl Ctx {
    fn lift(&mut self, n0: u32) -> Result<&Vec<usize>> {
        if !self.lifts.contains_key(&n0) {
            let big = pn_table(self.prime, self.power)?;
            let small = pn_table(self.prime, n0)?;
            let map = (0..big.count())
                .map(|s| {
                    let (i, u) = big.rep_parts(s);
                    small.index_of(i as i64, u)
                })
                .collect();
            self.lifts.insert(n0, map);
        }
        Ok(&self.lifts[&n0])
    }

    fn coset_literal(&mut self, n0: u32, r: usize, with_zero: bool) -> Result<CosetSet> {
        pn_table(self.prime, n0)?.check_index(r)?;
        let count = self.count;
        let map = self.lift(n0)?;
        let mut s = CosetSet::empty(count);
        for (i, &m) in map.iter().enumerate() {
            if m == r {
                s.insert(i);
            }
        }
        s.set_zero(with_zero);
        Ok(s)
    }

    fn q_literal(&mut self, n: u32, m: u32) -> Result<CosetSet> {
        let big = pn_table(self.prime, self.power)?;
        let pm = (self.prime as u64).pow(m);
        let mut s = CosetSet::empty(self.count);
        for i in 0..big.count() {
            let (k, u) = big.rep_parts(i);
            if k % n == 0 && u % pm == 1 % pm {
                s.insert(i);
            }
        }
        s.set_zero(true);
        Ok(s)
    }

    /// Literal for an atom, or its negation.
    fn atom(&mut self, a: &Atom, positive: bool) -> Result<Nnf> {
        let (term, set) = match a {
            Atom::Basic(Basic::Zero(f)) => (f, CosetSet::zero_only(self.count)),
            Atom::Basic(Basic::PowerCoset { term, n, r, with_zero }) => {
                (term, self.coset_literal(*n, *r, *with_zero)?)
            }
            Atom::InQ { term, n, m } => (term, self.q_literal(*n, *m)?),
            Atom::Basic(Basic::NormLe(g, f)) => {
                if positive {
                    return Ok(self.norm(g.clone(), f.clone()));
                }
                let pg = g.scale(&BigRational::from_integer(self.prime.into()), self.nvars);
                return Ok(Nnf::And(vec![
                    self.norm(f.clone(), pg),
                    self.set(g.clone(), CosetSet::nonzero(self.count)),
                ]));
            }
        };
        let set = if positive { set } else { set.complement() };
        Ok(self.set(term.clone(), set))
    }

    fn value(&self, t: &Term) -> Option<TermValue> {
        t.as_constant().map(|c| TermValue::from_rational(&c, self.prime, 1))
    }

    fn set(&self, t: Term, s: CosetSet) -> Nnf {
        if let Some(c) = t.as_constant() {
            let table = pn_table(self.prime, self.power).expect("table was built");
            let v = TermValue::from_rational(&c, self.prime, table.digits());
            return Nnf::Const(s.contains(v.coset(&table)));
        }
        if s.is_empty() {
            return Nnf::Const(false);
        }
        if s.is_full() {
            return Nnf::Const(true);
        }
        Nnf::Set(t, s)
    }

    fn norm(&self, g: Term, f: Term) -> Nnf {
        if let Some(c) = g.as_constant() {
            if c.is_zero() {
                return Nnf::Const(true);
            }
        }
        if let Some(c) = f.as_constant() {
            if c.is_zero() {
                return self.set(g, CosetSet::zero_only(self.count));
            }
        }
        if let (Some(a), Some(b)) = (self.value(&g), self.value(&f)) {
            return Nnf::Const(a.norm_le(&b));
        }
        Nnf::Norm(g, f)
    }

    fn nnf(&mut self, f: &Formula, positive: bool) -> Result<Nnf> {
        Ok(match f {
            Formula::True => Nnf::Const(positive),
            Formula::False => Nnf::Const(!positive),
            Formula::Atom(a) => self.atom(a, positive)?,
            Formula::Not(a) => self.nnf(a, !positive)?,
            Formula::And(a, b) | Formula::Or(a, b) => {
                let l = self.nnf(a, positive)?;
                let r = self.nnf(b, positive)?;
                if matches!(f, Formula::And(..)) == positive {
                    Nnf::And(vec![l, r])
                } else {
                    Nnf::Or(vec![l, r])
                }
            }
        })
    }

    fn dnf(&self, f: Nnf) -> Result<Vec<Conjunct>> {
        Ok(match f {
            Nnf::Const(true) => vec![Conjunct::truth()],
            Nnf::Const(false) => vec![],
            Nnf::Set(t, s) => {
                let mut c = Conjunct::truth();
                c.restrict(t, s);
                vec![c]
            }
            Nnf::Norm(g, f) => {
                let mut c = Conjunct::truth();
                c.norms.insert((g, f));
                vec![c]
            }
            Nnf::Or(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(self.dnf(p)?);
                    if out.len() > MAX_CONJUNCTS {
                        return Err(Error::SizeCap { size: out.len() as u128, cap: MAX_CONJUNCTS as u128 });
                    }
                }
                simplify(out)
            }
            Nnf::And(parts) => {
                let mut acc = vec![Conjunct::truth()];
                for p in parts {
                    let d = self.dnf(p)?;
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &d {
                            if let Some(c) = a.meet(b) {
                                next.push(c);
                            }
                        }
                        if next.len() > MAX_CONJUNCTS {
                            return Err(Error::SizeCap { size: next.len() as u128, cap: MAX_CONJUNCTS as u128 });
                        }
                    }
                    acc = simplify(next);
                }
                acc
            }
        })
    }
}

/// Removes duplicates and merges conjuncts that differ in one coset set.
fn simplify(mut cs: Vec<Conjunct>) -> Vec<Conjunct> {
    if cs.iter().any(Conjunct::is_true) {
        return vec![Conjunct::truth()];
    }
    loop {
        cs.sort();
        cs.dedup();
        let mut changed = false;
        let mut groups: BTreeMap<(Conjunct, Term), Vec<usize>> = BTreeMap::new();
        for (i, c) in cs.iter().enumerate() {
            for t in c.cosets.keys() {
                let mut rest = c.clone();
                rest.cosets.remove(t);
                groups.entry((rest, t.clone())).or_default().push(i);
            }
        }
        let mut used = vec![false; cs.len()];
        let mut out = Vec::new();
        for ((rest, t), idx) in groups {
            let idx: Vec<usize> = idx.into_iter().filter(|i| !used[*i]).collect();
            if idx.len() < 2 {
                continue;
            }
            let mut s = cs[idx[0]].cosets[&t].clone();
            for &i in &idx[1..] {
                s = s.union(&cs[i].cosets[&t]);
            }
            for &i in &idx {
                used[i] = true;
            }
            let mut c = rest;
            if !s.is_full() {
                c.cosets.insert(t, s);
            }
            out.push(c);
            changed = true;
        }
        for (i, c) in cs.into_iter().enumerate() {
            if !used[i] {
                out.push(c);
            }
        }
        cs = out;
        if cs.iter().any(Conjunct::is_true) {
            return vec![Conjunct::truth()];
        }
        if !changed {
            cs.sort();
            return cs;
        }
    }
}

/// Normal form of a formula over the given variables.
pub fn normalize(f: &Formula, vars: &Vars, cfg: PadicConfig) -> Result<NormalForm> {
    normalize_at(f, vars, cfg, 1)
}

/// Normal form whose power is a multiple of `at_least`.
pub fn normalize_at(f: &Formula, vars: &Vars, cfg: PadicConfig, at_least: u32) -> Result<NormalForm> {
    let prime = cfg.prime();
    let power = (common_power(f, prime)? as u64).lcm(&(at_least.max(1) as u64));
    let power = u32::try_from(power).map_err(|_| Error::Config("common power overflows".into()))?;
    let table = pn_table(prime, power)?;
    let mut ctx = Ctx { prime, power, nvars: vars.len(), count: table.count(), lifts: HashMap::new() };
    let nnf = ctx.nnf(f, true)?;
    let conjuncts = ctx.dnf(nnf)?;
    Ok(NormalForm { prime, power, vars: vars.clone(), conjuncts })
}
