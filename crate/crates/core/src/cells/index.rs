//! Bulk membership of sample points in cells over a point.

use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;

use super::{CellList, PresentedCell};
use crate::error::{Error, Result};
use crate::lang::eval::TermValue;
use crate::lang::NormalForm;
use crate::oracle::{Membership, NormalDecider, SamplePoint, TruncatedSample};
use crate::padic::fast::{rational_parts, FastRing, Fx};
use crate::padic::{coset_table, CosetTable, PadicConfig, SubgroupSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
enum Group {
    Full,
    Table(Arc<CosetTable>),
    Q { n: i64, modulus: u64 },
}

#[derive(Debug, Clone)]
struct Compiled {
    center: usize,
    type_zero: bool,
    lo: Option<i64>,
    hi: Option<i64>,
    lam_v: i64,
    lam_inv: u64,
    group: Group,
}

/// Cells over a point, compiled for fast membership tests.
#[derive(Debug, Clone)]
pub struct CellIndex {
    ring: FastRing,
    digits: u32,
    centers: Vec<(Fx, Option<BigRational>)>,
    cells: Vec<Compiled>,
}

impl CellIndex {
    pub fn new(cells: &[PresentedCell], cfg: PadicConfig) -> Result<Self> {
        let p = cfg.prime();
        let ring = FastRing::new(p);
        let mut digits = 1;
        let mut centers: Vec<(Fx, Option<BigRational>)> = Vec::new();
        let mut keys: Vec<Scalar> = Vec::new();
        let mut out = Vec::with_capacity(cells.len());
        for c in cells {
            let center = c.center_const().ok_or_else(|| Error::Arity("indexing needs cells over a point".into()))?;
            let ci = match keys.iter().position(|k| k == center) {
                Some(i) => i,
                None => {
                    keys.push(center.clone());
                    centers.push(match center {
                        Scalar::Exact(q) => (ring.from_rational(q), Some(q.clone())),
                        Scalar::Approx(x) => (ring.from_padic(x), None),
                    });
                    keys.len() - 1
                }
            };
            let type_zero = c.is_type_zero();
            let (group, need) = match c.group {
                SubgroupSpec::Full => (Group::Full, 1),
                SubgroupSpec::Pn { .. } => {
                    let t = coset_table(p, c.group)?;
                    let d = t.digits();
                    (Group::Table(t), d)
                }
                SubgroupSpec::Qnm { n, m } => {
                    let modulus = (p as u64).checked_pow(m).ok_or_else(|| Error::Config("Q(N,M) modulus overflows".into()))?;
                    (Group::Q { n: n as i64, modulus }, m)
                }
                SubgroupSpec::UnitBall { .. } => return Err(Error::Config("unsupported cell group".into())),
            };
            digits = digits.max(need);
            let (lam_v, lam_u) = if type_zero {
                (0, 1)
            } else {
                match &c.lambda {
                    Scalar::Exact(q) => rational_parts(q, p, ring.digits()).ok_or(Error::DivisionByZero)?,
                    Scalar::Approx(x) => match ring.from_padic(x) {
                        Fx::Val { v, u, .. } => (v, u),
                        _ => return Err(Error::DivisionByZero),
                    },
                }
            };
            let lam_inv = match ring.inv(Fx::Val { v: 0, u: lam_u, rel: ring.digits() }) {
                Some(Fx::Val { u, .. }) => u,
                _ => return Err(Error::DivisionByZero),
            };
            out.push(Compiled {
                center: ci,
                type_zero,
                lo: c.mu.const_valuation(p)?,
                hi: c.nu.const_valuation(p)?,
                lam_v,
                lam_inv,
                group,
            });
        }
        if digits > ring.digits() {
            return Err(Error::InsufficientPrecision { needed: digits, available: ring.digits() });
        }
        Ok(Self { ring, digits, centers, cells: out })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn offset(&self, t: Fx, t_exact: &BigRational, c: usize) -> Result<TermValue> {
        let (cf, cq) = &self.centers[c];
        match self.ring.sub(t, *cf) {
            Fx::Zero => Ok(TermValue::Zero),
            Fx::Val { v, u, rel } if rel >= self.digits => Ok(TermValue::Unit { v, res: u % self.ring.pow_p(self.digits) }),
            _ => match cq {
                Some(q) => Ok(TermValue::from_rational(&(t_exact - q), self.ring.prime(), self.digits)),
                None => Err(Error::InsufficientPrecision { needed: self.digits, available: 0 }),
            },
        }
    }

    /// Indices of the cells containing a sample point.
    pub fn containing(&self, pt: &SamplePoint) -> Result<Vec<usize>> {
        let exact = pt.to_rational(self.ring.prime());
        let t = match pt.v {
            None => Fx::Zero,
            Some(v) => self.ring.from_parts(v, pt.u),
        };
        let mut offsets: Vec<Option<Result<TermValue>>> = vec![None; self.centers.len()];
        let m = self.ring.pow_p(self.digits);
        let mut out = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            let d = match offsets[c.center].get_or_insert_with(|| self.offset(t, &exact, c.center)) {
                Ok(d) => *d,
                Err(e) => return Err(e.clone()),
            };
            let hit = match d {
                TermValue::Zero => c.type_zero,
                TermValue::Unit { v, res } => {
                    !c.type_zero
                        && c.lo.is_none_or(|l| v >= l)
                        && c.hi.is_none_or(|h| v <= h)
                        && {
                            let w = v - c.lam_v;
                            let r = ((res as u128 * c.lam_inv as u128) % m as u128) as u64;
                            match &c.group {
                                Group::Full => true,
                                Group::Table(t) => t.index_of(w, r) == 0,
                                Group::Q { n, modulus } => w.rem_euclid(*n) == 0 && r % modulus == 1 % modulus,
                            }
                        }
                }
            };
            if hit {
                out.push(i);
            }
        }
        Ok(out)
    }
}

impl Membership for CellIndex {
    fn member(&self, pt: &SamplePoint) -> Result<bool> {
        Ok(!self.containing(pt)?.is_empty())
    }
}

/// Sample points that break the partition property.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub points: u64,
    /// Points in two or more cells, with the cells.
    pub overlaps: Vec<(SamplePoint, Vec<usize>)>,
    /// Points of the set in no cell.
    pub uncovered: Vec<SamplePoint>,
    /// Points in a cell but outside the set.
    pub spurious: Vec<(SamplePoint, usize)>,
    /// Points where a verdict could not be reached.
    pub undecided: Vec<(SamplePoint, String)>,
}

impl PartitionReport {
    pub fn ok(&self) -> bool {
        self.overlaps.is_empty() && self.uncovered.is_empty() && self.spurious.is_empty() && self.undecided.is_empty()
    }
}

/// Compares a cell list against its normal form over a sample.
pub fn check_partition(cells: &CellList, nf: &NormalForm, sample: &TruncatedSample) -> Result<PartitionReport> {
    let index = CellIndex::new(&cells.cells, sample.config())?;
    let decider = NormalDecider::new(nf)?;
    let mut rep = PartitionReport::default();
    for pt in sample.points() {
        rep.points += 1;
        let (inside, truth) = match (index.containing(&pt), decider.member(&pt)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => {
                rep.undecided.push((pt, e.to_string()));
                continue;
            }
        };
        if inside.len() >= 2 {
            rep.overlaps.push((pt, inside.clone()));
        }
        if truth && inside.is_empty() {
            rep.uncovered.push(pt);
        }
        if !truth {
            if let Some(&c) = inside.first() {
                rep.spurious.push((pt, c));
            }
        }
    }
    Ok(rep)
}
