//! Partition of the line around a finite set of centers.
//!
//! Around a cluster `S` of centers sitting in a ball, with every other
//! center at distance at least `p^-v_out` from the cluster and the cluster
//! itself of diameter `p^-rho`, each factor `t - c` for `c` outside the
//! cluster is a constant times a unit in `1 + p^n Z_p` whenever
//! `v_out + n <= v(t - a) <= rho - n`. Levels that miss this window are cut
//! into balls of radius `w + n`, on which every factor is a constant times
//! such a unit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{PadicConfig, Valuation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Region {
    /// `lo <= v(t - c) <= hi` around center `center`; the centers of
    /// `inside` are the ones closer than the annulus.
    Annulus { center: usize, inside: Vec<usize>, lo: Option<i64>, hi: Option<i64> },
    /// `v(t - center) >= radius`, or the whole line for `None`.
    Ball { center: BigRational, radius: Option<i64> },
    /// The center itself.
    Point(usize),
}

pub(crate) struct Tree<'a> {
    centers: &'a [Scalar],
    cfg: PadicConfig,
    level: i64,
    pk: i64,
}

/// Valuation of `a - b` for distinct centers.
pub(crate) fn distance(a: &Scalar, b: &Scalar, cfg: PadicConfig) -> Result<i64> {
    match a.sub(b, cfg).valuation(cfg.prime()) {
        Valuation::Finite(v) => Ok(v),
        Valuation::Infinity => Err(Error::InsufficientPrecision { needed: cfg.work_precision() + 1, available: cfg.work_precision() }),
    }
}

/// Sum of the digits of `x` below position `w`.
pub(crate) fn expansion(x: &Scalar, w: i64, cfg: PadicConfig) -> Result<BigRational> {
    let p = cfg.prime();
    let v = match x.valuation(p) {
        Valuation::Infinity => return Ok(BigRational::zero()),
        Valuation::Finite(v) => v,
    };
    if w <= v {
        return Ok(BigRational::zero());
    }
    let width = u32::try_from(w - v).map_err(|_| Error::Config("expansion width overflows".into()))?;
    let num = match x {
        Scalar::Exact(q) => cfg.with_work_precision(width)?.rational(q).unit_residue(width)?,
        Scalar::Approx(y) => y.unit_residue(width)?,
    };
    let u = BigRational::from_integer(BigInt::from(num));
    match Scalar::prime_power(p, v) {
        Scalar::Exact(pv) => Ok(u * pv),
        Scalar::Approx(_) => unreachable!(),
    }
}

/// Digit of `x` at position `w`.
pub(crate) fn digit(x: &Scalar, w: i64, cfg: PadicConfig) -> Result<u64> {
    let hi = expansion(x, w + 1, cfg)?;
    let lo = expansion(x, w, cfg)?;
    let d = match Scalar::prime_power(cfg.prime(), -w) {
        Scalar::Exact(s) => (hi - lo) * s,
        Scalar::Approx(_) => unreachable!(),
    };
    d.to_integer().to_u64().ok_or_else(|| Error::Internal("digit out of range".into()))
}

impl<'a> Tree<'a> {
    /// `level` is the number of unit digits each factor must be constant to.
    pub fn new(centers: &'a [Scalar], level: u32, cfg: PadicConfig) -> Result<Self> {
        let level = level.max(1);
        let pk = (cfg.prime() as i64)
            .checked_pow(level)
            .filter(|x| *x <= 1 << 20)
            .ok_or_else(|| Error::Config(format!("p^{level} balls per level is too many")))?;
        Ok(Self { centers, cfg, level: level as i64, pk })
    }

    pub fn regions(&self) -> Result<Vec<Region>> {
        let mut out = Vec::new();
        if self.centers.is_empty() {
            out.push(Region::Ball { center: BigRational::zero(), radius: None });
            return Ok(out);
        }
        let all: Vec<usize> = (0..self.centers.len()).collect();
        self.node(0, all, None, None, &mut out)?;
        Ok(out)
    }

    fn node(&self, a: usize, s: Vec<usize>, rho_lo: Option<i64>, v_out: Option<i64>, out: &mut Vec<Region>) -> Result<()> {
        let n = self.level;
        let ca = &self.centers[a];
        let mut rho: Option<i64> = None;
        for &j in &s {
            if j != a {
                let d = distance(&self.centers[j], ca, self.cfg)?;
                rho = Some(rho.map_or(d, |r: i64| r.min(d)));
            }
        }
        let good_lo = v_out.map(|vo| (vo + n).max(rho_lo.unwrap_or(i64::MIN)));
        let good_hi = rho.map(|r| r - n);
        let good = match (good_lo, good_hi) {
            (Some(l), Some(h)) => l <= h,
            _ => true,
        };
        if good {
            out.push(Region::Annulus { center: a, inside: s.clone(), lo: good_lo, hi: good_hi });
        }
        let in_good = |w: i64| good && good_lo.is_none_or(|l| w >= l) && good_hi.is_none_or(|h| w <= h);
        let band: Vec<i64> = match (rho_lo, rho) {
            (Some(l), Some(r)) => (l..r).filter(|w| !in_good(*w)).collect(),
            (Some(l), None) => (l..good_lo.unwrap_or(l)).collect(),
            (None, Some(r)) => (good_hi.map_or(r, |h| h + 1)..r).collect(),
            (None, None) => Vec::new(),
        };
        for w in band {
            let own = digit(ca, w, self.cfg)?;
            self.balls(ca, w, &[own], out)?;
        }
        let Some(r) = rho else {
            out.push(Region::Point(a));
            return Ok(());
        };
        let mut groups: Vec<(u64, Vec<usize>)> = Vec::new();
        for &j in &s {
            let d = digit(&self.centers[j], r, self.cfg)?;
            match groups.iter_mut().find(|(g, _)| *g == d) {
                Some((_, v)) => v.push(j),
                None => groups.push((d, vec![j])),
            }
        }
        let used: Vec<u64> = groups.iter().map(|(d, _)| *d).collect();
        self.balls(ca, r, &used, out)?;
        for (_, g) in groups {
            self.node(g[0], g, Some(r + 1), Some(r), out)?;
        }
        Ok(())
    }

    /// Balls of radius `w + level` inside `v(t - c) >= w` whose digit at
    /// position `w` avoids `skip`.
    fn balls(&self, c: &Scalar, w: i64, skip: &[u64], out: &mut Vec<Region>) -> Result<()> {
        let p = self.cfg.prime() as i64;
        let base = expansion(c, w, self.cfg)?;
        let pw = match Scalar::prime_power(self.cfg.prime(), w) {
            Scalar::Exact(q) => q,
            Scalar::Approx(_) => unreachable!(),
        };
        for beta in 0..self.pk {
            if skip.contains(&((beta % p) as u64)) {
                continue;
            }
            let center = &base + &pw * BigRational::from_integer(beta.into());
            out.push(Region::Ball { center, radius: Some(w + self.level) });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::int(n)
    }

    #[test]
    fn digits_of_rationals() {
        let cfg = PadicConfig::new(5, 10).unwrap();
        assert_eq!(digit(&q(-1), 0, cfg).unwrap(), 4);
        assert_eq!(digit(&q(-1), 3, cfg).unwrap(), 4);
        assert_eq!(digit(&q(27), 1, cfg).unwrap(), 0);
        assert_eq!(digit(&q(27), 2, cfg).unwrap(), 1);
        assert_eq!(expansion(&q(-1), 2, cfg).unwrap(), BigRational::from_integer(24.into()));
    }

    #[test]
    fn two_roots_at_distance_one() {
        let cfg = PadicConfig::new(5, 10).unwrap();
        let cs = [q(-1), q(1)];
        let regs = Tree::new(&cs, 1, cfg).unwrap().regions().unwrap();
        let annuli = regs.iter().filter(|r| matches!(r, Region::Annulus { .. })).count();
        let balls = regs.iter().filter(|r| matches!(r, Region::Ball { .. })).count();
        let points = regs.iter().filter(|r| matches!(r, Region::Point(_))).count();
        assert_eq!((annuli, balls, points), (3, 3, 2));
    }
}
