use padicell::cells::{Bound, PresentedCell};
use padicell::oracle::TruncatedSample;
use padicell::padic::{PadicConfig, SubgroupSpec};
use padicell::scalar::Scalar;
use padicell::skolem::{section, verify_section};
use proptest::prelude::*;

fn group() -> impl Strategy<Value = SubgroupSpec> {
    prop_oneof![
        Just(SubgroupSpec::Full),
        (1u32..5).prop_map(|n| SubgroupSpec::Pn { n }),
        (1u32..4, 1u32..3).prop_map(|(n, m)| SubgroupSpec::Qnm { n, m: m + 2 }),
    ]
}

fn bound(p: u32, finite: bool, k: i64, other: Bound) -> Bound {
    if finite {
        Bound::power(p, k)
    } else {
        other
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sections_land_in_nonempty_cells(
        p in prop::sample::select(vec![2u32, 3, 5]),
        center in -20i64..20,
        (has_nu, vnu) in (any::<bool>(), -4i64..6),
        (has_mu, width) in (any::<bool>(), 0i64..6),
        (vl, ul) in (-3i64..4, 1i64..30),
        g in group(),
    ) {
        prop_assume!(ul % p as i64 != 0);
        let cfg = PadicConfig::new(p, 24).unwrap();
        let lambda = Scalar::prime_power(p, vl).mul(&Scalar::int(ul), cfg);
        let nu = bound(p, has_nu, vnu, Bound::Zero);
        let mu = bound(p, has_mu, vnu - width, Bound::Infinity);
        let cell = PresentedCell::over_point(Scalar::int(center), nu, mu, lambda, g);

        let n = g.period() as i64;
        let hi = if has_nu { vnu } else { 1000 };
        let lo = if has_mu { vnu - width } else { -1000 };
        let nonempty = (lo..=hi).any(|w| (w - vl).rem_euclid(n) == 0);

        let s = section(&cell, cfg).unwrap();
        let sample = TruncatedSample::new(cfg, 2, 2).unwrap();
        let rep = verify_section(&cell, &s, &sample);
        prop_assert!(rep.ok(), "{} {:?}", cell.to_json(), rep.failures);
        if nonempty {
            let t = s.eval(&cell, &[], cfg).unwrap().expect("a section value");
            prop_assert!(cell.contains(&[t], cfg).unwrap());
            for pc in &s.pieces {
                if let Some(a) = pc.formula.constant() {
                    let va = Scalar::Exact(a.clone()).valuation(p).finite().unwrap();
                    prop_assert!((0..n).contains(&va), "v(a) = {} with N = {}", va, n);
                }
            }
        }
    }
}

#[test]
fn type_zero_sections_are_the_center() {
    let cfg = PadicConfig::new(5, 16).unwrap();
    let cell = PresentedCell::point(Scalar::int(7));
    let s = section(&cell, cfg).unwrap();
    assert_eq!(s.eval(&cell, &[], cfg).unwrap(), Some(Scalar::int(7)));
}
